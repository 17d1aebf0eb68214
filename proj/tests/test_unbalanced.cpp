#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mbot/transport_core.hpp"
#include "mbot/unbalanced.hpp"
#include "test_support.hpp"

using namespace mbot;
using namespace test_support;

namespace {

double marginal_l1(const TransportPlan& plan, const std::vector<double>& a,
                   const std::vector<double>& b) {
    double total = 0.0;
    std::vector<double> rows = plan.coupling.row_sums();
    std::vector<double> cols = plan.coupling.col_sums();
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(rows[i] - a[i]);
    for (std::size_t j = 0; j < b.size(); ++j) total += std::abs(cols[j] - b[j]);
    return total;
}

UotParams uot(double tau, double eps, int iters = 100000, double tol = 1e-9) {
    UotParams params;
    params.tau = tau;
    params.entropic = SolverParams{eps, tol, iters};
    return params;
}

}  // namespace

TEST_CASE("generalized KL divergence basics") {
    std::vector<double> q = {0.25, 0.75};
    CHECK(kl_divergence(q, q) == doctest::Approx(0.0).epsilon(1e-15));

    std::vector<double> zero = {0.0, 0.0};
    CHECK(kl_divergence(zero, q) == doctest::Approx(1.0).epsilon(1e-15));

    // 0.5 log 2 + 0.5 log(2/3), mass terms cancel for equal totals.
    std::vector<double> p = {0.5, 0.5};
    double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
    CHECK(kl_divergence(p, q) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("KL divergence rejects invalid inputs") {
    CHECK_THROWS_AS(kl_divergence({0.5}, {0.0}), InvalidInputError);
    CHECK_THROWS_AS(kl_divergence({-0.1}, {0.5}), InvalidInputError);
    CHECK_THROWS_AS(kl_divergence({0.5, 0.5}, {1.0}), InvalidInputError);
}

TEST_CASE("unbalanced objective never exceeds the zero plan's penalty") {
    Rng rng(3);
    for (double tau : {0.1, 1.0, 10.0}) {
        CostMatrix cost = random_cost(5, 5, rng);
        std::vector<double> u5(5, 0.2);
        TransportPlan plan = solve_uot_entropic(u5, u5, cost, uot(tau, 0.01));
        CHECK(plan.objective <= 2.0 * tau + 1e-9);
        CHECK(plan.objective >= 0.0);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) CHECK(plan.coupling(i, j) >= 0.0);
    }
}

TEST_CASE("unbalanced objective beats the independent coupling") {
    Rng rng(5);
    CostMatrix cost = random_cost(6, 6, rng);
    std::vector<double> u6(6, 1.0 / 6.0);
    TransportPlan plan = solve_uot_entropic(u6, u6, cost, uot(1.0, 0.01));
    double independent = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) independent += cost.entries(i, j) / 36.0;
    CHECK(plan.objective <= independent + 1e-9);
}

TEST_CASE("large tau recovers nearly balanced transport") {
    Rng rng(7);
    CostMatrix cost = random_cost(5, 5, rng);
    std::vector<double> u5(5, 0.2);
    TransportPlan relaxed = solve_uot_entropic(u5, u5, cost, uot(100.0, 0.01, 400000));
    CHECK(marginal_l1(relaxed, u5, u5) <= 0.02);

    SolverParams balanced_params{0.01, 1e-7, 400000};
    TransportPlan balanced = solve_ot_entropic(u5, u5, cost, balanced_params);
    CHECK(std::abs(relaxed.objective - balanced.objective) <= 0.1);
}

TEST_CASE("marginal violation shrinks as tau grows") {
    Rng rng(11);
    CostMatrix cost = random_cost(5, 5, rng);
    std::vector<double> u5(5, 0.2);
    double previous = std::numeric_limits<double>::infinity();
    for (double tau : {0.1, 1.0, 10.0, 100.0}) {
        TransportPlan plan = solve_uot_entropic(u5, u5, cost, uot(tau, 0.01, 400000));
        double violation = marginal_l1(plan, u5, u5);
        CHECK(violation <= previous + 1e-9);
        previous = violation;
    }
}

TEST_CASE("transported mass reacts strongly to cost rescaling at fixed tau") {
    Rng rng(13);
    std::size_t agree = 0;
    for (int trial = 0; trial < 10; ++trial) {
        CostMatrix cost = random_cost(5, 5, rng);
        std::vector<double> u5(5, 0.2);
        CostMatrix scaled;
        scaled.entries = Mat(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) scaled.entries(i, j) = 10.0 * cost.entries(i, j);
        UotParams params = uot(0.5, 0.01, 200000);
        double mass = solve_uot_entropic(u5, u5, cost, params).total_mass;
        double mass_scaled = solve_uot_entropic(u5, u5, scaled, params).total_mass;
        if (std::abs(mass - mass_scaled) > 0.1 * std::max(mass, mass_scaled)) ++agree;
    }
    CHECK(agree >= 8);
}

TEST_CASE("identical inputs give bit-identical unbalanced plans") {
    Rng rng(17);
    CostMatrix cost = random_cost(4, 4, rng);
    std::vector<double> u4(4, 0.25);
    TransportPlan first = solve_uot_entropic(u4, u4, cost, uot(2.0, 0.05));
    TransportPlan second = solve_uot_entropic(u4, u4, cost, uot(2.0, 0.05));
    CHECK(first.coupling == second.coupling);
    CHECK(first.objective == second.objective);
}

TEST_CASE("unbalanced solver flags iteration starvation") {
    Rng rng(19);
    CostMatrix cost = random_cost(5, 5, rng);
    std::vector<double> u5(5, 0.2);
    TransportPlan plan = solve_uot_entropic(u5, u5, cost, uot(10.0, 0.01, 2, 1e-12));
    CHECK_FALSE(plan.converged);
    CHECK(plan.total_mass > 0.0);
}

TEST_CASE("unbalanced params are validated") {
    CHECK_THROWS_AS(uot(0.0, 0.01).validate(), InvalidInputError);
    CHECK_THROWS_AS(uot(1.0, 0.0).validate(), InvalidInputError);
    CostMatrix cost;
    cost.entries = Mat(2, 2, 1.0);
    CHECK_THROWS_AS(solve_uot_entropic({0.5, 0.5}, {0.5}, cost, uot(1.0, 0.01)),
                    InvalidInputError);
}
