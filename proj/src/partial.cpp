#include "mbot/partial.hpp"

#include <cmath>

#include "mbot/transport_core.hpp"

namespace mbot {

void PartialParams::validate() const {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw InvalidInputError("transport fraction must lie in (0, 1]");
    if (dummy_cost && !(*dummy_cost > 0.0))
        throw InvalidInputError("dummy cost must be positive");
    if (entropic) entropic->validate();
}

namespace {

void check_probability_marginals(const std::vector<double>& a, const std::vector<double>& b,
                                 const CostMatrix& cost) {
    if (a.size() != cost.rows() || b.size() != cost.cols())
        throw InvalidInputError("marginal lengths do not match the cost matrix");
    double sa = 0.0, sb = 0.0;
    for (double v : a) {
        if (!(v >= 0.0)) throw InvalidInputError("negative source weight");
        sa += v;
    }
    for (double v : b) {
        if (!(v >= 0.0)) throw InvalidInputError("negative target weight");
        sb += v;
    }
    if (std::abs(sa - 1.0) > 1e-9 || std::abs(sb - 1.0) > 1e-9)
        throw InvalidInputError("partial transport expects probability marginals");
}

TransportPlan strip_dummy(const TransportPlan& extended, const CostMatrix& cost, SolverTag tag) {
    std::size_t n = cost.rows(), m = cost.cols();
    TransportPlan plan;
    plan.coupling = Mat(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) plan.coupling(i, j) = extended.coupling(i, j);
    plan.total_mass = plan.coupling.sum();
    plan.objective = plan_cost(plan, cost);
    plan.solver = tag;
    plan.converged = extended.converged;
    return plan;
}

}  // namespace

ExtendedProblem extend_with_dummy(const std::vector<double>& a, const std::vector<double>& b,
                                  const CostMatrix& cost, double s, double dummy_cost) {
    check_probability_marginals(a, b, cost);
    if (!(s > 0.0) || s > 1.0) throw InvalidInputError("transport fraction must lie in (0, 1]");
    if (!(dummy_cost > 0.0)) throw InvalidInputError("dummy cost must be positive");

    std::size_t n = cost.rows(), m = cost.cols();
    ExtendedProblem ext;
    ext.a = a;
    ext.a.push_back(1.0 - s);
    ext.b = b;
    ext.b.push_back(1.0 - s);
    ext.cost.metric = CostMetric::precomputed;
    ext.cost.entries = Mat(n + 1, m + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) ext.cost.entries(i, j) = cost.entries(i, j);
    ext.cost.entries(n, m) = dummy_cost;
    return ext;
}

TransportPlan solve_pot_exact(const std::vector<double>& a, const std::vector<double>& b,
                              const CostMatrix& cost, const PartialParams& params) {
    params.validate();
    double dummy = params.dummy_cost.value_or(1.0);
    ExtendedProblem ext = extend_with_dummy(a, b, cost, params.fraction, dummy);
    TransportPlan extended = solve_ot_exact(ext.a, ext.b, ext.cost);
    return strip_dummy(extended, cost, SolverTag::pot_exact);
}

TransportPlan solve_pot_entropic(const std::vector<double>& a, const std::vector<double>& b,
                                 const CostMatrix& cost, const PartialParams& params) {
    params.validate();
    if (!params.entropic)
        throw InvalidInputError("entropic partial transport needs entropic parameters");
    if (!(params.entropic->epsilon > 0.0))
        throw InvalidInputError("entropic solver requires epsilon > 0");

    double dummy = params.dummy_cost.value_or(cost.entries.max_abs() + 1.0);
    ExtendedProblem ext = extend_with_dummy(a, b, cost, params.fraction, dummy);
    TransportPlan extended = solve_ot_entropic(ext.a, ext.b, ext.cost, *params.entropic);
    TransportPlan plan = strip_dummy(extended, cost, SolverTag::pot_entropic);

    // Entropic smoothing leaks a little mass through the dummy corner; snap
    // the stripped plan back to mass s when the leak is within tolerance.
    double actual = plan.total_mass;
    double s = params.fraction;
    if (actual > 0.0 && std::abs(actual - s) <= params.entropic->tolerance) {
        double scale = s / actual;
        for (std::size_t i = 0; i < plan.coupling.rows(); ++i)
            for (std::size_t j = 0; j < plan.coupling.cols(); ++j) plan.coupling(i, j) *= scale;
        plan.total_mass = s;
        plan.objective = plan_cost(plan, cost);
    } else {
        plan.converged = false;
    }
    return plan;
}

}  // namespace mbot
