#include "mbot/unbalanced.hpp"

#include <cmath>
#include <limits>

#include "mbot/transport_core.hpp"

namespace mbot {

void UotParams::validate() const {
    if (!(tau > 0.0)) throw InvalidInputError("tau must be positive");
    entropic.validate();
    if (!(entropic.epsilon > 0.0))
        throw InvalidInputError("unbalanced solver requires epsilon > 0");
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw InvalidInputError("kl_divergence: length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(q[i] > 0.0)) throw InvalidInputError("kl_divergence: q must be positive");
        if (!(p[i] >= 0.0)) throw InvalidInputError("kl_divergence: p must be nonnegative");
        if (p[i] > 0.0) total += p[i] * std::log(p[i] / q[i]) - p[i] + q[i];
        else total += q[i];
    }
    return total;
}

namespace {

// Generalized KL that tolerates q_i = 0 when p_i = 0, for objective
// bookkeeping on measures with zero-weight support points.
double kl_term(const std::vector<double>& p, const std::vector<double>& q) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            if (!(q[i] > 0.0)) return std::numeric_limits<double>::infinity();
            total += p[i] * std::log(p[i] / q[i]) - p[i] + q[i];
        } else {
            total += q[i];
        }
    }
    return total;
}

double log_sum_exp(const std::vector<double>& terms) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double t : terms) hi = std::max(hi, t);
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - hi);
    return hi + std::log(acc);
}

}  // namespace

TransportPlan solve_uot_entropic(const std::vector<double>& a, const std::vector<double>& b,
                                 const CostMatrix& cost, const UotParams& params) {
    params.validate();
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
    if (!(sa > 0.0) || !(sb > 0.0)) throw InvalidInputError("zero total mass");

    const std::size_t n = a.size(), m = b.size();
    const double eps = params.entropic.epsilon;
    const double tau = params.tau;
    const double damping = tau / (tau + eps);
    const double neg_inf = -std::numeric_limits<double>::infinity();

    std::vector<double> log_a(n), log_b(m);
    for (std::size_t i = 0; i < n; ++i) log_a[i] = a[i] > 0.0 ? std::log(a[i]) : neg_inf;
    for (std::size_t j = 0; j < m; ++j) log_b[j] = b[j] > 0.0 ? std::log(b[j]) : neg_inf;

    std::vector<double> f(n, 0.0), g(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] <= 0.0) f[i] = neg_inf;
    for (std::size_t j = 0; j < m; ++j)
        if (b[j] <= 0.0) g[j] = neg_inf;

    std::vector<double> scratch;
    bool converged = false;
    for (int it = 0; it < params.entropic.max_iterations; ++it) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (a[i] <= 0.0) continue;
            scratch.assign(m, neg_inf);
            for (std::size_t j = 0; j < m; ++j)
                if (b[j] > 0.0) scratch[j] = (g[j] - cost.entries(i, j)) / eps;
            double next = damping * eps * (log_a[i] - log_sum_exp(scratch));
            delta = std::max(delta, std::abs(next - f[i]));
            f[i] = next;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (b[j] <= 0.0) continue;
            scratch.assign(n, neg_inf);
            for (std::size_t i = 0; i < n; ++i)
                if (a[i] > 0.0) scratch[i] = (f[i] - cost.entries(i, j)) / eps;
            double next = damping * eps * (log_b[j] - log_sum_exp(scratch));
            delta = std::max(delta, std::abs(next - g[j]));
            g[j] = next;
        }
        // Stop on the L-infinity change of the log-domain scaling vectors.
        if (delta / eps <= params.entropic.tolerance) {
            converged = true;
            break;
        }
    }

    Mat pi(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            pi(i, j) = std::exp((f[i] + g[j] - cost.entries(i, j)) / eps);

    TransportPlan plan;
    plan.coupling = std::move(pi);
    plan.solver = SolverTag::uot_entropic;
    plan.total_mass = plan.coupling.sum();
    double transport = plan_cost(plan, cost);
    plan.objective = transport + tau * kl_term(plan.coupling.row_sums(), a) +
                     tau * kl_term(plan.coupling.col_sums(), b);
    plan.converged = converged;
    return plan;
}

}  // namespace mbot
