#ifndef MBOT_UNBALANCED_HPP
#define MBOT_UNBALANCED_HPP

#include <vector>

#include "mbot/types.hpp"

namespace mbot {

enum class Divergence { kl };

struct UotParams {
    double tau = 1.0;        // marginal-relaxation coefficient
    SolverParams entropic;   // epsilon > 0 required
    Divergence divergence = Divergence::kl;

    void validate() const;
};

/// Generalized KL divergence sum_i p_i log(p_i/q_i) - p_i + q_i with the
/// convention 0 log 0 = 0. Requires q > 0 elementwise and p >= 0.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

/// Entropic unbalanced OT with KL-relaxed marginals, solved by generalized
/// Sinkhorn scaling (marginal updates damped by tau/(tau+epsilon)). The
/// recorded objective is <C,pi> + tau KL(pi 1 || a) + tau KL(pi^T 1 || b);
/// the entropic term used for smoothing is not part of it.
TransportPlan solve_uot_entropic(const std::vector<double>& a, const std::vector<double>& b,
                                 const CostMatrix& cost, const UotParams& params);

}  // namespace mbot

#endif
