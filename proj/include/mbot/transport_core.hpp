#ifndef MBOT_TRANSPORT_CORE_HPP
#define MBOT_TRANSPORT_CORE_HPP

#include <vector>

#include "mbot/types.hpp"

namespace mbot {

/// Pairwise ground costs between the supports of two measures.
/// Throws InvalidInputError when the dimensions disagree or the metric is
/// `precomputed` (a precomputed matrix cannot be built from points).
CostMatrix build_cost(const DiscreteMeasure& source, const DiscreteMeasure& target,
                      CostMetric metric);

/// Balanced optimal transport solved exactly by the transportation simplex
/// (north-west-corner start, u/v dual pivoting, Bland's rule engaged as the
/// anti-cycling safeguard under sustained degeneracy). The returned plan is a
/// vertex of the transportation polytope: at most n+m-1 nonzero entries,
/// marginals within 1e-9, deterministic for identical inputs.
TransportPlan solve_ot_exact(const std::vector<double>& a, const std::vector<double>& b,
                             const CostMatrix& cost);

/// Balanced entropic OT via log-domain (softmin) Sinkhorn. Stops when the L1
/// marginal violation drops below params.tolerance; otherwise returns the
/// best iterate seen with `converged = false`.
TransportPlan solve_ot_entropic(const std::vector<double>& a, const std::vector<double>& b,
                                const CostMatrix& cost, const SolverParams& params);

/// <C, pi> for a plan and a cost matrix of the same shape.
double plan_cost(const TransportPlan& plan, const CostMatrix& cost);

/// Wasserstein-2 distance: sqrt of the exact OT objective under squared
/// Euclidean ground cost. Requires equal total masses.
double wasserstein2(const DiscreteMeasure& source, const DiscreteMeasure& target);

}  // namespace mbot

#endif
