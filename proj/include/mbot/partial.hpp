#ifndef MBOT_PARTIAL_HPP
#define MBOT_PARTIAL_HPP

#include <optional>
#include <vector>

#include "mbot/types.hpp"

namespace mbot {

/// Parameters for partial transport. When `dummy_cost` is unset the solvers
/// pick their own default: 1.0 for the exact path (any positive value gives
/// the same optimum) and max(C)+1 for the entropic path, where a cheap
/// dummy-dummy corner would otherwise leak smoothed mass.
struct PartialParams {
    double fraction = 1.0;                   // s in (0, 1]
    std::optional<double> dummy_cost;        // A > 0
    std::optional<SolverParams> entropic;

    void validate() const;
};

struct ExtendedProblem {
    std::vector<double> a;  // [source weights, 1-s]
    std::vector<double> b;  // [target weights, 1-s]
    CostMatrix cost;        // [[C, 0], [0, A]]
};

/// Dummy-point reduction: appends a slack point of mass 1-s to each side and
/// extends the cost matrix with a zero-cost dummy row/column whose corner
/// costs A. Requires probability marginals.
ExtendedProblem extend_with_dummy(const std::vector<double>& a, const std::vector<double>& b,
                                  const CostMatrix& cost, double s, double dummy_cost);

/// Exact partial OT: solves the extended balanced problem with the
/// transportation simplex and strips the dummy row and column. The returned
/// plan carries total mass s with row sums <= a and column sums <= b.
TransportPlan solve_pot_exact(const std::vector<double>& a, const std::vector<double>& b,
                              const CostMatrix& cost, const PartialParams& params);

/// Entropic partial OT via log-domain Sinkhorn on the extended problem.
/// After stripping, the plan is rescaled to mass exactly s when the achieved
/// mass is within params.entropic->tolerance of s; otherwise it is returned
/// as-is with converged = false.
TransportPlan solve_pot_entropic(const std::vector<double>& a, const std::vector<double>& b,
                                 const CostMatrix& cost, const PartialParams& params);

}  // namespace mbot

#endif
