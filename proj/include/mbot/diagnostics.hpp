#ifndef MBOT_DIAGNOSTICS_HPP
#define MBOT_DIAGNOSTICS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mbot/rng.hpp"
#include "mbot/types.hpp"

namespace mbot {

/// Exhaustive minimizer over integral transport plans at granularity 1/q,
/// where q <= denominator_cap reproduces every weight and the fraction s
/// exactly. This is the independent ground truth the solver tests compare
/// against: branch-and-bound over all integral flows with sub-marginal
/// constraints and total mass s (equalities fall out when s covers the full
/// mass). Supports n*m <= 36.
///
/// Throws UnsupportedInstanceError for irrational inputs or oversized
/// instances, InvalidInputError for malformed marginals.
TransportPlan brute_force_plan(const std::vector<double>& a, const std::vector<double>& b,
                               const CostMatrix& cost, double s, int denominator_cap);

struct MappingCensus {
    std::size_t total = 0;
    std::size_t misspecified = 0;
    std::size_t optimal = 0;
    double threshold = 0.0;
};

/// Counts the mappings of an aggregated (padded) plan against the exact plan
/// between the original measures: entries above `threshold` are mappings;
/// those positive in the reference are optimal, the rest are misspecified.
MappingCensus mapping_census(const Mat& candidate, const TransportPlan& reference,
                             double threshold);

/// Default census thresholds: vertex plans are exactly sparse, entropic
/// plans are dense and need a coarser cutoff.
constexpr double kCensusThresholdExact = 1e-9;
constexpr double kCensusThresholdEntropic = 1e-4;

struct DistributionSpec {
    enum class Kind {
        gaussian,        // isotropic normal, mean = shift on every axis
        uniform_cube,    // uniform on [0, scale]^dim shifted by `shift`
        bimodal_source,  // two unit-variance modes at (0,0) and (0,20)
        bimodal_target,  // two correlated modes at (10,0) and (10,20)
    };
    Kind kind = Kind::gaussian;
    std::size_t dim = 2;
    double shift = 0.0;
    double scale = 1.0;
};

/// Draws n points from the spec; weights are uniform 1/n. The bimodal
/// presets split points evenly across their two modes.
DiscreteMeasure sample_measure(std::size_t n, const DistributionSpec& spec, Rng& rng);

struct ConcentrationRow {
    std::size_t k = 0;
    std::size_t replicates = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double max_plan_row_deviation = 0.0;
};

struct ConcentrationReport {
    std::vector<ConcentrationRow> rows;  // sorted by k

    void write_csv(std::ostream& out) const;
    std::string to_json() const;
};

/// Re-samples batch sets on fixed data and records the spread of the
/// aggregated partial transport value for each batch count in k_grid.
ConcentrationReport concentration_value_experiment(
    std::size_t n, std::size_t m, double s, const std::vector<std::size_t>& k_grid,
    std::size_t replicates, std::uint64_t seed,
    const DistributionSpec& source_dist = {},
    const DistributionSpec& target_dist = {DistributionSpec::Kind::gaussian, 2, 2.0, 1.0},
    std::size_t threads = 1);

/// Compares sampled aggregated plans against the fully enumerated one:
/// records the worst row/column-sum deviation for each batch count.
/// Requires the pair count C(n,m)^2 to stay under the enumeration cap.
ConcentrationReport concentration_plan_experiment(
    std::size_t n, std::size_t m, double s, const std::vector<std::size_t>& k_grid,
    std::size_t replicates, std::uint64_t seed,
    const DistributionSpec& source_dist = {},
    const DistributionSpec& target_dist = {DistributionSpec::Kind::gaussian, 2, 2.0, 1.0},
    std::size_t threads = 1);

}  // namespace mbot

#endif
