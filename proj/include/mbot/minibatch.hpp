#ifndef MBOT_MINIBATCH_HPP
#define MBOT_MINIBATCH_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mbot/partial.hpp"
#include "mbot/types.hpp"
#include "mbot/unbalanced.hpp"

namespace mbot {

/// Within-batch sampling mode. Batches are always drawn independently of
/// each other from per-batch substreams of the master seed.
enum class BatchSampling { with_replacement, without_replacement };

struct BatchSpec {
    std::size_t batch_size = 1;   // m, 1 <= m <= n
    std::size_t num_batches = 1;  // k >= 1
    BatchSampling sampling = BatchSampling::without_replacement;
    std::uint64_t seed = 0;

    void validate(std::size_t n) const;
};

struct BatchPair {
    std::vector<std::size_t> source;
    std::vector<std::size_t> target;
};

/// k pairs of index sets of size m drawn from [0, n). Deterministic function
/// of (n, spec); batch i uses substreams derived from (seed, i), one per
/// side, so batches can be generated or solved in any order.
std::vector<BatchPair> sample_batches(std::size_t n, const BatchSpec& spec);

enum class TransportKind { ot, uot, pot };

/// Selects the per-batch transport problem. `entropic` switches the balanced
/// solver from exact to entropic; UOT is always entropic via its own params.
struct SolverKind {
    TransportKind kind = TransportKind::ot;
    std::optional<UotParams> uot;
    std::optional<PartialParams> pot;
    std::optional<SolverParams> entropic;
    CostMetric metric = CostMetric::euclidean;

    void validate() const;
};

/// Solve one transport problem between two measures per the kind selector.
TransportPlan solve_kind(const DiscreteMeasure& source, const DiscreteMeasure& target,
                         const SolverKind& kind);

struct BatchRecord {
    std::vector<std::size_t> source;
    std::vector<std::size_t> target;
    double objective = 0.0;
};

struct AggregatedResult {
    double value = 0.0;        // mean of per-batch transport costs
    Mat padded_plan;           // mean of zero-padded per-batch plans, n x n
    std::vector<BatchRecord> records;
};

/// Aggregated mini-batch transport: averages the per-batch costs and the
/// zero-padded per-batch plans over sampled batch pairs. Measures must be
/// uniform with equal support counts. Batch solves are independent and run
/// on up to `threads` workers; aggregation reduces in batch order, so the
/// result is identical for every thread count.
AggregatedResult mb_transport(const DiscreteMeasure& source, const DiscreteMeasure& target,
                              const BatchSpec& spec, const SolverKind& solver,
                              std::size_t threads = 1);

/// Same aggregation over caller-provided batch index pairs.
AggregatedResult mb_transport_on_batches(const DiscreteMeasure& source,
                                         const DiscreteMeasure& target,
                                         const std::vector<BatchPair>& batches,
                                         const SolverKind& solver,
                                         std::size_t threads = 1);

/// Exact average over all C(n,m)^2 ordered pairs of m-subsets: the full
/// mini-batch estimator the sampled one converges to. Refuses to enumerate
/// more than `pair_cap` pairs.
AggregatedResult full_mb_pot(const DiscreteMeasure& source, const DiscreteMeasure& target,
                             std::size_t m, double s,
                             CostMetric metric = CostMetric::euclidean,
                             std::uint64_t pair_cap = 1000000,
                             std::size_t threads = 1);

struct AlignmentBlock {
    std::size_t source_begin = 0;  // first source position of the block
    std::vector<std::optional<std::size_t>> targets;  // aligned target positions
    Mat sub_plan;                  // m x m restriction of the big plan
};

struct Alignment {
    std::vector<std::size_t> source_indices;  // big-batch draw (dataset level)
    std::vector<std::size_t> target_indices;
    std::vector<std::optional<std::size_t>> gamma;  // per-row argmax, absent on zero rows
    std::vector<AlignmentBlock> blocks;             // floor(m_big / m) blocks
};

/// Core of the two-stage scheme on explicit batches: solves one big
/// (partial) OT, takes the per-row argmax alignment (ties to the lowest
/// target index, zero-mass rows absent) and cuts consecutive small-batch
/// blocks with the matching sub-plans. Kind must be ot or pot.
Alignment align_big_batch(const DiscreteMeasure& big_source, const DiscreteMeasure& big_target,
                          std::size_t small_batch, const SolverKind& solver);

/// Sampling wrapper: draws one big batch pair of size big_batch from each
/// measure (without replacement) and aligns it.
Alignment two_stage_align(const DiscreteMeasure& source, const DiscreteMeasure& target,
                          std::size_t big_batch, std::size_t small_batch,
                          const SolverKind& solver, std::uint64_t seed);

}  // namespace mbot

#endif
