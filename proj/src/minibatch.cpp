#include "mbot/minibatch.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "mbot/parallel.hpp"
#include "mbot/rng.hpp"
#include "mbot/transport_core.hpp"

namespace mbot {

void BatchSpec::validate(std::size_t n) const {
    if (batch_size < 1) throw InvalidInputError("batch size must be at least 1");
    if (num_batches < 1) throw InvalidInputError("batch count must be at least 1");
    if (batch_size > n) {
        if (sampling == BatchSampling::without_replacement)
            throw InvalidInputError("batch size exceeds n for without-replacement sampling");
        throw InvalidInputError("batch size exceeds the number of support points");
    }
}

std::vector<BatchPair> sample_batches(std::size_t n, const BatchSpec& spec) {
    spec.validate(n);
    std::vector<BatchPair> batches(spec.num_batches);
    for (std::size_t i = 0; i < spec.num_batches; ++i) {
        Rng src_rng(derive_seed(spec.seed, i, 0));
        Rng tgt_rng(derive_seed(spec.seed, i, 1));
        if (spec.sampling == BatchSampling::without_replacement) {
            batches[i].source = src_rng.sample_without_replacement(n, spec.batch_size);
            batches[i].target = tgt_rng.sample_without_replacement(n, spec.batch_size);
        } else {
            batches[i].source = src_rng.sample_with_replacement(n, spec.batch_size);
            batches[i].target = tgt_rng.sample_with_replacement(n, spec.batch_size);
        }
    }
    return batches;
}

void SolverKind::validate() const {
    switch (kind) {
        case TransportKind::ot:
            if (uot || pot)
                throw InvalidInputError("balanced transport takes no uot/pot parameters");
            break;
        case TransportKind::uot:
            if (!uot) throw InvalidInputError("unbalanced transport needs uot parameters");
            if (pot) throw InvalidInputError("unbalanced transport takes no pot parameters");
            uot->validate();
            break;
        case TransportKind::pot:
            if (!pot) throw InvalidInputError("partial transport needs pot parameters");
            if (uot) throw InvalidInputError("partial transport takes no uot parameters");
            pot->validate();
            break;
    }
    if (entropic) entropic->validate();
}

TransportPlan solve_kind(const DiscreteMeasure& source, const DiscreteMeasure& target,
                         const SolverKind& kind) {
    kind.validate();
    CostMatrix cost = build_cost(source, target, kind.metric);
    switch (kind.kind) {
        case TransportKind::ot:
            if (kind.entropic)
                return solve_ot_entropic(source.weights, target.weights, cost, *kind.entropic);
            return solve_ot_exact(source.weights, target.weights, cost);
        case TransportKind::uot:
            return solve_uot_entropic(source.weights, target.weights, cost, *kind.uot);
        case TransportKind::pot: {
            PartialParams params = *kind.pot;
            if (!params.entropic && kind.entropic) params.entropic = kind.entropic;
            if (params.entropic)
                return solve_pot_entropic(source.weights, target.weights, cost, params);
            return solve_pot_exact(source.weights, target.weights, cost, params);
        }
    }
    throw InvalidInputError("unknown transport kind");
}

namespace {

void require_uniform_pair(const DiscreteMeasure& source, const DiscreteMeasure& target) {
    source.validate();
    target.validate();
    if (source.size() != target.size())
        throw InvalidInputError("mini-batch aggregation needs equal support counts");
    double w = 1.0 / static_cast<double>(source.size());
    for (double v : source.weights)
        if (std::abs(v - w) > 1e-12)
            throw InvalidInputError("mini-batch aggregation needs uniform source weights");
    for (double v : target.weights)
        if (std::abs(v - w) > 1e-12)
            throw InvalidInputError("mini-batch aggregation needs uniform target weights");
}

DiscreteMeasure gather(const DiscreteMeasure& measure, const std::vector<std::size_t>& idx) {
    Mat pts(idx.size(), measure.dim());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < measure.dim(); ++c) pts(r, c) = measure.points(idx[r], c);
    return DiscreteMeasure::uniform(std::move(pts));
}

[[noreturn]] void rethrow_with_batch(std::size_t batch, const std::exception& e) {
    std::string msg = "batch " + std::to_string(batch) + ": " + e.what();
    if (dynamic_cast<const InvalidInputError*>(&e)) throw InvalidInputError(msg);
    if (dynamic_cast<const ResourceLimitError*>(&e)) throw ResourceLimitError(msg);
    throw SolverFailureError(msg);
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t m, std::uint64_t cap) {
    if (m > n) return 0;
    m = std::min(m, n - m);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= m; ++i) {
        // result * (n - m + i) / i stays integral; guard the multiply.
        std::uint64_t factor = n - m + i;
        if (result > cap / factor + 1) return cap + 1;
        result = result * factor / i;
        if (result > cap) return cap + 1;
    }
    return result;
}

}  // namespace

AggregatedResult mb_transport_on_batches(const DiscreteMeasure& source,
                                         const DiscreteMeasure& target,
                                         const std::vector<BatchPair>& batches,
                                         const SolverKind& solver, std::size_t threads) {
    require_uniform_pair(source, target);
    solver.validate();
    if (batches.empty()) throw InvalidInputError("no batches to aggregate");
    std::size_t n = source.size();
    for (const BatchPair& batch : batches) {
        if (batch.source.empty() || batch.source.size() != batch.target.size())
            throw InvalidInputError("batch index sets must be nonempty and equally sized");
        for (std::size_t idx : batch.source)
            if (idx >= n) throw InvalidInputError("source batch index out of range");
        for (std::size_t idx : batch.target)
            if (idx >= n) throw InvalidInputError("target batch index out of range");
    }

    std::size_t k = batches.size();
    std::vector<TransportPlan> plans(k);
    parallel_for(k, threads, [&](std::size_t i) {
        try {
            plans[i] = solve_kind(gather(source, batches[i].source),
                                  gather(target, batches[i].target), solver);
        } catch (const std::exception& e) {
            rethrow_with_batch(i, e);
        }
    });

    AggregatedResult result;
    result.padded_plan = Mat(n, n);
    result.records.reserve(k);
    double sum_value = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const BatchPair& batch = batches[i];
        const Mat& coupling = plans[i].coupling;
        for (std::size_t p = 0; p < batch.source.size(); ++p)
            for (std::size_t q = 0; q < batch.target.size(); ++q)
                result.padded_plan(batch.source[p], batch.target[q]) += coupling(p, q);
        sum_value += plans[i].objective;
        result.records.push_back({batch.source, batch.target, plans[i].objective});
    }
    double inv_k = 1.0 / static_cast<double>(k);
    result.value = sum_value * inv_k;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) result.padded_plan(i, j) *= inv_k;
    return result;
}

AggregatedResult mb_transport(const DiscreteMeasure& source, const DiscreteMeasure& target,
                              const BatchSpec& spec, const SolverKind& solver,
                              std::size_t threads) {
    require_uniform_pair(source, target);
    return mb_transport_on_batches(source, target, sample_batches(source.size(), spec),
                                   solver, threads);
}

AggregatedResult full_mb_pot(const DiscreteMeasure& source, const DiscreteMeasure& target,
                             std::size_t m, double s, CostMetric metric,
                             std::uint64_t pair_cap, std::size_t threads) {
    require_uniform_pair(source, target);
    std::size_t n = source.size();
    if (m < 1 || m > n) throw InvalidInputError("subset size must lie in [1, n]");

    std::uint64_t subsets = binomial_capped(n, m, pair_cap);
    if (subsets > pair_cap ||
        static_cast<unsigned __int128>(subsets) * subsets > pair_cap)
        throw ResourceLimitError("full enumeration exceeds the configured pair cap");

    // All m-subsets of [0, n) in lexicographic order.
    std::vector<std::vector<std::size_t>> combos;
    combos.reserve(subsets);
    std::vector<std::size_t> current(m);
    for (std::size_t i = 0; i < m; ++i) current[i] = i;
    for (;;) {
        combos.push_back(current);
        std::size_t pos = m;
        while (pos > 0 && current[pos - 1] == n - m + pos - 1) --pos;
        if (pos == 0) break;
        ++current[pos - 1];
        for (std::size_t i = pos; i < m; ++i) current[i] = current[i - 1] + 1;
    }

    std::vector<BatchPair> pairs;
    pairs.reserve(combos.size() * combos.size());
    for (const auto& src : combos)
        for (const auto& tgt : combos) pairs.push_back({src, tgt});

    SolverKind solver;
    solver.kind = TransportKind::pot;
    solver.pot = PartialParams{s, std::nullopt, std::nullopt};
    solver.metric = metric;
    return mb_transport_on_batches(source, target, pairs, solver, threads);
}

Alignment align_big_batch(const DiscreteMeasure& big_source, const DiscreteMeasure& big_target,
                          std::size_t small_batch, const SolverKind& solver) {
    solver.validate();
    if (solver.kind == TransportKind::uot)
        throw InvalidInputError("two-stage alignment supports ot and pot only");
    if (big_source.size() != big_target.size())
        throw InvalidInputError("two-stage alignment needs equal batch sizes");
    std::size_t big = big_source.size();
    if (small_batch < 1 || small_batch > big)
        throw InvalidInputError("small batch size must lie in [1, big batch size]");

    TransportPlan plan = solve_kind(big_source, big_target, solver);

    Alignment alignment;
    alignment.gamma.resize(big);
    for (std::size_t i = 0; i < big; ++i) {
        double best = 0.0;
        std::optional<std::size_t> arg;
        for (std::size_t j = 0; j < big; ++j) {
            if (plan.coupling(i, j) > best) {
                best = plan.coupling(i, j);
                arg = j;
            }
        }
        alignment.gamma[i] = arg;  // absent when the whole row carries no mass
    }

    std::size_t blocks = big / small_batch;
    alignment.blocks.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        AlignmentBlock block;
        block.source_begin = b * small_batch;
        block.targets.resize(small_batch);
        block.sub_plan = Mat(small_batch, small_batch);
        for (std::size_t r = 0; r < small_batch; ++r)
            block.targets[r] = alignment.gamma[block.source_begin + r];
        for (std::size_t r = 0; r < small_batch; ++r)
            for (std::size_t c = 0; c < small_batch; ++c) {
                const auto& g = block.targets[c];
                block.sub_plan(r, c) = g ? plan.coupling(block.source_begin + r, *g) : 0.0;
            }
        alignment.blocks.push_back(std::move(block));
    }
    return alignment;
}

Alignment two_stage_align(const DiscreteMeasure& source, const DiscreteMeasure& target,
                          std::size_t big_batch, std::size_t small_batch,
                          const SolverKind& solver, std::uint64_t seed) {
    source.validate();
    target.validate();
    if (big_batch > source.size() || big_batch > target.size())
        throw InvalidInputError("big batch size exceeds the support count");
    if (big_batch < 1) throw InvalidInputError("big batch size must be at least 1");

    Rng src_rng(derive_seed(seed, 0, 0));
    Rng tgt_rng(derive_seed(seed, 0, 1));
    std::vector<std::size_t> src_idx = src_rng.sample_without_replacement(source.size(), big_batch);
    std::vector<std::size_t> tgt_idx = tgt_rng.sample_without_replacement(target.size(), big_batch);

    Mat src_pts(big_batch, source.dim()), tgt_pts(big_batch, target.dim());
    for (std::size_t r = 0; r < big_batch; ++r) {
        for (std::size_t c = 0; c < source.dim(); ++c) src_pts(r, c) = source.points(src_idx[r], c);
        for (std::size_t c = 0; c < target.dim(); ++c) tgt_pts(r, c) = target.points(tgt_idx[r], c);
    }

    Alignment alignment = align_big_batch(DiscreteMeasure::uniform(std::move(src_pts)),
                                          DiscreteMeasure::uniform(std::move(tgt_pts)),
                                          small_batch, solver);
    alignment.source_indices = std::move(src_idx);
    alignment.target_indices = std::move(tgt_idx);
    return alignment;
}

}  // namespace mbot
