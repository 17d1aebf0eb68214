#include "mbot/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "mbot/minibatch.hpp"
#include "mbot/parallel.hpp"
#include "mbot/transport_core.hpp"

namespace mbot {

namespace {

constexpr std::size_t kMaxOracleCells = 36;

// Finds the smallest q <= cap reproducing every value as an integer multiple
// of 1/q, or 0 when none exists.
int common_denominator(const std::vector<double>& values, int cap) {
    for (int q = 1; q <= cap; ++q) {
        bool ok = true;
        for (double v : values) {
            double scaled = v * q;
            if (std::abs(scaled - std::llround(scaled)) > 1e-6) {
                ok = false;
                break;
            }
        }
        if (ok) return q;
    }
    return 0;
}

// Depth-first search over integral flows in cost-sorted cell order with an
// admissible lower bound (cheapest remaining units, per-cell caps frozen at
// the current remainders). Keeps the first optimum found, so results are
// deterministic.
class FlowEnumerator {
public:
    FlowEnumerator(std::size_t n, std::size_t m, const Mat& cost,
                   std::vector<long long> row_cap, std::vector<long long> col_cap,
                   long long total)
        : n_(n), m_(m),
          rem_row_(std::move(row_cap)), rem_col_(std::move(col_cap)), rem_total_(total) {
        cells_.reserve(n * m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) cells_.push_back({cost(i, j), i, j});
        std::stable_sort(cells_.begin(), cells_.end(), [m](const Cell& x, const Cell& y) {
            if (x.cost != y.cost) return x.cost < y.cost;
            return x.row * m + x.col < y.row * m + y.col;
        });
        flow_.assign(cells_.size(), 0);
    }

    bool run() {
        descend(0, 0.0);
        return found_;
    }

    Mat best_plan(long long q) const {
        Mat plan(n_, m_);
        for (std::size_t p = 0; p < cells_.size(); ++p)
            plan(cells_[p].row, cells_[p].col) =
                static_cast<double>(best_flow_[p]) / static_cast<double>(q);
        return plan;
    }

private:
    struct Cell {
        double cost;
        std::size_t row;
        std::size_t col;
    };

    std::size_t n_, m_;
    std::vector<long long> rem_row_, rem_col_;
    long long rem_total_;
    std::vector<Cell> cells_;
    std::vector<long long> flow_, best_flow_;
    double best_units_ = std::numeric_limits<double>::infinity();
    bool found_ = false;

    // Cost of serving the remaining total greedily from position `pos`
    // onward, ignoring cap interactions between cells: never above the true
    // remaining cost, +inf when even the relaxation cannot carry the mass.
    double lower_bound(std::size_t pos) const {
        long long need = rem_total_;
        double bound = 0.0;
        for (std::size_t p = pos; p < cells_.size() && need > 0; ++p) {
            long long cap = std::min(rem_row_[cells_[p].row], rem_col_[cells_[p].col]);
            if (cap <= 0) continue;
            long long take = std::min(cap, need);
            bound += static_cast<double>(take) * cells_[p].cost;
            need -= take;
        }
        return need > 0 ? std::numeric_limits<double>::infinity() : bound;
    }

    void descend(std::size_t pos, double acc_units) {
        if (rem_total_ == 0) {
            if (acc_units < best_units_) {
                best_units_ = acc_units;
                best_flow_ = flow_;
                found_ = true;
            }
            return;
        }
        if (pos == cells_.size()) return;
        if (acc_units + lower_bound(pos) >= best_units_) return;

        const Cell& cell = cells_[pos];
        long long vmax = std::min({rem_row_[cell.row], rem_col_[cell.col], rem_total_});
        for (long long v = vmax; v >= 0; --v) {
            rem_row_[cell.row] -= v;
            rem_col_[cell.col] -= v;
            rem_total_ -= v;
            flow_[pos] = v;
            descend(pos + 1, acc_units + static_cast<double>(v) * cell.cost);
            rem_row_[cell.row] += v;
            rem_col_[cell.col] += v;
            rem_total_ += v;
            flow_[pos] = 0;
        }
    }
};

double sample_std(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double sample_mean(const std::vector<double>& values) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

void validate_k_grid(const std::vector<std::size_t>& k_grid) {
    if (k_grid.empty()) throw InvalidInputError("k grid must not be empty");
    for (std::size_t i = 0; i < k_grid.size(); ++i) {
        if (k_grid[i] < 1) throw InvalidInputError("k values must be at least 1");
        if (i > 0 && k_grid[i] <= k_grid[i - 1])
            throw InvalidInputError("k grid must be strictly ascending");
    }
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

TransportPlan brute_force_plan(const std::vector<double>& a, const std::vector<double>& b,
                               const CostMatrix& cost, double s, int denominator_cap) {
    if (a.size() != cost.rows() || b.size() != cost.cols())
        throw InvalidInputError("marginal lengths do not match the cost matrix");
    if (!(s > 0.0) || s > 1.0) throw InvalidInputError("fraction must lie in (0, 1]");
    for (double v : a)
        if (!(v >= 0.0)) throw InvalidInputError("negative source weight");
    for (double v : b)
        if (!(v >= 0.0)) throw InvalidInputError("negative target weight");

    std::size_t n = a.size(), m = b.size();
    if (n * m > kMaxOracleCells)
        throw UnsupportedInstanceError("instance too large for exhaustive enumeration");

    std::vector<double> rationals = a;
    rationals.insert(rationals.end(), b.begin(), b.end());
    rationals.push_back(s);
    int q = common_denominator(rationals, denominator_cap);
    if (q == 0)
        throw UnsupportedInstanceError(
            "weights are not integer multiples of 1/q for any q under the cap");

    std::vector<long long> row_cap(n), col_cap(m);
    long long sum_a = 0, sum_b = 0;
    for (std::size_t i = 0; i < n; ++i) sum_a += row_cap[i] = std::llround(a[i] * q);
    for (std::size_t j = 0; j < m; ++j) sum_b += col_cap[j] = std::llround(b[j] * q);
    long long total = std::llround(s * q);
    if (total > std::min(sum_a, sum_b))
        throw InvalidInputError("requested mass exceeds the available marginals");

    FlowEnumerator enumerator(n, m, cost.entries, std::move(row_cap), std::move(col_cap), total);
    if (!enumerator.run())
        throw SolverFailureError("exhaustive enumeration found no feasible plan");

    TransportPlan plan;
    plan.coupling = enumerator.best_plan(q);
    plan.total_mass = plan.coupling.sum();
    plan.objective = plan_cost(plan, cost);
    plan.solver = (total == sum_a && total == sum_b) ? SolverTag::exact : SolverTag::pot_exact;
    plan.converged = true;
    return plan;
}

MappingCensus mapping_census(const Mat& candidate, const TransportPlan& reference,
                             double threshold) {
    if (candidate.rows() != reference.coupling.rows() ||
        candidate.cols() != reference.coupling.cols())
        throw InvalidInputError("census: candidate and reference shapes differ");

    MappingCensus census;
    census.threshold = threshold;
    for (std::size_t i = 0; i < candidate.rows(); ++i)
        for (std::size_t j = 0; j < candidate.cols(); ++j) {
            if (!(candidate(i, j) > threshold)) continue;
            ++census.total;
            if (reference.coupling(i, j) > 0.0) ++census.optimal;
            else ++census.misspecified;
        }
    return census;
}

DiscreteMeasure sample_measure(std::size_t n, const DistributionSpec& spec, Rng& rng) {
    if (n == 0) throw InvalidInputError("cannot sample an empty measure");

    if (spec.kind == DistributionSpec::Kind::bimodal_source ||
        spec.kind == DistributionSpec::Kind::bimodal_target) {
        // Two-mode 2D clouds with an even point split; the target's modes are
        // negatively correlated with coefficient -0.8.
        Mat pts(n, 2);
        std::size_t first_mode = (n + 1) / 2;
        bool target = spec.kind == DistributionSpec::Kind::bimodal_target;
        for (std::size_t i = 0; i < n; ++i) {
            double mode_y = i < first_mode ? 0.0 : 20.0;
            double z1 = rng.next_normal();
            double z2 = rng.next_normal();
            if (target) {
                pts(i, 0) = 10.0 + z1;
                pts(i, 1) = mode_y - 0.8 * z1 + 0.6 * z2;
            } else {
                pts(i, 0) = z1;
                pts(i, 1) = mode_y + z2;
            }
        }
        return DiscreteMeasure::uniform(std::move(pts));
    }

    Mat pts(n, spec.dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < spec.dim; ++c) {
            double v = spec.kind == DistributionSpec::Kind::uniform_cube
                           ? spec.scale * rng.next_double()
                           : spec.scale * rng.next_normal();
            pts(i, c) = spec.shift + v;
        }
    return DiscreteMeasure::uniform(std::move(pts));
}

void ConcentrationReport::write_csv(std::ostream& out) const {
    out << "k,replicates,mean,std,max_plan_row_deviation\n";
    for (const ConcentrationRow& row : rows) {
        out << row.k << ',' << row.replicates << ',' << format_g17(row.mean) << ','
            << format_g17(row.stddev) << ',' << format_g17(row.max_plan_row_deviation) << '\n';
    }
}

std::string ConcentrationReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const ConcentrationRow& row : rows) {
        rows_json.push_back({{"k", row.k},
                             {"replicates", row.replicates},
                             {"mean", row.mean},
                             {"std", row.stddev},
                             {"max_plan_row_deviation", row.max_plan_row_deviation}});
    }
    return nlohmann::json{{"rows", rows_json}}.dump(2);
}

ConcentrationReport concentration_value_experiment(
    std::size_t n, std::size_t m, double s, const std::vector<std::size_t>& k_grid,
    std::size_t replicates, std::uint64_t seed, const DistributionSpec& source_dist,
    const DistributionSpec& target_dist, std::size_t threads) {
    validate_k_grid(k_grid);
    if (replicates < 30) throw InvalidInputError("need at least 30 replicates");

    Rng src_rng(derive_seed(seed, 0x5));
    Rng tgt_rng(derive_seed(seed, 0x6));
    DiscreteMeasure source = sample_measure(n, source_dist, src_rng);
    DiscreteMeasure target = sample_measure(n, target_dist, tgt_rng);

    SolverKind solver;
    solver.kind = TransportKind::pot;
    solver.pot = PartialParams{s, std::nullopt, std::nullopt};

    ConcentrationReport report;
    for (std::size_t k : k_grid) {
        std::vector<double> values(replicates);
        parallel_for(replicates, threads, [&](std::size_t rep) {
            BatchSpec spec{m, k, BatchSampling::without_replacement,
                           derive_seed(seed, 0x7, k, rep)};
            values[rep] = mb_transport(source, target, spec, solver).value;
        });
        double mean = sample_mean(values);
        report.rows.push_back({k, replicates, mean, sample_std(values, mean), 0.0});
    }
    return report;
}

ConcentrationReport concentration_plan_experiment(
    std::size_t n, std::size_t m, double s, const std::vector<std::size_t>& k_grid,
    std::size_t replicates, std::uint64_t seed, const DistributionSpec& source_dist,
    const DistributionSpec& target_dist, std::size_t threads) {
    validate_k_grid(k_grid);
    if (replicates < 1) throw InvalidInputError("need at least one replicate");

    Rng src_rng(derive_seed(seed, 0x5));
    Rng tgt_rng(derive_seed(seed, 0x6));
    DiscreteMeasure source = sample_measure(n, source_dist, src_rng);
    DiscreteMeasure target = sample_measure(n, target_dist, tgt_rng);

    AggregatedResult full = full_mb_pot(source, target, m, s, CostMetric::euclidean,
                                        1000000, threads);
    std::vector<double> full_rows = full.padded_plan.row_sums();
    std::vector<double> full_cols = full.padded_plan.col_sums();

    SolverKind solver;
    solver.kind = TransportKind::pot;
    solver.pot = PartialParams{s, std::nullopt, std::nullopt};

    ConcentrationReport report;
    for (std::size_t k : k_grid) {
        std::vector<double> deviations(replicates);
        parallel_for(replicates, threads, [&](std::size_t rep) {
            BatchSpec spec{m, k, BatchSampling::without_replacement,
                           derive_seed(seed, 0x8, k, rep)};
            AggregatedResult sampled = mb_transport(source, target, spec, solver);
            std::vector<double> rows = sampled.padded_plan.row_sums();
            std::vector<double> cols = sampled.padded_plan.col_sums();
            double dev = 0.0;
            for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(rows[i] - full_rows[i]));
            for (std::size_t j = 0; j < n; ++j) dev = std::max(dev, std::abs(cols[j] - full_cols[j]));
            deviations[rep] = dev;
        });
        double mean = sample_mean(deviations);
        double worst = *std::max_element(deviations.begin(), deviations.end());
        report.rows.push_back({k, replicates, mean, sample_std(deviations, mean), worst});
    }
    return report;
}

}  // namespace mbot
