#include "mbot/transport_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mbot {

void DiscreteMeasure::validate() const {
    if (points.rows() == 0 || points.cols() == 0)
        throw InvalidInputError("measure needs at least one point and one coordinate");
    if (weights.size() != points.rows())
        throw InvalidInputError("weight count does not match point count");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidInputError("negative or NaN weight");
        sum += w;
    }
    if (!(sum > 0.0) || sum > 1.0 + 1e-9)
        throw InvalidInputError("weight sum must lie in (0, 1]");
}

DiscreteMeasure DiscreteMeasure::uniform(Mat support) {
    DiscreteMeasure m;
    std::size_t n = support.rows();
    m.points = std::move(support);
    m.weights.assign(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
    return m;
}

void SolverParams::validate() const {
    if (!(epsilon >= 0.0)) throw InvalidInputError("epsilon must be nonnegative");
    if (!(tolerance > 0.0)) throw InvalidInputError("tolerance must be positive");
    if (max_iterations < 1) throw InvalidInputError("max_iterations must be at least 1");
}

std::string to_string(SolverTag tag) {
    switch (tag) {
        case SolverTag::exact: return "exact";
        case SolverTag::entropic: return "entropic";
        case SolverTag::uot_entropic: return "uot_entropic";
        case SolverTag::pot_exact: return "pot_exact";
        case SolverTag::pot_entropic: return "pot_entropic";
    }
    return "unknown";
}

CostMatrix build_cost(const DiscreteMeasure& source, const DiscreteMeasure& target,
                      CostMetric metric) {
    source.validate();
    target.validate();
    if (source.dim() != target.dim())
        throw InvalidInputError("source and target dimensions differ");
    if (metric == CostMetric::precomputed)
        throw InvalidInputError("cannot build a precomputed cost matrix from points");

    std::size_t n = source.size(), m = target.size(), d = source.dim();
    CostMatrix cost;
    cost.metric = metric;
    cost.entries = Mat(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                double diff = source.points(i, c) - target.points(j, c);
                sq += diff * diff;
            }
            cost.entries(i, j) = metric == CostMetric::euclidean ? std::sqrt(sq) : sq;
        }
    }
    return cost;
}

double plan_cost(const TransportPlan& plan, const CostMatrix& cost) {
    if (plan.coupling.rows() != cost.rows() || plan.coupling.cols() != cost.cols())
        throw InvalidInputError("plan and cost matrix shapes differ");
    double total = 0.0;
    const double* p = plan.coupling.data();
    const double* c = cost.entries.data();
    std::size_t count = plan.coupling.size();
    for (std::size_t k = 0; k < count; ++k) total += p[k] * c[k];
    return total;
}

namespace {

void check_marginals(const std::vector<double>& a, const std::vector<double>& b,
                     const CostMatrix& cost, bool require_balance) {
    if (a.size() != cost.rows() || b.size() != cost.cols())
        throw InvalidInputError("marginal lengths do not match the cost matrix");
    if (a.empty() || b.empty()) throw InvalidInputError("empty marginals");
    double sa = 0.0, sb = 0.0;
    for (double v : a) {
        if (!(v >= 0.0)) throw InvalidInputError("negative source weight");
        sa += v;
    }
    for (double v : b) {
        if (!(v >= 0.0)) throw InvalidInputError("negative target weight");
        sb += v;
    }
    if (require_balance && std::abs(sa - sb) > 1e-9)
        throw InvalidInputError("marginal sums differ (infeasible balanced problem)");
    if (!(sa > 0.0) || !(sb > 0.0)) throw InvalidInputError("zero total mass");
}

// Transportation simplex working state. Nodes 0..n-1 are rows, n..n+m-1 are
// columns; the basis is a spanning tree of exactly n+m-1 arcs kept rooted at
// node 0, with per-node parent, depth and potential so a pivot only touches
// the cycle and the re-rooted subtree.
class TransportSimplex {
public:
    TransportSimplex(const std::vector<double>& a, const std::vector<double>& b, const Mat& c)
        : n_(a.size()), m_(b.size()), cost_(c) {
        cost_scale_ = std::max(1.0, c.max_abs());
        reduced_tol_ = 1e-11 * cost_scale_;
        block_size_ = std::max<std::size_t>(64, static_cast<std::size_t>(
                                                    std::sqrt(static_cast<double>(n_ * m_))));
        build_northwest_basis(a, b);
        root_tree();
    }

    Mat solve() {
        const std::size_t node_count = n_ + m_;
        const std::uint64_t max_pivots =
            10000ULL + 1000ULL * static_cast<std::uint64_t>(node_count) +
            4ULL * static_cast<std::uint64_t>(n_) * static_cast<std::uint64_t>(m_);
        const std::size_t bland_trigger = 8 * node_count + 64;

        std::uint64_t pivots = 0;
        std::size_t degenerate_streak = 0;
        bool bland_mode = false;

        for (;;) {
            std::size_t enter_i, enter_j;
            bool found = bland_mode ? price_bland(enter_i, enter_j)
                                    : price_block(enter_i, enter_j);
            if (!found) break;

            double theta = pivot(enter_i, enter_j, bland_mode);
            if (theta > 0.0) {
                degenerate_streak = 0;
                bland_mode = false;
            } else if (++degenerate_streak > bland_trigger) {
                bland_mode = true;
            }
            if (++pivots > max_pivots)
                throw SolverFailureError("transportation simplex exceeded its pivot safeguard");
        }

        Mat plan(n_, m_);
        for (const Arc& arc : arcs_)
            if (arc.flow > 0.0) plan(arc.row, arc.col) = arc.flow;
        return plan;
    }

private:
    struct Arc {
        std::size_t row;
        std::size_t col;
        double flow;
    };

    static constexpr std::size_t kNone = SIZE_MAX;

    std::size_t n_, m_;
    const Mat& cost_;
    double cost_scale_ = 1.0;
    double reduced_tol_ = 1e-11;
    std::size_t block_size_ = 64;
    std::size_t cursor_ = 0;

    std::vector<Arc> arcs_;                      // basis arcs, n+m-1 slots
    std::vector<std::vector<std::size_t>> adj_;  // node -> incident basis arc slots
    std::vector<char> basic_;                    // cell -> in basis
    std::vector<std::size_t> parent_;            // rooted-tree parent node
    std::vector<std::size_t> parent_slot_;       // arc slot to the parent
    std::vector<std::size_t> depth_;
    std::vector<double> pot_;                    // potentials; u on rows, v on columns
    std::vector<std::size_t> up_src_, up_tgt_, stack_;  // pivot scratch
    std::vector<char> sheds_src_, sheds_tgt_;

    std::size_t col_node(std::size_t j) const { return n_ + j; }
    std::size_t other_end(const Arc& arc, std::size_t node) const {
        return node == arc.row ? col_node(arc.col) : arc.row;
    }

    void add_arc(std::size_t i, std::size_t j, double flow) {
        std::size_t slot = arcs_.size();
        arcs_.push_back({i, j, flow});
        adj_[i].push_back(slot);
        adj_[col_node(j)].push_back(slot);
        basic_[i * m_ + j] = 1;
    }

    void build_northwest_basis(const std::vector<double>& a, const std::vector<double>& b) {
        adj_.assign(n_ + m_, {});
        basic_.assign(n_ * m_, 0);
        arcs_.reserve(n_ + m_ - 1);

        std::size_t i = 0, j = 0;
        double rs = a[0], cd = b[0];
        for (;;) {
            double x = std::min(rs, cd);
            add_arc(i, j, x);
            if (i == n_ - 1 && j == m_ - 1) break;
            rs -= x;
            cd -= x;
            // Advance exactly one index per arc so the basis stays a tree of
            // n+m-1 arcs even through degenerate (zero) allocations.
            bool advance_row = (rs <= 0.0 && i + 1 < n_) || j + 1 == m_;
            if (advance_row) {
                ++i;
                rs = a[i];
            } else {
                ++j;
                cd = b[j];
            }
        }
    }

    void root_tree() {
        std::size_t nodes = n_ + m_;
        parent_.assign(nodes, kNone);
        parent_slot_.assign(nodes, kNone);
        depth_.assign(nodes, 0);
        pot_.assign(nodes, 0.0);
        stack_.clear();
        stack_.push_back(0);
        parent_[0] = 0;
        while (!stack_.empty()) {
            std::size_t node = stack_.back();
            stack_.pop_back();
            for (std::size_t slot : adj_[node]) {
                std::size_t next = other_end(arcs_[slot], node);
                if (parent_[next] != kNone) continue;
                parent_[next] = node;
                parent_slot_[next] = slot;
                depth_[next] = depth_[node] + 1;
                pot_[next] = cost_(arcs_[slot].row, arcs_[slot].col) - pot_[node];
                stack_.push_back(next);
            }
        }
        parent_[0] = kNone;
    }

    double reduced_cost(std::size_t cell) const {
        std::size_t i = cell / m_, j = cell % m_;
        return cost_(i, j) - pot_[i] - pot_[n_ + j];
    }

    // Cyclic block search: take the most negative reduced cost inside the
    // first block that contains any candidate (ties by lowest cell index).
    bool price_block(std::size_t& out_i, std::size_t& out_j) {
        std::size_t total = n_ * m_;
        std::size_t scanned = 0;
        std::size_t pos = cursor_;
        while (scanned < total) {
            double best = -reduced_tol_;
            std::size_t best_cell = total;
            std::size_t chunk = std::min(block_size_, total - scanned);
            for (std::size_t k = 0; k < chunk; ++k) {
                std::size_t cell = pos + k;
                if (cell >= total) cell -= total;
                if (basic_[cell]) continue;
                double r = reduced_cost(cell);
                if (r < best) {
                    best = r;
                    best_cell = cell;
                }
            }
            pos += chunk;
            if (pos >= total) pos -= total;
            scanned += chunk;
            if (best_cell != total) {
                cursor_ = pos;
                out_i = best_cell / m_;
                out_j = best_cell % m_;
                return true;
            }
        }
        return false;
    }

    // Bland's rule: lowest-index cell with negative reduced cost.
    bool price_bland(std::size_t& out_i, std::size_t& out_j) {
        std::size_t total = n_ * m_;
        for (std::size_t cell = 0; cell < total; ++cell) {
            if (basic_[cell]) continue;
            if (reduced_cost(cell) < -reduced_tol_) {
                out_i = cell / m_;
                out_j = cell % m_;
                return true;
            }
        }
        return false;
    }

    double pivot(std::size_t enter_i, std::size_t enter_j, bool bland_mode) {
        // Climb both endpoints to their lowest common ancestor. The cycle
        // carries flow along enter_i -> enter_j, continues from the column
        // node up to the apex and closes down the row side; an arc sheds
        // flow when the cycle traverses it column-to-row, which happens on
        // the source side when the climbed child is a row node and on the
        // target side when it is a column node.
        up_src_.clear();
        up_tgt_.clear();
        sheds_src_.clear();
        sheds_tgt_.clear();
        std::size_t a = enter_i, b = col_node(enter_j);
        auto climb_src = [&]() {
            up_src_.push_back(parent_slot_[a]);
            sheds_src_.push_back(a < n_ ? 1 : 0);
            a = parent_[a];
        };
        auto climb_tgt = [&]() {
            up_tgt_.push_back(parent_slot_[b]);
            sheds_tgt_.push_back(b >= n_ ? 1 : 0);
            b = parent_[b];
        };
        while (depth_[a] > depth_[b]) climb_src();
        while (depth_[b] > depth_[a]) climb_tgt();
        while (a != b) {
            climb_src();
            climb_tgt();
        }

        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave_slot = kNone;
        std::size_t leave_cell = kNone;
        bool leave_on_src_side = false;

        // Ties on theta: the anti-cycling mode picks the lowest cell index,
        // as Bland's rule requires. Otherwise take the last blocking arc in
        // the apex-first cycle orientation (source side walked downward,
        // then target side upward), which keeps the tree strongly feasible
        // and curbs degenerate stalling.
        auto consider = [&](std::size_t slot, bool on_src_side) {
            const Arc& arc = arcs_[slot];
            std::size_t cell = arc.row * m_ + arc.col;
            bool better;
            if (arc.flow < theta) better = true;
            else if (arc.flow > theta) better = false;
            else better = bland_mode ? cell < leave_cell : true;
            if (better) {
                theta = arc.flow;
                leave_slot = slot;
                leave_cell = cell;
                leave_on_src_side = on_src_side;
            }
        };

        for (std::size_t p = up_src_.size(); p-- > 0;)
            if (sheds_src_[p]) consider(up_src_[p], true);
        for (std::size_t p = 0; p < up_tgt_.size(); ++p)
            if (sheds_tgt_[p]) consider(up_tgt_[p], false);
        if (leave_slot == kNone)
            throw SolverFailureError("transportation simplex lost the pivot cycle");

        // Apply theta around the cycle.
        for (std::size_t p = 0; p < up_src_.size(); ++p) {
            Arc& arc = arcs_[up_src_[p]];
            if (sheds_src_[p])
                arc.flow = (up_src_[p] == leave_slot) ? 0.0 : arc.flow - theta;
            else
                arc.flow += theta;
        }
        for (std::size_t p = 0; p < up_tgt_.size(); ++p) {
            Arc& arc = arcs_[up_tgt_[p]];
            if (sheds_tgt_[p])
                arc.flow = (up_tgt_[p] == leave_slot) ? 0.0 : arc.flow - theta;
            else
                arc.flow += theta;
        }

        // Swap the leaving arc out of the basis structures.
        Arc leaving = arcs_[leave_slot];
        basic_[leaving.row * m_ + leaving.col] = 0;
        detach(leaving.row, leave_slot);
        detach(col_node(leaving.col), leave_slot);
        arcs_[leave_slot] = {enter_i, enter_j, theta};
        adj_[enter_i].push_back(leave_slot);
        adj_[col_node(enter_j)].push_back(leave_slot);
        basic_[enter_i * m_ + enter_j] = 1;

        // The leaving arc separated a subtree; it contained the entering
        // endpoint on the same side of the apex. Re-root that subtree on the
        // entering arc and refresh parent/depth/potential inside it.
        std::size_t sub_root = leave_on_src_side ? enter_i : col_node(enter_j);
        std::size_t new_parent = leave_on_src_side ? col_node(enter_j) : enter_i;
        reattach_subtree(sub_root, new_parent, leave_slot);
        return theta;
    }

    void reattach_subtree(std::size_t sub_root, std::size_t new_parent, std::size_t via_slot) {
        parent_[sub_root] = new_parent;
        parent_slot_[sub_root] = via_slot;
        depth_[sub_root] = depth_[new_parent] + 1;
        {
            const Arc& arc = arcs_[via_slot];
            pot_[sub_root] = cost_(arc.row, arc.col) - pot_[new_parent];
        }
        stack_.clear();
        stack_.push_back(sub_root);
        while (!stack_.empty()) {
            std::size_t node = stack_.back();
            stack_.pop_back();
            for (std::size_t slot : adj_[node]) {
                std::size_t next = other_end(arcs_[slot], node);
                if (next == parent_[node] && slot == parent_slot_[node]) continue;
                parent_[next] = node;
                parent_slot_[next] = slot;
                depth_[next] = depth_[node] + 1;
                pot_[next] = cost_(arcs_[slot].row, arcs_[slot].col) - pot_[node];
                stack_.push_back(next);
            }
        }
    }

    void detach(std::size_t node, std::size_t slot) {
        auto& list = adj_[node];
        list.erase(std::find(list.begin(), list.end(), slot));
    }
};

double log_sum_exp(const std::vector<double>& terms) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double t : terms) hi = std::max(hi, t);
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - hi);
    return hi + std::log(acc);
}

}  // namespace

TransportPlan solve_ot_exact(const std::vector<double>& a, const std::vector<double>& b,
                             const CostMatrix& cost) {
    check_marginals(a, b, cost, /*require_balance=*/true);

    TransportSimplex simplex(a, b, cost.entries);
    TransportPlan plan;
    plan.coupling = simplex.solve();
    plan.solver = SolverTag::exact;
    plan.total_mass = plan.coupling.sum();
    plan.objective = plan_cost(plan, cost);
    plan.converged = true;
    return plan;
}

TransportPlan solve_ot_entropic(const std::vector<double>& a, const std::vector<double>& b,
                                const CostMatrix& cost, const SolverParams& params) {
    check_marginals(a, b, cost, /*require_balance=*/true);
    params.validate();
    if (!(params.epsilon > 0.0))
        throw InvalidInputError("entropic solver requires epsilon > 0");

    const std::size_t n = a.size(), m = b.size();
    const double eps = params.epsilon;
    const double neg_inf = -std::numeric_limits<double>::infinity();

    std::vector<double> log_a(n), log_b(m);
    for (std::size_t i = 0; i < n; ++i) log_a[i] = a[i] > 0.0 ? std::log(a[i]) : neg_inf;
    for (std::size_t j = 0; j < m; ++j) log_b[j] = b[j] > 0.0 ? std::log(b[j]) : neg_inf;

    std::vector<double> f(n, 0.0), g(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] <= 0.0) f[i] = neg_inf;
    for (std::size_t j = 0; j < m; ++j)
        if (b[j] <= 0.0) g[j] = neg_inf;

    auto fill_plan = [&](Mat& pi) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                pi(i, j) = std::exp((f[i] + g[j] - cost.entries(i, j)) / eps);
    };

    auto marginal_violation = [&](const Mat& pi) {
        double viol = 0.0;
        std::vector<double> rows = pi.row_sums(), cols = pi.col_sums();
        for (std::size_t i = 0; i < n; ++i) viol += std::abs(rows[i] - a[i]);
        for (std::size_t j = 0; j < m; ++j) viol += std::abs(cols[j] - b[j]);
        return viol;
    };

    std::vector<double> scratch;
    Mat pi(n, m);
    double best_violation = std::numeric_limits<double>::infinity();
    std::vector<double> best_f = f, best_g = g;
    bool converged = false;

    for (int it = 0; it < params.max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            if (a[i] <= 0.0) continue;
            scratch.assign(m, neg_inf);
            for (std::size_t j = 0; j < m; ++j)
                if (b[j] > 0.0) scratch[j] = (g[j] - cost.entries(i, j)) / eps;
            f[i] = eps * (log_a[i] - log_sum_exp(scratch));
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (b[j] <= 0.0) continue;
            scratch.assign(n, neg_inf);
            for (std::size_t i = 0; i < n; ++i)
                if (a[i] > 0.0) scratch[i] = (f[i] - cost.entries(i, j)) / eps;
            g[j] = eps * (log_b[j] - log_sum_exp(scratch));
        }

        fill_plan(pi);
        double viol = marginal_violation(pi);
        if (viol < best_violation) {
            best_violation = viol;
            best_f = f;
            best_g = g;
        }
        if (viol <= params.tolerance) {
            converged = true;
            break;
        }
    }

    if (!converged) {
        f = best_f;
        g = best_g;
        fill_plan(pi);
    }

    TransportPlan plan;
    plan.coupling = std::move(pi);
    plan.solver = SolverTag::entropic;
    plan.total_mass = plan.coupling.sum();
    plan.objective = plan_cost(plan, cost);
    plan.converged = converged;
    return plan;
}

double wasserstein2(const DiscreteMeasure& source, const DiscreteMeasure& target) {
    source.validate();
    target.validate();
    if (std::abs(source.total_mass() - target.total_mass()) > 1e-9)
        throw InvalidInputError("wasserstein2 requires equal total masses");
    CostMatrix cost = build_cost(source, target, CostMetric::squared_euclidean);
    TransportPlan plan = solve_ot_exact(source.weights, target.weights, cost);
    return std::sqrt(std::max(0.0, plan.objective));
}

}  // namespace mbot
