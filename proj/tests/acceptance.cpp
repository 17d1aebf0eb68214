// Acceptance suite: runs every acceptance criterion end to end and prints
// one PASS/FAIL line per criterion. Exits nonzero when any criterion fails.
//
// The CLI-driven criteria read the binary path from the MBOT_CLI environment
// variable (set by ctest); library criteria run in process.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <sys/wait.h>

#include "mbot/apps.hpp"
#include "mbot/diagnostics.hpp"
#include "mbot/io.hpp"
#include "mbot/minibatch.hpp"
#include "mbot/parallel.hpp"
#include "mbot/partial.hpp"
#include "mbot/transport_core.hpp"
#include "mbot/unbalanced.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mbot;

namespace {

std::string g_cli;
fs::path g_work;

int run_cli(const std::string& args) {
    std::string command = g_cli + " " + args + " >/dev/null 2>&1";
    int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> rational_weights(std::size_t n, int q, Rng& rng) {
    std::vector<int> units(n, 0);
    for (int u = 0; u < q; ++u) units[rng.uniform_int(n)] += 1;
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) weights[i] = units[i] / static_cast<double>(q);
    return weights;
}

CostMatrix random_cost(std::size_t n, std::size_t m, Rng& rng) {
    CostMatrix cost;
    cost.metric = CostMetric::precomputed;
    cost.entries = Mat(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) cost.entries(i, j) = rng.next_double();
    return cost;
}

DiscreteMeasure random_cloud(std::size_t n, std::size_t d, Rng& rng) {
    Mat pts(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) pts(i, c) = rng.next_double();
    return DiscreteMeasure::uniform(std::move(pts));
}

DiscreteMeasure aligned_columns(double x, std::size_t count) {
    Mat pts(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
        pts(i, 0) = x;
        pts(i, 1) = static_cast<double>(i + 1);
    }
    return DiscreteMeasure::uniform(std::move(pts));
}

SolverKind pot_kind(double s) {
    SolverKind kind;
    kind.kind = TransportKind::pot;
    kind.pot = PartialParams{s, {}, {}};
    return kind;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values[values.size() / 2];
}

ImageRGB gradient_image(std::size_t side, std::uint64_t seed, bool warm) {
    Rng rng(seed);
    ImageRGB image;
    image.width = image.height = side;
    image.pixels.resize(side * side);
    for (std::size_t y = 0; y < side; ++y)
        for (std::size_t x = 0; x < side; ++x) {
            double u = static_cast<double>(x) / static_cast<double>(side - 1);
            double v = static_cast<double>(y) / static_cast<double>(side - 1);
            double noise = 0.05 * rng.next_double();
            auto& px = image.pixels[y * side + x];
            if (warm) {
                px = {std::clamp(0.7 + 0.3 * u + noise, 0.0, 1.0),
                      std::clamp(0.3 + 0.4 * v + noise, 0.0, 1.0),
                      std::clamp(0.1 + 0.2 * u * v + noise, 0.0, 1.0)};
            } else {
                px = {std::clamp(0.1 + 0.2 * v + noise, 0.0, 1.0),
                      std::clamp(0.4 + 0.3 * u + noise, 0.0, 1.0),
                      std::clamp(0.6 + 0.4 * u * v + noise, 0.0, 1.0)};
            }
        }
    return image;
}

// ---------------------------------------------------------------------------

bool criterion_oracle_equivalence(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    Rng rng(101);
    const double s_grid[4] = {0.25, 0.5, 0.75, 1.0};
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng.uniform_int(6);
        std::size_t m = 1 + rng.uniform_int(6);
        CostMatrix cost = random_cost(n, m, rng);
        std::vector<double> a = rational_weights(n, 12, rng);
        std::vector<double> b = rational_weights(m, 12, rng);
        double s = s_grid[trial % 4];

        TransportPlan pot = solve_pot_exact(a, b, cost, PartialParams{s, {}, {}});
        TransportPlan pot_oracle = brute_force_plan(a, b, cost, s, 12);
        if (std::abs(pot.objective - pot_oracle.objective) > 1e-8) {
            detail = "partial objective off the enumerated optimum at trial " +
                     std::to_string(trial);
            return false;
        }

        TransportPlan ot = solve_ot_exact(a, b, cost);
        TransportPlan ot_oracle = brute_force_plan(a, b, cost, 1.0, 12);
        if (std::abs(ot.objective - ot_oracle.objective) > 1e-8) {
            detail = "balanced objective off the enumerated optimum at trial " +
                     std::to_string(trial);
            return false;
        }
    }
    double seconds = elapsed_seconds(start);
    detail = "200 instances in " + std::to_string(seconds) + " s";
    return seconds < 60.0;
}

bool criterion_reduction_and_dummy(std::string& detail) {
    Rng rng(202);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 2 + rng.uniform_int(5);
        std::size_t m = 2 + rng.uniform_int(5);
        CostMatrix cost = random_cost(n, m, rng);
        std::vector<double> a = rational_weights(n, 12, rng);
        std::vector<double> b = rational_weights(m, 12, rng);

        double full = solve_ot_exact(a, b, cost).objective;
        double reduced = solve_pot_exact(a, b, cost, PartialParams{1.0, {}, {}}).objective;
        if (std::abs(full - reduced) > 1e-9) {
            detail = "s=1 reduction mismatch at trial " + std::to_string(trial);
            return false;
        }

        double reference = solve_pot_exact(a, b, cost, PartialParams{0.5, 0.01, {}}).objective;
        for (double dummy : {1.0, 1000.0}) {
            double other =
                solve_pot_exact(a, b, cost, PartialParams{0.5, dummy, {}}).objective;
            if (std::abs(other - reference) > 1e-9) {
                detail = "dummy-cost dependence at trial " + std::to_string(trial);
                return false;
            }
        }

        double previous = -1.0;
        for (int step = 1; step <= 10; ++step) {
            double objective =
                solve_pot_exact(a, b, cost, PartialParams{0.1 * step, {}, {}}).objective;
            if (objective < previous - 1e-12) {
                detail = "objective decreased in s at trial " + std::to_string(trial);
                return false;
            }
            previous = objective;
        }
    }
    detail = "50 instances";
    return true;
}

bool criterion_offset_batch(std::string& detail) {
    DiscreteMeasure src = aligned_columns(0.0, 5);
    DiscreteMeasure tgt = aligned_columns(1.0, 5);
    std::vector<BatchPair> batches = {{{0, 1, 2}, {2, 3, 4}}};
    SolverKind kind;
    AggregatedResult result = mb_transport_on_batches(src, tgt, batches, kind);

    const std::size_t expected[3][2] = {{0, 2}, {1, 3}, {2, 4}};
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            if (result.padded_plan(i, j) != 0.0) ++nonzero;
    if (nonzero != 3) {
        detail = "expected exactly three mappings, found " + std::to_string(nonzero);
        return false;
    }
    for (const auto& cell : expected)
        if (std::abs(result.padded_plan(cell[0], cell[1]) - 1.0 / 3.0) > 1e-9) {
            detail = "mapping mass off 1/3";
            return false;
        }

    CostMatrix cost = build_cost(src, tgt, CostMetric::euclidean);
    TransportPlan full = solve_ot_exact(src.weights, tgt.weights, cost);
    MappingCensus census = mapping_census(result.padded_plan, full, kCensusThresholdExact);
    detail = "census " + std::to_string(census.total) + "/" +
             std::to_string(census.misspecified) + "/" + std::to_string(census.optimal);
    return census.total == 3 && census.misspecified == 3 && census.optimal == 0;
}

bool criterion_scale_behavior(std::string& detail) {
    Rng rng(404);
    int pot_invariant = 0, uot_sensitive = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto src = random_cloud(5, 2, rng);
        auto tgt = random_cloud(5, 2, rng);
        CostMatrix cost = build_cost(src, tgt, CostMetric::euclidean);
        CostMatrix scaled;
        scaled.metric = CostMetric::precomputed;
        scaled.entries = Mat(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                scaled.entries(i, j) = 10.0 * cost.entries(i, j);

        TransportPlan base =
            solve_pot_exact(src.weights, tgt.weights, cost, PartialParams{0.5, {}, {}});
        TransportPlan big =
            solve_pot_exact(src.weights, tgt.weights, scaled, PartialParams{0.5, {}, {}});
        bool same = true;
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                if (std::abs(base.coupling(i, j) - big.coupling(i, j)) > 1e-9) same = false;
        if (same) ++pot_invariant;

        UotParams params{0.5, SolverParams{0.01, 1e-9, 200000}, Divergence::kl};
        double mass = solve_uot_entropic(src.weights, tgt.weights, cost, params).total_mass;
        double mass_scaled =
            solve_uot_entropic(src.weights, tgt.weights, scaled, params).total_mass;
        if (std::abs(mass - mass_scaled) > 0.10 * std::max(mass, mass_scaled)) ++uot_sensitive;
    }
    detail = "pot invariant " + std::to_string(pot_invariant) + "/20, uot sensitive " +
             std::to_string(uot_sensitive) + "/20";
    return pot_invariant == 20 && uot_sensitive >= 15;
}

bool criterion_census_ordering(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    std::vector<double> ot_counts, pot_counts;
    const double s_grid[9] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng src_rng(derive_seed(seed, 1)), tgt_rng(derive_seed(seed, 2));
        DistributionSpec source_spec{DistributionSpec::Kind::bimodal_source, 2, 0.0, 1.0};
        DistributionSpec target_spec{DistributionSpec::Kind::bimodal_target, 2, 0.0, 1.0};
        DiscreteMeasure src = sample_measure(10, source_spec, src_rng);
        DiscreteMeasure tgt = sample_measure(10, target_spec, tgt_rng);
        CostMatrix cost = build_cost(src, tgt, CostMetric::euclidean);
        TransportPlan full = solve_ot_exact(src.weights, tgt.weights, cost);

        BatchSpec spec{6, 32, BatchSampling::without_replacement, derive_seed(seed, 3)};
        SolverKind balanced;
        AggregatedResult ot_result = mb_transport(src, tgt, spec, balanced);
        ot_counts.push_back(static_cast<double>(
            mapping_census(ot_result.padded_plan, full, kCensusThresholdExact).misspecified));

        std::size_t best = SIZE_MAX;
        for (double s : s_grid) {
            AggregatedResult result = mb_transport(src, tgt, spec, pot_kind(s));
            std::size_t mis =
                mapping_census(result.padded_plan, full, kCensusThresholdExact).misspecified;
            best = std::min(best, mis);
        }
        pot_counts.push_back(static_cast<double>(best));
    }
    double seconds = elapsed_seconds(start);
    double ot_median = median(ot_counts), pot_median = median(pot_counts);
    detail = "median misspecified ot " + std::to_string(ot_median) + " vs pot " +
             std::to_string(pot_median) + " in " + std::to_string(seconds) + " s";
    return pot_median < ot_median && seconds < 30.0;
}

bool criterion_value_concentration(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    ConcentrationReport report = concentration_value_experiment(
        100, 10, 0.75, {1, 4, 16}, 200, 606, {},
        {DistributionSpec::Kind::gaussian, 2, 2.0, 1.0}, 2);
    double seconds = elapsed_seconds(start);

    bool ok = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        if (report.rows[i].stddev > report.rows[i - 1].stddev) ok = false;
    std::string ratios;
    for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
        double ratio = report.rows[i].stddev / report.rows[i + 1].stddev;
        ratios += (i ? "," : "") + std::to_string(ratio);
        if (ratio < 1.3 || ratio > 3.1) ok = false;
    }
    detail = "std ratios " + ratios + " in " + std::to_string(seconds) + " s";
    return ok && seconds < 300.0;
}

bool criterion_plan_concentration(std::string& detail) {
    ConcentrationReport report = concentration_plan_experiment(
        8, 3, 0.5, {16, 256, 4096}, 30, 707, {},
        {DistributionSpec::Kind::gaussian, 2, 2.0, 1.0}, 2);
    double d16 = report.rows[0].mean, d256 = report.rows[1].mean, d4096 = report.rows[2].mean;
    detail = "deviations " + std::to_string(d16) + " > " + std::to_string(d256) + " > " +
             std::to_string(d4096);
    return d16 > d256 && d256 > d4096 && d4096 <= d16 / 3.0;
}

bool criterion_equivalent_form(std::string& detail) {
    Rng rng(808);
    const double s_grid[4] = {0.25, 0.5, 0.75, 1.0};
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t m = 3 + rng.uniform_int(4);
        auto src = random_cloud(m, 2, rng);
        auto tgt = random_cloud(m, 2, rng);
        CostMatrix cost = build_cost(src, tgt, CostMetric::euclidean);
        double s = s_grid[trial % 4];

        ExtendedProblem ext = extend_with_dummy(src.weights, tgt.weights, cost, s, 1.0);
        TransportPlan extended = solve_ot_exact(ext.a, ext.b, ext.cost);
        TransportPlan direct =
            solve_pot_exact(src.weights, tgt.weights, cost, PartialParams{s, 1.0, {}});
        if (std::abs(extended.objective - direct.objective) > 1e-9) {
            detail = "identity violated at batch " + std::to_string(trial);
            return false;
        }
    }
    detail = "100 batches";
    return true;
}

bool criterion_gradient_flow(std::string& detail) {
    auto start = std::chrono::steady_clock::now();

    // Finite-difference agreement of the fixed-plan gradient.
    Rng rng(909);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 2 + rng.uniform_int(3), m = 2 + rng.uniform_int(3);
        Mat x(n, 2), y(m, 2), pi(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < 2; ++c) x(i, c) = rng.next_double();
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t c = 0; c < 2; ++c) y(j, c) = rng.next_double();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                pi(i, j) = rng.next_double() / static_cast<double>(n * m);
        auto cost_of = [&](const Mat& pts) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    double dx = pts(i, 0) - y(j, 0), dy = pts(i, 1) - y(j, 1);
                    total += pi(i, j) * (dx * dx + dy * dy);
                }
            return total;
        };
        Mat grad = fixed_plan_gradient(x, y, pi);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < 2; ++c) {
                Mat hi = x, lo = x;
                hi(i, c) += 1e-6;
                lo(i, c) -= 1e-6;
                double fd = (cost_of(hi) - cost_of(lo)) / 2e-6;
                if (std::abs(grad(i, c) - fd) / std::max(1.0, std::abs(fd)) > 1e-5) {
                    detail = "finite-difference mismatch";
                    return false;
                }
            }
    }

    // S-shape runs: 5 seeds x {ot, pot 0.8, pot 0.9}, long enough for every
    // flow to reach its plateau.
    const std::size_t n = 1000, steps = 600000;
    struct Run {
        SolverKind kind;
        std::uint64_t seed;
        double final_w2 = 0.0;
    };
    std::vector<Run> runs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        runs.push_back({SolverKind{}, seed});
        runs.push_back({pot_kind(0.8), seed});
        runs.push_back({pot_kind(0.9), seed});
    }
    parallel_for(runs.size(), 2, [&](std::size_t i) {
        DiscreteMeasure target = make_s_curve(n, 1000 + runs[i].seed);
        DiscreteMeasure init = make_cluster_blob(n, 2000 + runs[i].seed, 0.0, 0.0, 0.25);
        FlowTrajectory traj =
            gradient_flow(init, target, runs[i].kind, 4, 4, 0.001, steps, runs[i].seed, 0);
        runs[i].final_w2 = traj.w2_curve.back().second;
    });
    std::vector<double> ot, pot8, pot9;
    for (std::size_t i = 0; i < runs.size(); i += 3) {
        ot.push_back(runs[i].final_w2);
        pot8.push_back(runs[i + 1].final_w2);
        pot9.push_back(runs[i + 2].final_w2);
    }
    double ot_median = median(ot);
    double pot_median = std::min(median(pot8), median(pot9));
    double seconds = elapsed_seconds(start);
    detail = "median final W2: pot " + std::to_string(pot_median) + " vs ot " +
             std::to_string(ot_median) + " in " + std::to_string(seconds) + " s";
    return pot_median <= ot_median && seconds < 600.0;
}

bool criterion_color_transfer(std::string& detail) {
    fs::path dir = g_work / "color";
    fs::create_directories(dir);
    ImageRGB source = gradient_image(64, 11, true);
    ImageRGB target = gradient_image(64, 13, false);
    write_ppm(source, (dir / "source.ppm").string());
    write_ppm(target, (dir / "target.ppm").string());

    // Self transfer through the CLI: visited pixels keep their color up to
    // the byte quantization; untouched pixels are copied verbatim.
    if (run_cli("color --source " + (dir / "source.ppm").string() + " --target " +
                (dir / "source.ppm").string() + " --kind ot --k 256 --m 64 --seed 5 " +
                "--out-dir " + (dir / "self").string()) != 0) {
        detail = "self-transfer run failed";
        return false;
    }
    ImageRGB quantized = read_ppm((dir / "source.ppm").string());
    ImageRGB self = read_ppm((dir / "self" / "transferred.ppm").string());
    for (std::size_t p = 0; p < self.pixels.size(); ++p)
        for (std::size_t c = 0; c < 3; ++c)
            if (std::abs(self.pixels[p][c] - quantized.pixels[p][c]) > 1.0 / 255.0 + 1e-12) {
                detail = "self transfer moved a pixel";
                return false;
            }

    std::vector<std::size_t> unmodified;
    for (double s : {0.5, 0.9, 1.0}) {
        std::string out = (dir / ("s" + std::to_string(static_cast<int>(s * 100)))).string();
        char flags[160];
        std::snprintf(flags, sizeof(flags),
                      "--kind pot --s %.2f --k 256 --m 64 --seed 5 --out-dir ", s);
        if (run_cli("color --source " + (dir / "source.ppm").string() + " --target " +
                    (dir / "target.ppm").string() + " " + flags + out) != 0) {
            detail = "transfer run failed";
            return false;
        }
        ImageRGB transferred = read_ppm(out + "/transferred.ppm");
        if (transferred.width != 64 || transferred.height != 64) {
            detail = "bad output image";
            return false;
        }
        for (const auto& px : transferred.pixels)
            for (double c : px)
                if (c < 0.0 || c > 1.0) {
                    detail = "channel out of range";
                    return false;
                }
        unmodified.push_back(
            slurp_json(out + "/stats.json")["unmodified_pixels"].get<std::size_t>());
    }
    detail = "unmodified pixels " + std::to_string(unmodified[0]) + " >= " +
             std::to_string(unmodified[1]) + " >= " + std::to_string(unmodified[2]);
    return unmodified[0] >= unmodified[1] && unmodified[1] >= unmodified[2];
}

bool criterion_determinism(std::string& detail) {
    fs::path dir = g_work / "determinism";
    fs::create_directories(dir);
    Rng rng(23);
    write_point_cloud_csv(random_cloud(10, 2, rng), (dir / "src.csv").string());
    write_point_cloud_csv(random_cloud(10, 2, rng), (dir / "tgt.csv").string());
    ImageRGB image = gradient_image(16, 3, true);
    write_ppm(image, (dir / "img.ppm").string());

    struct Case {
        std::string name;
        std::string args;
        std::vector<std::string> outputs;
    };
    std::string src = (dir / "src.csv").string(), tgt = (dir / "tgt.csv").string();
    std::string img = (dir / "img.ppm").string();
    std::vector<Case> cases = {
        {"minibatch",
         "minibatch --source " + src + " --target " + tgt +
             " --kind pot --s 0.6 --m 4 --k 12 --seed 99 --out-dir ",
         {"value.json", "padded_plan.csv", "batch_records.csv"}},
        {"concentration",
         "concentration --mode value --n 12 --m 4 --s 0.5 --k-grid 1,4 --replicates 30 "
         "--seed 5 --out-dir ",
         {"report.csv", "report.json"}},
        {"flow",
         "flow --init " + src + " --target " + tgt +
             " --kind ot --k 2 --m 3 --lr 0.001 --steps 40 --seed 21 --eval-every 20 "
             "--out-dir ",
         {"snapshot_00000000.csv", "snapshot_00000020.csv", "snapshot_00000040.csv",
          "w2_curve.csv"}},
        {"color",
         "color --source " + img + " --target " + img +
             " --kind ot --k 16 --m 16 --seed 8 --out-dir ",
         {"transferred.ppm", "stats.json"}},
    };

    for (const Case& test_case : cases) {
        fs::path a = dir / (test_case.name + "_a");
        fs::path b = dir / (test_case.name + "_b");
        if (run_cli("--threads 1 " + test_case.args + a.string()) != 0 ||
            run_cli("--threads 4 " + test_case.args + b.string()) != 0) {
            detail = test_case.name + " run failed";
            return false;
        }
        for (const std::string& output : test_case.outputs)
            if (slurp(a / output) != slurp(b / output)) {
                detail = test_case.name + "/" + output + " differs across thread counts";
                return false;
            }
    }
    detail = "4 subcommands byte-identical across thread counts";
    return true;
}

}  // namespace

int main() {
    const char* cli = std::getenv("MBOT_CLI");
    if (cli == nullptr) {
        std::fprintf(stderr, "MBOT_CLI must point at the built binary\n");
        return 2;
    }
    g_cli = cli;
    g_work = fs::temp_directory_path() / "mbot_acceptance";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    struct Criterion {
        int number;
        const char* label;
        std::function<bool(std::string&)> run;
    };
    std::vector<Criterion> criteria = {
        {1, "exact solvers match exhaustive enumeration", criterion_oracle_equivalence},
        {2, "reduction and dummy-cost laws", criterion_reduction_and_dummy},
        {3, "offset three-point batch and its census", criterion_offset_batch},
        {4, "cost-scale behavior of partial and unbalanced plans", criterion_scale_behavior},
        {5, "misspecified-mapping ordering on bimodal clouds", criterion_census_ordering},
        {6, "aggregated value concentration in the batch count", criterion_value_concentration},
        {7, "aggregated plan concentration toward full enumeration",
         criterion_plan_concentration},
        {8, "dummy-extended balanced solves equal the partial solver",
         criterion_equivalent_form},
        {9, "gradient flow: gradient check and final-distance ordering",
         criterion_gradient_flow},
        {10, "color transfer end to end through the CLI", criterion_color_transfer},
        {11, "byte-identical reruns at any thread count", criterion_determinism},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion.number,
                    criterion.label, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
