// mbot: command-line front end for the mini-batch optimal transport toolkit.
//
// Subcommands: solve, minibatch, census, concentration, flow, color.
// Every successful run writes its primary outputs plus a manifest.json that
// records the resolved parameters, paths, seed and wall-clock duration.
// Exit codes: 0 success, 1 usage, 2 input, 3 solver, 4 resource limit.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

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

namespace {

constexpr const char* kVersion = "mbot 0.1.0";

struct CommonSolverFlags {
    std::string kind = "ot";
    std::string metric = "euclidean";
    bool entropic = false;
    double epsilon = 0.01;
    double tolerance = 1e-7;
    int max_iterations = 10000;
    double fraction = 1.0;
    bool fraction_set = false;
    std::optional<double> dummy_cost;
    double tau = 1.0;
    bool tau_set = false;

    void add_to(CLI::App* cmd, bool include_metric = true) {
        cmd->add_option("--kind", kind, "transport kind")
            ->check(CLI::IsMember({"ot", "uot", "pot"}))
            ->capture_default_str();
        if (include_metric)
            cmd->add_option("--metric", metric, "ground metric")
                ->check(CLI::IsMember({"euclidean", "squared_euclidean"}))
                ->capture_default_str();
        cmd->add_flag("--entropic", entropic, "use the entropic solver for ot/pot");
        cmd->add_option("--epsilon", epsilon, "entropic regularization")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--tolerance", tolerance, "solver stop tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--max-iterations", max_iterations, "solver iteration cap")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--s", fraction, "transported mass fraction for pot")
            ->check(CLI::Range(1e-12, 1.0))
            ->each([this](const std::string&) { fraction_set = true; });
        cmd->add_option(
            "--dummy-cost",
            [this](const std::vector<std::string>& vals) {
                dummy_cost = std::stod(vals.front());
                return *dummy_cost > 0.0;
            },
            "dummy corner cost for pot (defaults per solver)");
        cmd->add_option("--tau", tau, "marginal relaxation for uot")
            ->check(CLI::PositiveNumber)
            ->each([this](const std::string&) { tau_set = true; });
    }

    mbot::SolverKind make_kind() const {
        mbot::SolverKind solver;
        solver.metric = metric == "euclidean" ? mbot::CostMetric::euclidean
                                              : mbot::CostMetric::squared_euclidean;
        mbot::SolverParams params{epsilon, tolerance, max_iterations};
        if (kind == "ot") {
            solver.kind = mbot::TransportKind::ot;
            if (entropic) solver.entropic = params;
        } else if (kind == "pot") {
            solver.kind = mbot::TransportKind::pot;
            if (!fraction_set)
                throw CLI::ValidationError("--s is required with --kind pot");
            mbot::PartialParams partial;
            partial.fraction = fraction;
            partial.dummy_cost = dummy_cost;
            if (entropic) partial.entropic = params;
            solver.pot = partial;
        } else {
            solver.kind = mbot::TransportKind::uot;
            if (!tau_set)
                throw CLI::ValidationError("--tau is required with --kind uot");
            solver.uot = mbot::UotParams{tau, params, mbot::Divergence::kl};
        }
        return solver;
    }

    json to_json() const {
        json j{{"kind", kind},       {"metric", metric},       {"entropic", entropic},
               {"epsilon", epsilon}, {"tolerance", tolerance},
               {"max_iterations", max_iterations}};
        if (fraction_set) j["s"] = fraction;
        if (dummy_cost) j["dummy_cost"] = *dummy_cost;
        if (tau_set) j["tau"] = tau;
        return j;
    }
};

struct ManifestWriter {
    std::string subcommand;
    json parameters = json::object();
    json seed;  // null for non-randomized subcommands
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void write(const fs::path& dir) const {
        json manifest{{"subcommand", subcommand},
                      {"version", kVersion},
                      {"parameters", parameters},
                      {"seed", seed},
                      {"inputs", inputs},
                      {"outputs", outputs},
                      {"duration_seconds",
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                           .count()}};
        std::ofstream out(dir / "manifest.json");
        if (!out) throw mbot::InvalidInputError("cannot write manifest in " + dir.string());
        out << manifest.dump(2) << "\n";
    }
};

fs::path prepare_out_dir(const std::string& out_dir) {
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw mbot::InvalidInputError("cannot create output directory " + out_dir);
    return dir;
}

void write_json_file(const fs::path& path, const json& payload) {
    std::ofstream out(path);
    if (!out) throw mbot::InvalidInputError("cannot write " + path.string());
    out << payload.dump(2) << "\n";
}

json plan_summary(const mbot::TransportPlan& plan) {
    return json{{"objective", plan.objective},
                {"total_mass", plan.total_mass},
                {"solver", mbot::to_string(plan.solver)},
                {"converged", plan.converged},
                {"rows", plan.coupling.rows()},
                {"cols", plan.coupling.cols()}};
}

mbot::DistributionSpec parse_dist(const std::string& name, std::size_t dim, double shift,
                                  double scale) {
    mbot::DistributionSpec spec;
    spec.dim = dim;
    spec.shift = shift;
    spec.scale = scale;
    if (name == "gaussian") spec.kind = mbot::DistributionSpec::Kind::gaussian;
    else if (name == "uniform") spec.kind = mbot::DistributionSpec::Kind::uniform_cube;
    else if (name == "bimodal_source") spec.kind = mbot::DistributionSpec::Kind::bimodal_source;
    else spec.kind = mbot::DistributionSpec::Kind::bimodal_target;
    return spec;
}

std::vector<std::size_t> parse_k_grid(const std::string& text) {
    std::vector<std::size_t> grid;
    std::string token;
    std::stringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        long long value = std::stoll(token);
        if (value < 1) throw CLI::ValidationError("k grid entries must be positive");
        grid.push_back(static_cast<std::size_t>(value));
    }
    if (grid.empty()) throw CLI::ValidationError("empty k grid");
    return grid;
}

void write_batch_records(const mbot::AggregatedResult& result, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw mbot::InvalidInputError("cannot write " + path.string());
    out << "batch,source_indices,target_indices,objective\n";
    auto join = [](const std::vector<std::size_t>& idx) {
        std::string text;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (k > 0) text += ' ';
            text += std::to_string(idx[k]);
        }
        return text;
    };
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const mbot::BatchRecord& record = result.records[i];
        out << i << "," << join(record.source) << "," << join(record.target) << ","
            << mbot::format_double(record.objective) << "\n";
    }
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const std::string& source_path, const std::string& target_path,
              const CommonSolverFlags& flags, const std::string& out_dir) {
    ManifestWriter manifest;
    manifest.subcommand = "solve";
    manifest.inputs = {source_path, target_path};
    manifest.parameters = flags.to_json();

    mbot::DiscreteMeasure source = mbot::read_point_cloud_csv(source_path);
    mbot::DiscreteMeasure target = mbot::read_point_cloud_csv(target_path);
    mbot::SolverKind solver = flags.make_kind();
    mbot::TransportPlan plan = mbot::solve_kind(source, target, solver);

    fs::path dir = prepare_out_dir(out_dir);
    mbot::write_plan_csv(plan.coupling, (dir / "plan.csv").string());
    write_json_file(dir / "summary.json", plan_summary(plan));
    manifest.outputs = {(dir / "plan.csv").string(), (dir / "summary.json").string()};
    manifest.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// minibatch

int cmd_minibatch(const std::string& source_path, const std::string& target_path,
                  const CommonSolverFlags& flags, std::size_t m, std::size_t k,
                  std::uint64_t seed, const std::string& sampling, bool enumerate,
                  std::uint64_t pair_cap, bool two_stage, std::size_t big_batch,
                  std::size_t threads, const std::string& out_dir) {
    ManifestWriter manifest;
    manifest.subcommand = "minibatch";
    manifest.inputs = {source_path, target_path};
    manifest.parameters = flags.to_json();
    manifest.parameters["m"] = m;
    manifest.parameters["k"] = k;
    manifest.parameters["seed"] = seed;
    manifest.seed = seed;
    manifest.parameters["sampling"] = sampling;
    manifest.parameters["enumerate"] = enumerate;
    manifest.parameters["threads"] = threads;

    mbot::DiscreteMeasure source = mbot::read_point_cloud_csv(source_path);
    mbot::DiscreteMeasure target = mbot::read_point_cloud_csv(target_path);
    mbot::SolverKind solver = flags.make_kind();
    fs::path dir = prepare_out_dir(out_dir);

    if (two_stage) {
        manifest.parameters["big_batch"] = big_batch;
        mbot::Alignment alignment =
            mbot::two_stage_align(source, target, big_batch, m, solver, seed);
        {
            std::ofstream out(dir / "gamma.csv");
            if (!out) throw mbot::InvalidInputError("cannot write gamma.csv");
            out << "source_position,source_index,target_position,target_index\n";
            for (std::size_t i = 0; i < alignment.gamma.size(); ++i) {
                out << i << "," << alignment.source_indices[i] << ",";
                if (alignment.gamma[i])
                    out << *alignment.gamma[i] << ","
                        << alignment.target_indices[*alignment.gamma[i]];
                else
                    out << "absent,absent";
                out << "\n";
            }
        }
        manifest.outputs.push_back((dir / "gamma.csv").string());
        for (std::size_t b = 0; b < alignment.blocks.size(); ++b) {
            char name[32];
            std::snprintf(name, sizeof(name), "block_%03zu.csv", b);
            mbot::write_plan_csv(alignment.blocks[b].sub_plan, (dir / name).string());
            manifest.outputs.push_back((dir / name).string());
        }
        manifest.write(dir);
        return 0;
    }

    mbot::AggregatedResult result;
    if (enumerate) {
        manifest.parameters["pair_cap"] = pair_cap;
        double s = flags.kind == "pot" ? flags.fraction : 1.0;
        result = mbot::full_mb_pot(source, target, m, s, solver.metric, pair_cap, threads);
    } else {
        mbot::BatchSpec spec{m, k,
                             sampling == "with_replacement"
                                 ? mbot::BatchSampling::with_replacement
                                 : mbot::BatchSampling::without_replacement,
                             seed};
        result = mbot::mb_transport(source, target, spec, solver, threads);
    }

    write_json_file(dir / "value.json",
                    json{{"value", result.value},
                         {"batches", result.records.size()},
                         {"padded_plan_mass", result.padded_plan.sum()}});
    mbot::write_plan_csv(result.padded_plan, (dir / "padded_plan.csv").string());
    write_batch_records(result, dir / "batch_records.csv");
    manifest.outputs = {(dir / "value.json").string(), (dir / "padded_plan.csv").string(),
                        (dir / "batch_records.csv").string()};
    manifest.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// census

int cmd_census(const std::string& candidate_path, const std::string& reference_path,
               double threshold, std::size_t rows, std::size_t cols,
               const std::string& out_dir) {
    ManifestWriter manifest;
    manifest.subcommand = "census";
    manifest.inputs = {candidate_path, reference_path};
    manifest.parameters = {{"threshold", threshold}, {"rows", rows}, {"cols", cols}};

    mbot::Mat reference_mat = mbot::read_plan_csv(reference_path, rows, cols);
    mbot::Mat candidate =
        mbot::read_plan_csv(candidate_path, reference_mat.rows(), reference_mat.cols());
    mbot::TransportPlan reference;
    reference.coupling = reference_mat;
    mbot::MappingCensus census = mbot::mapping_census(candidate, reference, threshold);

    fs::path dir = prepare_out_dir(out_dir);
    write_json_file(dir / "census.json", json{{"total", census.total},
                                              {"misspecified", census.misspecified},
                                              {"optimal", census.optimal},
                                              {"threshold", census.threshold}});
    manifest.outputs = {(dir / "census.json").string()};
    manifest.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// concentration

int cmd_concentration(const std::string& mode, std::size_t n, std::size_t m, double s,
                      const std::string& k_grid_text, std::size_t replicates,
                      std::uint64_t seed, const mbot::DistributionSpec& source_dist,
                      const mbot::DistributionSpec& target_dist, std::size_t threads,
                      const std::string& out_dir) {
    ManifestWriter manifest;
    manifest.subcommand = "concentration";
    manifest.parameters = {{"mode", mode},          {"n", n},
                           {"m", m},                {"s", s},
                           {"k_grid", k_grid_text}, {"replicates", replicates},
                           {"seed", seed},          {"threads", threads}};
    manifest.seed = seed;

    std::vector<std::size_t> k_grid = parse_k_grid(k_grid_text);
    mbot::ConcentrationReport report =
        mode == "value"
            ? mbot::concentration_value_experiment(n, m, s, k_grid, replicates, seed,
                                                   source_dist, target_dist, threads)
            : mbot::concentration_plan_experiment(n, m, s, k_grid, replicates, seed,
                                                  source_dist, target_dist, threads);

    fs::path dir = prepare_out_dir(out_dir);
    {
        std::ofstream out(dir / "report.csv");
        if (!out) throw mbot::InvalidInputError("cannot write report.csv");
        report.write_csv(out);
    }
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw mbot::InvalidInputError("cannot write report.json");
        out << report.to_json() << "\n";
    }
    manifest.outputs = {(dir / "report.csv").string(), (dir / "report.json").string()};
    manifest.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// flow

int cmd_flow(const std::string& init_path, const std::string& target_path,
             const CommonSolverFlags& flags, std::size_t k, std::size_t m, double lr,
             std::size_t steps, std::uint64_t seed, std::size_t eval_every,
             const std::string& out_dir) {
    ManifestWriter manifest;
    manifest.subcommand = "flow";
    manifest.inputs = {init_path, target_path};
    manifest.parameters = flags.to_json();
    manifest.parameters["k"] = k;
    manifest.parameters["m"] = m;
    manifest.parameters["lr"] = lr;
    manifest.parameters["steps"] = steps;
    manifest.parameters["seed"] = seed;
    manifest.seed = seed;
    manifest.parameters["eval_every"] = eval_every;

    mbot::DiscreteMeasure init = mbot::read_point_cloud_csv(init_path);
    mbot::DiscreteMeasure target = mbot::read_point_cloud_csv(target_path);
    mbot::SolverKind solver = flags.make_kind();
    mbot::FlowTrajectory traj =
        mbot::gradient_flow(init, target, solver, k, m, lr, steps, seed, eval_every);

    fs::path dir = prepare_out_dir(out_dir);
    for (const mbot::FlowSnapshot& snap : traj.snapshots) {
        char name[40];
        std::snprintf(name, sizeof(name), "snapshot_%08zu.csv", snap.step);
        mbot::write_point_cloud_csv(mbot::DiscreteMeasure::uniform(snap.points),
                                    (dir / name).string(), /*include_weights=*/false);
        manifest.outputs.push_back((dir / name).string());
    }
    {
        std::ofstream out(dir / "w2_curve.csv");
        if (!out) throw mbot::InvalidInputError("cannot write w2_curve.csv");
        out << "step,w2\n";
        for (const auto& [step, w2] : traj.w2_curve)
            out << step << "," << mbot::format_double(w2) << "\n";
    }
    manifest.outputs.push_back((dir / "w2_curve.csv").string());
    manifest.write(dir);
    return 0;
}

// ---------------------------------------------------------------------------
// color

int cmd_color(const std::string& source_path, const std::string& target_path,
              const CommonSolverFlags& flags, std::size_t k, std::size_t m,
              std::uint64_t seed, const std::string& out_dir) {
    ManifestWriter manifest;
    manifest.subcommand = "color";
    manifest.inputs = {source_path, target_path};
    manifest.parameters = flags.to_json();
    manifest.parameters["k"] = k;
    manifest.parameters["m"] = m;
    manifest.parameters["seed"] = seed;
    manifest.seed = seed;

    mbot::ImageRGB source = mbot::read_ppm(source_path);
    mbot::ImageRGB target = mbot::read_ppm(target_path);
    mbot::SolverKind solver = flags.make_kind();
    mbot::ColorTransferResult result =
        mbot::color_transfer_detailed(source, target, k, m, solver, seed);

    fs::path dir = prepare_out_dir(out_dir);
    mbot::write_ppm(result.image, (dir / "transferred.ppm").string());
    std::size_t visited = 0;
    for (std::uint32_t v : result.visits)
        if (v > 0) ++visited;
    write_json_file(dir / "stats.json", json{{"visited_pixels", visited},
                                             {"unmodified_pixels", result.unmodified_pixels},
                                             {"width", result.image.width},
                                             {"height", result.image.height}});
    manifest.outputs = {(dir / "transferred.ppm").string(), (dir / "stats.json").string()};
    manifest.write(dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mini-batch optimal transport toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::size_t threads = mbot::default_thread_count();
    app.add_option("--threads", threads, "worker cap for parallel sections")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::string source_path, target_path, out_dir = "out";

    auto* solve = app.add_subcommand("solve", "solve one transport problem between two clouds");
    CommonSolverFlags solve_flags;
    solve->add_option("--source", source_path, "source point cloud CSV")->required();
    solve->add_option("--target", target_path, "target point cloud CSV")->required();
    solve_flags.add_to(solve);
    solve->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    auto* minibatch = app.add_subcommand("minibatch", "aggregate mini-batch transport");
    CommonSolverFlags mb_flags;
    std::size_t mb_m = 1, mb_k = 1, big_batch = 0;
    std::uint64_t mb_seed = 0, pair_cap = 1000000;
    std::string sampling = "without_replacement";
    bool enumerate = false, two_stage = false;
    minibatch->add_option("--source", source_path, "source point cloud CSV")->required();
    minibatch->add_option("--target", target_path, "target point cloud CSV")->required();
    mb_flags.add_to(minibatch);
    minibatch->add_option("--m", mb_m, "batch size")->required()->check(CLI::PositiveNumber);
    minibatch->add_option("--k", mb_k, "number of batches")->check(CLI::PositiveNumber);
    minibatch->add_option("--seed", mb_seed, "sampling seed")->required();
    minibatch->add_option("--sampling", sampling, "within-batch sampling")
        ->check(CLI::IsMember({"without_replacement", "with_replacement"}))
        ->capture_default_str();
    minibatch->add_flag("--enumerate", enumerate, "average over all subset pairs");
    minibatch->add_option("--pair-cap", pair_cap, "enumeration pair cap")->capture_default_str();
    minibatch->add_flag("--two-stage", two_stage, "two-stage alignment mode");
    minibatch->add_option("--big-batch", big_batch, "big batch size for --two-stage");
    minibatch->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    auto* census = app.add_subcommand("census", "count mappings against a reference plan");
    std::string candidate_path, reference_path;
    double threshold = mbot::kCensusThresholdExact;
    std::size_t census_rows = 0, census_cols = 0;
    census->add_option("--candidate", candidate_path, "aggregated plan CSV")->required();
    census->add_option("--reference", reference_path, "reference plan CSV")->required();
    census->add_option("--threshold", threshold, "mapping mass threshold")
        ->capture_default_str();
    census->add_option("--rows", census_rows, "plan rows (inferred when omitted)");
    census->add_option("--cols", census_cols, "plan cols (inferred when omitted)");
    census->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    auto* concentration =
        app.add_subcommand("concentration", "batch-count concentration experiments");
    std::string mode = "value", k_grid_text = "1,4,16";
    std::size_t conc_n = 100, conc_m = 10, replicates = 200, dist_dim = 2;
    double conc_s = 0.75;
    std::uint64_t conc_seed = 0;
    std::string source_dist_name = "gaussian", target_dist_name = "gaussian";
    double source_shift = 0.0, target_shift = 2.0, source_scale = 1.0, target_scale = 1.0;
    concentration->add_option("--mode", mode, "value or plan")
        ->check(CLI::IsMember({"value", "plan"}))
        ->capture_default_str();
    concentration->add_option("--n", conc_n, "points per measure")->capture_default_str();
    concentration->add_option("--m", conc_m, "batch size")->capture_default_str();
    concentration->add_option("--s", conc_s, "transported fraction")
        ->check(CLI::Range(1e-12, 1.0))
        ->capture_default_str();
    concentration->add_option("--k-grid", k_grid_text, "comma-separated ascending batch counts")
        ->capture_default_str();
    concentration->add_option("--replicates", replicates, "replicates per k")
        ->capture_default_str();
    concentration->add_option("--seed", conc_seed, "experiment seed")->required();
    concentration->add_option("--dim", dist_dim, "sample dimension")->capture_default_str();
    const std::vector<std::string> dist_names = {"gaussian", "uniform", "bimodal_source",
                                                 "bimodal_target"};
    concentration->add_option("--source-dist", source_dist_name, "source distribution")
        ->check(CLI::IsMember(dist_names))
        ->capture_default_str();
    concentration->add_option("--target-dist", target_dist_name, "target distribution")
        ->check(CLI::IsMember(dist_names))
        ->capture_default_str();
    concentration->add_option("--source-shift", source_shift)->capture_default_str();
    concentration->add_option("--target-shift", target_shift)->capture_default_str();
    concentration->add_option("--source-scale", source_scale)->capture_default_str();
    concentration->add_option("--target-scale", target_scale)->capture_default_str();
    concentration->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    auto* flow = app.add_subcommand("flow", "mini-batch gradient flow between clouds");
    CommonSolverFlags flow_flags;
    std::size_t flow_k = 4, flow_m = 4, steps = 1000, eval_every = 0;
    double lr = 0.001;
    std::uint64_t flow_seed = 0;
    flow->add_option("--init", source_path, "initial point cloud CSV")->required();
    flow->add_option("--target", target_path, "target point cloud CSV")->required();
    flow_flags.add_to(flow, /*include_metric=*/false);
    flow->add_option("--k", flow_k, "batches per step")->capture_default_str();
    flow->add_option("--m", flow_m, "batch size")->capture_default_str();
    flow->add_option("--lr", lr, "learning rate")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    flow->add_option("--steps", steps, "Euler steps")->capture_default_str();
    flow->add_option("--seed", flow_seed, "sampling seed")->required();
    flow->add_option("--eval-every", eval_every, "snapshot/report cadence (0: ends only)")
        ->capture_default_str();
    flow->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    auto* color = app.add_subcommand("color", "mini-batch color transfer between images");
    CommonSolverFlags color_flags;
    std::size_t color_k = 128, color_m = 64;
    std::uint64_t color_seed = 0;
    color->add_option("--source", source_path, "source P6 image")->required();
    color->add_option("--target", target_path, "target P6 image")->required();
    color_flags.add_to(color, /*include_metric=*/false);
    color->add_option("--k", color_k, "iterations")->capture_default_str();
    color->add_option("--m", color_m, "pixels per batch")->capture_default_str();
    color->add_option("--seed", color_seed, "sampling seed")->required();
    color->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(source_path, target_path, solve_flags, out_dir);
        if (minibatch->parsed()) {
            if (two_stage && big_batch == 0)
                throw CLI::ValidationError("--two-stage requires --big-batch");
            return cmd_minibatch(source_path, target_path, mb_flags, mb_m, mb_k, mb_seed,
                                 sampling, enumerate, pair_cap, two_stage, big_batch, threads,
                                 out_dir);
        }
        if (census->parsed())
            return cmd_census(candidate_path, reference_path, threshold, census_rows,
                              census_cols, out_dir);
        if (concentration->parsed())
            return cmd_concentration(
                mode, conc_n, conc_m, conc_s, k_grid_text, replicates, conc_seed,
                parse_dist(source_dist_name, dist_dim, source_shift, source_scale),
                parse_dist(target_dist_name, dist_dim, target_shift, target_scale), threads,
                out_dir);
        if (flow->parsed())
            return cmd_flow(source_path, target_path, flow_flags, flow_k, flow_m, lr, steps,
                            flow_seed, eval_every, out_dir);
        if (color->parsed())
            return cmd_color(source_path, target_path, color_flags, color_k, color_m,
                             color_seed, out_dir);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const mbot::ResourceLimitError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 4;
    } catch (const mbot::SolverFailureError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const mbot::UnsupportedInstanceError& e) {
        std::cerr << "unsupported instance: " << e.what() << "\n";
        return 2;
    } catch (const mbot::InvalidInputError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
}
