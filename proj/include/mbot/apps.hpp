#ifndef MBOT_APPS_HPP
#define MBOT_APPS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mbot/minibatch.hpp"
#include "mbot/types.hpp"

namespace mbot {

struct ImageRGB {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::array<double, 3>> pixels;  // row-major, channels in [0, 1]

    std::size_t pixel_count() const { return pixels.size(); }
    void validate() const;
};

/// Binary portable pixmap ("P6", maxval 255) with bytes mapped linearly to
/// [0, 1]. Anything else is rejected as invalid input.
ImageRGB read_ppm(const std::string& path);
void write_ppm(const ImageRGB& image, const std::string& path);

struct ColorTransferResult {
    ImageRGB image;
    std::vector<std::uint32_t> visits;  // barycentric updates per source pixel
    std::size_t unmodified_pixels = 0;  // pixels never given a barycentric color
};

/// Mini-batch color transfer: repeatedly samples m source and m target
/// pixels, solves the chosen transport on their color vectors (squared
/// Euclidean cost) and accumulates row-normalized barycentric colors.
/// Pixels never reached by transported mass keep their source color.
ColorTransferResult color_transfer_detailed(const ImageRGB& source, const ImageRGB& target,
                                            std::size_t k, std::size_t m,
                                            const SolverKind& solver, std::uint64_t seed);

ImageRGB color_transfer(const ImageRGB& source, const ImageRGB& target, std::size_t k,
                        std::size_t m, const SolverKind& solver, std::uint64_t seed);

struct FlowConfig {
    TransportKind loss = TransportKind::ot;
    std::size_t k = 1;
    std::size_t m = 1;
    double learning_rate = 0.0;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    std::size_t eval_every = 0;
};

struct FlowSnapshot {
    std::size_t step = 0;
    Mat points;
};

struct FlowTrajectory {
    std::vector<FlowSnapshot> snapshots;                 // ordered by step
    std::vector<std::pair<std::size_t, double>> w2_curve;
    FlowConfig config;
};

/// Euler scheme on point positions under a mini-batch transport loss with
/// squared Euclidean ground cost. Each step draws k fresh batch pairs,
/// solves the chosen transport per pair and moves the sampled source points
/// along the fixed-plan gradient of the mean batch cost. Snapshots and the
/// Wasserstein-2 distance to the target are recorded every eval_every steps
/// (and always at the first and last step).
FlowTrajectory gradient_flow(const DiscreteMeasure& init, const DiscreteMeasure& target,
                             const SolverKind& loss, std::size_t k, std::size_t m,
                             double learning_rate, std::size_t steps, std::uint64_t seed,
                             std::size_t eval_every);

/// Fixed-plan gradient of <C, pi> with respect to the source positions under
/// squared Euclidean cost: row i gets 2 sum_j pi_ij (x_i - y_j).
Mat fixed_plan_gradient(const Mat& source_points, const Mat& target_points, const Mat& coupling);

/// Procedural S-shaped cloud: a sine arc swept vertically plus Gaussian
/// jitter. Uniform weights.
DiscreteMeasure make_s_curve(std::size_t n, std::uint64_t seed, double jitter = 0.05);

/// Procedural multi-cluster blob used as a flow starting measure: four
/// Gaussian clusters on a square centered at (cx, cy).
DiscreteMeasure make_cluster_blob(std::size_t n, std::uint64_t seed, double cx = -2.0,
                                  double cy = 0.0, double spread = 0.25);

}  // namespace mbot

#endif
