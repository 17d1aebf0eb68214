#include "mbot/apps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mbot/rng.hpp"
#include "mbot/transport_core.hpp"

namespace mbot {

void ImageRGB::validate() const {
    if (width == 0 || height == 0) throw InvalidInputError("empty image");
    if (pixels.size() != width * height)
        throw InvalidInputError("pixel buffer does not match image dimensions");
    for (const auto& px : pixels)
        for (double c : px)
            if (!(c >= 0.0) || c > 1.0) throw InvalidInputError("channel outside [0, 1]");
}

namespace {

int next_ppm_token(std::istream& in, std::string& token) {
    token.clear();
    int c;
    for (;;) {
        c = in.get();
        if (c == EOF) return EOF;
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
            continue;
        }
        if (!std::isspace(c)) break;
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    return c;
}

}  // namespace

ImageRGB read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open image: " + path);

    std::string token;
    if (next_ppm_token(in, token) == EOF || token != "P6")
        throw InvalidInputError("not a binary P6 pixmap: " + path);

    auto read_number = [&](const char* what) {
        if (next_ppm_token(in, token) == EOF)
            throw InvalidInputError(std::string("truncated pixmap header: missing ") + what);
        std::size_t value = 0;
        for (char ch : token) {
            if (ch < '0' || ch > '9')
                throw InvalidInputError(std::string("malformed pixmap ") + what);
            value = value * 10 + static_cast<std::size_t>(ch - '0');
        }
        return value;
    };

    std::size_t width = read_number("width");
    std::size_t height = read_number("height");
    std::size_t maxval = read_number("maxval");
    if (width == 0 || height == 0) throw InvalidInputError("empty pixmap");
    if (maxval != 255) throw InvalidInputError("only maxval 255 pixmaps are supported");

    ImageRGB image;
    image.width = width;
    image.height = height;
    image.pixels.resize(width * height);
    std::vector<unsigned char> raw(width * height * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw InvalidInputError("truncated pixmap payload: " + path);
    for (std::size_t p = 0; p < image.pixels.size(); ++p)
        for (std::size_t c = 0; c < 3; ++c)
            image.pixels[p][c] = static_cast<double>(raw[3 * p + c]) / 255.0;
    return image;
}

void write_ppm(const ImageRGB& image, const std::string& path) {
    image.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write image: " + path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> raw(image.pixels.size() * 3);
    for (std::size_t p = 0; p < image.pixels.size(); ++p)
        for (std::size_t c = 0; c < 3; ++c) {
            double v = std::clamp(image.pixels[p][c], 0.0, 1.0);
            raw[3 * p + c] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw InvalidInputError("failed writing image: " + path);
}

namespace {

DiscreteMeasure colors_at(const ImageRGB& image, const std::vector<std::size_t>& idx) {
    Mat pts(idx.size(), 3);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < 3; ++c) pts(r, c) = image.pixels[idx[r]][c];
    return DiscreteMeasure::uniform(std::move(pts));
}

}  // namespace

ColorTransferResult color_transfer_detailed(const ImageRGB& source, const ImageRGB& target,
                                            std::size_t k, std::size_t m,
                                            const SolverKind& solver, std::uint64_t seed) {
    source.validate();
    target.validate();
    solver.validate();
    if (k < 1) throw InvalidInputError("iteration count must be at least 1");
    if (m < 1 || m > std::min(source.pixel_count(), target.pixel_count()))
        throw InvalidInputError("batch size must lie in [1, min pixel count]");

    SolverKind batch_solver = solver;
    batch_solver.metric = CostMetric::squared_euclidean;

    std::size_t n = source.pixel_count();
    std::vector<std::array<double, 3>> accum(n, {0.0, 0.0, 0.0});
    std::vector<std::uint32_t> visits(n, 0);

    for (std::size_t it = 0; it < k; ++it) {
        // The two sides share one substream per iteration, so equal-size
        // identical images draw identical index sets and self-transfer is an
        // exact identity.
        Rng src_rng(derive_seed(seed, it, 0));
        Rng tgt_rng(derive_seed(seed, it, 0));
        std::vector<std::size_t> a = src_rng.sample_without_replacement(n, m);
        std::vector<std::size_t> b = tgt_rng.sample_without_replacement(target.pixel_count(), m);

        DiscreteMeasure batch_src = colors_at(source, a);
        DiscreteMeasure batch_tgt = colors_at(target, b);
        TransportPlan plan;
        try {
            plan = solve_kind(batch_src, batch_tgt, batch_solver);
        } catch (const std::exception& e) {
            throw SolverFailureError("iteration " + std::to_string(it) + ": " + e.what());
        }

        for (std::size_t p = 0; p < m; ++p) {
            double row_mass = 0.0;
            for (std::size_t q = 0; q < m; ++q) row_mass += plan.coupling(p, q);
            if (row_mass <= 0.0) continue;  // partial plans skip unmatched pixels
            std::array<double, 3> bary = {0.0, 0.0, 0.0};
            for (std::size_t q = 0; q < m; ++q) {
                double w = plan.coupling(p, q) / row_mass;
                if (w == 0.0) continue;
                for (std::size_t c = 0; c < 3; ++c) bary[c] += w * batch_tgt.points(q, c);
            }
            std::size_t pixel = a[p];
            for (std::size_t c = 0; c < 3; ++c) accum[pixel][c] += bary[c];
            ++visits[pixel];
        }
    }

    ColorTransferResult result;
    result.image.width = source.width;
    result.image.height = source.height;
    result.image.pixels.resize(n);
    result.visits = std::move(visits);
    for (std::size_t p = 0; p < n; ++p) {
        if (result.visits[p] == 0) {
            result.image.pixels[p] = source.pixels[p];
            ++result.unmodified_pixels;
            continue;
        }
        for (std::size_t c = 0; c < 3; ++c)
            result.image.pixels[p][c] =
                std::clamp(accum[p][c] / static_cast<double>(result.visits[p]), 0.0, 1.0);
    }
    return result;
}

ImageRGB color_transfer(const ImageRGB& source, const ImageRGB& target, std::size_t k,
                        std::size_t m, const SolverKind& solver, std::uint64_t seed) {
    return color_transfer_detailed(source, target, k, m, solver, seed).image;
}

Mat fixed_plan_gradient(const Mat& source_points, const Mat& target_points, const Mat& coupling) {
    if (coupling.rows() != source_points.rows() || coupling.cols() != target_points.rows())
        throw InvalidInputError("coupling shape does not match the point clouds");
    if (source_points.cols() != target_points.cols())
        throw InvalidInputError("point dimensions differ");

    std::size_t d = source_points.cols();
    Mat grad(source_points.rows(), d);
    for (std::size_t i = 0; i < coupling.rows(); ++i)
        for (std::size_t j = 0; j < coupling.cols(); ++j) {
            double w = coupling(i, j);
            if (w == 0.0) continue;
            for (std::size_t c = 0; c < d; ++c)
                grad(i, c) += 2.0 * w * (source_points(i, c) - target_points(j, c));
        }
    return grad;
}

FlowTrajectory gradient_flow(const DiscreteMeasure& init, const DiscreteMeasure& target,
                             const SolverKind& loss, std::size_t k, std::size_t m,
                             double learning_rate, std::size_t steps, std::uint64_t seed,
                             std::size_t eval_every) {
    init.validate();
    target.validate();
    loss.validate();
    if (!(learning_rate >= 0.0)) throw InvalidInputError("learning rate must be nonnegative");
    if (k < 1) throw InvalidInputError("batch count must be at least 1");
    if (m < 1 || m > init.size() || m > target.size())
        throw InvalidInputError("batch size must lie in [1, min support count]");

    SolverKind batch_solver = loss;
    batch_solver.metric = CostMetric::squared_euclidean;

    std::size_t n = init.size(), d = init.dim();
    Mat positions = init.points;

    FlowTrajectory traj;
    traj.config = {loss.kind, k, m, learning_rate, steps, seed, eval_every};

    auto record = [&](std::size_t step) {
        traj.snapshots.push_back({step, positions});
        DiscreteMeasure current = DiscreteMeasure::uniform(positions);
        traj.w2_curve.emplace_back(step, wasserstein2(current, target));
    };

    record(0);
    std::vector<Mat> batch_grads(k);
    std::vector<std::vector<std::size_t>> batch_sources(k);

    for (std::size_t step = 1; step <= steps; ++step) {
        for (std::size_t batch = 0; batch < k; ++batch) {
            Rng src_rng(derive_seed(seed, step, batch, 0));
            Rng tgt_rng(derive_seed(seed, step, batch, 1));
            std::vector<std::size_t> a = src_rng.sample_without_replacement(n, m);
            std::vector<std::size_t> b = tgt_rng.sample_without_replacement(target.size(), m);

            Mat src_pts(m, d), tgt_pts(m, d);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < d; ++c) {
                    src_pts(r, c) = positions(a[r], c);
                    tgt_pts(r, c) = target.points(b[r], c);
                }

            TransportPlan plan;
            try {
                plan = solve_kind(DiscreteMeasure::uniform(src_pts),
                                  DiscreteMeasure::uniform(tgt_pts), batch_solver);
            } catch (const std::exception& e) {
                throw SolverFailureError("step " + std::to_string(step) + ": " + e.what());
            }
            batch_grads[batch] = fixed_plan_gradient(src_pts, tgt_pts, plan.coupling);
            batch_sources[batch] = std::move(a);
        }

        // Reduce the k batch gradients in batch order, then apply one Euler
        // step on the mean batch cost.
        double scale = learning_rate / static_cast<double>(k);
        for (std::size_t batch = 0; batch < k; ++batch) {
            const auto& idx = batch_sources[batch];
            const Mat& grad = batch_grads[batch];
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (std::size_t c = 0; c < d; ++c) {
                    double next = positions(idx[r], c) - scale * grad(r, c);
                    if (!std::isfinite(next))
                        throw SolverFailureError("non-finite position at step " +
                                                 std::to_string(step));
                    positions(idx[r], c) = next;
                }
        }

        if ((eval_every > 0 && step % eval_every == 0) || step == steps) record(step);
    }
    return traj;
}

DiscreteMeasure make_s_curve(std::size_t n, std::uint64_t seed, double jitter) {
    if (n == 0) throw InvalidInputError("cannot build an empty cloud");
    constexpr double two_pi = 6.283185307179586;
    Rng rng(derive_seed(seed, 0x51));
    Mat pts(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.next_double();
        pts(i, 0) = 0.5 * std::sin(two_pi * u) + jitter * rng.next_normal();
        pts(i, 1) = 2.0 * u - 1.0 + jitter * rng.next_normal();
    }
    return DiscreteMeasure::uniform(std::move(pts));
}

DiscreteMeasure make_cluster_blob(std::size_t n, std::uint64_t seed, double cx, double cy,
                                  double spread) {
    if (n == 0) throw InvalidInputError("cannot build an empty cloud");
    Rng rng(derive_seed(seed, 0x52));
    Mat pts(n, 2);
    const double offsets[4][2] = {{-0.5, -0.5}, {-0.5, 0.5}, {0.5, -0.5}, {0.5, 0.5}};
    for (std::size_t i = 0; i < n; ++i) {
        const double* off = offsets[i % 4];
        pts(i, 0) = cx + off[0] + spread * rng.next_normal();
        pts(i, 1) = cy + off[1] + spread * rng.next_normal();
    }
    return DiscreteMeasure::uniform(std::move(pts));
}

}  // namespace mbot
