#ifndef MBOT_TYPES_HPP
#define MBOT_TYPES_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbot {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes.
class InvalidInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverFailureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedInstanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles. Small and unclever on purpose; every
/// problem this library solves fits comfortably in one contiguous buffer.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double sum() const {
        double s = 0.0;
        for (double v : data_) s += v;
        return s;
    }

    double max_abs() const {
        double s = 0.0;
        for (double v : data_) {
            double a = v < 0.0 ? -v : v;
            if (a > s) s = a;
        }
        return s;
    }

    std::vector<double> row_sums() const {
        std::vector<double> r(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r[i] += (*this)(i, j);
        return r;
    }

    std::vector<double> col_sums() const {
        std::vector<double> c(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) c[j] += (*this)(i, j);
        return c;
    }

    bool operator==(const Mat& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Weighted point cloud. Weights are nonnegative and sum to at most 1;
/// sub-measures produced by partial plans may carry total mass below 1.
struct DiscreteMeasure {
    Mat points;                   // n x d support coordinates
    std::vector<double> weights;  // n nonnegative weights

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }

    double total_mass() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    void validate() const;

    /// Uniform measure (weight 1/n per point) over the given support.
    static DiscreteMeasure uniform(Mat support);
};

enum class CostMetric {
    euclidean,
    squared_euclidean,
    precomputed,
};

struct CostMatrix {
    Mat entries;  // n x m, nonnegative
    CostMetric metric = CostMetric::precomputed;

    std::size_t rows() const { return entries.rows(); }
    std::size_t cols() const { return entries.cols(); }
};

enum class SolverTag {
    exact,
    entropic,
    uot_entropic,
    pot_exact,
    pot_entropic,
};

std::string to_string(SolverTag tag);

/// A coupling matrix plus the bookkeeping every caller wants alongside it.
/// `objective` is the transport cost <C, pi> at solve time, except for the
/// unbalanced solver where it additionally carries the marginal penalties.
struct TransportPlan {
    Mat coupling;
    double total_mass = 0.0;
    double objective = 0.0;
    SolverTag solver = SolverTag::exact;
    bool converged = true;
};

struct SolverParams {
    double epsilon = 0.01;     // entropic regularization strength
    double tolerance = 1e-7;   // L1 marginal-violation stop
    int max_iterations = 10000;

    void validate() const;
};

}  // namespace mbot

#endif
