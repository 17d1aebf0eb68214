#ifndef MBOT_IO_HPP
#define MBOT_IO_HPP

#include <string>
#include <vector>

#include "mbot/types.hpp"

namespace mbot {

/// Shortest representation that round-trips a double exactly (17 significant
/// digits). All numeric file output goes through this.
std::string format_double(double value);

/// Point-cloud CSV: one point per row, optional header, optional trailing
/// `weight` column (announced by the header; uniform weights otherwise).
DiscreteMeasure read_point_cloud_csv(const std::string& path);
void write_point_cloud_csv(const DiscreteMeasure& measure, const std::string& path,
                           bool include_weights = true);

/// Sparse triplet CSV (`i,j,mass` with header) holding every nonzero entry.
void write_plan_csv(const Mat& plan, const std::string& path);

/// Reads a triplet CSV back into a dense matrix. Pass rows/cols of 0 to
/// infer the shape from the largest indices present.
Mat read_plan_csv(const std::string& path, std::size_t rows = 0, std::size_t cols = 0);

}  // namespace mbot

#endif
