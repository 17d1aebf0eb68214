#include "mbot/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mbot {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        std::size_t begin = field.find_first_not_of(" \t\r");
        std::size_t end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? std::string()
                                                    : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + text.size();
}

bool all_numeric(const std::vector<std::string>& fields) {
    double ignored;
    for (const std::string& f : fields)
        if (!parse_double(f, ignored)) return false;
    return !fields.empty();
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

}  // namespace

DiscreteMeasure read_point_cloud_csv(const std::string& path) {
    std::vector<std::vector<std::string>> rows = read_csv_rows(path);
    if (rows.empty()) throw InvalidInputError("empty point cloud file: " + path);

    bool has_header = !all_numeric(rows.front());
    bool has_weights = has_header && !rows.front().empty() &&
                       lowercase(rows.front().back()) == "weight";
    std::size_t first_data = has_header ? 1 : 0;
    if (first_data >= rows.size())
        throw InvalidInputError("point cloud has a header but no data rows: " + path);

    std::size_t columns = rows[first_data].size();
    std::size_t dim = has_weights ? columns - 1 : columns;
    if (dim == 0) throw InvalidInputError("point cloud rows need at least one coordinate");

    std::size_t n = rows.size() - first_data;
    DiscreteMeasure measure;
    measure.points = Mat(n, dim);
    measure.weights.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& fields = rows[first_data + r];
        if (fields.size() != columns)
            throw InvalidInputError("ragged row " + std::to_string(r + first_data + 1) + " in " +
                                    path);
        for (std::size_t c = 0; c < dim; ++c) {
            double v;
            if (!parse_double(fields[c], v))
                throw InvalidInputError("malformed number '" + fields[c] + "' in " + path);
            measure.points(r, c) = v;
        }
        if (has_weights) {
            double w;
            if (!parse_double(fields[dim], w))
                throw InvalidInputError("malformed weight '" + fields[dim] + "' in " + path);
            measure.weights[r] = w;
        }
    }
    measure.validate();
    return measure;
}

void write_point_cloud_csv(const DiscreteMeasure& measure, const std::string& path,
                           bool include_weights) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write file: " + path);
    for (std::size_t c = 0; c < measure.dim(); ++c) {
        if (c > 0) out << ",";
        out << "x" << c;
    }
    if (include_weights) out << ",weight";
    out << "\n";
    for (std::size_t r = 0; r < measure.size(); ++r) {
        for (std::size_t c = 0; c < measure.dim(); ++c) {
            if (c > 0) out << ",";
            out << format_double(measure.points(r, c));
        }
        if (include_weights) out << "," << format_double(measure.weights[r]);
        out << "\n";
    }
    if (!out) throw InvalidInputError("failed writing file: " + path);
}

void write_plan_csv(const Mat& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write file: " + path);
    out << "i,j,mass\n";
    for (std::size_t i = 0; i < plan.rows(); ++i)
        for (std::size_t j = 0; j < plan.cols(); ++j)
            if (plan(i, j) != 0.0)
                out << i << "," << j << "," << format_double(plan(i, j)) << "\n";
    if (!out) throw InvalidInputError("failed writing file: " + path);
}

Mat read_plan_csv(const std::string& path, std::size_t rows, std::size_t cols) {
    std::vector<std::vector<std::string>> lines = read_csv_rows(path);
    struct Triplet {
        std::size_t i, j;
        double mass;
    };
    std::vector<Triplet> triplets;
    std::size_t max_i = 0, max_j = 0;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (r == 0 && !all_numeric(lines[r])) continue;  // header
        if (lines[r].size() != 3)
            throw InvalidInputError("plan rows must be i,j,mass triplets: " + path);
        double di, dj, mass;
        if (!parse_double(lines[r][0], di) || !parse_double(lines[r][1], dj) ||
            !parse_double(lines[r][2], mass) || di < 0 || dj < 0)
            throw InvalidInputError("malformed plan triplet in " + path);
        Triplet t{static_cast<std::size_t>(di), static_cast<std::size_t>(dj), mass};
        max_i = std::max(max_i, t.i);
        max_j = std::max(max_j, t.j);
        triplets.push_back(t);
    }
    if (rows == 0) rows = triplets.empty() ? 0 : max_i + 1;
    if (cols == 0) cols = triplets.empty() ? 0 : max_j + 1;
    if (rows == 0 || cols == 0) throw InvalidInputError("empty plan file: " + path);
    Mat plan(rows, cols);
    for (const Triplet& t : triplets) {
        if (t.i >= rows || t.j >= cols)
            throw InvalidInputError("plan index outside the declared shape: " + path);
        plan(t.i, t.j) = t.mass;
    }
    return plan;
}

}  // namespace mbot
