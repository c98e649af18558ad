#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "volspan/geometry.hpp"
#include "volspan/mvee.hpp"

namespace volspan {

/// 17 significant digits, enough to round-trip a double.
std::string fmt17(double v);

/// CSV: one point per row, d comma-separated columns, '#' comment lines.
PointSet load_points_csv(const std::string& path);
/// JSON: {"dim": d, "points": [[...], ...]}.
PointSet load_points_json(const std::string& path);
/// Dispatch on the ".json" extension, CSV otherwise.
PointSet load_points_auto(const std::string& path);

void save_points_csv(const std::string& path, const PointSet& points);
void save_points_json(const std::string& path, const PointSet& points);

struct SpannerFile {
    std::vector<int> indices;         // distinct, ascending
    std::vector<int> multiplicities;  // parallel to indices
    double max_norm = 0.0;
};

SpannerFile spanner_to_file(const SpannerSet& spanner, double max_norm);
void save_spanner_json(const std::string& path, const SpannerFile& file);
SpannerFile load_spanner_json(const std::string& path);

/// Expand a spanner file back into a flat index multiset.
std::vector<int> expand_multiset(const SpannerFile& file);

void save_ellipsoid_json(const std::string& path, const Ellipsoid& e);
Ellipsoid load_ellipsoid_json(const std::string& path);

/// index,weight rows (all indices, including zero weights on request).
void save_weights_csv(const std::string& path, const Eigen::VectorXd& weights);

void save_samples_csv(const std::string& path, const std::vector<Eigen::VectorXd>& samples);

/// Whole-file read with "io_missing_input" on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace volspan
