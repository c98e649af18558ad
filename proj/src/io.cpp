#include "volspan/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "volspan/errors.hpp"

namespace volspan {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io_missing_input", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("io_write_failed", "cannot write " + path);
    out << contents;
    if (!out) fail("io_write_failed", "short write to " + path);
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, int line_no) {
    std::vector<double> row;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            // Allow trailing whitespace only.
            for (std::size_t k = used; k < cell.size(); ++k) {
                if (!std::isspace(static_cast<unsigned char>(cell[k]))) throw std::invalid_argument("");
            }
            row.push_back(v);
        } catch (const std::exception&) {
            fail("io_parse_error", "line " + std::to_string(line_no) + ": bad number '" + cell + "'");
        }
    }
    return row;
}

}  // namespace

PointSet load_points_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::vector<Eigen::VectorXd> pts;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::vector<double> row = parse_csv_row(line, line_no);
        if (row.empty()) continue;
        Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
        for (std::size_t i = 0; i < row.size(); ++i) v[static_cast<Eigen::Index>(i)] = row[i];
        if (!pts.empty() && v.size() != pts.front().size()) {
            fail("io_parse_error", "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(pts.front().size()) + " columns, got " +
                                       std::to_string(v.size()));
        }
        pts.push_back(std::move(v));
    }
    if (pts.empty()) fail("io_parse_error", path + ": no points");
    return PointSet::from_rows(pts);
}

PointSet load_points_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail("io_parse_error", path + ": " + e.what());
    }
    if (!j.contains("dim") || !j.contains("points")) {
        fail("io_parse_error", path + ": expected keys 'dim' and 'points'");
    }
    const int d = j["dim"].get<int>();
    std::vector<Eigen::VectorXd> pts;
    for (const auto& row : j["points"]) {
        Eigen::VectorXd v(d);
        if (static_cast<int>(row.size()) != d) {
            fail("io_parse_error", path + ": point with wrong dimension");
        }
        for (int i = 0; i < d; ++i) v[i] = row[static_cast<std::size_t>(i)].get<double>();
        pts.push_back(std::move(v));
    }
    if (pts.empty()) fail("io_parse_error", path + ": no points");
    return PointSet::from_rows(pts);
}

PointSet load_points_auto(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        return load_points_json(path);
    }
    return load_points_csv(path);
}

void save_points_csv(const std::string& path, const PointSet& points) {
    std::ostringstream out;
    for (int i = 0; i < points.size(); ++i) {
        for (int c = 0; c < points.dim(); ++c) {
            if (c) out << ',';
            out << fmt17(points.matrix()(c, i));
        }
        out << '\n';
    }
    write_file(path, out.str());
}

void save_points_json(const std::string& path, const PointSet& points) {
    json j;
    j["dim"] = points.dim();
    json rows = json::array();
    for (int i = 0; i < points.size(); ++i) {
        json row = json::array();
        for (int c = 0; c < points.dim(); ++c) row.push_back(points.matrix()(c, i));
        rows.push_back(std::move(row));
    }
    j["points"] = std::move(rows);
    write_file(path, j.dump(2) + "\n");
}

SpannerFile spanner_to_file(const SpannerSet& spanner, double max_norm) {
    std::map<int, int> mult;
    for (int i : spanner.indices) ++mult[i];
    SpannerFile f;
    for (const auto& [idx, m] : mult) {
        f.indices.push_back(idx);
        f.multiplicities.push_back(m);
    }
    f.max_norm = max_norm;
    return f;
}

void save_spanner_json(const std::string& path, const SpannerFile& file) {
    json j;
    j["indices"] = file.indices;
    j["multiplicities"] = file.multiplicities;
    j["max_norm"] = file.max_norm;
    write_file(path, j.dump(2) + "\n");
}

SpannerFile load_spanner_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail("io_parse_error", path + ": " + e.what());
    }
    SpannerFile f;
    try {
        f.indices = j.at("indices").get<std::vector<int>>();
        f.multiplicities = j.at("multiplicities").get<std::vector<int>>();
        f.max_norm = j.value("max_norm", 0.0);
    } catch (const json::exception& e) {
        fail("io_parse_error", path + ": " + e.what());
    }
    if (f.indices.size() != f.multiplicities.size()) {
        fail("io_parse_error", path + ": indices and multiplicities differ in length");
    }
    return f;
}

std::vector<int> expand_multiset(const SpannerFile& file) {
    std::vector<int> flat;
    for (std::size_t k = 0; k < file.indices.size(); ++k) {
        if (file.multiplicities[k] < 1) fail("io_parse_error", "multiplicity below 1");
        for (int r = 0; r < file.multiplicities[k]; ++r) flat.push_back(file.indices[k]);
    }
    return flat;
}

void save_ellipsoid_json(const std::string& path, const Ellipsoid& e) {
    json j;
    json shape = json::array();
    for (Eigen::Index r = 0; r < e.shape.rows(); ++r) {
        for (Eigen::Index c = 0; c < e.shape.cols(); ++c) shape.push_back(e.shape(r, c));
    }
    j["dim"] = e.shape.rows();
    j["shape_row_major"] = std::move(shape);
    j["log_volume"] = e.log_volume;
    write_file(path, j.dump(2) + "\n");
}

Ellipsoid load_ellipsoid_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail("io_parse_error", path + ": " + e.what());
    }
    Ellipsoid e;
    const int d = j.at("dim").get<int>();
    const auto flat = j.at("shape_row_major").get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != d * d) fail("io_parse_error", path + ": bad shape length");
    e.shape.resize(d, d);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) e.shape(r, c) = flat[static_cast<std::size_t>(r * d + c)];
    }
    e.log_volume = j.at("log_volume").get<double>();
    return e;
}

void save_weights_csv(const std::string& path, const Eigen::VectorXd& weights) {
    std::ostringstream out;
    out << "index,weight\n";
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        out << i << ',' << fmt17(weights[i]) << '\n';
    }
    write_file(path, out.str());
}

void save_samples_csv(const std::string& path, const std::vector<Eigen::VectorXd>& samples) {
    std::ostringstream out;
    for (const auto& s : samples) {
        for (Eigen::Index c = 0; c < s.size(); ++c) {
            if (c) out << ',';
            out << fmt17(s[c]);
        }
        out << '\n';
    }
    write_file(path, out.str());
}

}  // namespace volspan
