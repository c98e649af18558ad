#include "volspan/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "volspan/barycentric.hpp"
#include "volspan/errors.hpp"
#include "volspan/fast_spanner.hpp"
#include "volspan/hedge.hpp"
#include "volspan/io.hpp"
#include "volspan/mvee.hpp"
#include "volspan/sampler.hpp"
#include "volspan/sparsifier.hpp"

namespace volspan {

namespace fs = std::filesystem;
using nlohmann::json;

VerifyReport verify_spanner(const PointSet& points, const std::vector<int>& multiset, double tol) {
    if (multiset.empty()) fail("empty_spanner", "verification needs a nonempty spanner");
    const int d = points.dim();
    Eigen::MatrixXd v(d, static_cast<Eigen::Index>(multiset.size()));
    for (std::size_t k = 0; k < multiset.size(); ++k) {
        const int i = multiset[k];
        if (i < 0 || i >= points.size()) fail("bad_index", "spanner index out of range");
        v.col(static_cast<Eigen::Index>(k)) = points.point(i);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-5 * std::max(sv.size() > 0 ? sv[0] : 0.0, 0.0);

    VerifyReport report;
    report.multiset_size = static_cast<long>(multiset.size());
    report.norms.resize(static_cast<std::size_t>(points.size()));
    for (int i = 0; i < points.size(); ++i) {
        const Eigen::VectorXd y = svd.matrixU().transpose() * points.point(i);
        double q = 0.0;
        double in_span = 0.0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
            if (sv[k] > cutoff) {
                const double c = y[k] / sv[k];
                q += c * c;
                in_span += y[k] * y[k];
            }
        }
        double nrm = std::sqrt(q);
        const double total = points.point(i).squaredNorm();
        if (total > 0.0 && total - in_span > 1e-14 * total) {
            nrm = std::numeric_limits<double>::infinity();
        }
        report.norms[static_cast<std::size_t>(i)] = nrm;
        report.max_norm = std::max(report.max_norm, nrm);
        if (nrm > 1.0 + tol) report.violating_indices.push_back(i);
    }
    return report;
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int worker_threads() {
    if (const char* env = std::getenv("VOLSPAN_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(long count, const std::function<void(long)>& fn) {
    const int workers = std::min<long>(worker_threads(), count);
    if (workers <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const long i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

// ---------------------------------------------------------------------------
// Argument plumbing
// ---------------------------------------------------------------------------

class Args {
public:
    explicit Args(const std::map<std::string, std::string>& raw) : raw_(raw) {}

    std::string get(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        auto it = raw_.find(key);
        return it == raw_.end() ? fallback : it->second;
    }

    std::string require(const std::string& key) {
        seen_.insert(key);
        auto it = raw_.find(key);
        if (it == raw_.end()) fail("missing_argument", "required argument --" + key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) {
        const std::string v = get(key, "");
        return v.empty() ? fallback : std::stod(v);
    }

    long get_long(const std::string& key, long fallback) {
        const std::string v = get(key, "");
        return v.empty() ? fallback : std::stol(v);
    }

    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) {
        const std::string v = get(key, "");
        return v.empty() ? fallback : static_cast<std::uint64_t>(std::stoull(v));
    }

    /// "auto" (or absent) maps to the sentinel -1.
    double get_auto(const std::string& key) {
        const std::string v = get(key, "auto");
        return v == "auto" ? -1.0 : std::stod(v);
    }

    void reject_unknown() const {
        for (const auto& [key, value] : raw_) {
            if (!seen_.count(key)) fail("unknown_argument", "unknown argument --" + key);
        }
    }

private:
    const std::map<std::string, std::string>& raw_;
    std::set<std::string> seen_;
};

std::string existing_input(const std::string& path) {
    if (!fs::exists(path)) fail("io_missing_input", "input file not found: " + path);
    return path;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

class StageTimer {
public:
    void start(const std::string& stage) {
        current_ = stage;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto dt = std::chrono::steady_clock::now() - t0_;
        timings_[current_] += std::chrono::duration<double>(dt).count();
    }
    const std::map<std::string, double>& timings() const { return timings_; }

private:
    std::string current_;
    std::chrono::steady_clock::time_point t0_;
    std::map<std::string, double> timings_;
};

struct ManifestInfo {
    const ExperimentConfig* config = nullptr;
    std::map<std::string, std::string> input_hashes;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void hash_input(const std::string& path) { input_hashes[path] = content_hash(read_file(path)); }
};

void write_manifest(const std::string& manifest_path, const ManifestInfo& info,
                    const StageTimer& timer) {
    json j;
    j["tool_version"] = kToolVersion;
    j["command"] = info.config->command;
    j["config"] = info.config->args;
    const auto wall = std::chrono::steady_clock::now() - info.started;
    j["wall_clock_sec"] = std::chrono::duration<double>(wall).count();
    j["timings_sec"] = timer.timings();
    j["input_hashes"] = info.input_hashes;
    const std::string tmp = manifest_path + ".tmp";
    write_file(tmp, j.dump(2) + "\n");
    fs::rename(tmp, manifest_path);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_mvee(const ExperimentConfig& cfg) {
    Args args(cfg.args);
    const std::string input = existing_input(args.require("input"));
    const double eps = args.get_double("eps", 1e-6);
    const std::string out = args.require("out");
    args.reject_unknown();

    ManifestInfo manifest;
    manifest.config = &cfg;
    manifest.hash_input(input);
    StageTimer timer;

    timer.start("load");
    const PointSet points = load_points_auto(input);
    timer.stop();
    timer.start("solve");
    const Ellipsoid e = mvee_approx(points, eps);
    timer.stop();
    timer.start("write");
    save_ellipsoid_json(out, e);
    timer.stop();
    write_manifest(out + ".manifest.json", manifest, timer);
    std::cout << "mvee: dim=" << e.shape.rows() << " log_volume=" << fmt17(e.log_volume) << "\n";
    return kExitOk;
}

int cmd_john(const ExperimentConfig& cfg) {
    Args args(cfg.args);
    const std::string input = existing_input(args.require("input"));
    const double tol = args.get_double("tol", 1e-6);
    const double eps = args.get_double("eps", 1e-6);
    const std::string out = args.require("out");
    args.reject_unknown();

    ManifestInfo manifest;
    manifest.config = &cfg;
    manifest.hash_input(input);
    StageTimer timer;

    timer.start("load");
    const PointSet points = load_points_auto(input);
    timer.stop();
    timer.start("solve");
    const JohnPipelineResult pipeline = john_pipeline(points, eps, tol);
    // Fold the symmetrized weights back onto input indices: +-x carry the
    // same outer product, so their masses add.
    Eigen::VectorXd folded = Eigen::VectorXd::Zero(points.size());
    for (int i = 0; i < pipeline.symmetrized.size(); ++i) {
        const Eigen::VectorXd p = pipeline.symmetrized.point(i);
        int match = -1;
        for (int j = 0; j < points.size(); ++j) {
            if ((points.point(j) - p).cwiseAbs().maxCoeff() <= kDuplicateTol ||
                (points.point(j) + p).cwiseAbs().maxCoeff() <= kDuplicateTol) {
                match = j;
                break;
            }
        }
        if (match >= 0) folded[match] += pipeline.certificate.weights[i];
    }
    timer.stop();
    timer.start("write");
    save_weights_csv(out, folded);
    timer.stop();
    write_manifest(out + ".manifest.json", manifest, timer);
    std::cout << "john: residual=" << fmt17(pipeline.certificate.residual)
              << " weight_sum=" << fmt17(pipeline.certificate.weight_sum) << "\n";
    return kExitOk;
}

int cmd_spanner_exact(const ExperimentConfig& cfg) {
    Args args(cfg.args);
    const std::string input = existing_input(args.require("input"));
    const std::string out = args.require("out");
    args.reject_unknown();

    ManifestInfo manifest;
    manifest.config = &cfg;
    manifest.hash_input(input);
    StageTimer timer;

    timer.start("load");
    const PointSet points = load_points_auto(input);
    timer.stop();
    timer.start("solve");
    const SpannerSet spanner = exact_volumetric_spanner(points);
    timer.stop();
    timer.start("verify");
    const VerifyReport report = verify_spanner(points, spanner.indices, 1e-6);
    timer.stop();
    timer.start("write");
    save_spanner_json(out, spanner_to_file(spanner, report.max_norm));
    timer.stop();
    write_manifest(out + ".manifest.json", manifest, timer);
    std::cout << "spanner exact: |S|=" << spanner.multiset_size()
              << " max_norm=" << fmt17(report.max_norm) << "\n";
    return kExitOk;
}

int cmd_spanner_fast(const ExperimentConfig& cfg) {
    Args args(cfg.args);
    const std::string input = existing_input(args.require("input"));
    const std::string out = args.require("out");
    const std::string stats_path = args.get("stats", "");
    FastSpannerConfig fast_cfg;
    fast_cfg.rng_seed = args.get_seed("seed", 0);
    fast_cfg.c_sample = args.get_double("c-sample", 10.0);
    fast_cfg.base_threshold = static_cast<int>(args.get_long("threshold", 0));
    fast_cfg.max_retries = static_cast<int>(args.get_long("retries", 64));
    args.reject_unknown();

    ManifestInfo manifest;
    manifest.config = &cfg;
    manifest.hash_input(input);
    StageTimer timer;

    timer.start("load");
    const PointSet points = load_points_auto(input);
    timer.stop();
    timer.start("solve");
    const FastSpannerResult result = fast_spanner(points, fast_cfg);
    timer.stop();
    timer.start("verify");
    const VerifyReport report = verify_spanner(points, result.spanner.indices, 1e-8);
    timer.stop();
    timer.start("write");
    save_spanner_json(out, spanner_to_file(result.spanner, report.max_norm));
    if (!stats_path.empty()) {
        std::ostringstream stats;
        stats << "level,active,retries,level_size\n";
        for (const LevelStats& s : result.stats) {
            stats << s.level << ',' << s.active << ',' << s.retries << ',' << s.sample_size << '\n';
        }
        write_file(stats_path, stats.str());
    }
    timer.stop();
    write_manifest(out + ".manifest.json", manifest, timer);
    std::cout << "spanner fast: |S|=" << result.spanner.multiset_size()
              << " levels=" << result.stats.size() << " max_norm=" << fmt17(report.max_norm)
              << "\n";
    return kExitOk;
}

int cmd_spanner_barycentric(const ExperimentConfig& cfg) {
    Args args(cfg.args);
    const std::string input = existing_input(args.require("input"));
    const double C = args.get_double("C", 2.0);
    const std::string out = args.require("out");
    args.reject_unknown();

    ManifestInfo manifest;
    manifest.config = &cfg;
    manifest.hash_input(input);
    StageTimer timer;

    timer.start("load");
    const PointSet points = load_points_auto(input);
    timer.stop();
    timer.start("solve");
    LinearOptOracle oracle(points);
    const SpannerSet spanner = ratio_spanner(oracle, points.dim(), C);
    timer.stop();
    timer.start("verify");
    const VerifyReport report = verify_spanner(points, spanner.indices, C * std::sqrt(points.dim()));
    timer.stop();
    timer.start("write");
    save_spanner_json(out, spanner_to_file(spanner, report.max_norm));
    timer.stop();
    write_manifest(out + ".manifest.json", manifest, timer);
    std::cout << "spanner barycentric: |S|=" << spanner.multiset_size()
              << " max_norm=" << fmt17(report.max_norm) << " oracle_calls=" << oracle.call_count()
              << "\n";
    return kExitOk;
}

int cmd_sample(const ExperimentConfig& cfg) {
    Args args(cfg.args);
    const std::string body_kind = args.get("body", "box");
    const int dim = static_cast<int>(args.get_long("dim", 0));
    const double radius = args.get_double("radius", 1.0);
    const std::string density_kind = args.get("density", "uniform");
    const std::string tilt_file = args.get("tilt-file", "");
    const std::string halfspaces = args.get("halfspaces", "");
    const std::string interior_file = args.get("interior-file", "");
    const long n = args.get_long("n", 1000);
    const long burn_in = args.get_long("burn-in", -1);
    const long thinning = args.get_long("thinning", 0);
    const std::uint64_t seed = args.get_seed("seed", 0);
    const std::string out = args.require("out");
    args.reject_unknown();

    ManifestInfo manifest;
    manifest.config = &cfg;
    StageTimer timer;

    timer.start("setup");
    ConvexBodyOracle body;
    if (body_kind == "halfspaces" || !halfspaces.empty()) {
        const PointSet rows = load_points_csv(existing_input(halfspaces));
        manifest.hash_input(halfspaces);
        const int d = rows.dim() - 1;
        Eigen::MatrixXd A(rows.size(), d);
        Eigen::VectorXd b(rows.size());
        for (int i = 0; i < rows.size(); ++i) {
            A.row(i) = rows.point(i).head(d).transpose();
            b[i] = rows.point(i)[d];
        }
        const PointSet interior = load_points_csv(existing_input(interior_file));
        manifest.hash_input(interior_file);
        body = halfspace_body(A, b, interior.point(0), radius);
    } else if (body_kind == "box") {
        if (dim < 1) fail("missing_argument", "builtin bodies need --dim");
        body = box_body(dim, radius);
    } else if (body_kind == "ball") {
        if (dim < 1) fail("missing_argument", "builtin bodies need --dim");
        body = ball_body(dim, radius);
    } else if (body_kind == "simplex") {
        if (dim < 1) fail("missing_argument", "builtin bodies need --dim");
        body = simplex_body(dim);
    } else {
        fail("unknown_argument", "unknown body '" + body_kind + "'");
    }

    LogDensity density;
    if (density_kind == "uniform") {
        density = uniform_density();
    } else if (density_kind == "exp") {
        const PointSet tilt = load_points_csv(existing_input(tilt_file));
        manifest.hash_input(tilt_file);
        density = exponential_tilt(tilt.point(0));
    } else {
        fail("unknown_argument", "unknown density '" + density_kind + "'");
    }
    timer.stop();

    timer.start("sample");
    const std::vector<Eigen::VectorXd> samples =
        hit_and_run_sample(body, density, n, burn_in, seed, thinning);
    timer.stop();
    timer.start("write");
    save_samples_csv(out, samples);
    timer.stop();
    write_manifest(out + ".manifest.json", manifest, timer);
    std::cout << "sample: n=" << samples.size() << " dim=" << body.dim << "\n";
    return kExitOk;
}

int cmd_blo_run(const ExperimentConfig& cfg) {
    Args args(cfg.args);
    const std::string actions_path = existing_input(args.require("actions"));
    const std::string adversary = args.get("adversary", "random");
    const long horizon = args.get_long("T", 1024);
    const long seeds = args.get_long("seeds", 1);
    const std::uint64_t base_seed = args.get_seed("seed", 0);
    HedgeParams params;
    params.gamma = args.get_auto("gamma");
    params.eta = args.get_auto("eta");
    params.c_sample = args.get_double("c-sample", 8.0);
    const bool baseline = args.get_long("uniform-baseline", 0) != 0;
    const std::string out_dir = args.require("out");
    args.reject_unknown();

    ManifestInfo manifest;
    manifest.config = &cfg;
    manifest.hash_input(actions_path);
    StageTimer timer;

    timer.start("load");
    const PointSet actions = load_points_auto(actions_path);
    Eigen::MatrixXd fixed_losses;
    const bool fixed = adversary.rfind("fixed:", 0) == 0;
    if (fixed) {
        const std::string loss_path = existing_input(adversary.substr(6));
        manifest.hash_input(loss_path);
        const PointSet rows = load_points_csv(loss_path);
        fixed_losses.resize(rows.size(), rows.dim());
        for (int i = 0; i < rows.size(); ++i) fixed_losses.row(i) = rows.point(i).transpose();
    } else if (adversary != "random") {
        fail("unknown_argument", "adversary must be 'random' or 'fixed:<path>'");
    }
    timer.stop();

    fs::create_directories(out_dir);
    timer.start("run");
    std::vector<RegretTrace> traces(static_cast<std::size_t>(seeds));
    parallel_for(seeds, [&](long k) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
        const BanditInstance instance =
            fixed ? make_fixed_loss_instance(actions, fixed_losses, horizon, seed)
                  : make_random_loss_instance(actions, horizon, seed);
        traces[static_cast<std::size_t>(k)] =
            baseline ? baseline_uniform_exploration(instance, params)
                     : run_geometric_hedge(instance, params);
    });
    timer.stop();

    timer.start("write");
    const int d = actions.dim();
    std::ostringstream summary;
    summary << "seed,final_regret,bound_ratio\n";
    for (long k = 0; k < seeds; ++k) {
        const RegretTrace& trace = traces[static_cast<std::size_t>(k)];
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
        std::ostringstream rows;
        rows << "round,chosen_index,loss,cum_regret\n";
        for (std::size_t t = 0; t < trace.rounds.size(); ++t) {
            rows << (t + 1) << ',' << trace.rounds[t].chosen_index << ','
                 << fmt17(trace.rounds[t].realized_loss) << ',' << fmt17(trace.cum_regret[t])
                 << '\n';
        }
        write_file(out_dir + "/trace_" + std::to_string(seed) + ".csv", rows.str());

        const double s_total =
            static_cast<double>(trace.spanner_prime_draws) + std::max(d, 1);
        const double logk = std::log(std::max<double>(actions.size(), 2.0));
        const double bound = (s_total + d) * std::sqrt(horizon * logk / std::max(d, 1));
        summary << seed << ',' << fmt17(trace.final_regret) << ','
                << fmt17(bound > 0.0 ? trace.final_regret / bound : 0.0) << '\n';
        if (trace.gamma_clamped) {
            std::cerr << "warning: seed " << seed << " gamma formula exceeded 1/2, clamped\n";
        }
    }
    write_file(out_dir + "/summary.csv", summary.str());
    timer.stop();
    write_manifest(out_dir + "/manifest.json", manifest, timer);
    std::cout << "blo run: seeds=" << seeds << " T=" << horizon << " out=" << out_dir << "\n";
    return kExitOk;
}

int cmd_verify(const ExperimentConfig& cfg) {
    Args args(cfg.args);
    const std::string spanner_path = existing_input(args.require("spanner"));
    const std::string points_path = existing_input(args.require("points"));
    const double tol = args.get_double("tol", 1e-6);
    const std::string out = args.get("out", "");
    args.reject_unknown();

    ManifestInfo manifest;
    manifest.config = &cfg;
    manifest.hash_input(spanner_path);
    manifest.hash_input(points_path);
    StageTimer timer;

    timer.start("load");
    const PointSet points = load_points_auto(points_path);
    const SpannerFile file = load_spanner_json(spanner_path);
    timer.stop();
    timer.start("verify");
    const VerifyReport report = verify_spanner(points, expand_multiset(file), tol);
    timer.stop();

    std::cout << "verify: max_norm=" << fmt17(report.max_norm) << " |S|=" << report.multiset_size
              << " violations=" << report.violating_indices.size();
    if (!report.violating_indices.empty()) {
        std::cout << " indices=[";
        for (std::size_t i = 0; i < report.violating_indices.size(); ++i) {
            if (i) std::cout << ',';
            std::cout << report.violating_indices[i];
        }
        std::cout << ']';
    }
    std::cout << "\n";

    if (!out.empty()) {
        json j;
        j["max_norm"] = report.max_norm;
        j["multiset_size"] = report.multiset_size;
        j["violating_indices"] = report.violating_indices;
        write_file(out, j.dump(2) + "\n");
        timer.start("write");
        timer.stop();
        write_manifest(out + ".manifest.json", manifest, timer);
    }
    return report.violating_indices.empty() ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int dispatch(const ExperimentConfig& config) {
    try {
        if (config.command == "mvee") return cmd_mvee(config);
        if (config.command == "john") return cmd_john(config);
        if (config.command == "spanner-exact") return cmd_spanner_exact(config);
        if (config.command == "spanner-fast") return cmd_spanner_fast(config);
        if (config.command == "spanner-barycentric") return cmd_spanner_barycentric(config);
        if (config.command == "sample") return cmd_sample(config);
        if (config.command == "blo-run") return cmd_blo_run(config);
        if (config.command == "verify") return cmd_verify(config);
        fail("unknown_command", "unknown command '" + config.command + "'");
    } catch (const Error& e) {
        json j;
        j["error"] = e.code();
        j["message"] = e.what();
        std::cerr << j.dump() << "\n";
        if (e.code().rfind("io_", 0) == 0 || e.code() == "missing_argument" ||
            e.code() == "unknown_argument" || e.code() == "unknown_command") {
            return kExitIoError;
        }
        return kExitNumericalError;
    } catch (const std::exception& e) {
        json j;
        j["error"] = "internal";
        j["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return kExitNumericalError;
    }
}

}  // namespace volspan
