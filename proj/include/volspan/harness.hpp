#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "volspan/geometry.hpp"

namespace volspan {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitVerificationFailed = 1,
    kExitIoError = 2,
    kExitNumericalError = 3,
};

/// A parsed command invocation: the command name plus raw key-value
/// arguments. Handlers reject unknown keys.
struct ExperimentConfig {
    std::string command;
    std::map<std::string, std::string> args;
};

/// Runs the named command, writes its outputs and a manifest, and returns
/// the process exit code. Failures print one machine-readable JSON object
/// to stderr.
int dispatch(const ExperimentConfig& config);

/// Spanner check through an independent route: norms come from a singular
/// value decomposition of the element matrix itself, never from the Gram
/// pseudoinverse the construction code uses.
struct VerifyReport {
    double max_norm = 0.0;
    long multiset_size = 0;
    std::vector<int> violating_indices;
    std::vector<double> norms;
};
VerifyReport verify_spanner(const PointSet& points, const std::vector<int>& multiset, double tol);

/// FNV-1a 64-bit content hash, hex-encoded.
std::string content_hash(const std::string& bytes);

/// Worker cap from VOLSPAN_THREADS (falls back to hardware concurrency).
int worker_threads();

/// Runs fn(i) for i in [0, count) on up to worker_threads() threads.
/// Exceptions propagate from the first failing index.
void parallel_for(long count, const std::function<void(long)>& fn);

}  // namespace volspan
