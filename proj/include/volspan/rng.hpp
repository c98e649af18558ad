#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <string_view>

#include <Eigen/Dense>

namespace volspan {

/// Deterministic splittable random stream. Every consumer derives its own
/// stream from (seed, "module:purpose" label), so adding threads or
/// reordering work never changes the numbers a given consumer sees.
///
/// The generator is SplitMix64 over a label-salted state; it satisfies
/// UniformRandomBitGenerator, so std distributions run directly on it.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream() : state_(0x9E3779B97F4A7C15ull) {}

    static RngStream from(std::uint64_t seed, std::string_view label) {
        std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the label
        for (char ch : label) {
            h ^= static_cast<unsigned char>(ch);
            h *= 0x100000001b3ull;
        }
        RngStream s;
        s.state_ = mix(seed ^ mix(h));
        return s;
    }

    /// Sub-stream keyed by an integer (recursion level, round, retry, ...).
    RngStream split(std::uint64_t key) const {
        RngStream s;
        s.state_ = mix(state_ ^ mix(key + 0x632BE59BD9B4E019ull));
        return s;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

    result_type operator()() { return next(); }

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::int64_t uniform_index(std::int64_t n) {
        // Rejection to avoid modulo bias; n is tiny compared to 2^64.
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = max() - max() % un;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return static_cast<std::int64_t>(r % un);
    }

    /// Standard normal via Box-Muller (no cached spare; stateless per call pair).
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    Eigen::VectorXd gaussian_vector(int d) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = normal();
        return v;
    }

    /// Uniform direction on the unit sphere in R^d.
    Eigen::VectorXd unit_direction(int d) {
        Eigen::VectorXd v = gaussian_vector(d);
        double n = v.norm();
        while (n < 1e-300) {
            v = gaussian_vector(d);
            n = v.norm();
        }
        return v / n;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

}  // namespace volspan
