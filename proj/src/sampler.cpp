#include "volspan/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "volspan/errors.hpp"
#include "volspan/rng.hpp"

namespace volspan {

ConvexBodyOracle box_body(int dim, double half_width) {
    ConvexBodyOracle b;
    b.dim = dim;
    b.membership = [half_width](const Eigen::VectorXd& x) {
        return x.cwiseAbs().maxCoeff() <= half_width;
    };
    b.interior_point = Eigen::VectorXd::Zero(dim);
    b.bounding_radius = half_width * std::sqrt(static_cast<double>(dim)) * 1.001;
    return b;
}

ConvexBodyOracle ball_body(int dim, double radius) {
    ConvexBodyOracle b;
    b.dim = dim;
    b.membership = [radius](const Eigen::VectorXd& x) { return x.norm() <= radius; };
    b.interior_point = Eigen::VectorXd::Zero(dim);
    b.bounding_radius = radius * 1.001;
    return b;
}

ConvexBodyOracle simplex_body(int dim) {
    ConvexBodyOracle b;
    b.dim = dim;
    b.membership = [](const Eigen::VectorXd& x) {
        return x.minCoeff() >= 0.0 && x.sum() <= 1.0;
    };
    b.interior_point = Eigen::VectorXd::Constant(dim, 1.0 / (2.0 * dim));
    b.bounding_radius = 1.001;
    return b;
}

ConvexBodyOracle halfspace_body(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                Eigen::VectorXd interior_point, double bounding_radius) {
    ConvexBodyOracle body;
    body.dim = static_cast<int>(A.cols());
    body.membership = [A, b](const Eigen::VectorXd& x) {
        return ((A * x - b).array() <= 0.0).all();
    };
    body.interior_point = std::move(interior_point);
    body.bounding_radius = bounding_radius;
    if (!body.membership(body.interior_point)) {
        fail("oracle_inconsistent", "interior point violates the halfspace system");
    }
    return body;
}

LogDensity uniform_density() {
    return {[](const Eigen::VectorXd&) { return 0.0; }};
}

LogDensity exponential_tilt(const Eigen::VectorXd& direction) {
    return {[direction](const Eigen::VectorXd& x) { return direction.dot(x); }};
}

namespace {

struct ChordScratch {
    Eigen::VectorXd probe;
};

// Boundary of the chord {t : x + t u in body} in one direction, by bisection
// between an inside and an outside parameter.
double chord_end(const ConvexBodyOracle& body, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u, double outward, ChordScratch& scratch) {
    auto inside_at = [&](double t) {
        scratch.probe = x;
        scratch.probe.noalias() += t * u;
        return body.membership(scratch.probe);
    };
    double inside = 0.0;
    double outside = outward;
    if (inside_at(outside)) {
        // The bracket must start outside the bounding ball.
        fail("oracle_inconsistent", "membership true outside the bounding radius");
    }
    for (int i = 0; i < 56; ++i) {
        const double mid = 0.5 * (inside + outside);
        if (inside_at(mid)) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    return inside;
}

// One-dimensional sample from the restriction of a concave log-density to
// [lo, hi]: ternary search for the mode, then exact rejection below the flat
// envelope at the mode value. A constant restriction short-circuits to a
// plain uniform draw.
double sample_on_chord(const LogDensity& density, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u, double lo, double hi, RngStream& rng,
                       ChordScratch& scratch) {
    auto g = [&](double t) {
        scratch.probe = x;
        scratch.probe.noalias() += t * u;
        return density.log_pdf(scratch.probe);
    };
    const double g_lo = g(lo);
    const double g_hi = g(hi);
    const double g_mid = g(0.5 * (lo + hi));
    const double spread = std::max(std::abs(g_lo - g_mid), std::abs(g_hi - g_mid));
    if (spread <= 1e-15 * std::max({1.0, std::abs(g_lo), std::abs(g_hi)})) {
        return rng.uniform(lo, hi);
    }

    double a = lo, b = hi;
    for (int i = 0; i < 60 && (b - a) > 1e-13 * std::max(1.0, std::abs(hi - lo)); ++i) {
        const double m1 = a + (b - a) / 3.0;
        const double m2 = b - (b - a) / 3.0;
        if (g(m1) < g(m2)) {
            a = m1;
        } else {
            b = m2;
        }
    }
    const double g_max = std::max(g(0.5 * (a + b)), std::max(g_lo, g_hi));

    for (long attempt = 0; attempt < 100000; ++attempt) {
        const double t = rng.uniform(lo, hi);
        if (std::log(std::max(rng.uniform01(), 1e-300)) <= g(t) - g_max) return t;
    }
    fail("sampling_stalled", "chord rejection sampler exhausted its attempts");
}

}  // namespace

std::vector<Eigen::VectorXd> hit_and_run_sample(const ConvexBodyOracle& body,
                                                const LogDensity& density, long n,
                                                long burn_in, std::uint64_t seed,
                                                long thinning) {
    if (n < 1) fail("bad_count", "need n >= 1 samples");
    const int d = body.dim;
    if (burn_in < 1) burn_in = 100L * d * d;
    if (thinning < 1) thinning = static_cast<long>(d) * d;
    if (!body.membership(body.interior_point)) {
        fail("oracle_inconsistent", "interior point fails the membership oracle");
    }

    RngStream rng = RngStream::from(seed, "sampler:hit_and_run");
    Eigen::VectorXd x = body.interior_point;
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(n));

    ChordScratch scratch;
    scratch.probe.resize(d);
    Eigen::VectorXd u(d), next(d), neg_u(d);

    const double reach = 2.0 * body.bounding_radius * 1.01 + 1.0;
    long kept = 0;
    for (long step = 0; kept < n; ++step) {
        u = rng.unit_direction(d);
        neg_u = -u;
        const double t_hi = chord_end(body, x, u, reach, scratch);
        const double t_lo = -chord_end(body, x, neg_u, reach, scratch);
        double t = sample_on_chord(density, x, u, t_lo, t_hi, rng, scratch);
        next = x;
        next.noalias() += t * u;
        if (!body.membership(next)) {
            // Numerical boundary graze; pull toward the chord midpoint.
            t = 0.5 * (t_lo + t_hi);
            next = x;
            next.noalias() += t * u;
            if (!body.membership(next)) {
                fail("oracle_inconsistent", "chord midpoint rejected by the oracle");
            }
        }
        x.swap(next);
        if (step >= burn_in && (step - burn_in) % thinning == 0) {
            out.push_back(x);
            ++kept;
        }
    }
    return out;
}

bool relative_spanner_certificate(const SpannerSet& S, double beta) {
    if (S.gram.rows() == 0) fail("empty_spanner", "certificate needs a nonempty spanner");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S.gram);
    return es.eigenvalues().minCoeff() >= 1.0 / beta - 1e-8;
}

long ExpSpannerParams::sample_count(int dim) const {
    if (!(eps > 0.0 && eps < 1.0)) fail("bad_eps", "eps must lie in (0, 1)");
    const double log_term = std::log(1.0 / eps);
    const long t = static_cast<long>(std::ceil(c_sample * (dim + log_term * log_term)));
    return std::max<long>(t, dim + 1);
}

SpannerSet exp_volumetric_spanner(const ConvexBodyOracle& body, const LogDensity& density,
                                  const ExpSpannerParams& params, std::uint64_t seed) {
    const long t = params.sample_count(body.dim);
    const std::vector<Eigen::VectorXd> pts =
        hit_and_run_sample(body, density, t, -1, seed);
    Eigen::MatrixXd m(body.dim, t);
    for (long i = 0; i < t; ++i) m.col(i) = pts[static_cast<std::size_t>(i)];
    return make_spanner(std::move(m));
}

}  // namespace volspan
