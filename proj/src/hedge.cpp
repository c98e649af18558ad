#include "volspan/hedge.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "volspan/barycentric.hpp"
#include "volspan/errors.hpp"

namespace volspan {

namespace {

void check_bounded(const PointSet& actions, const Eigen::VectorXd& loss) {
    const double worst = (actions.matrix().transpose() * loss).cwiseAbs().maxCoeff();
    if (!(worst <= 1.0 + 1e-9)) {
        fail("loss_unbounded", "loss vector leaves the polar of the action set");
    }
}

}  // namespace

BanditInstance make_fixed_loss_instance(PointSet actions, const Eigen::MatrixXd& losses,
                                        long horizon, std::uint64_t seed) {
    if (losses.rows() < 1 || losses.cols() != actions.dim()) {
        fail("dim_mismatch", "loss rows must match the action dimension");
    }
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(static_cast<std::size_t>(losses.rows()));
    for (Eigen::Index r = 0; r < losses.rows(); ++r) {
        rows.push_back(losses.row(r).transpose());
        check_bounded(actions, rows.back());
    }
    BanditInstance inst;
    inst.loss_at = [rows](long t) { return rows[static_cast<std::size_t>(t) % rows.size()]; };
    inst.actions = std::move(actions);
    inst.horizon = horizon;
    inst.seed = seed;
    return inst;
}

BanditInstance make_random_loss_instance(PointSet actions, long horizon, std::uint64_t seed) {
    const int d = actions.dim();
    const Eigen::MatrixXd acts = actions.matrix();
    auto gen = [acts, d, seed](long t) {
        RngStream s = RngStream::from(seed, "hedge:adversary").split(static_cast<std::uint64_t>(t));
        Eigen::VectorXd raw(d);
        for (int i = 0; i < d; ++i) raw[i] = s.uniform(-1.0, 1.0);
        const double worst = (acts.transpose() * raw).cwiseAbs().maxCoeff();
        if (worst > 1.0) raw /= worst;
        return raw;
    };
    BanditInstance inst;
    inst.actions = std::move(actions);
    inst.loss_at = gen;
    inst.horizon = horizon;
    inst.seed = seed;
    return inst;
}

Eigen::VectorXd hedge_probabilities(const HedgeState& state) {
    const double m = state.log_weights.maxCoeff();
    Eigen::VectorXd p = (state.log_weights.array() - m).exp();
    return p / p.sum();
}

Eigen::VectorXd mixture_from_counts(const Eigen::VectorXd& p, double gamma,
                                    const std::vector<long>& counts, long total) {
    if (gamma > 0.0 && total <= 0) fail("empty_exploration", "exploration multiset is empty");
    Eigen::VectorXd mixed = (1.0 - gamma) * p;
    if (gamma > 0.0) {
        for (std::size_t a = 0; a < counts.size(); ++a) {
            mixed[static_cast<Eigen::Index>(a)] += gamma * counts[a] / static_cast<double>(total);
        }
    }
    return mixed;
}

Eigen::VectorXd build_round_mixture(const Eigen::VectorXd& p, double gamma,
                                    const SpannerSet& s_prime, const SpannerSet& s_dprime,
                                    int n_actions) {
    std::vector<long> counts(static_cast<std::size_t>(n_actions), 0);
    long total = 0;
    for (int i : s_prime.indices) {
        if (i < 0 || i >= n_actions) fail("bad_index", "spanner index outside the action set");
        ++counts[static_cast<std::size_t>(i)];
        ++total;
    }
    for (int i : s_dprime.indices) {
        if (i < 0 || i >= n_actions) fail("bad_index", "spanner index outside the action set");
        ++counts[static_cast<std::size_t>(i)];
        ++total;
    }
    return mixture_from_counts(p, gamma, counts, total);
}

Eigen::MatrixXd round_covariance(const Eigen::VectorXd& p_hat, const PointSet& actions) {
    return actions.matrix() * p_hat.asDiagonal() * actions.matrix().transpose();
}

Eigen::VectorXd loss_estimator(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& x_t,
                               double ell) {
    auto [pinv, rank] = psd_pinv(covariance);
    const Eigen::VectorXd projected = covariance * (pinv * x_t);
    if ((projected - x_t).norm() > 1e-8 * std::max(1.0, x_t.norm())) {
        fail("estimator_span_violation", "chosen action lies outside the covariance span");
    }
    return ell * (pinv * x_t);
}

void hedge_update(HedgeState& state, const Eigen::VectorXd& loss_estimate,
                  const PointSet& actions) {
    const Eigen::VectorXd per_action = actions.matrix().transpose() * loss_estimate;
    if (!per_action.allFinite()) fail("estimator_nan", "loss estimate is not finite");
    state.cumulative_estimated_loss += per_action;
    state.log_weights -= state.eta * per_action;
    // Log-domain normalization keeps the weights representable forever.
    const double m = state.log_weights.maxCoeff();
    const double lse = m + std::log((state.log_weights.array() - m).exp().sum());
    state.log_weights.array() -= lse;
    ++state.round;
}

long spanner_prime_draw_count(int dim, long horizon, double c_sample) {
    const double inner = 4.0 * std::sqrt(static_cast<double>(dim)) +
                         std::log(2.0 * static_cast<double>(horizon));
    return static_cast<long>(std::ceil(c_sample * (dim + inner * inner)));
}

ExplorationSpanners select_exploration_spanners(const Eigen::VectorXd& p_t,
                                                const PointSet& actions, long n_draws,
                                                const std::vector<int>& ratio_indices,
                                                RngStream& stream) {
    const int n = actions.size();
    ExplorationSpanners out;
    out.prime_counts.assign(static_cast<std::size_t>(n), 0);
    out.ratio_indices = ratio_indices;

    // Conditional-binomial multinomial: distributionally identical to
    // n_draws i.i.d. categorical draws from p_t.
    long remaining = n_draws;
    double rest = 1.0;
    for (int a = 0; a < n && remaining > 0; ++a) {
        if (a == n - 1) {
            out.prime_counts[static_cast<std::size_t>(a)] = remaining;
            remaining = 0;
            break;
        }
        const double q = std::clamp(p_t[a] / std::max(rest, 1e-300), 0.0, 1.0);
        std::binomial_distribution<long> binom(remaining, q);
        const long c = binom(stream);
        out.prime_counts[static_cast<std::size_t>(a)] = c;
        remaining -= c;
        rest -= p_t[a];
    }
    out.total = n_draws + static_cast<long>(ratio_indices.size());
    return out;
}

namespace {

// Fixed ratio spanner of the action set: the C-approximate barycentric basis
// on span(K), as action indices. Distribution-independent, computed once.
std::vector<int> fixed_ratio_spanner(const PointSet& actions, double C) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(actions.matrix(), Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > kPinvRankCutoff * sv[0]) ++rank;
    }
    if (rank == 0) return {0};  // all-zero action set: any index works
    const Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
    const PointSet projected(basis.transpose() * actions.matrix());
    LinearOptOracle oracle(projected);
    return barycentric_spanner(oracle, rank, C).indices;
}

int span_rank(const PointSet& actions) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(actions.matrix());
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > kPinvRankCutoff * sv[0]) ++rank;
    }
    return rank;
}

int draw_categorical(const Eigen::VectorXd& probs, RngStream& stream) {
    const double r = stream.uniform01() * probs.sum();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (r <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
}

struct DiagnosticsContext {
    Eigen::MatrixXd span_projector;  // onto span(K), from the action matrix SVD
    int rank = 0;
};

RegretTrace run_core(const BanditInstance& instance, const HedgeParams& params,
                     bool uniform_exploration) {
    const PointSet& actions = instance.actions;
    const int n = actions.size();
    const int d = actions.dim();
    const long horizon = instance.horizon;

    RegretTrace trace;
    if (horizon <= 0) return trace;

    std::vector<int> ratio_indices;
    long n_draws = 0;
    if (uniform_exploration) {
        // Exploration multiset = all of K, one occurrence each.
        n_draws = 0;
        ratio_indices.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) ratio_indices[static_cast<std::size_t>(i)] = i;
    } else {
        ratio_indices = fixed_ratio_spanner(actions, params.ratio_C);
        n_draws = spanner_prime_draw_count(d, horizon, params.c_sample);
    }
    const long s_max = n_draws + static_cast<long>(ratio_indices.size());

    const double log_k = std::log(static_cast<double>(n));
    const double scale = std::sqrt(std::max(log_k, 0.0) / (static_cast<double>(d) * horizon));
    double gamma = params.gamma >= 0.0 ? params.gamma : static_cast<double>(s_max) * scale;
    if (gamma > 0.5) {
        gamma = 0.5;
        trace.gamma_clamped = true;
    }
    const double eta = params.eta >= 0.0 ? params.eta : scale;

    HedgeState state;
    state.log_weights = Eigen::VectorXd::Constant(n, -std::log(static_cast<double>(n)));
    state.gamma = gamma;
    state.eta = eta;
    state.spanner_prime_size = n_draws;
    state.cumulative_estimated_loss = Eigen::VectorXd::Zero(n);

    trace.gamma_used = gamma;
    trace.eta_used = eta;
    trace.spanner_prime_draws = n_draws;
    trace.rounds.reserve(static_cast<std::size_t>(horizon));
    trace.cum_regret.reserve(static_cast<std::size_t>(horizon));

    DiagnosticsContext diag;
    if (params.diagnostics) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(actions.matrix(), Eigen::ComputeThinU);
        const Eigen::VectorXd& sv = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv[i] > kPinvRankCutoff * sv[0]) ++rank;
        }
        const Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
        diag.span_projector = basis * basis.transpose();
        diag.rank = rank;
        trace.diagnostics.span_rank = rank;
    }

    const RngStream run_stream = RngStream::from(instance.seed, "hedge:run");
    double cum_realized = 0.0;
    Eigen::VectorXd per_action_true = Eigen::VectorXd::Zero(n);

    for (long t = 0; t < horizon; ++t) {
        RngStream round_stream = run_stream.split(static_cast<std::uint64_t>(t));
        const Eigen::VectorXd p_t = hedge_probabilities(state);

        std::vector<long> counts;
        long total = 0;
        if (uniform_exploration) {
            counts.assign(static_cast<std::size_t>(n), 1);
            total = n;
        } else {
            ExplorationSpanners sp =
                select_exploration_spanners(p_t, actions, n_draws, ratio_indices, round_stream);
            counts = std::move(sp.prime_counts);
            for (int i : ratio_indices) ++counts[static_cast<std::size_t>(i)];
            total = sp.total;
        }

        const Eigen::VectorXd p_hat = mixture_from_counts(p_t, gamma, counts, total);

        // Draw x_t from the mixture, tagging which component produced it.
        bool explored = false;
        int chosen;
        if (gamma > 0.0 && round_stream.uniform01() < gamma) {
            explored = true;
            Eigen::VectorXd expl(n);
            for (int a = 0; a < n; ++a) expl[a] = static_cast<double>(counts[static_cast<std::size_t>(a)]);
            chosen = draw_categorical(expl, round_stream);
        } else {
            chosen = draw_categorical(p_t, round_stream);
        }

        const Eigen::VectorXd loss = instance.loss_at(t);
        check_bounded(actions, loss);
        const Eigen::VectorXd x_t = actions.point(chosen);
        const double ell = loss.dot(x_t);

        const Eigen::MatrixXd cov = round_covariance(p_hat, actions);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cov_es(cov);
        const double cov_cut =
            kPinvRankCutoff * std::max(cov_es.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
        Eigen::VectorXd cov_inv = Eigen::VectorXd::Zero(d);
        double logdet = 0.0;
        for (int i = 0; i < d; ++i) {
            const double lam = cov_es.eigenvalues()[i];
            if (lam > cov_cut && lam > 0.0) {
                cov_inv[i] = 1.0 / lam;
                logdet += std::log(lam);
            }
        }
        const Eigen::MatrixXd cov_pinv =
            cov_es.eigenvectors() * cov_inv.asDiagonal() * cov_es.eigenvectors().transpose();
        if ((cov * (cov_pinv * x_t) - x_t).norm() > 1e-8 * std::max(1.0, x_t.norm())) {
            fail("estimator_span_violation", "chosen action outside the covariance span");
        }
        const Eigen::VectorXd estimate = ell * (cov_pinv * x_t);

        if (params.diagnostics) {
            HedgeDiagnostics& dg = trace.diagnostics;
            ++dg.rounds;
            const Eigen::MatrixXd acts = actions.matrix();

            // Unbiasedness: sum over hypothetical draws of p_hat(a) L_hat(a)
            // must reproduce the span projection of the true loss.
            Eigen::VectorXd mean_estimate = Eigen::VectorXd::Zero(d);
            for (int a = 0; a < n; ++a) {
                const double ell_a = loss.dot(acts.col(a));
                mean_estimate.noalias() += p_hat[a] * ell_a * (cov_pinv * acts.col(a));
            }
            const double resid = (mean_estimate - diag.span_projector * loss).norm();
            dg.max_unbiasedness_residual = std::max(dg.max_unbiasedness_residual, resid);

            // Exact double-sum second moment.
            double second = 0.0;
            for (int a = 0; a < n; ++a) {
                const double ell_a = loss.dot(acts.col(a));
                const Eigen::VectorXd w = cov_pinv * acts.col(a);
                double inner = 0.0;
                for (int b = 0; b < n; ++b) {
                    const double v = w.dot(acts.col(b));
                    inner += p_t[b] * v * v;
                }
                second += p_hat[a] * ell_a * ell_a * inner;
            }
            dg.max_second_moment = std::max(dg.max_second_moment, second);

            // Magnitude bound against the exploration multiset norm.
            if (gamma > 0.0 && total > 0) {
                Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
                for (int a = 0; a < n; ++a) {
                    if (counts[static_cast<std::size_t>(a)] > 0) {
                        gram.noalias() += static_cast<double>(counts[static_cast<std::size_t>(a)]) *
                                          (acts.col(a) * acts.col(a).transpose());
                    }
                }
                auto [gram_pinv, gram_rank] = psd_pinv(gram);
                const double xt_norm = std::sqrt(std::max(x_t.dot(gram_pinv * x_t), 0.0));
                for (int a = 0; a < n; ++a) {
                    const double lhs = std::abs(estimate.dot(acts.col(a)));
                    const double xa_norm = std::sqrt(std::max(acts.col(a).dot(gram_pinv * acts.col(a)), 0.0));
                    const double rhs = total * xa_norm * xt_norm / gamma;
                    if (lhs > rhs * (1.0 + 1e-9) + 1e-12) ++dg.magnitude_violations;
                }
            }

            // Tail proxy on one fresh diagnostic draw from p_t.
            const int xi = draw_categorical(p_t, round_stream);
            const double z = std::abs(eta * estimate.dot(acts.col(xi)));
            for (int k = 0; k < 3; ++k) {
                if (z > static_cast<double>(k + 1)) ++dg.tail_counts[static_cast<std::size_t>(k)];
            }
        }

        RoundRecord rec;
        rec.chosen_index = chosen;
        rec.realized_loss = ell;
        rec.estimator = estimate;
        rec.covariance_logdet = logdet;
        rec.exploration_draw = explored;
        trace.rounds.push_back(std::move(rec));

        hedge_update(state, estimate, actions);

        cum_realized += ell;
        per_action_true.noalias() += actions.matrix().transpose() * loss;
        trace.cum_regret.push_back(cum_realized - per_action_true.minCoeff());
    }

    trace.final_regret = trace.cum_regret.back();
    trace.best_fixed_loss = per_action_true.minCoeff();
    return trace;
}

}  // namespace

RegretTrace run_geometric_hedge(const BanditInstance& instance, const HedgeParams& params) {
    return run_core(instance, params, false);
}

RegretTrace baseline_uniform_exploration(const BanditInstance& instance,
                                         const HedgeParams& params) {
    return run_core(instance, params, true);
}

}  // namespace volspan
