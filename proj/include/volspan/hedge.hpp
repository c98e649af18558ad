#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "volspan/geometry.hpp"
#include "volspan/rng.hpp"

namespace volspan {

/// Finite-action bandit instance with an oblivious loss sequence: losses are
/// a fixed function of the round index (and the instance seed), never of the
/// learner's draws. Every loss satisfies |L_t . x| <= 1 over the actions.
struct BanditInstance {
    PointSet actions;
    std::function<Eigen::VectorXd(long)> loss_at;  // round index (0-based) -> loss vector
    long horizon = 0;
    std::uint64_t seed = 0;
};

/// Rows of `losses` are cycled when shorter than the horizon. Boundedness is
/// verified against every action at construction.
BanditInstance make_fixed_loss_instance(PointSet actions, const Eigen::MatrixXd& losses,
                                        long horizon, std::uint64_t seed);

/// Uniform-random loss vectors scaled into the polar of the action set.
BanditInstance make_random_loss_instance(PointSet actions, long horizon, std::uint64_t seed);

struct HedgeParams {
    double gamma = -1.0;     // < 0: Theorem-style default, clamped to [0, 1/2]
    double eta = -1.0;       // < 0: Theorem-style default
    double c_sample = 8.0;   // multiplier in the per-round spanner size N
    double ratio_C = 2.0;    // approximation factor of the fixed barycentric spanner
    bool diagnostics = false;  // per-round estimator identity checks (slower)
};

struct HedgeState {
    Eigen::VectorXd log_weights;    // log of unnormalized p_t
    long round = 0;
    double gamma = 0.0;
    double eta = 0.0;
    long spanner_prime_size = 0;    // N, the per-round sample count
    Eigen::VectorXd cumulative_estimated_loss;  // per-action sum of L_hat . x
};

struct RoundRecord {
    int chosen_index = 0;
    double realized_loss = 0.0;
    Eigen::VectorXd estimator;
    double covariance_logdet = 0.0;
    bool exploration_draw = false;
};

struct HedgeDiagnostics {
    double max_unbiasedness_residual = 0.0;
    double max_second_moment = 0.0;     // exact double-sum E[(L_hat . x)^2], max over rounds
    long magnitude_violations = 0;      // per-round |L_hat . x| bound failures
    std::array<long, 3> tail_counts{};  // events |eta L_hat . x| > theta for theta = 1,2,3
    long rounds = 0;
    int span_rank = 0;                  // d' of span(K)
};

struct RegretTrace {
    std::vector<RoundRecord> rounds;
    std::vector<double> cum_regret;  // vs best fixed action in hindsight, per round
    double final_regret = 0.0;
    double best_fixed_loss = 0.0;
    double gamma_used = 0.0;
    double eta_used = 0.0;
    long spanner_prime_draws = 0;  // N
    bool gamma_clamped = false;
    HedgeDiagnostics diagnostics;
};

/// Normalized action distribution of a state.
Eigen::VectorXd hedge_probabilities(const HedgeState& state);

/// p_hat = (1 - gamma) p + gamma * uniform over the exploration multiset.
/// Throws "empty_exploration" when gamma > 0 and the multiset is empty.
Eigen::VectorXd mixture_from_counts(const Eigen::VectorXd& p, double gamma,
                                    const std::vector<long>& counts, long total);

/// Spec-shaped wrapper over mixture_from_counts: the exploration multiset is
/// the union of the two spanners' index multisets.
Eigen::VectorXd build_round_mixture(const Eigen::VectorXd& p, double gamma,
                                    const SpannerSet& s_prime, const SpannerSet& s_dprime,
                                    int n_actions);

/// C_t = E_{x ~ p_hat}[x x^T], an exact weighted sum.
Eigen::MatrixXd round_covariance(const Eigen::VectorXd& p_hat, const PointSet& actions);

/// L_hat = ell * C_t^+ x_t. Throws "estimator_span_violation" when x_t is
/// outside the span of C_t.
Eigen::VectorXd loss_estimator(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& x_t,
                               double ell);

/// Multiplicative-weights step in the log domain; leaves the state normalized.
void hedge_update(HedgeState& state, const Eigen::VectorXd& loss_estimate,
                  const PointSet& actions);

/// Per-round exploration multisets: N i.i.d. draws from p_t plus the fixed
/// 2-approximate barycentric basis (computed once per run and reused).
struct ExplorationSpanners {
    std::vector<long> prime_counts;       // per-action multiplicity of S'
    std::vector<int> ratio_indices;       // S'' action indices
    long total = 0;
};
ExplorationSpanners select_exploration_spanners(const Eigen::VectorXd& p_t,
                                                const PointSet& actions, long n_draws,
                                                const std::vector<int>& ratio_indices,
                                                RngStream& stream);

/// Per-round sample budget N = ceil(c_sample (d + (4 sqrt(d) + log 2T)^2)).
long spanner_prime_draw_count(int dim, long horizon, double c_sample);

RegretTrace run_geometric_hedge(const BanditInstance& instance, const HedgeParams& params);

/// Same engine with the exploration multiset replaced by all of K.
RegretTrace baseline_uniform_exploration(const BanditInstance& instance,
                                         const HedgeParams& params);

}  // namespace volspan
