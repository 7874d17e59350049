#ifndef REMTRACK_ANALYTIC_HPP
#define REMTRACK_ANALYTIC_HPP

#include <Eigen/Dense>

#include "remtrack/policies.hpp"
#include "remtrack/sources.hpp"

namespace remtrack {

/// Per-slot event probabilities seen by the receiver under randomized
/// stationary sampling: h1 = sample generated and delivered, h0 = generated
/// and erased, idle = no sample generated.
struct sampling_channel_factors {
    double h0 = 0.0;
    double h1 = 0.0;
    double idle = 1.0;
};

sampling_channel_factors make_factors(double p_alpha, double p_s);

/// Markov chain over (source state, receiver estimate). Pair (i, j) maps to
/// row/column i*n + j.
struct joint_chain {
    int n = 0;
    policy_kind policy = policy_kind::rs;
    Eigen::MatrixXd matrix;
};

/// One-step kernel of the joint (X, Xhat) chain under rs, change_aware or
/// semantics_aware sampling. Other policies decouple from the pair state and
/// raise an error.
joint_chain build_joint_chain(const source_model& src, const policy_spec& pol, double p_s);

/// Stationary row vector of a row-stochastic matrix: dense solve of pi P = pi
/// with the normalization replacing one equation, residual-checked to 1e-10,
/// with a damped power-iteration fallback for singular or ill-conditioned
/// systems. An identity block (fully reducible chain) yields the uniform
/// distribution, the power-iteration fixed point from a uniform start.
Eigen::VectorXd stationary(const Eigen::MatrixXd& m);

/// Stationary vector of the closed communicating class reachable from `start`,
/// embedded into the full state space with zeros elsewhere. This is the
/// long-run law of a chain launched at `start` when the reachable set is a
/// single closed class, e.g. a never-updated estimate.
Eigen::VectorXd stationary(const Eigen::MatrixXd& m, int start);

/// True when joint_stationary_closed_form covers the case.
bool has_closed_form(const source_model& src, const policy_spec& pol);

/// Closed-form joint stationary distribution as an n x n matrix pi(i, j) for
/// 2- and 3-state sources under rs, change_aware or semantics_aware sampling.
/// The 3-state uniform-jump change_aware diagonal has no usable closed form
/// (the published one fails normalization), so that case is answered by the
/// numeric solve of the joint kernel. Unsupported cases raise an error
/// pointing at build_joint_chain + stationary.
Eigen::MatrixXd joint_stationary_closed_form(const source_model& src, const policy_spec& pol, double p_s);

/// Joint stationary law by the best available route: closed form when the
/// case is covered, numeric solve of the joint kernel otherwise.
Eigen::MatrixXd joint_stationary(const source_model& src, const policy_spec& pol, double p_s);

/// Markov chain over the estimation-error level E = |X - Xhat| under
/// randomized stationary sampling. Lumping the joint chain by error level is
/// exact in the stationary regime.
struct error_chain {
    source_kind kind = source_kind::dtmc;
    Eigen::MatrixXd matrix;
};

error_chain build_error_chain(const source_model& src, double p_alpha, double p_s);

/// Stationary error probability Pr[X != Xhat] for rs, change_aware or
/// semantics_aware sampling; closed form where available, joint-chain solve
/// otherwise.
double p_e(const source_model& src, const policy_spec& pol, double p_s);

/// Stationary error probability Pr[E != 0] of a 3-level error chain, written
/// directly in the entries of its kernel.
double three_state_error_probability(const error_chain& ec);

/// Stationary variance of the error indicator.
double variance(double p_e);

/// Expected actuation penalty sum_{i,j} cost(i, j) pi(i, j).
double actuation_cost(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& cost);

/// Expected number of further error slots given an error slot: p_e / (1 - p_e).
double consecutive_error(double p_e);

/// Expected cost of remembering an error streak, weights kappa^k for the first
/// n streak slots: (1 - p_e) kappa p_e (1 - (kappa p_e)^n) / (1 - kappa p_e),
/// continuously extended at kappa p_e = 1.
double memory_cost(double p_e, double kappa, int n);

/// Long-run sampling rate of an rs/change_aware/semantics_aware policy from
/// the joint stationary law, any state count.
double sampling_rate_analytic(const source_model& src, const policy_spec& pol, double p_s);

/// Comparison thresholds for randomized stationary sampling against the other
/// policies on a 3-state uniform-jump source.
struct comparison_thresholds {
    double rs_error_beats_change_aware = 0.0;    // rs p_e below change_aware iff p_alpha >= this
    double rs_error_beats_semantics_aware = 1.0; // rs p_e above semantics_aware for all p_alpha < this
    double rs_var_below_semantics_aware = 0.0;   // rs variance below semantics_aware iff p_alpha <= this
    double rs_var_below_change_aware = 0.0;      // rs variance below change_aware iff p_alpha >= this
};

comparison_thresholds policy_comparison_thresholds(double p, double p_s);

} // namespace remtrack

#endif
