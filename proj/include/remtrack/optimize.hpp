#ifndef REMTRACK_OPTIMIZE_HPP
#define REMTRACK_OPTIMIZE_HPP

#include <optional>

#include "remtrack/sources.hpp"

namespace remtrack {

/// Sampling budget: per-sample cost delta, budget delta_max per slot, and the
/// derived admissible sampling rate eta = delta_max/delta, capped at 1.
struct budget {
    double delta = 1.0;
    double delta_max = 1.0;
    double eta = 1.0;

    static budget from_costs(double delta, double delta_max);
    static budget from_eta(double eta);
};

enum class p1_decision { sample_at_eta, never_sample };

/// Minimum time-averaged error under the rate budget: either randomized
/// stationary sampling at the full admissible rate, or no sampling at all.
struct problem1_solution {
    p1_decision decision = p1_decision::sample_at_eta;
    double p_alpha_star = 0.0;
    double p_e_star = 0.0;
    double p_e_ns = 0.0; // no-sampling baseline
    bool numeric = false; // true when produced by the search fallback
};

/// 2-state uniform-jump source: sampling at eta always beats never sampling.
problem1_solution solve_problem1_dtmc(double p, double p_s, const budget& b);

/// 2-state birth-death source; the answer depends on which state the receiver
/// estimate starts in when no sample ever arrives.
problem1_solution solve_problem1_bdmp(double p, double q, double p_s, const budget& b, int xhat0 = 0);

/// Search fallback for sources with no closed-form solution: golden-section
/// minimization of the stationary error over p_alpha in (0, eta], interval
/// tolerance 1e-10, compared against the never-sample baseline.
problem1_solution solve_problem1_numeric(const source_model& src, double p_s, const budget& b,
                                         int xhat0 = 0);

/// Stationary error when every slot carries a sample (p_alpha = 1).
double always_sample_error(const source_model& src, double p_s);

/// Stationary error when no sample is ever taken and the estimate stays at
/// xhat0: one minus the source's stationary mass there.
double never_sample_error(const source_model& src, int xhat0);

/// Stationary quantities of the error-streak chain under a
/// wait-then-generate(n) policy, where p_ns drives streak growth below the
/// threshold and p_as above it.
struct wtg_stats {
    double pi0 = 0.0;              // no-error mass
    double c_bar = 0.0;            // mean streak length
    double sampling_fraction = 0.0; // mass at or above the threshold
};

wtg_stats wtg_chain(int n, double p_ns, double p_as);

/// Full streak-chain stationary law: mass of streak state k under threshold n.
double wtg_pi(int k, int n, double p_ns, double p_as);

/// Minimum mean streak length under the budget via the streak threshold n.
/// n_star empty means never sample (p_as >= p_ns, or a zero budget).
struct problem2_solution {
    std::optional<int> n_star;
    double c_bar = 0.0;
    double pi0 = 0.0;
    double sampling_fraction = 0.0;
    double n_unclamped = 0.0; // raw threshold before rounding; NaN when never sampling
};

problem2_solution solve_problem2(double p_ns, double p_as, const budget& b);

} // namespace remtrack

#endif
