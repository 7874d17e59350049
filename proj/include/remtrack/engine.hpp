#ifndef REMTRACK_ENGINE_HPP
#define REMTRACK_ENGINE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "remtrack/channel.hpp"
#include "remtrack/policies.hpp"
#include "remtrack/sources.hpp"

namespace remtrack {

/// One full simulation setup. cost_matrix may be left empty, which selects the
/// default penalty |i - j|.
struct sim_config {
    source_model source;
    channel_spec channel;
    policy_spec policy;
    long long horizon = 1000000;
    std::uint64_t seed = 1;
    int x0 = 0;
    int xhat0 = 0;
    Eigen::MatrixXd cost_matrix;
    double kappa = 2.0; // memory-error base
    int mem_n = 10;     // memory horizon, streaks beyond it cost nothing
    double delta = 1.0; // per-sample cost
    long long warmup = 0;
};

/// Time-averaged metrics of one run (or a pooled set of runs).
struct metrics_report {
    double p_e = 0.0;
    double variance = 0.0;
    double actuation_cost = 0.0;
    double consecutive_error = 0.0;
    double memory_cost = 0.0;
    double sampling_rate = 0.0;
    double sampling_cost = 0.0;
    Eigen::MatrixXd joint_occupancy;
    long long slots = 0;
    std::uint64_t seed = 0;
};

Eigen::MatrixXd default_cost_matrix(int n);

/// Validate a config against the struct invariants; throws on violation.
void validate(const sim_config& cfg);

/// Simulate cfg.horizon slots. Per slot: the source steps, the policy decides
/// on (t, X_t, X_{t-1}, Xhat_{t-1}, streak), a fired sample passes the channel
/// with probability p_s and on success is applied within the slot, and metrics
/// accumulate on the post-resolution pair. All three substreams draw every
/// slot, so one policy's choices never perturb another's randomness.
/// Deterministic: identical configs give bit-identical reports.
metrics_report run(const sim_config& cfg);

/// Mean streak value of a recorded trajectory.
double consecutive_error_empirical(const std::vector<long long>& streaks);

struct replicate_result {
    std::vector<metrics_report> replicas;
    metrics_report pooled; // plain means; slots summed
    double p_e_stderr = 0.0;
};

/// Independent replicas with seeds derived from cfg.seed; replica 0 is
/// bit-identical to run(cfg).
replicate_result replicate(const sim_config& cfg, int replicas);

} // namespace remtrack

#endif
