#include "remtrack/engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "remtrack/rng.hpp"

namespace remtrack {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

metrics_report run_one(const sim_config& cfg, std::uint64_t base_seed) {
    const int n = cfg.source.n;
    const Eigen::MatrixXd kernel = transition_matrix(cfg.source);
    const Eigen::MatrixXd cost =
        cfg.cost_matrix.size() > 0 ? cfg.cost_matrix : default_cost_matrix(n);
    const double p_s = success_probability(cfg.channel);

    // cumulative rows for the inverse-cdf source step
    Eigen::MatrixXd cum(n, n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            acc += kernel(i, j);
            cum(i, j) = acc;
        }
    }

    std::vector<double> kappa_pow(static_cast<std::size_t>(cfg.mem_n) + 1, 0.0);
    for (int k = 1; k <= cfg.mem_n; ++k)
        kappa_pow[static_cast<std::size_t>(k)] = std::pow(cfg.kappa, k);

    uniform_stream src_stream(substream_seed(base_seed, rng_consumer::source));
    uniform_stream pol_stream(substream_seed(base_seed, rng_consumer::policy));
    uniform_stream ch_stream(substream_seed(base_seed, rng_consumer::channel));

    int x = cfg.x0;
    int xhat = cfg.xhat0;
    long long streak = (x != xhat) ? 1 : 0;

    double err_sum = 0.0, cost_sum = 0.0, streak_sum = 0.0, mem_sum = 0.0;
    long long sampled_count = 0;
    Eigen::MatrixXd occupancy = Eigen::MatrixXd::Zero(n, n);
    const long long measured = cfg.horizon - cfg.warmup;

    for (long long t = 1; t <= cfg.horizon; ++t) {
        const double u_src = src_stream.next();
        const double u_pol = pol_stream.next();
        const double u_ch = ch_stream.next();

        const int x_prev = x;
        {
            // inline inverse-cdf walk over the precomputed cumulative row
            int next = x_prev;
            for (int j = 0; j < n; ++j) {
                if (kernel(x_prev, j) <= 0.0) continue;
                next = j;
                if (u_src < cum(x_prev, j)) break;
            }
            x = next;
        }

        decision_context ctx;
        ctx.t = t;
        ctx.x_new = x;
        ctx.x_prev = x_prev;
        ctx.x_hat = xhat;
        ctx.streak = streak;
        ctx.rand = u_pol;
        const bool fired = decide(cfg.policy, ctx);
        if (fired && u_ch < p_s) xhat = x;

        streak = (x == xhat) ? 0 : streak + 1;

        if (t > cfg.warmup) {
            if (x != xhat) err_sum += 1.0;
            cost_sum += cost(x, xhat);
            streak_sum += static_cast<double>(streak);
            if (streak >= 1 && streak <= cfg.mem_n)
                mem_sum += kappa_pow[static_cast<std::size_t>(streak)];
            if (fired) ++sampled_count;
            occupancy(x, xhat) += 1.0;
        }
    }

    metrics_report rep;
    rep.slots = measured;
    rep.seed = base_seed;
    rep.p_e = err_sum / measured;
    rep.variance = rep.p_e - rep.p_e * rep.p_e;
    rep.actuation_cost = cost_sum / measured;
    rep.consecutive_error = streak_sum / measured;
    rep.memory_cost = mem_sum / measured;
    rep.sampling_rate = static_cast<double>(sampled_count) / measured;
    rep.sampling_cost = cfg.delta * rep.sampling_rate;
    rep.joint_occupancy = occupancy / static_cast<double>(measured);
    return rep;
}

} // namespace

Eigen::MatrixXd default_cost_matrix(int n) {
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = std::abs(i - j);
    return c;
}

void validate(const sim_config& cfg) {
    require(cfg.horizon >= 1, "sim_config: horizon must be >= 1");
    require(cfg.x0 >= 0 && cfg.x0 < cfg.source.n, "sim_config: x0 out of range");
    require(cfg.xhat0 >= 0 && cfg.xhat0 < cfg.source.n, "sim_config: xhat0 out of range");
    require(cfg.kappa > 0.0, "sim_config: kappa must be positive");
    require(cfg.mem_n >= 1, "sim_config: mem_n must be >= 1");
    require(cfg.delta > 0.0, "sim_config: delta must be positive");
    require(cfg.warmup >= 0 && cfg.warmup < cfg.horizon,
            "sim_config: warmup must lie in [0, horizon)");
    if (cfg.cost_matrix.size() > 0) {
        require(cfg.cost_matrix.rows() == cfg.source.n && cfg.cost_matrix.cols() == cfg.source.n,
                "sim_config: cost_matrix must be N x N");
        for (int i = 0; i < cfg.source.n; ++i)
            require(cfg.cost_matrix(i, i) == 0.0, "sim_config: cost_matrix diagonal must be zero");
    }
}

metrics_report run(const sim_config& cfg) {
    validate(cfg);
    return run_one(cfg, cfg.seed);
}

double consecutive_error_empirical(const std::vector<long long>& streaks) {
    if (streaks.empty()) return 0.0;
    double acc = 0.0;
    for (const long long s : streaks) acc += static_cast<double>(s);
    return acc / static_cast<double>(streaks.size());
}

replicate_result replicate(const sim_config& cfg, int replicas) {
    validate(cfg);
    require(replicas >= 1, "replicate: replicas must be >= 1");
    replicate_result res;
    res.replicas.reserve(static_cast<std::size_t>(replicas));
    for (int r = 0; r < replicas; ++r)
        res.replicas.push_back(run_one(cfg, replica_seed(cfg.seed, static_cast<std::uint64_t>(r))));

    metrics_report pooled;
    const int n = cfg.source.n;
    pooled.joint_occupancy = Eigen::MatrixXd::Zero(n, n);
    for (const metrics_report& rep : res.replicas) {
        pooled.p_e += rep.p_e;
        pooled.variance += rep.variance;
        pooled.actuation_cost += rep.actuation_cost;
        pooled.consecutive_error += rep.consecutive_error;
        pooled.memory_cost += rep.memory_cost;
        pooled.sampling_rate += rep.sampling_rate;
        pooled.sampling_cost += rep.sampling_cost;
        pooled.joint_occupancy += rep.joint_occupancy;
        pooled.slots += rep.slots;
    }
    const double k = static_cast<double>(replicas);
    pooled.p_e /= k;
    pooled.variance /= k;
    pooled.actuation_cost /= k;
    pooled.consecutive_error /= k;
    pooled.memory_cost /= k;
    pooled.sampling_rate /= k;
    pooled.sampling_cost /= k;
    pooled.joint_occupancy /= k;
    pooled.seed = cfg.seed;
    res.pooled = pooled;

    if (replicas >= 2) {
        double ss = 0.0;
        for (const metrics_report& rep : res.replicas) {
            const double d = rep.p_e - pooled.p_e;
            ss += d * d;
        }
        res.p_e_stderr = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
    return res;
}

} // namespace remtrack
