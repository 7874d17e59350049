#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <remtrack/analytic.hpp>
#include <remtrack/engine.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace remtrack;

namespace {

sim_config base_config() {
    sim_config cfg;
    cfg.source = source_model::dtmc(2, 0.3);
    cfg.channel = channel_spec::direct(0.8);
    cfg.policy = policy_spec::rs(0.5);
    cfg.horizon = 200000;
    cfg.seed = 42;
    return cfg;
}

bool reports_identical(const metrics_report& a, const metrics_report& b) {
    return a.p_e == b.p_e && a.variance == b.variance && a.actuation_cost == b.actuation_cost &&
           a.consecutive_error == b.consecutive_error && a.memory_cost == b.memory_cost &&
           a.sampling_rate == b.sampling_rate && a.sampling_cost == b.sampling_cost &&
           a.slots == b.slots && a.seed == b.seed &&
           (a.joint_occupancy - b.joint_occupancy).cwiseAbs().maxCoeff() == 0.0;
}

} // namespace

TEST_CASE("config validation rejects out-of-range fields") {
    sim_config cfg = base_config();
    cfg.horizon = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.x0 = 2;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.xhat0 = -1;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.kappa = 0.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.mem_n = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.delta = 0.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.warmup = cfg.horizon;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.cost_matrix = Eigen::MatrixXd::Ones(2, 2); // nonzero diagonal
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.cost_matrix = Eigen::MatrixXd::Zero(3, 3);
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    CHECK_NOTHROW(validate(base_config()));
}

TEST_CASE("identical configs give bit-identical reports") {
    const sim_config cfg = base_config();
    CHECK(reports_identical(run(cfg), run(cfg)));

    // a different seed must actually change the trajectory
    sim_config other = base_config();
    other.seed = 43;
    CHECK(run(other).p_e != run(cfg).p_e);
}

TEST_CASE("a frozen desynced system is fully deterministic") {
    sim_config cfg;
    cfg.source = source_model::dtmc(2, 0.0); // source never moves
    cfg.channel = channel_spec::direct(1.0);
    cfg.policy = policy_spec::rs(0.0); // sampler never fires
    cfg.horizon = 5;
    cfg.x0 = 0;
    cfg.xhat0 = 1;
    const metrics_report rep = run(cfg);
    CHECK(rep.p_e == 1.0);
    CHECK(rep.variance == 0.0);
    CHECK(rep.actuation_cost == 1.0);
    // the streak enters the first slot at 1 and grows by one per slot
    CHECK(rep.consecutive_error == doctest::Approx((2 + 3 + 4 + 5 + 6) / 5.0));
    CHECK(rep.memory_cost == doctest::Approx((4 + 8 + 16 + 32 + 64) / 5.0));
    CHECK(rep.sampling_rate == 0.0);
    CHECK(rep.sampling_cost == 0.0);
    CHECK(rep.slots == 5);
}

TEST_CASE("uniform sampling rate is the inverse period") {
    sim_config cfg = base_config();
    cfg.policy = policy_spec::uniform(4);
    cfg.horizon = 10000; // divisible by the period, so the rate is exact
    const metrics_report rep = run(cfg);
    CHECK(rep.sampling_rate == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(rep.sampling_cost == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("per-slot bookkeeping identities hold on any trajectory") {
    for (const std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
        sim_config cfg = base_config();
        cfg.source = source_model::bdmp(3, 0.25, 0.3);
        cfg.policy = policy_spec::semantics_aware();
        cfg.horizon = 50000;
        cfg.seed = seed;
        const metrics_report rep = run(cfg);
        CHECK(std::abs(rep.variance - (rep.p_e - rep.p_e * rep.p_e)) <= 1e-9);
        CHECK(rep.joint_occupancy.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(rep.p_e - (1.0 - rep.joint_occupancy.trace())) <= 1e-9);
        CHECK(rep.sampling_cost == doctest::Approx(cfg.delta * rep.sampling_rate).epsilon(1e-12));
    }
}

TEST_CASE("empirical error matches the closed form within sampling noise") {
    const sim_config cfg = base_config(); // p = 0.3, p_alpha = 0.5, p_s = 0.8
    const metrics_report rep = run(cfg);
    const double expect = p_e(cfg.source, cfg.policy, 0.8);
    CHECK(expect == doctest::Approx(0.236842105).epsilon(1e-8));
    const double sigma = std::sqrt(expect * (1.0 - expect) / static_cast<double>(cfg.horizon));
    CHECK(std::abs(rep.p_e - expect) <= 4.0 * sigma);

    // occupancy should track the joint stationary law cell by cell
    const Eigen::MatrixXd pi = joint_stationary(cfg.source, cfg.policy, 0.8);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(rep.joint_occupancy(i, j) == doctest::Approx(pi(i, j)).epsilon(0.05));
}

TEST_CASE("warmup discards the transient prefix") {
    sim_config cfg = base_config();
    cfg.horizon = 1000;
    cfg.warmup = 400;
    const metrics_report rep = run(cfg);
    CHECK(rep.slots == 600);
    CHECK(reports_identical(rep, run(cfg)));

    // a sharp check: frozen desynced system with warmup skips the early streaks
    sim_config frozen;
    frozen.source = source_model::dtmc(2, 0.0);
    frozen.channel = channel_spec::direct(1.0);
    frozen.policy = policy_spec::rs(0.0);
    frozen.horizon = 5;
    frozen.warmup = 2;
    frozen.x0 = 0;
    frozen.xhat0 = 1;
    const metrics_report tail = run(frozen);
    CHECK(tail.slots == 3);
    CHECK(tail.consecutive_error == doctest::Approx((4 + 5 + 6) / 3.0));
}

TEST_CASE("streak mean helper") {
    CHECK(consecutive_error_empirical({}) == 0.0);
    CHECK(consecutive_error_empirical({0, 1, 2, 0}) == doctest::Approx(0.75));
    CHECK(consecutive_error_empirical({5}) == doctest::Approx(5.0));
}

TEST_CASE("memory cost stays inside its structural bounds") {
    sim_config cfg = base_config();
    cfg.policy = policy_spec::rs(0.2);
    cfg.channel = channel_spec::direct(0.3);
    cfg.kappa = 2.0;
    cfg.mem_n = 6;
    cfg.horizon = 20000;
    const metrics_report rep = run(cfg);
    CHECK(rep.memory_cost >= 0.0);
    CHECK(rep.memory_cost <= std::pow(cfg.kappa, cfg.mem_n));
}

TEST_CASE("one replica reproduces the plain run exactly") {
    const sim_config cfg = base_config();
    const replicate_result res = replicate(cfg, 1);
    REQUIRE(res.replicas.size() == 1);
    CHECK(reports_identical(res.replicas[0], run(cfg)));
    CHECK(res.pooled.p_e == res.replicas[0].p_e);
    CHECK(res.p_e_stderr == 0.0);
}

TEST_CASE("replicas are independent and pool by plain means") {
    sim_config cfg = base_config();
    cfg.horizon = 50000;
    const int k = 4;
    const replicate_result res = replicate(cfg, k);
    REQUIRE(res.replicas.size() == k);

    // replica 0 runs on the caller's seed, later ones on derived seeds
    CHECK(res.replicas[0].seed == cfg.seed);
    for (int r = 1; r < k; ++r) CHECK(res.replicas[r].seed != res.replicas[0].seed);
    for (int r = 1; r < k; ++r) CHECK(res.replicas[r].p_e != res.replicas[0].p_e);

    double mean_pe = 0.0;
    long long slots = 0;
    for (const metrics_report& rep : res.replicas) {
        mean_pe += rep.p_e;
        slots += rep.slots;
    }
    mean_pe /= k;
    CHECK(res.pooled.p_e == doctest::Approx(mean_pe).epsilon(1e-14));
    CHECK(res.pooled.slots == slots);
    CHECK(res.pooled.seed == cfg.seed);
    CHECK(res.p_e_stderr > 0.0);

    // the derived seeds are re-runnable: a plain run on a replica's seed
    // reproduces that replica bit for bit
    sim_config solo = cfg;
    solo.seed = res.replicas[2].seed;
    CHECK(reports_identical(run(solo), res.replicas[2]));

    CHECK_THROWS_AS(replicate(cfg, 0), std::invalid_argument);
}

TEST_CASE("pooled error tightens around the closed form") {
    sim_config cfg = base_config();
    cfg.horizon = 100000;
    const replicate_result res = replicate(cfg, 8);
    const double expect = p_e(cfg.source, cfg.policy, 0.8);
    CHECK(std::abs(res.pooled.p_e - expect) <= 5.0 * res.p_e_stderr + 1e-6);
}
