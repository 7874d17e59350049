#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <remtrack/analytic.hpp>
#include <remtrack/cli.hpp>
#include <remtrack/engine.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace remtrack;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(REMTRACK_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void spew(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    REQUIRE(f.good());
    f << text;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* full_config = R"({
  "source": {"model": "bdmp", "n": 3, "p": 0.2, "q": 0.3},
  "channel": {"p_s": 0.7},
  "policy": {"kind": "rs", "p_alpha": 0.6},
  "horizon": 20000,
  "seed": 11,
  "x0": 1,
  "xhat0": 2,
  "kappa": 1.5,
  "mem_n": 4,
  "delta": 0.5,
  "warmup": 100,
  "budget": {"eta": 0.4}
})";

} // namespace

TEST_CASE("config text parses into a full simulation setup") {
    const parsed_config pc = parse_config_text(full_config);
    CHECK(pc.sim.source.kind == source_kind::bdmp);
    CHECK(pc.sim.source.n == 3);
    CHECK(pc.sim.source.p == doctest::Approx(0.2));
    CHECK(pc.sim.source.q == doctest::Approx(0.3));
    CHECK(pc.sim.channel.p_s == doctest::Approx(0.7));
    CHECK(pc.sim.policy.kind == policy_kind::rs);
    CHECK(pc.sim.policy.p_alpha == doctest::Approx(0.6));
    CHECK(pc.sim.horizon == 20000);
    CHECK(pc.sim.seed == 11);
    CHECK(pc.sim.x0 == 1);
    CHECK(pc.sim.xhat0 == 2);
    CHECK(pc.sim.kappa == doctest::Approx(1.5));
    CHECK(pc.sim.mem_n == 4);
    CHECK(pc.sim.delta == doctest::Approx(0.5));
    CHECK(pc.sim.warmup == 100);
    CHECK(pc.has_budget);
    CHECK(pc.budget_spec.eta == doctest::Approx(0.4));
}

TEST_CASE("omitted fields take the documented defaults") {
    const parsed_config pc = parse_config_text(
        R"({"source":{"model":"dtmc","n":2,"p":0.3},"channel":{"p_s":0.5},"policy":{"kind":"change_aware"}})");
    CHECK(pc.sim.horizon == 1000000);
    CHECK(pc.sim.seed == 1);
    CHECK(pc.sim.x0 == 0);
    CHECK(pc.sim.xhat0 == 0);
    CHECK(pc.sim.kappa == doctest::Approx(2.0));
    CHECK(pc.sim.mem_n == 10);
    CHECK(pc.sim.delta == doctest::Approx(1.0));
    CHECK(pc.sim.warmup == 0);
    CHECK_FALSE(pc.has_budget);
    CHECK(pc.sim.cost_matrix.size() == 0);
}

TEST_CASE("physical channel block resolves the success probability") {
    const parsed_config pc = parse_config_text(
        R"({"source":{"model":"dtmc","n":2,"p":0.3},
            "channel":{"p_tx_mw":100.0,"r_m":10.0,"beta":2.5,"sigma2_mw":0.01,"gamma_db":3.0},
            "policy":{"kind":"semantics_aware"}})");
    CHECK(pc.sim.channel.mode == channel_mode::physical);
    CHECK(success_probability(pc.sim.channel) > 0.0);
    CHECK(success_probability(pc.sim.channel) < 1.0);
}

TEST_CASE("schema violations name the offending field") {
    const auto message_of = [](const std::string& text) {
        try {
            parse_config_text(text);
        } catch (const config_error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message_of(R"({"channel":{"p_s":0.5},"policy":{"kind":"rs"}})").find("config.source") !=
          std::string::npos);
    CHECK(message_of(
              R"({"source":{"model":"dtmc","n":2,"p":0.1,"q":0.9},"channel":{"p_s":0.5},"policy":{"kind":"rs"}})")
              .find("source.q") != std::string::npos);
    CHECK(message_of(
              R"({"source":{"model":"dtmc","n":2,"p":0.1},"channel":{"p_s":0.5},"policy":{"kind":"uniform","p_alpha":0.5}})")
              .find("policy.p_alpha") != std::string::npos);
    CHECK(message_of(
              R"({"source":{"model":"dtmc","n":2,"p":0.1},"channel":{"p_s":2.0},"policy":{"kind":"rs"}})")
              .find("channel") != std::string::npos);
    CHECK(message_of(
              R"({"source":{"model":"dtmc","n":2,"p":0.1},"channel":{"p_s":0.5},"policy":{"kind":"rs","p_alpha":0.5},"budget":{"eta":0.5,"delta":1.0}})")
              .find("budget.delta") != std::string::npos);
    CHECK(message_of(
              R"({"source":{"model":"dtmc","n":2,"p":0.1},"channel":{"p_s":0.5},"policy":{"kind":"rs","p_alpha":0.5},"horizon":0})")
              .find("config") != std::string::npos);
    CHECK(message_of(
              R"({"source":{"model":"dtmc","n":2,"p":0.1},"channel":{"p_s":0.5},"policy":{"kind":"rs","p_alpha":0.5},"cost_matrix":[[0,1],[1,1]]})")
              .find("cost_matrix") != std::string::npos);
    CHECK(message_of("{not json").find("config") != std::string::npos);
}

TEST_CASE("numbers print with ten significant digits and a point separator") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333");
    CHECK(format_double(0.2727272727272727) == "0.2727272727");
    CHECK(format_double(-1.5) == "-1.5");
    CHECK(format_double(1234567.891) == "1234567.891");
    CHECK(format_double(0.1) .find(',') == std::string::npos);
}

TEST_CASE("binary version and usage exits") {
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("") == 2);            // a subcommand is required
    CHECK(run_cli("bogus") == 2);       // unknown subcommand
    CHECK(run_cli("simulate") == 2);    // missing --config
    CHECK(run_cli("optimize --config /nonexistent.json") == 2); // missing --problem
}

TEST_CASE("simulate runs a config end to end, deterministically") {
    spew("/tmp/remtrack_test_cfg.json", full_config);
    CHECK(run_cli("simulate --config /tmp/remtrack_test_cfg.json --out /tmp/remtrack_test_a.csv") ==
          0);
    CHECK(run_cli("simulate --config /tmp/remtrack_test_cfg.json --out /tmp/remtrack_test_b.csv") ==
          0);
    const std::string a = slurp("/tmp/remtrack_test_a.csv");
    CHECK(a == slurp("/tmp/remtrack_test_b.csv"));
    CHECK(a.rfind("p_e,variance,actuation_cost,consecutive_error,memory_cost,sampling_rate,"
                  "sampling_cost,slots,seed\n",
                  0) == 0);
    // header plus exactly one data row
    CHECK(std::count(a.begin(), a.end(), '\n') == 2);
    // the row ends with the measured slots and the seed
    CHECK(a.find(",19900,11\n") != std::string::npos);

    const std::string manifest = slurp("/tmp/remtrack_test_a.csv.manifest.json");
    for (const char* key : {"\"command\"", "\"simulate\"", "\"config\"", "\"tool_version\"",
                            "\"out\"", "\"duration_ms\"", "\"seeds\""}) {
        CHECK(manifest.find(key) != std::string::npos);
    }
}

TEST_CASE("replica rows stack under one pooled row") {
    spew("/tmp/remtrack_test_cfg.json", full_config);
    CHECK(run_cli("simulate --config /tmp/remtrack_test_cfg.json --replicas 3 "
                  "--out /tmp/remtrack_test_r.csv") == 0);
    const std::string text = slurp("/tmp/remtrack_test_r.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 5); // header + 3 replicas + pooled
}

TEST_CASE("analyze matches the library closed forms and rejects decoupled policies") {
    spew("/tmp/remtrack_test_cfg.json", full_config);
    CHECK(run_cli("analyze --config /tmp/remtrack_test_cfg.json --out /tmp/remtrack_test_an.csv") ==
          0);
    const std::string text = slurp("/tmp/remtrack_test_an.csv");
    const parsed_config pc = parse_config_text(full_config);
    const double pe = p_e(pc.sim.source, pc.sim.policy, 0.7);
    CHECK(text.find(format_double(pe)) != std::string::npos);

    spew("/tmp/remtrack_test_uni.json",
         R"({"source":{"model":"dtmc","n":2,"p":0.3},"channel":{"p_s":0.5},"policy":{"kind":"uniform","d":5}})");
    CHECK(run_cli("analyze --config /tmp/remtrack_test_uni.json") == 2);

    // the dumped joint kernel has one row per pair state
    CHECK(run_cli("analyze --config /tmp/remtrack_test_cfg.json --out /tmp/remtrack_test_an.csv "
                  "--dump-joint-chain /tmp/remtrack_test_jc.csv") == 0);
    const std::string jc = slurp("/tmp/remtrack_test_jc.csv");
    CHECK(std::count(jc.begin(), jc.end(), '\n') == 9);
}

TEST_CASE("optimize emits one solution row per problem") {
    spew("/tmp/remtrack_test_cfg2.json",
         R"({"source":{"model":"bdmp","n":2,"p":0.2,"q":0.5},"channel":{"p_s":0.5},
             "policy":{"kind":"rs","p_alpha":1.0},"budget":{"eta":0.3}})");
    CHECK(run_cli("optimize --config /tmp/remtrack_test_cfg2.json --problem 1 "
                  "--out /tmp/remtrack_test_p1.csv") == 0);
    const std::string p1 = slurp("/tmp/remtrack_test_p1.csv");
    CHECK(p1.rfind("decision,p_alpha_star,objective,baseline,sampling_fraction,method\n", 0) == 0);
    CHECK(p1.find("never_sample") != std::string::npos); // table row: eta 0.3 cannot help

    CHECK(run_cli("optimize --config /tmp/remtrack_test_cfg2.json --problem 2 "
                  "--out /tmp/remtrack_test_p2.csv") == 0);
    const std::string p2 = slurp("/tmp/remtrack_test_p2.csv");
    CHECK(p2.rfind("decision,n_star,objective,baseline,sampling_fraction,method\n", 0) == 0);
    CHECK(p2.find("wait_then_generate") != std::string::npos);

    // a config without a budget cannot be optimized
    spew("/tmp/remtrack_test_cfg3.json",
         R"({"source":{"model":"bdmp","n":2,"p":0.2,"q":0.5},"channel":{"p_s":0.5},"policy":{"kind":"rs","p_alpha":1.0}})");
    CHECK(run_cli("optimize --config /tmp/remtrack_test_cfg3.json --problem 1") == 2);
    CHECK(run_cli("optimize --config /tmp/remtrack_test_cfg2.json --problem 3") == 2);
}

TEST_CASE("reproduce targets exist and analytic ones are byte-stable") {
    CHECK(run_cli("reproduce table9 --out /tmp/remtrack_test_t9a.csv") == 0);
    CHECK(run_cli("reproduce table9 --out /tmp/remtrack_test_t9b.csv") == 0);
    CHECK(slurp("/tmp/remtrack_test_t9a.csv") == slurp("/tmp/remtrack_test_t9b.csv"));
    CHECK(run_cli("reproduce table99") == 2);
}

TEST_CASE("sweep emits a long row per grid point and metric") {
    spew("/tmp/remtrack_test_cfg.json", full_config);
    CHECK(run_cli("sweep --config /tmp/remtrack_test_cfg.json --param channel.p_s "
                  "--values 0.3,0.6,0.9 --analytic --out /tmp/remtrack_test_sw.csv") == 0);
    const std::string text = slurp("/tmp/remtrack_test_sw.csv");
    CHECK(text.rfind("param,value,metric,metric_value,source\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 7);
    CHECK(text.find("channel.p_s,0.6,p_e,") != std::string::npos);
    CHECK(text.find(",analytic\n") != std::string::npos);

    CHECK(run_cli("sweep --config /tmp/remtrack_test_cfg.json --param channel.nope --values 1") ==
          2);
}
