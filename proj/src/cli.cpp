#include "remtrack/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "remtrack/analytic.hpp"
#include "remtrack/rng.hpp"

namespace remtrack {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw config_error(path + ": " + why);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) fail(path + "." + it.key(), "unknown key");
    }
}

const json& get_member(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required key");
    return *it;
}

double get_number(const json& obj, const std::string& path, const char* key) {
    const json& v = get_member(obj, path, key);
    if (!v.is_number()) fail(path + "." + key, "must be a number");
    return v.get<double>();
}

long long get_integer(const json& obj, const std::string& path, const char* key) {
    const json& v = get_member(obj, path, key);
    if (!v.is_number_integer()) fail(path + "." + key, "must be an integer");
    return v.get<long long>();
}

std::string get_string(const json& obj, const std::string& path, const char* key) {
    const json& v = get_member(obj, path, key);
    if (!v.is_string()) fail(path + "." + key, "must be a string");
    return v.get<std::string>();
}

source_model parse_source(const json& j) {
    if (!j.is_object()) fail("source", "must be an object");
    const std::string model = get_string(j, "source", "model");
    if (model == "dtmc") {
        check_keys(j, "source", {"model", "n", "p"});
        const long long n = get_integer(j, "source", "n");
        const double p = get_number(j, "source", "p");
        try {
            return source_model::dtmc(static_cast<int>(n), p);
        } catch (const std::invalid_argument& e) {
            fail("source", e.what());
        }
    }
    if (model == "bdmp") {
        check_keys(j, "source", {"model", "n", "p", "q"});
        const long long n = get_integer(j, "source", "n");
        const double p = get_number(j, "source", "p");
        const double q = get_number(j, "source", "q");
        try {
            return source_model::bdmp(static_cast<int>(n), p, q);
        } catch (const std::invalid_argument& e) {
            fail("source", e.what());
        }
    }
    fail("source.model", "must be \"dtmc\" or \"bdmp\"");
}

channel_spec parse_channel(const json& j) {
    if (!j.is_object()) fail("channel", "must be an object");
    if (j.contains("p_s")) {
        check_keys(j, "channel", {"p_s"});
        try {
            return channel_spec::direct(get_number(j, "channel", "p_s"));
        } catch (const std::invalid_argument& e) {
            fail("channel", e.what());
        }
    }
    check_keys(j, "channel", {"p_tx_mw", "r_m", "beta", "sigma2_mw", "gamma_db"});
    const double p_tx = get_number(j, "channel", "p_tx_mw");
    const double r = get_number(j, "channel", "r_m");
    const double beta = get_number(j, "channel", "beta");
    const double sigma2 = get_number(j, "channel", "sigma2_mw");
    const double gamma_db = get_number(j, "channel", "gamma_db");
    try {
        return channel_spec::physical(p_tx, r, beta, sigma2, gamma_from_db(gamma_db));
    } catch (const std::invalid_argument& e) {
        fail("channel", e.what());
    }
}

policy_spec parse_policy(const json& j) {
    if (!j.is_object()) fail("policy", "must be an object");
    const std::string kind = get_string(j, "policy", "kind");
    try {
        if (kind == "uniform") {
            check_keys(j, "policy", {"kind", "d"});
            return policy_spec::uniform(static_cast<int>(get_integer(j, "policy", "d")));
        }
        if (kind == "change_aware") {
            check_keys(j, "policy", {"kind"});
            return policy_spec::change_aware();
        }
        if (kind == "semantics_aware") {
            check_keys(j, "policy", {"kind"});
            return policy_spec::semantics_aware();
        }
        if (kind == "rs") {
            check_keys(j, "policy", {"kind", "p_alpha"});
            return policy_spec::rs(get_number(j, "policy", "p_alpha"));
        }
        if (kind == "wtg") {
            check_keys(j, "policy", {"kind", "n"});
            return policy_spec::wtg(static_cast<int>(get_integer(j, "policy", "n")));
        }
    } catch (const std::invalid_argument& e) {
        fail("policy", e.what());
    }
    fail("policy.kind",
         "must be one of \"uniform\", \"change_aware\", \"semantics_aware\", \"rs\", \"wtg\"");
}

budget parse_budget(const json& j) {
    if (!j.is_object()) fail("budget", "must be an object");
    try {
        if (j.contains("eta")) {
            check_keys(j, "budget", {"eta"});
            return budget::from_eta(get_number(j, "budget", "eta"));
        }
        check_keys(j, "budget", {"delta", "delta_max"});
        return budget::from_costs(get_number(j, "budget", "delta"),
                                  get_number(j, "budget", "delta_max"));
    } catch (const std::invalid_argument& e) {
        fail("budget", e.what());
    }
}

parsed_config parse_config_json(const json& root) {
    if (!root.is_object()) fail("config", "top level must be an object");
    check_keys(root, "config",
               {"source", "channel", "policy", "horizon", "seed", "x0", "xhat0", "cost_matrix",
                "kappa", "mem_n", "delta", "warmup", "budget"});
    parsed_config pc;
    pc.sim.source = parse_source(get_member(root, "config", "source"));
    pc.sim.channel = parse_channel(get_member(root, "config", "channel"));
    pc.sim.policy = parse_policy(get_member(root, "config", "policy"));
    if (root.contains("horizon")) pc.sim.horizon = get_integer(root, "config", "horizon");
    if (root.contains("seed")) {
        const json& v = root["seed"];
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
            fail("config.seed", "must be a non-negative integer");
        pc.sim.seed = v.get<std::uint64_t>();
    }
    if (root.contains("x0")) pc.sim.x0 = static_cast<int>(get_integer(root, "config", "x0"));
    if (root.contains("xhat0")) pc.sim.xhat0 = static_cast<int>(get_integer(root, "config", "xhat0"));
    if (root.contains("kappa")) pc.sim.kappa = get_number(root, "config", "kappa");
    if (root.contains("mem_n")) pc.sim.mem_n = static_cast<int>(get_integer(root, "config", "mem_n"));
    if (root.contains("delta")) pc.sim.delta = get_number(root, "config", "delta");
    if (root.contains("warmup")) pc.sim.warmup = get_integer(root, "config", "warmup");
    if (root.contains("cost_matrix")) {
        const json& cm = root["cost_matrix"];
        const int n = pc.sim.source.n;
        if (!cm.is_array() || static_cast<int>(cm.size()) != n)
            fail("config.cost_matrix", "must be an N x N array of numbers");
        Eigen::MatrixXd c(n, n);
        for (int i = 0; i < n; ++i) {
            const json& row = cm[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                fail("config.cost_matrix", "must be an N x N array of numbers");
            for (int j = 0; j < n; ++j) {
                const json& v = row[static_cast<std::size_t>(j)];
                if (!v.is_number()) fail("config.cost_matrix", "must be an N x N array of numbers");
                c(i, j) = v.get<double>();
            }
        }
        pc.sim.cost_matrix = c;
    }
    if (root.contains("budget")) {
        pc.has_budget = true;
        pc.budget_spec = parse_budget(root["budget"]);
    }
    try {
        validate(pc.sim);
    } catch (const std::invalid_argument& e) {
        fail("config", e.what());
    }
    return pc;
}

json read_json_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("config", "cannot read file " + path);
    json root;
    try {
        root = json::parse(f);
    } catch (const json::parse_error& e) {
        fail("config", std::string("invalid JSON: ") + e.what());
    }
    return root;
}

json resolved_config_json(const parsed_config& pc) {
    const sim_config& c = pc.sim;
    json src;
    if (c.source.kind == source_kind::dtmc)
        src = {{"model", "dtmc"}, {"n", c.source.n}, {"p", c.source.p}};
    else
        src = {{"model", "bdmp"}, {"n", c.source.n}, {"p", c.source.p}, {"q", c.source.q}};
    json ch;
    if (c.channel.mode == channel_mode::direct) {
        ch = {{"p_s", c.channel.p_s}};
    } else {
        ch = {{"p_tx_mw", c.channel.p_tx}, {"r_m", c.channel.r},     {"beta", c.channel.beta},
              {"sigma2_mw", c.channel.sigma2}, {"gamma_linear", c.channel.gamma},
              {"p_s", c.channel.p_s}};
    }
    json pol;
    switch (c.policy.kind) {
        case policy_kind::uniform: pol = {{"kind", "uniform"}, {"d", c.policy.d}}; break;
        case policy_kind::change_aware: pol = {{"kind", "change_aware"}}; break;
        case policy_kind::semantics_aware: pol = {{"kind", "semantics_aware"}}; break;
        case policy_kind::rs: pol = {{"kind", "rs"}, {"p_alpha", c.policy.p_alpha}}; break;
        case policy_kind::wtg: pol = {{"kind", "wtg"}, {"n", c.policy.n}}; break;
    }
    const Eigen::MatrixXd cost =
        c.cost_matrix.size() > 0 ? c.cost_matrix : default_cost_matrix(c.source.n);
    json cost_rows = json::array();
    for (int i = 0; i < c.source.n; ++i) {
        json row = json::array();
        for (int j = 0; j < c.source.n; ++j) row.push_back(cost(i, j));
        cost_rows.push_back(row);
    }
    json out = {{"source", src},       {"channel", ch},   {"policy", pol},
                {"horizon", c.horizon}, {"seed", c.seed},  {"x0", c.x0},
                {"xhat0", c.xhat0},     {"kappa", c.kappa}, {"mem_n", c.mem_n},
                {"delta", c.delta},     {"warmup", c.warmup}, {"cost_matrix", cost_rows}};
    if (pc.has_budget)
        out["budget"] = {{"delta", pc.budget_spec.delta},
                         {"delta_max", pc.budget_spec.delta_max},
                         {"eta", pc.budget_spec.eta}};
    return out;
}

void write_lines(const std::string& out, const std::vector<std::string>& lines) {
    if (out.empty()) {
        for (const std::string& l : lines) std::cout << l << "\n";
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + out);
    for (const std::string& l : lines) f << l << "\n";
    if (!f) throw std::runtime_error("failed writing output file " + out);
}

class stopwatch {
  public:
    stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

// manifest sits next to the CSV so any result can be re-derived bit-exactly;
// stdout output has no file to sit next to, so it gets none
void write_manifest(const std::string& out, json manifest, const stopwatch& sw) {
    if (out.empty()) return;
    manifest["tool_version"] = tool_version;
    manifest["out"] = out;
    manifest["duration_ms"] = sw.ms();
    std::ofstream f(out + ".manifest.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot open manifest file " + out + ".manifest.json");
    f << manifest.dump(2) << "\n";
}

const char* metrics_header =
    "p_e,variance,actuation_cost,consecutive_error,memory_cost,sampling_rate,sampling_cost,slots,"
    "seed";

std::string metrics_row(const metrics_report& r) {
    std::string s;
    s += format_double(r.p_e);
    s += ',';
    s += format_double(r.variance);
    s += ',';
    s += format_double(r.actuation_cost);
    s += ',';
    s += format_double(r.consecutive_error);
    s += ',';
    s += format_double(r.memory_cost);
    s += ',';
    s += format_double(r.sampling_rate);
    s += ',';
    s += format_double(r.sampling_cost);
    s += ',';
    s += std::to_string(r.slots);
    s += ',';
    s += std::to_string(static_cast<unsigned long long>(r.seed));
    return s;
}

void require_pair_policy(const policy_spec& pol) {
    if (pol.kind == policy_kind::uniform || pol.kind == policy_kind::wtg)
        fail("policy.kind", "analytic evaluation supports rs, change_aware and semantics_aware");
}

metrics_report analytic_report(const sim_config& cfg) {
    require_pair_policy(cfg.policy);
    const double p_s = success_probability(cfg.channel);
    const double pe = p_e(cfg.source, cfg.policy, p_s);
    const Eigen::MatrixXd pi = joint_stationary(cfg.source, cfg.policy, p_s);
    const Eigen::MatrixXd cost =
        cfg.cost_matrix.size() > 0 ? cfg.cost_matrix : default_cost_matrix(cfg.source.n);
    metrics_report rep;
    rep.p_e = pe;
    rep.variance = variance(pe);
    rep.actuation_cost = actuation_cost(pi, cost);
    rep.consecutive_error = consecutive_error(pe);
    rep.memory_cost = memory_cost(pe, cfg.kappa, cfg.mem_n);
    rep.sampling_rate = sampling_rate_analytic(cfg.source, cfg.policy, p_s);
    rep.sampling_cost = cfg.delta * rep.sampling_rate;
    rep.joint_occupancy = pi;
    rep.slots = 0;
    rep.seed = cfg.seed;
    return rep;
}

struct common_flags {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    long long slots = 0;
    bool slots_set = false;
    long long warmup = 0;
    bool warmup_set = false;
};

parsed_config load_config(const common_flags& fl) {
    parsed_config pc = parse_config_json(read_json_file(fl.config_path));
    if (fl.seed_set) pc.sim.seed = fl.seed;
    if (fl.slots_set) pc.sim.horizon = fl.slots;
    if (fl.warmup_set) pc.sim.warmup = fl.warmup;
    try {
        validate(pc.sim);
    } catch (const std::invalid_argument& e) {
        fail("config", e.what());
    }
    return pc;
}

int cmd_simulate(const common_flags& fl, int replicas) {
    const stopwatch sw;
    const parsed_config pc = load_config(fl);
    std::vector<std::string> lines{metrics_header};
    json seeds = json::array();
    if (replicas <= 1) {
        const metrics_report rep = run(pc.sim);
        lines.push_back(metrics_row(rep));
        seeds.push_back(rep.seed);
    } else {
        const replicate_result res = replicate(pc.sim, replicas);
        for (const metrics_report& rep : res.replicas) {
            lines.push_back(metrics_row(rep));
            seeds.push_back(rep.seed);
        }
        lines.push_back(metrics_row(res.pooled));
    }
    write_lines(fl.out, lines);
    write_manifest(fl.out,
                   {{"command", "simulate"},
                    {"config", resolved_config_json(pc)},
                    {"replicas", replicas},
                    {"seeds", seeds}},
                   sw);
    return 0;
}

int cmd_analyze(const common_flags& fl, const std::string& dump_chain_path) {
    const stopwatch sw;
    const parsed_config pc = load_config(fl);
    const metrics_report rep = analytic_report(pc.sim);
    write_lines(fl.out, {metrics_header, metrics_row(rep)});
    if (!dump_chain_path.empty()) {
        const joint_chain jc =
            build_joint_chain(pc.sim.source, pc.sim.policy, success_probability(pc.sim.channel));
        std::vector<std::string> rows;
        rows.reserve(static_cast<std::size_t>(jc.matrix.rows()));
        for (int i = 0; i < jc.matrix.rows(); ++i) {
            std::string line;
            for (int j = 0; j < jc.matrix.cols(); ++j) {
                if (j) line += ',';
                line += format_double(jc.matrix(i, j));
            }
            rows.push_back(line);
        }
        write_lines(dump_chain_path, rows);
    }
    json manifest = {{"command", "analyze"}, {"config", resolved_config_json(pc)}};
    if (!dump_chain_path.empty()) manifest["joint_chain_out"] = dump_chain_path;
    write_manifest(fl.out, manifest, sw);
    return 0;
}

int cmd_optimize(const common_flags& fl, int problem) {
    const stopwatch sw;
    const parsed_config pc = load_config(fl);
    if (!pc.has_budget) fail("budget", "missing required key (optimize needs a budget)");
    const double p_s = success_probability(pc.sim.channel);
    const source_model& src = pc.sim.source;
    json manifest = {{"command", "optimize"},
                     {"problem", problem},
                     {"config", resolved_config_json(pc)}};
    std::vector<std::string> lines;
    if (problem == 1) {
        problem1_solution sol;
        if (src.n == 2) {
            sol = (src.kind == source_kind::dtmc)
                      ? solve_problem1_dtmc(src.p, p_s, pc.budget_spec)
                      : solve_problem1_bdmp(src.p, src.q, p_s, pc.budget_spec, pc.sim.xhat0);
        } else {
            sol = solve_problem1_numeric(src, p_s, pc.budget_spec, pc.sim.xhat0);
        }
        lines.push_back("decision,p_alpha_star,objective,baseline,sampling_fraction,method");
        std::string row;
        row += (sol.decision == p1_decision::sample_at_eta) ? "sample_at_eta" : "never_sample";
        row += ',';
        row += format_double(sol.p_alpha_star);
        row += ',';
        row += format_double(sol.p_e_star);
        row += ',';
        row += format_double(sol.p_e_ns);
        row += ',';
        row += format_double(sol.p_alpha_star); // rs samples at rate p_alpha
        row += ',';
        row += sol.numeric ? "numeric" : "closed_form";
        lines.push_back(row);
    } else {
        const double p_ns = never_sample_error(src, pc.sim.xhat0);
        const double p_as = always_sample_error(src, p_s);
        const problem2_solution sol = solve_problem2(p_ns, p_as, pc.budget_spec);
        manifest["p_ns"] = p_ns;
        manifest["p_as"] = p_as;
        lines.push_back("decision,n_star,objective,baseline,sampling_fraction,method");
        std::string row;
        row += sol.n_star.has_value() ? "wait_then_generate" : "never_sample";
        row += ',';
        if (sol.n_star.has_value()) row += std::to_string(*sol.n_star);
        row += ',';
        row += format_double(sol.c_bar);
        row += ',';
        row += format_double(p_ns / (1.0 - p_ns));
        row += ',';
        row += format_double(sol.sampling_fraction);
        row += ",closed_form";
        lines.push_back(row);
    }
    write_lines(fl.out, lines);
    write_manifest(fl.out, manifest, sw);
    return 0;
}

// --- reproduction targets ---

std::uint64_t cell_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base + 0x9e3779b97f4a7c15ULL * (index + 1));
}

std::string sim_tolerance(const metrics_report& rep) {
    const double sigma = std::sqrt(rep.p_e * (1.0 - rep.p_e) / static_cast<double>(rep.slots));
    return format_double(std::max(0.01, 4.0 * sigma));
}

struct repro_ctx {
    long long slots = 1000000;
    std::uint64_t seed = 1;
    std::uint64_t next_cell = 0;
    json seeds = json::array();
};

metrics_report sim_cell(repro_ctx& ctx, const source_model& src, const channel_spec& ch,
                        const policy_spec& pol) {
    sim_config cfg;
    cfg.source = src;
    cfg.channel = ch;
    cfg.policy = pol;
    cfg.horizon = ctx.slots;
    cfg.seed = cell_seed(ctx.seed, ctx.next_cell++);
    ctx.seeds.push_back(cfg.seed);
    return run(cfg);
}

double analytic_pe(const source_model& src, const policy_spec& pol, double p_s) {
    return p_e(src, pol, p_s);
}

std::vector<std::string> repro_error_table(repro_ctx& ctx, bool dtmc) {
    std::vector<std::string> lines{"p,q,p_s,policy,p_e,source,tolerance"};
    const std::vector<std::pair<double, double>> params =
        dtmc ? std::vector<std::pair<double, double>>{{0.1, 0.8}, {0.3, 0.4}}
             : std::vector<std::pair<double, double>>{{0.1, 0.2}, {0.2, 0.7}};
    const double chans[2] = {0.922, 0.445};
    for (const auto& [p, q] : params) {
        for (const double p_s : chans) {
            const source_model src =
                dtmc ? source_model::dtmc(3, p) : source_model::bdmp(3, p, q);
            const channel_spec ch = channel_spec::direct(p_s);
            const std::pair<const char*, policy_spec> cells[4] = {
                {"semantics_aware", policy_spec::semantics_aware()},
                {"change_aware", policy_spec::change_aware()},
                {"uniform", policy_spec::uniform(5)},
                {"rs", policy_spec::rs(0.7)},
            };
            for (const auto& [name, pol] : cells) {
                const metrics_report rep = sim_cell(ctx, src, ch, pol);
                std::string row = format_double(p) + "," + format_double(q) + "," +
                                  format_double(p_s) + "," + name + "," + format_double(rep.p_e) +
                                  ",simulated," + sim_tolerance(rep);
                lines.push_back(row);
            }
        }
    }
    return lines;
}

std::vector<std::string> repro_budget_table(bool dtmc, double p, double q, double p_s) {
    std::vector<std::string> lines{"eta,decision,p_alpha_star,p_e_ns,p_e_star,source,tolerance"};
    for (const double eta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const budget b = budget::from_eta(eta);
        const problem1_solution sol =
            dtmc ? solve_problem1_dtmc(p, p_s, b) : solve_problem1_bdmp(p, q, p_s, b, 0);
        std::string row = format_double(eta);
        row += ',';
        row += (sol.decision == p1_decision::sample_at_eta) ? "sample_at_eta" : "never_sample";
        row += ',';
        row += format_double(sol.p_alpha_star);
        row += ',';
        row += format_double(sol.p_e_ns);
        row += ',';
        row += format_double(sol.p_e_star);
        row += ",analytic,exact";
        lines.push_back(row);
    }
    return lines;
}

std::vector<std::string> repro_policy_table(repro_ctx& ctx, bool dtmc) {
    std::vector<std::string> lines{"p,q,policy,p_e,source,tolerance"};
    const std::vector<std::pair<double, double>> params =
        dtmc ? std::vector<std::pair<double, double>>{{0.1, 0.9}, {0.3, 0.7}, {0.5, 0.5}, {0.7, 0.3}, {0.9, 0.1}}
             : std::vector<std::pair<double, double>>{{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}, {0.7, 0.8}, {0.9, 0.95}};
    const double p_s = 0.5;
    const channel_spec ch = channel_spec::direct(p_s);
    for (const auto& [p, q] : params) {
        const source_model src = dtmc ? source_model::dtmc(2, p) : source_model::bdmp(2, p, q);
        const auto emit_analytic = [&](const char* name, const policy_spec& pol) {
            lines.push_back(format_double(p) + "," + format_double(q) + "," + name + "," +
                            format_double(analytic_pe(src, pol, p_s)) + ",analytic,exact");
        };
        emit_analytic("semantics_aware", policy_spec::semantics_aware());
        emit_analytic("change_aware", policy_spec::change_aware());
        {
            // the published uniform baseline keeps the 5-slot period of the
            // error tables rather than matching the eta = 0.5 budget
            const metrics_report rep = sim_cell(ctx, src, ch, policy_spec::uniform(5));
            lines.push_back(format_double(p) + "," + format_double(q) + ",uniform," +
                            format_double(rep.p_e) + ",simulated," + sim_tolerance(rep));
        }
        emit_analytic("rs_budget", policy_spec::rs(0.5));
        emit_analytic("rs_unconstrained", policy_spec::rs(1.0));
    }
    return lines;
}

std::vector<std::string> repro_streak_table(double eta) {
    std::vector<std::string> lines{"p,p_ns,p_as,n_star,c_bar,source,tolerance"};
    const double q = 0.2;
    const double p_s = 0.5;
    for (const double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const source_model src = source_model::bdmp(2, p, q);
        const double p_ns = never_sample_error(src, 0);
        const double p_as = always_sample_error(src, p_s);
        const problem2_solution sol = solve_problem2(p_ns, p_as, budget::from_eta(eta));
        std::string row = format_double(p);
        row += ',';
        row += format_double(p_ns);
        row += ',';
        row += format_double(p_as);
        row += ',';
        if (sol.n_star.has_value()) row += std::to_string(*sol.n_star);
        row += ',';
        row += format_double(sol.c_bar);
        row += ",analytic,exact";
        lines.push_back(row);
    }
    return lines;
}

std::vector<std::string> repro_memory_curves(repro_ctx& ctx) {
    std::vector<std::string> lines{"gamma_db,p_s,model,n,p,q,policy,memory_cost,source,tolerance"};
    struct cfg_row {
        const char* model;
        source_model src;
    };
    const cfg_row sources[4] = {
        {"dtmc", source_model::dtmc(3, 0.1)},
        {"dtmc", source_model::dtmc(3, 0.3)},
        {"bdmp", source_model::bdmp(3, 0.1, 0.2)},
        {"bdmp", source_model::bdmp(3, 0.2, 0.7)},
    };
    const double kappa = 2.0;
    const int mem_n = 10;
    for (const double gamma_db : {0.0, 2.0, 4.0, 6.0, 8.0, 10.0}) {
        // success probability calibrated so gamma = 0 dB gives 0.922; the
        // exponential link budget then scales the exponent linearly in gamma
        const double p_s = std::pow(0.922, gamma_from_db(gamma_db));
        const channel_spec ch = channel_spec::direct(p_s);
        for (const cfg_row& sc : sources) {
            const auto emit = [&](const char* name, double mem, const char* src_col,
                                  const std::string& tol) {
                lines.push_back(format_double(gamma_db) + "," + format_double(p_s) + "," +
                                sc.model + "," + std::to_string(sc.src.n) + "," +
                                format_double(sc.src.p) + "," + format_double(sc.src.q) + "," +
                                name + "," + format_double(mem) + "," + src_col + "," + tol);
            };
            const auto analytic_mem = [&](const policy_spec& pol) {
                return memory_cost(analytic_pe(sc.src, pol, p_s), kappa, mem_n);
            };
            emit("semantics_aware", analytic_mem(policy_spec::semantics_aware()), "analytic",
                 "exact");
            emit("change_aware", analytic_mem(policy_spec::change_aware()), "analytic", "exact");
            emit("rs", analytic_mem(policy_spec::rs(0.7)), "analytic", "exact");
            {
                sim_config cfg;
                cfg.source = sc.src;
                cfg.channel = ch;
                cfg.policy = policy_spec::uniform(5);
                cfg.horizon = ctx.slots;
                cfg.kappa = kappa;
                cfg.mem_n = mem_n;
                cfg.seed = cell_seed(ctx.seed, ctx.next_cell++);
                ctx.seeds.push_back(cfg.seed);
                const metrics_report rep = run(cfg);
                emit("uniform", rep.memory_cost, "simulated", sim_tolerance(rep));
            }
        }
    }
    return lines;
}

int cmd_reproduce(const std::string& target, const common_flags& fl) {
    const stopwatch sw;
    repro_ctx ctx;
    if (fl.slots_set) ctx.slots = fl.slots;
    if (fl.seed_set) ctx.seed = fl.seed;
    std::vector<std::string> lines;
    if (target == "table1") {
        lines = repro_error_table(ctx, true);
    } else if (target == "table2") {
        lines = repro_error_table(ctx, false);
    } else if (target == "table3") {
        lines = repro_budget_table(true, 0.4, 0.6, 0.8);
    } else if (target == "table4") {
        lines = repro_budget_table(true, 0.8, 0.2, 0.8);
    } else if (target == "table5") {
        lines = repro_budget_table(false, 0.2, 0.5, 0.5);
    } else if (target == "table6") {
        lines = repro_budget_table(false, 0.6, 0.5, 0.5);
    } else if (target == "table7") {
        lines = repro_policy_table(ctx, true);
    } else if (target == "table8") {
        lines = repro_policy_table(ctx, false);
    } else if (target == "table9") {
        lines = repro_streak_table(0.2);
    } else if (target == "table10") {
        lines = repro_streak_table(0.6);
    } else if (target == "fig5") {
        lines = repro_memory_curves(ctx);
    } else {
        std::cerr << "unknown reproduction target: " << target << "\n";
        return 2;
    }
    write_lines(fl.out, lines);
    write_manifest(fl.out,
                   {{"command", "reproduce"},
                    {"target", target},
                    {"slots", ctx.slots},
                    {"seed", ctx.seed},
                    {"cell_seeds", ctx.seeds}},
                   sw);
    return 0;
}

int cmd_sweep(const common_flags& fl, const std::string& param, const std::string& values,
              bool analytic_mode) {
    const stopwatch sw;
    json root = read_json_file(fl.config_path);
    std::vector<std::string> tokens;
    {
        std::stringstream ss(values);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) tokens.push_back(tok);
        }
    }
    if (tokens.empty()) fail("values", "empty grid");
    std::vector<std::string> segs;
    {
        std::stringstream ss(param);
        std::string seg;
        while (std::getline(ss, seg, '.')) segs.push_back(seg);
    }
    if (segs.empty()) fail("param", "empty parameter path");
    std::vector<std::string> lines{"param,value,metric,metric_value,source"};
    json seeds = json::array();
    for (const std::string& tok : tokens) {
        json point = root;
        json* cursor = &point;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (!cursor->is_object() || !cursor->contains(segs[i]))
                fail(param, "unknown parameter");
            cursor = &(*cursor)[segs[i]];
        }
        json parsed_value;
        try {
            parsed_value = json::parse(tok);
        } catch (const json::parse_error&) {
            parsed_value = tok; // non-numeric grid values pass through as strings
        }
        *cursor = parsed_value;
        parsed_config pc = parse_config_json(point);
        if (fl.seed_set) pc.sim.seed = fl.seed;
        if (fl.slots_set) pc.sim.horizon = fl.slots;
        if (fl.warmup_set) pc.sim.warmup = fl.warmup;
        const metrics_report rep = analytic_mode ? analytic_report(pc.sim) : run(pc.sim);
        seeds.push_back(rep.seed);
        const char* source_col = analytic_mode ? "analytic" : "simulated";
        const std::pair<const char*, double> metrics[7] = {
            {"p_e", rep.p_e},
            {"variance", rep.variance},
            {"actuation_cost", rep.actuation_cost},
            {"consecutive_error", rep.consecutive_error},
            {"memory_cost", rep.memory_cost},
            {"sampling_rate", rep.sampling_rate},
            {"sampling_cost", rep.sampling_cost},
        };
        for (const auto& [name, value] : metrics) {
            lines.push_back(param + "," + tok + "," + name + "," + format_double(value) + "," +
                            source_col);
        }
    }
    write_lines(fl.out, lines);
    write_manifest(fl.out,
                   {{"command", "sweep"},
                    {"param", param},
                    {"values", tokens},
                    {"analytic", analytic_mode},
                    {"seeds", seeds}},
                   sw);
    return 0;
}

} // namespace

parsed_config parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config_json(root);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 10);
    return std::string(buf, res.ptr);
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"remote tracking of a Markov source over an erasure channel"};
    app.name("remtrack");
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    common_flags fl;
    int replicas = 1;
    int problem = 1;
    std::string dump_chain_path;
    std::string target;
    std::string sweep_param;
    std::string sweep_values;
    bool sweep_analytic = false;

    const auto add_common = [&](CLI::App* sc, bool with_config) {
        if (with_config)
            sc->add_option("--config", fl.config_path, "JSON config file")->required();
        sc->add_option("--out", fl.out, "output CSV path (default: stdout, no manifest)");
        sc->add_option("--seed", fl.seed, "override the base seed")
            ->each([&](const std::string&) { fl.seed_set = true; });
        sc->add_option("--slots", fl.slots, "override the horizon")
            ->each([&](const std::string&) { fl.slots_set = true; });
    };

    CLI::App* sc_sim = app.add_subcommand("simulate", "run the slot simulation");
    add_common(sc_sim, true);
    sc_sim->add_option("--replicas", replicas, "independent replicas (adds a pooled row)")
        ->check(CLI::PositiveNumber);
    sc_sim->add_option("--warmup", fl.warmup, "discard this many initial slots")
        ->each([&](const std::string&) { fl.warmup_set = true; });

    CLI::App* sc_ana = app.add_subcommand("analyze", "evaluate the stationary closed forms");
    add_common(sc_ana, true);
    sc_ana->add_option("--dump-joint-chain", dump_chain_path,
                       "also write the joint transition matrix as CSV");

    CLI::App* sc_opt = app.add_subcommand("optimize", "solve a constrained sampling problem");
    add_common(sc_opt, true);
    sc_opt->add_option("--problem", problem, "1: error under a rate budget; 2: streak threshold")
        ->required()
        ->check(CLI::Range(1, 2));

    CLI::App* sc_rep = app.add_subcommand("reproduce", "regenerate a published result set");
    sc_rep->add_option("target", target,
                       "one of table1..table10, fig5")
        ->required();
    add_common(sc_rep, false);

    CLI::App* sc_swp = app.add_subcommand("sweep", "evaluate a config across a parameter grid");
    add_common(sc_swp, true);
    sc_swp->add_option("--param", sweep_param, "dotted config path, e.g. channel.p_s")->required();
    sc_swp->add_option("--values", sweep_values, "comma-separated grid values")->required();
    sc_swp->add_flag("--analytic", sweep_analytic, "evaluate closed forms instead of simulating");
    sc_swp->add_option("--warmup", fl.warmup, "discard this many initial slots")
        ->each([&](const std::string&) { fl.warmup_set = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sc_sim->parsed()) return cmd_simulate(fl, replicas);
        if (sc_ana->parsed()) return cmd_analyze(fl, dump_chain_path);
        if (sc_opt->parsed()) return cmd_optimize(fl, problem);
        if (sc_rep->parsed()) return cmd_reproduce(target, fl);
        if (sc_swp->parsed()) return cmd_sweep(fl, sweep_param, sweep_values, sweep_analytic);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace remtrack
