#include "remtrack/policies.hpp"

#include <stdexcept>
#include <string>

namespace remtrack {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

policy_spec policy_spec::uniform(int d) {
    require(d >= 1, "uniform: d must be >= 1");
    policy_spec pol;
    pol.kind = policy_kind::uniform;
    pol.d = d;
    return pol;
}

policy_spec policy_spec::change_aware() {
    policy_spec pol;
    pol.kind = policy_kind::change_aware;
    return pol;
}

policy_spec policy_spec::semantics_aware() {
    policy_spec pol;
    pol.kind = policy_kind::semantics_aware;
    return pol;
}

policy_spec policy_spec::rs(double p_alpha) {
    require(p_alpha >= 0.0 && p_alpha <= 1.0, "rs: p_alpha must lie in [0,1]");
    policy_spec pol;
    pol.kind = policy_kind::rs;
    pol.p_alpha = p_alpha;
    return pol;
}

policy_spec policy_spec::wtg(int n) {
    require(n >= 0, "wtg: n must be >= 0");
    policy_spec pol;
    pol.kind = policy_kind::wtg;
    pol.n = n;
    return pol;
}

bool decide(const policy_spec& pol, const decision_context& ctx) {
    switch (pol.kind) {
        case policy_kind::uniform:
            // first sample at t = d, then every d slots
            return ctx.t % pol.d == 0;
        case policy_kind::change_aware:
            return ctx.x_new != ctx.x_prev;
        case policy_kind::semantics_aware:
            return ctx.x_new != ctx.x_hat;
        case policy_kind::rs:
            return ctx.rand < pol.p_alpha;
        case policy_kind::wtg:
            return ctx.streak >= pol.n;
    }
    throw std::logic_error("decide: unknown policy kind");
}

double sampling_rate_closed_form(const policy_spec& pol, const source_model& src, double p_s) {
    require(p_s >= 0.0 && p_s <= 1.0, "sampling_rate_closed_form: p_s must lie in [0,1]");
    require(pol.kind == policy_kind::change_aware || pol.kind == policy_kind::semantics_aware,
            "sampling_rate_closed_form: only change_aware and semantics_aware are supported");
    require(src.n == 2, "sampling_rate_closed_form: only 2-state sources are supported");
    const double p = src.p;
    const double q = src.q;
    if (src.kind == source_kind::dtmc) {
        if (pol.kind == policy_kind::change_aware) return p;
        return 2.0 * p / (4.0 * p + 2.0 * p_s - 4.0 * p * p_s);
    }
    if (pol.kind == policy_kind::change_aware) return 2.0 * p * q / (p + q);
    return 2.0 * p * q / ((p + q) * (p * (1.0 - p_s) + q + p_s * (1.0 - q)));
}

} // namespace remtrack
