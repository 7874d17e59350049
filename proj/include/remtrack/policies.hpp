#ifndef REMTRACK_POLICIES_HPP
#define REMTRACK_POLICIES_HPP

#include <cstdint>

#include "remtrack/sources.hpp"

namespace remtrack {

enum class policy_kind { uniform, change_aware, semantics_aware, rs, wtg };

/// Sampling policy. Exactly one of the parameters is meaningful per kind:
/// uniform fires every d slots, rs fires i.i.d. with probability p_alpha,
/// wtg fires once the estimation error has persisted for n slots (n = 0 fires
/// every slot). change_aware and semantics_aware carry no parameters.
struct policy_spec {
    policy_kind kind = policy_kind::rs;
    int d = 1;
    double p_alpha = 1.0;
    int n = 0;

    static policy_spec uniform(int d);
    static policy_spec change_aware();
    static policy_spec semantics_aware();
    static policy_spec rs(double p_alpha);
    static policy_spec wtg(int n);
};

/// Everything a policy may look at when deciding whether slot t carries a sample.
struct decision_context {
    long long t = 0;     // current slot, first decision happens at t = 1
    int x_new = 0;       // source state after the slot-t transition
    int x_prev = 0;      // source state before the transition
    int x_hat = 0;       // receiver estimate entering the slot
    long long streak = 0; // consecutive slots the estimate has been wrong, before this slot
    double rand = 0.0;   // uniform draw dedicated to the policy
};

/// Pure decision function; no policy state lives outside the context.
bool decide(const policy_spec& pol, const decision_context& ctx);

/// Long-run sampling rate of change- and semantics-aware policies on a
/// two-state source. Other policy/source combinations have no closed form
/// here and raise an error.
double sampling_rate_closed_form(const policy_spec& pol, const source_model& src, double p_s);

} // namespace remtrack

#endif
