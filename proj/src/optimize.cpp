#include "remtrack/optimize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "remtrack/analytic.hpp"

namespace remtrack {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

budget budget::from_costs(double delta, double delta_max) {
    require(delta > 0.0, "budget: delta must be positive");
    require(delta_max >= 0.0, "budget: delta_max must be >= 0");
    budget b;
    b.delta = delta;
    b.delta_max = delta_max;
    b.eta = delta_max / delta;
    require(b.eta <= 1.0 + 1e-12, "budget: delta_max/delta must not exceed 1");
    if (b.eta > 1.0) b.eta = 1.0;
    return b;
}

budget budget::from_eta(double eta) {
    require(eta >= 0.0 && eta <= 1.0, "budget: eta must lie in [0,1]");
    budget b;
    b.delta = 1.0;
    b.delta_max = eta;
    b.eta = eta;
    return b;
}

problem1_solution solve_problem1_dtmc(double p, double p_s, const budget& b) {
    require(p >= 0.0 && p <= 1.0, "solve_problem1_dtmc: p must lie in [0,1]");
    require(p_s >= 0.0 && p_s <= 1.0, "solve_problem1_dtmc: p_s must lie in [0,1]");
    problem1_solution sol;
    sol.decision = p1_decision::sample_at_eta;
    sol.p_alpha_star = b.eta;
    sol.p_e_ns = 0.5;
    const double s = p_s * b.eta;
    const double denom = 4.0 * p + 2.0 * s - 4.0 * p * s;
    sol.p_e_star = denom > 0.0 ? 2.0 * (p - p * s) / denom : sol.p_e_ns;
    return sol;
}

problem1_solution solve_problem1_bdmp(double p, double q, double p_s, const budget& b, int xhat0) {
    source_model::bdmp(2, p, q); // parameter validation only
    require(p_s >= 0.0 && p_s <= 1.0, "solve_problem1_bdmp: p_s must lie in [0,1]");
    require(xhat0 == 0 || xhat0 == 1, "solve_problem1_bdmp: xhat0 must be 0 or 1");
    require(p + q > 0.0, "solve_problem1_bdmp: p+q must be positive");
    problem1_solution sol;
    // toward = rate of drifting away from the resting estimate, back = rate of
    // returning to it; xhat0 = 1 swaps the roles of p and q
    const double away = (xhat0 == 0) ? p : q;
    const double back = (xhat0 == 0) ? q : p;
    sol.p_e_ns = away / (p + q);
    bool sample = true;
    if (back > away) {
        const double channel_floor = (back - away) / (1.0 + back - away);
        sample = p_s > channel_floor && b.eta > channel_floor / p_s;
    }
    if (!sample || b.eta == 0.0) {
        sol.decision = p1_decision::never_sample;
        sol.p_alpha_star = 0.0;
        sol.p_e_star = sol.p_e_ns;
        return sol;
    }
    sol.decision = p1_decision::sample_at_eta;
    sol.p_alpha_star = b.eta;
    const double s = p_s * b.eta;
    sol.p_e_star =
        2.0 * p * q * (1.0 - s) / ((p + q) * (p * (1.0 - s) + (1.0 - q) * s + q));
    return sol;
}

problem1_solution solve_problem1_numeric(const source_model& src, double p_s, const budget& b,
                                         int xhat0) {
    require(p_s >= 0.0 && p_s <= 1.0, "solve_problem1_numeric: p_s must lie in [0,1]");
    require(xhat0 >= 0 && xhat0 < src.n, "solve_problem1_numeric: xhat0 out of range");
    problem1_solution sol;
    sol.numeric = true;
    sol.p_e_ns = never_sample_error(src, xhat0);
    if (b.eta == 0.0) {
        sol.decision = p1_decision::never_sample;
        sol.p_e_star = sol.p_e_ns;
        return sol;
    }
    const auto objective = [&](double a) { return p_e(src, policy_spec::rs(a), p_s); };
    // golden-section shrink; the objective is unimodal in p_alpha, and for a
    // monotone objective the bracket collapses onto the better endpoint
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 1e-12, hi = b.eta;
    double m1 = hi - inv_phi * (hi - lo);
    double m2 = lo + inv_phi * (hi - lo);
    double f1 = objective(m1), f2 = objective(m2);
    while (hi - lo > 1e-10) {
        if (f1 <= f2) {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - inv_phi * (hi - lo);
            f1 = objective(m1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + inv_phi * (hi - lo);
            f2 = objective(m2);
        }
    }
    const double a_star = 0.5 * (lo + hi);
    const double f_star = objective(a_star);
    if (f_star < sol.p_e_ns) {
        sol.decision = p1_decision::sample_at_eta;
        sol.p_alpha_star = a_star;
        sol.p_e_star = f_star;
    } else {
        sol.decision = p1_decision::never_sample;
        sol.p_alpha_star = 0.0;
        sol.p_e_star = sol.p_e_ns;
    }
    return sol;
}

double always_sample_error(const source_model& src, double p_s) {
    return p_e(src, policy_spec::rs(1.0), p_s);
}

double never_sample_error(const source_model& src, int xhat0) {
    require(xhat0 >= 0 && xhat0 < src.n, "never_sample_error: xhat0 out of range");
    const Eigen::VectorXd pi = stationary(transition_matrix(src));
    return 1.0 - pi(xhat0);
}

wtg_stats wtg_chain(int n, double p_ns, double p_as) {
    require(n >= 0, "wtg_chain: n must be >= 0");
    require(p_ns >= 0.0 && p_ns <= 1.0, "wtg_chain: p_ns must lie in [0,1]");
    require(p_as >= 0.0 && p_as < 1.0, "wtg_chain: p_as must lie in [0,1)");
    if (p_ns == 1.0) throw std::domain_error("wtg_chain: diverges at p_ns = 1");
    const double xn = std::pow(p_ns, n);
    wtg_stats st;
    st.pi0 = 1.0 / (1.0 + (p_ns - xn) / (1.0 - p_ns) + xn / (1.0 - p_as));
    // mean streak = sum k pi_k: geometric ramp below the threshold, geometric
    // tail with ratio p_as above it
    const double below = (p_ns - p_ns * xn - n * xn + n * p_ns * xn) / ((1.0 - p_ns) * (1.0 - p_ns));
    const double above = xn * (n + p_as - n * p_as) / ((1.0 - p_as) * (1.0 - p_as));
    st.c_bar = (below + above) * st.pi0;
    st.sampling_fraction = xn / (1.0 - p_as) * st.pi0;
    return st;
}

double wtg_pi(int k, int n, double p_ns, double p_as) {
    require(k >= 0, "wtg_pi: k must be >= 0");
    const wtg_stats st = wtg_chain(n, p_ns, p_as);
    if (k == 0) return st.pi0;
    if (k < n) return std::pow(p_ns, k) * st.pi0;
    return std::pow(p_as, k - n) * std::pow(p_ns, n) * st.pi0;
}

problem2_solution solve_problem2(double p_ns, double p_as, const budget& b) {
    require(p_ns > 0.0 && p_ns < 1.0, "solve_problem2: p_ns must lie in (0,1)");
    require(p_as >= 0.0 && p_as < 1.0, "solve_problem2: p_as must lie in [0,1)");
    problem2_solution sol;
    if (p_as >= p_ns || b.eta == 0.0) {
        // sampling cannot help (or is not allowed); the streak chain reduces
        // to the no-sampling geometric law
        sol.c_bar = p_ns / (1.0 - p_ns);
        sol.pi0 = 1.0 - p_ns;
        sol.sampling_fraction = 0.0;
        sol.n_unclamped = std::numeric_limits<double>::quiet_NaN();
        return sol;
    }
    const double arg = b.eta * (1.0 - p_as) / (1.0 - (1.0 - b.eta) * p_ns - b.eta * p_as);
    const double raw = std::log(arg) / std::log(p_ns);
    sol.n_unclamped = raw;
    int n = static_cast<int>(std::ceil(raw - 1e-9));
    if (n < 0) n = 0;
    wtg_stats st = wtg_chain(n, p_ns, p_as);
    while (st.sampling_fraction > b.eta + 1e-12) {
        ++n;
        st = wtg_chain(n, p_ns, p_as);
    }
    sol.n_star = n;
    sol.c_bar = st.c_bar;
    sol.pi0 = st.pi0;
    sol.sampling_fraction = st.sampling_fraction;
    return sol;
}

} // namespace remtrack
