#include "remtrack/analytic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace remtrack {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool pair_policy(policy_kind k) {
    return k == policy_kind::rs || k == policy_kind::change_aware || k == policy_kind::semantics_aware;
}

// effective per-slot delivery probability; semantics/change-aware policies
// fire deterministically, rs thins the channel by p_alpha
double effective_s(const policy_spec& pol, double p_s) {
    return pol.kind == policy_kind::rs ? pol.p_alpha * p_s : p_s;
}

void check_row_stochastic(const Eigen::MatrixXd& m) {
    require(m.rows() == m.cols() && m.rows() >= 1, "stationary: matrix must be square");
    for (int i = 0; i < m.rows(); ++i) {
        require(m.row(i).minCoeff() >= -1e-12, "stationary: negative transition probability");
        require(std::abs(m.row(i).sum() - 1.0) <= 1e-9, "stationary: rows must sum to 1");
    }
}

double residual_inf(const Eigen::MatrixXd& m, const Eigen::VectorXd& pi) {
    return (m.transpose() * pi - pi).lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd power_iteration(const Eigen::MatrixXd& m) {
    const int k = static_cast<int>(m.rows());
    const Eigen::MatrixXd mt = m.transpose();
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(k, 1.0 / k);
    for (long iter = 0; iter < 1000000; ++iter) {
        Eigen::VectorXd next = mt * pi;
        next /= next.sum();
        if ((next - pi).lpNorm<Eigen::Infinity>() <= 1e-13) return next;
        // averaging with the current iterate damps period-2 cycles without
        // moving the fixed point
        pi = 0.5 * (pi + next);
        pi /= pi.sum();
    }
    throw std::runtime_error("stationary: power iteration did not converge, residual " +
                             std::to_string(residual_inf(m, pi)));
}

} // namespace

sampling_channel_factors make_factors(double p_alpha, double p_s) {
    require(p_alpha >= 0.0 && p_alpha <= 1.0, "make_factors: p_alpha must lie in [0,1]");
    require(p_s >= 0.0 && p_s <= 1.0, "make_factors: p_s must lie in [0,1]");
    sampling_channel_factors f;
    f.h0 = p_alpha * (1.0 - p_s);
    f.h1 = p_alpha * p_s;
    f.idle = 1.0 - p_alpha;
    return f;
}

joint_chain build_joint_chain(const source_model& src, const policy_spec& pol, double p_s) {
    require(p_s >= 0.0 && p_s <= 1.0, "build_joint_chain: p_s must lie in [0,1]");
    require(pair_policy(pol.kind),
            "build_joint_chain: policy must be rs, change_aware or semantics_aware");
    const int n = src.n;
    const Eigen::MatrixXd k = transition_matrix(src);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int row = i * n + j;
            for (int t = 0; t < n; ++t) {
                const double move = k(i, t);
                if (move == 0.0) continue;
                double fire = 0.0;
                switch (pol.kind) {
                    case policy_kind::rs: fire = pol.p_alpha; break;
                    case policy_kind::change_aware: fire = (t != i) ? 1.0 : 0.0; break;
                    default: fire = (t != j) ? 1.0 : 0.0; break;
                }
                const double sync = fire * p_s;
                m(row, t * n + t) += move * sync;
                m(row, t * n + j) += move * (1.0 - sync);
            }
        }
    }
    joint_chain jc;
    jc.n = n;
    jc.policy = pol.kind;
    jc.matrix = std::move(m);
    return jc;
}

Eigen::VectorXd stationary(const Eigen::MatrixXd& m) {
    check_row_stochastic(m);
    const int k = static_cast<int>(m.rows());
    // every distribution is invariant under the identity; pick uniform so the
    // answer is deterministic instead of whatever the factorization lands on
    if (m.isIdentity(0.0)) return Eigen::VectorXd::Constant(k, 1.0 / k);
    Eigen::MatrixXd a = m.transpose() - Eigen::MatrixXd::Identity(k, k);
    a.row(k - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    b(k - 1) = 1.0;
    Eigen::VectorXd pi = a.partialPivLu().solve(b);
    if (pi.allFinite() && pi.minCoeff() >= -1e-9 && std::abs(pi.sum() - 1.0) <= 1e-6) {
        pi = pi.cwiseMax(0.0);
        pi /= pi.sum();
        if (residual_inf(m, pi) <= 1e-10) return pi;
    }
    return power_iteration(m);
}

Eigen::VectorXd stationary(const Eigen::MatrixXd& m, int start) {
    check_row_stochastic(m);
    require(start >= 0 && start < m.rows(), "stationary: start state out of range");
    const int k = static_cast<int>(m.rows());
    // forward closure of the start state; every successor of a member is a
    // member, so the restricted matrix stays row-stochastic
    std::vector<int> members;
    std::vector<char> seen(k, 0);
    members.push_back(start);
    seen[start] = 1;
    for (std::size_t h = 0; h < members.size(); ++h) {
        for (int j = 0; j < k; ++j) {
            if (m(members[h], j) > 0.0 && !seen[j]) {
                seen[j] = 1;
                members.push_back(j);
            }
        }
    }
    std::sort(members.begin(), members.end());
    const int r = static_cast<int>(members.size());
    if (r == k) return stationary(m);
    Eigen::MatrixXd sub(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) sub(i, j) = m(members[i], members[j]);
    const Eigen::VectorXd sub_pi = stationary(sub);
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < r; ++i) pi(members[i]) = sub_pi(i);
    return pi;
}

namespace {

Eigen::MatrixXd dtmc2_delivery_family(double p, double s) {
    const double d = 4.0 * p + 2.0 * s - 4.0 * p * s;
    Eigen::MatrixXd pi(2, 2);
    pi(0, 0) = pi(1, 1) = (p + (1.0 - p) * s) / d;
    pi(0, 1) = pi(1, 0) = p * (1.0 - s) / d;
    return pi;
}

Eigen::MatrixXd dtmc3_delivery_family(double p, double s) {
    const double d = 9.0 * p + 3.0 * s - 9.0 * p * s;
    Eigen::MatrixXd pi = Eigen::MatrixXd::Constant(3, 3, p * (1.0 - s) / d);
    pi.diagonal().setConstant((p + s - p * s) / d);
    return pi;
}

Eigen::MatrixXd dtmc2_change_aware(double p_s) {
    const double d = 4.0 - 2.0 * p_s;
    Eigen::MatrixXd pi(2, 2);
    pi(0, 0) = pi(1, 1) = 1.0 / d;
    pi(0, 1) = pi(1, 0) = (1.0 - p_s) / d;
    return pi;
}

Eigen::MatrixXd bdmp2_delivery_family(double p, double q, double s) {
    const double d = (p + q) * (p * (1.0 - s) + q + (1.0 - q) * s);
    Eigen::MatrixXd pi(2, 2);
    pi(0, 0) = q * (q + (1.0 - q) * s) / d;
    pi(0, 1) = pi(1, 0) = p * q * (1.0 - s) / d;
    pi(1, 1) = p * (p + (1.0 - p) * s) / d;
    return pi;
}

Eigen::MatrixXd bdmp2_change_aware(double p, double q, double p_s) {
    const double d = (p + q) * (2.0 - p_s);
    Eigen::MatrixXd pi(2, 2);
    pi(0, 0) = q / d;
    pi(0, 1) = q * (1.0 - p_s) / d;
    pi(1, 0) = p * (1.0 - p_s) / d;
    pi(1, 1) = p / d;
    return pi;
}

Eigen::MatrixXd bdmp3_delivery_family(double p, double q, double s) {
    const double u = 1.0 - s;
    const double b = q + (1.0 - q) * s;
    const double denom =
        (p * p + p * q + q * q) * (p * u * (q + (2.0 - q) * s) + b * b + p * p * u * u);
    Eigen::MatrixXd pi(3, 3);
    // the corner diagonals mirror each other under p <-> q; writing pi(0,0)
    // as that mirror keeps the matrix normalized, which the naive corner
    // expression q^2[psu + b] does not
    pi(0, 0) = q * q * (2.0 * q * s * u + q * q * u * u + s * (p + (1.0 - p) * s)) / denom;
    pi(0, 1) = pi(1, 0) = p * q * q * u * b / denom;
    pi(1, 1) = p * q * (s + p * u) * b / denom;
    pi(0, 2) = pi(2, 0) = p * p * q * q * u * u / denom;
    pi(1, 2) = pi(2, 1) = p * p * q * u * (p + (1.0 - p) * s) / denom;
    pi(2, 2) = p * p * (2.0 * p * s * u + p * p * u * u + s * b) / denom;
    return pi;
}

Eigen::MatrixXd bdmp3_change_aware(double p, double q, double p_s) {
    const double u = 1.0 - p_s;
    const double kq = p * p + p * q + q * q;
    const double d1 = (p + q) * (2.0 - p_s) * kq;
    const double d2 = (2.0 - p_s) * kq;
    Eigen::MatrixXd pi(3, 3);
    pi(0, 0) = q * q * (q + p * p_s * (2.0 - p_s)) / d1;
    pi(0, 1) = q * q * u / d2;
    pi(0, 2) = p * q * q * u * u / d1;
    pi(1, 0) = p * q * q * u / d1;
    pi(1, 1) = p * q / d2;
    pi(1, 2) = p * p * q * u / d1;
    pi(2, 0) = p * p * q * u * u / d1;
    pi(2, 1) = p * p * u / d2;
    pi(2, 2) = p * p * (p + q * p_s * (2.0 - p_s)) / d1;
    return pi;
}

Eigen::MatrixXd joint_stationary_oracle(const source_model& src, const policy_spec& pol, double p_s) {
    const joint_chain jc = build_joint_chain(src, pol, p_s);
    const Eigen::VectorXd pi = stationary(jc.matrix);
    Eigen::MatrixXd out(src.n, src.n);
    for (int i = 0; i < src.n; ++i)
        for (int j = 0; j < src.n; ++j) out(i, j) = pi(i * src.n + j);
    return out;
}

} // namespace

bool has_closed_form(const source_model& src, const policy_spec& pol) {
    return pair_policy(pol.kind) && (src.n == 2 || src.n == 3);
}

Eigen::MatrixXd joint_stationary_closed_form(const source_model& src, const policy_spec& pol, double p_s) {
    require(p_s >= 0.0 && p_s <= 1.0, "joint_stationary_closed_form: p_s must lie in [0,1]");
    if (!has_closed_form(src, pol))
        throw std::invalid_argument(
            "joint_stationary_closed_form: unsupported case; use build_joint_chain + stationary");
    const double s = effective_s(pol, p_s);
    Eigen::MatrixXd pi;
    if (src.kind == source_kind::dtmc) {
        if (pol.kind == policy_kind::change_aware) {
            if (src.n == 2) {
                pi = dtmc2_change_aware(p_s);
            } else {
                // the published diagonal for this case fails normalization;
                // the numeric solve of the joint kernel is authoritative here
                pi = joint_stationary_oracle(src, pol, p_s);
            }
        } else {
            pi = (src.n == 2) ? dtmc2_delivery_family(src.p, s) : dtmc3_delivery_family(src.p, s);
        }
    } else {
        if (pol.kind == policy_kind::change_aware) {
            pi = (src.n == 2) ? bdmp2_change_aware(src.p, src.q, p_s)
                              : bdmp3_change_aware(src.p, src.q, p_s);
        } else {
            pi = (src.n == 2) ? bdmp2_delivery_family(src.p, src.q, s)
                              : bdmp3_delivery_family(src.p, src.q, s);
        }
    }
    // degenerate parameters (frozen source with no delivery) zero the closed
    // forms' denominators; the solver's documented tie-break takes over
    if (!pi.allFinite()) pi = joint_stationary_oracle(src, pol, p_s);
    return pi;
}

Eigen::MatrixXd joint_stationary(const source_model& src, const policy_spec& pol, double p_s) {
    return has_closed_form(src, pol) ? joint_stationary_closed_form(src, pol, p_s)
                                     : joint_stationary_oracle(src, pol, p_s);
}

error_chain build_error_chain(const source_model& src, double p_alpha, double p_s) {
    const sampling_channel_factors f = make_factors(p_alpha, p_s);
    const double h1 = f.h1;
    const int n = src.n;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    if (src.kind == source_kind::dtmc) {
        const double p = src.p;
        const double q = src.q;
        const double g = p * (1.0 - h1);
        const double stay = q * (1.0 - h1);
        m(0, 0) = q + (n - 1) * p * h1;
        for (int j = 1; j < n; ++j) m(0, j) = 2.0 * (1.0 - static_cast<double>(j) / n) * g;
        for (int i = 1; i < n; ++i) {
            m(i, 0) = p + q * h1 + (n - 2) * p * h1;
            m(i, i) = (2 * i < n) ? (static_cast<double>(n - 2 * i) / (n - i)) * g + stay : stay;
        }
        for (int j = 2; j < n; ++j) m(1, j) = (static_cast<double>(2 * n - 2 * j - 1) / (n - 1)) * g;
        for (int i = 2; i < n; ++i) m(i, 1) = (static_cast<double>(2 * n - 2 * i - 1) / (n - i)) * g;
        for (int i = 2; i < n; ++i) {
            for (int j = 2; j < n; ++j) {
                if (i == j) continue;
                if (j > i) {
                    if (n <= i + j - 1)
                        m(i, j) = (static_cast<double>(n - j) / (n - i)) * g;
                    else
                        m(i, j) = (static_cast<double>(2 * n - i - 2 * j) / (n - i)) * g;
                } else {
                    if (n <= i + j - 1)
                        m(i, j) = g;
                    else
                        m(i, j) = (static_cast<double>(2 * n - j - 2 * i) / (n - i)) * g;
                }
            }
        }
    } else {
        const double p = src.p;
        const double q = src.q;
        const Eigen::MatrixXd pi = joint_stationary(src, policy_spec::rs(p_alpha), p_s);
        Eigen::VectorXd lev = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) lev(std::abs(i - j)) += pi(i, j);
        const double miss = 1.0 - h1;
        // level 0
        {
            double stay = (1.0 - p + p * h1) * pi(0, 0) + (1.0 - q + q * h1) * pi(n - 1, n - 1);
            double leave = p * miss * pi(0, 0) + q * miss * pi(n - 1, n - 1);
            for (int k = 1; k < n - 1; ++k) {
                stay += (1.0 - p - q + (p + q) * h1) * pi(k, k);
                leave += (p + q) * miss * pi(k, k);
            }
            m(0, 0) = stay / lev(0);
            if (n > 1) m(0, 1) = leave / lev(0);
        }
        // level 1 -> 0 pools the corner pairs with the interior ones
        if (n > 1) {
            double acc = (p + (1.0 - p) * h1) * pi(0, 1) + (q + (1.0 - q) * h1) * pi(n - 1, n - 2);
            for (int k = 1; k < n - 1; ++k)
                acc += (q + (1.0 - p - q) * h1 + p * h1) * pi(k, k - 1) +
                       (p + (1.0 - p - q) * h1 + q * h1) * pi(k, k + 1);
            m(1, 0) = lev(1) > 0.0 ? acc / lev(1) : 0.0;
        }
        for (int i = 2; i < n; ++i) {
            // only a delivered sample clears a gap of two or more levels
            double acc = h1 * pi(0, i) + h1 * pi(n - 1, n - 1 - i);
            for (int k = 1; k < n - 1; ++k) {
                if (k - i >= 0) acc += h1 * pi(k, k - i);
                if (k + i <= n - 1) acc += h1 * pi(k, k + i);
            }
            m(i, 0) = lev(i) > 0.0 ? acc / lev(i) : 0.0;
        }
        for (int i = 2; i < n; ++i) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                if (k - i >= 0) acc += q * miss * pi(k, k - i);
                if (k + i <= n - 1) acc += p * miss * pi(k, k + i);
            }
            m(i, i - 1) = lev(i) > 0.0 ? acc / lev(i) : 0.0;
        }
        for (int i = 1; i < n - 1; ++i) {
            double acc = 0.0;
            for (int k = 1; k < n - 1; ++k) {
                if (k - i >= 0) acc += p * miss * pi(k, k - i);
                if (k + i <= n - 1) acc += q * miss * pi(k, k + i);
            }
            m(i, i + 1) = lev(i) > 0.0 ? acc / lev(i) : 0.0;
        }
        for (int i = 1; i < n; ++i) {
            double acc = (1.0 - p) * miss * pi(0, i) + (1.0 - q) * miss * pi(n - 1, n - 1 - i);
            for (int k = 1; k < n - 1; ++k) {
                if (k - i >= 0) acc += (1.0 - p - q) * miss * pi(k, k - i);
                if (k + i <= n - 1) acc += (1.0 - p - q) * miss * pi(k, k + i);
            }
            m(i, i) = lev(i) > 0.0 ? acc / lev(i) : 0.0;
        }
        // unreachable error levels carry no mass; a self-loop keeps the row stochastic
        for (int i = 0; i < n; ++i) {
            if (lev(i) <= 0.0) {
                m.row(i).setZero();
                m(i, i) = 1.0;
            }
        }
    }
    error_chain ec;
    ec.kind = src.kind;
    ec.matrix = std::move(m);
    return ec;
}

double p_e(const source_model& src, const policy_spec& pol, double p_s) {
    require(pair_policy(pol.kind), "p_e: policy must be rs, change_aware or semantics_aware");
    return 1.0 - joint_stationary(src, pol, p_s).trace();
}

double three_state_error_probability(const error_chain& ec) {
    require(ec.matrix.rows() == 3, "three_state_error_probability: chain must have 3 levels");
    const Eigen::MatrixXd& m = ec.matrix;
    const double p00 = m(0, 0), p01 = m(0, 1);
    const double p10 = m(1, 0), p11 = m(1, 1);
    const double p20 = m(2, 0), p21 = m(2, 1);
    const double phi = 1.0 + p21 - p11 - p00 - p00 * p21 + p00 * p11 + p01 * p20 - p01 * p10;
    return phi / (phi + p20 - p20 * p11 + p10 * p21);
}

double variance(double p_e) {
    require(p_e >= 0.0 && p_e <= 1.0, "variance: p_e must lie in [0,1]");
    return p_e - p_e * p_e;
}

double actuation_cost(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& cost) {
    require(pi.rows() == cost.rows() && pi.cols() == cost.cols(),
            "actuation_cost: dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < pi.rows(); ++i)
        for (int j = 0; j < pi.cols(); ++j)
            if (i != j) acc += cost(i, j) * pi(i, j);
    return acc;
}

double consecutive_error(double p_e) {
    require(p_e >= 0.0 && p_e <= 1.0, "consecutive_error: p_e must lie in [0,1]");
    if (p_e == 1.0) throw std::domain_error("consecutive_error: diverges at p_e = 1");
    return p_e / (1.0 - p_e);
}

double memory_cost(double p_e, double kappa, int n) {
    require(p_e >= 0.0 && p_e <= 1.0, "memory_cost: p_e must lie in [0,1]");
    require(kappa > 0.0, "memory_cost: kappa must be positive");
    require(n >= 0, "memory_cost: n must be >= 0");
    if (p_e == 1.0) throw std::domain_error("memory_cost: diverges at p_e = 1");
    const double x = kappa * p_e;
    // (1-p_e) * sum_{k=1..n} x^k, with the geometric sum collapsed
    if (std::abs(1.0 - x) < 1e-12) return (1.0 - p_e) * n * x;
    return (1.0 - p_e) * x * (1.0 - std::pow(x, n)) / (1.0 - x);
}

double sampling_rate_analytic(const source_model& src, const policy_spec& pol, double p_s) {
    require(pair_policy(pol.kind),
            "sampling_rate_analytic: policy must be rs, change_aware or semantics_aware");
    if (pol.kind == policy_kind::rs) return pol.p_alpha;
    const Eigen::MatrixXd pi = joint_stationary(src, pol, p_s);
    const Eigen::MatrixXd k = transition_matrix(src);
    double rate = 0.0;
    for (int i = 0; i < src.n; ++i) {
        for (int j = 0; j < src.n; ++j) {
            const double fire_prob =
                pol.kind == policy_kind::change_aware ? 1.0 - k(i, i) : 1.0 - k(i, j);
            rate += pi(i, j) * fire_prob;
        }
    }
    return rate;
}

comparison_thresholds policy_comparison_thresholds(double p, double p_s) {
    require(p >= 0.0 && p <= 0.5, "policy_comparison_thresholds: 3-state jump probability needs p in [0,1/2]");
    require(p_s >= 0.0 && p_s <= 1.0, "policy_comparison_thresholds: p_s must lie in [0,1]");
    comparison_thresholds t;
    t.rs_error_beats_change_aware = 2.0 * p / (1.0 - p_s * (1.0 - 2.0 * p));
    t.rs_error_beats_semantics_aware = 1.0;
    t.rs_var_below_semantics_aware =
        (p * p_s - 3.0 * p * p * (1.0 - p_s)) /
        ((2.0 * p + 3.0 * p * p - 1.0) * p_s * p_s - (p + 3.0 * p * p) * p_s);
    t.rs_var_below_change_aware = p * (3.0 + p_s) / (p * p_s * (3.0 + p_s) - 2.0 * p_s);
    return t;
}

} // namespace remtrack
