#include "remtrack/sources.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace remtrack {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

source_model source_model::dtmc(int n, double p) {
    require(n >= 2, "dtmc: n must be >= 2");
    require(p >= 0.0, "dtmc: p must be >= 0");
    require(p * (n - 1) <= 1.0 + 1e-12, "dtmc: (n-1)*p must not exceed 1");
    source_model src;
    src.kind = source_kind::dtmc;
    src.n = n;
    src.p = p;
    src.q = 1.0 - (n - 1) * p;
    if (src.q < 0.0) src.q = 0.0;
    return src;
}

source_model source_model::bdmp(int n, double p, double q) {
    require(n >= 2, "bdmp: n must be >= 2");
    require(p >= 0.0 && p <= 1.0, "bdmp: p must lie in [0,1]");
    require(q >= 0.0 && q <= 1.0, "bdmp: q must lie in [0,1]");
    // interior states spend 1-p-q on staying put, so p+q <= 1 is required as
    // soon as such states exist; a two-state chain has none and allows p+q > 1
    if (n >= 3) require(p + q <= 1.0 + 1e-12, "bdmp: p+q must not exceed 1 when n >= 3");
    source_model src;
    src.kind = source_kind::bdmp;
    src.n = n;
    src.p = p;
    src.q = q;
    return src;
}

Eigen::MatrixXd transition_matrix(const source_model& src) {
    const int n = src.n;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    if (src.kind == source_kind::dtmc) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) k(i, j) = (i == j) ? src.q : src.p;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double up = (i + 1 < n) ? src.p : 0.0;
            const double down = (i - 1 >= 0) ? src.q : 0.0;
            if (i + 1 < n) k(i, i + 1) = up;
            if (i - 1 >= 0) k(i, i - 1) = down;
            k(i, i) = 1.0 - up - down;
        }
    }
    return k;
}

int step(const source_model& src, int state, double u) {
    require(state >= 0 && state < src.n, "step: state out of range");
    require(u >= 0.0 && u < 1.0, "step: u must lie in [0,1)");
    const Eigen::MatrixXd k = transition_matrix(src);
    double hi = 0.0;
    int last_positive = state;
    for (int j = 0; j < src.n; ++j) {
        const double mass = k(state, j);
        if (mass <= 0.0) continue;
        hi += mass;
        last_positive = j;
        if (u < hi) return j;
    }
    // rounding can leave the final boundary a hair below 1; fold that sliver
    // into the topmost positive-mass segment
    return last_positive;
}

std::pair<double, double> bdmp_marginal_stationary(const source_model& src) {
    require(src.kind == source_kind::bdmp, "bdmp_marginal_stationary: source must be birth-death");
    require(src.n == 2, "bdmp_marginal_stationary: source must have 2 states");
    require(src.p + src.q > 0.0, "bdmp_marginal_stationary: p+q must be positive");
    const double denom = src.p + src.q;
    return {src.q / denom, src.p / denom};
}

} // namespace remtrack
