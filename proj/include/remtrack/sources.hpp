#ifndef REMTRACK_SOURCES_HPP
#define REMTRACK_SOURCES_HPP

#include <Eigen/Dense>
#include <utility>

namespace remtrack {

enum class source_kind { dtmc, bdmp };

/// Finite-state information source.
///
/// dtmc: uniform-jump chain, each of the n-1 other states is reached with
/// probability p and the self-transition keeps the remainder q = 1-(n-1)p.
/// bdmp: birth-death chain, one step up with probability p, one step down
/// with probability q, corner states fold the missing move into the
/// self-transition.
struct source_model {
    source_kind kind = source_kind::dtmc;
    int n = 2;
    double p = 0.0;
    double q = 0.0; // self-transition (dtmc, derived) or death probability (bdmp)

    static source_model dtmc(int n, double p);
    static source_model bdmp(int n, double p, double q);
};

/// Row-stochastic one-step kernel, n x n. Rows sum to 1 within 1e-12.
Eigen::MatrixXd transition_matrix(const source_model& src);

/// One inverse-cdf draw: cumulative segments are half-open [lo, hi), scanned in
/// ascending state order, so u = 0 always lands in the first positive-mass state.
int step(const source_model& src, int state, double u);

/// Stationary marginal (q/(p+q), p/(p+q)) of a two-state birth-death source.
std::pair<double, double> bdmp_marginal_stationary(const source_model& src);

} // namespace remtrack

#endif
