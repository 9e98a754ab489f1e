#pragma once

// PMF evaluation, exact sampling, marginals, moments, and moment generating
// function for the zero-&-N-inflated multinomial (ZANIM) and Dirichlet-
// multinomial (ZANIDM) families.
//
// Both distributions are finite mixtures of 2^d components indexed by the set
// K of "switched off" categories: a full d-category component (K empty),
// reduced components over the active categories (1 <= |K| <= d-2), d point
// masses at N*e_j (|K| = d-1), and a point mass at the zero vector (|K| = d).
// All PMFs are computed and returned in log space; that is the canonical form
// (the 2^q-term sums underflow in linear space). Convenience exponentiation
// wrappers are provided.
//
// Moments and marginals sum over subset families of size O(2^(d-1)) per
// entry, so they are exponential in d. They are intended for d up to ~20; a
// warning is emitted on stderr past d = 25. The joint PMF only touches the
// 2^q components consistent with the observed zero pattern and scales much
// further.

#include "zani/core.hpp"
#include "zani/rng.hpp"

#include <optional>
#include <span>
#include <vector>

namespace zani {

// theta: category probabilities (nonnegative, summing to 1 within 1e-12).
// zeta: per-category excess-zero probabilities in [0, 1].
struct ZanimParams {
    std::vector<double> theta;
    std::vector<double> zeta;

    int d() const { return static_cast<int>(theta.size()); }
    void validate() const;
};

// alpha: strictly positive concentration parameters; zeta as above.
struct ZanidmParams {
    std::vector<double> alpha;
    std::vector<double> zeta;

    int d() const { return static_cast<int>(alpha.size()); }
    void validate() const;
};

// Theoretical moments plus the dispersion and zero-inflation indices.
// DI[j] = Var[Y_j] / E[Y_j]; ZI[j] = 1 + log P(Y_j = 0) / E[Y_j]. Both are
// undefined when E[Y_j] = 0 and reported as absent (nullopt) in that case
// rather than as NaN. ZI is -infinity when P(Y_j = 0) = 0 with E[Y_j] > 0.
struct MomentsReport {
    std::vector<double> mean;
    Matrix covariance; // symmetric d x d; diagonal holds the variances
    std::vector<std::optional<double>> dispersion_index;
    std::vector<std::optional<double>> zero_inflation_index;
};

// log P(X = k) for X ~ Binomial(n, p), handling p in {0, 1} exactly.
double log_binomial_pmf(int k, int n, double p);

// log P(X = k) for X ~ BetaBinomial(n, a, b), computed via log-beta
// differences (never via linear-space gamma ratios).
double log_beta_binomial_pmf(int k, int n, double a, double b);

// Joint log-PMF. The two-argument forms infer N = sum(y); an all-zero y is
// read as the zero atom of a model with N >= 1 (returning log eta_0). The
// explicit-N forms additionally cover N = 0, where every mixture component
// collapses onto the zero vector and the PMF there is exactly 1. Off-support
// y (sum neither N nor 0) raises std::invalid_argument; a y that merely has
// probability 0 under the parameters yields -infinity.
double zanim_log_pmf(const CountVector& y, const ZanimParams& p);
double zanim_log_pmf(const CountVector& y, const ZanimParams& p, int N);
double zanidm_log_pmf(const CountVector& y, const ZanidmParams& p);
double zanidm_log_pmf(const CountVector& y, const ZanidmParams& p, int N);

double zanim_pmf(const CountVector& y, const ZanimParams& p);
double zanidm_pmf(const CountVector& y, const ZanidmParams& p);

// Exact draws. ZANIM: activate each category with probability 1 - zeta_j,
// then draw a multinomial over the active categories with renormalized
// probabilities; all categories inactive gives the zero vector. ZANIDM: the
// same activation, with the active probabilities built from Gamma[alpha_j, 1]
// draws (handled in log space so tiny shapes cannot underflow to an all-zero
// weight vector).
CountVector zanim_sample(int N, const ZanimParams& p, Rng& rng);
CountVector zanidm_sample(int N, const ZanidmParams& p, Rng& rng);

// Marginal log P(Y_j = k) for trials total N; j is a 0-based category index.
// The marginal of one category is a mixture of 2^(d-1) + 1 components: the
// inactive mass zeta_j at k = 0, the single-active mass at k = N, and
// binomial (ZANIM) or beta-binomial (ZANIDM) components for the full model
// and every admissible subset of switched-off other categories.
// k outside [0, N] raises std::domain_error.
double zanim_marginal_log_pmf(int j, int k, const ZanimParams& p, int N);
double zanidm_marginal_log_pmf(int j, int k, const ZanidmParams& p, int N);

// Exact mean, covariance, dispersion and zero-inflation indices.
MomentsReport zanim_moments(const ZanimParams& p, int N);
MomentsReport zanidm_moments(const ZanidmParams& p, int N);

// Moment generating function M(t) = E[exp(t'Y)] of the ZANIM distribution
// (the ZANIDM has no closed form and is not provided). Computed in log space
// internally; zanim_mgf exponentiates at the end.
double zanim_log_mgf(std::span<const double> t, const ZanimParams& p, int N);
double zanim_mgf(std::span<const double> t, const ZanimParams& p, int N);

} // namespace zani
