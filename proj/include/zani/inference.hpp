#pragma once

// Markov chain Monte Carlo inference for the zero-&-N-inflated multinomial
// and Dirichlet-multinomial models.
//
// Both fitters run a data-augmentation Gibbs sweep over per-category
// inactivity probabilities (zeta), per-category rates (lambda) or
// concentrations (alpha), per-cell activity indicators (z), and
// per-observation scale variables (phi).  The Dirichlet-multinomial fitter
// marginalizes the cell rates out of the z update (collapsed sweep) and
// offers three interchangeable samplers for the concentration parameters.
//
// All updates consume randomness from a single `Rng` in a fixed order, so a
// fixed (seed, stream) pair reproduces a chain bit for bit.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zani/core.hpp"
#include "zani/rng.hpp"

namespace zani {

// ---------------------------------------------------------------------------
// Priors
// ---------------------------------------------------------------------------

// Gamma prior in shape/rate form (density ∝ x^{shape-1} e^{-rate·x}).
struct GammaPrior {
    double shape = 0.0;
    double rate = 0.0;
};

// Normal prior on the log of a positive parameter.  `variance` is the
// variance of the log, not of the parameter itself.
struct LogNormalPrior {
    double mean = 0.0;
    double variance = 0.0;
};

// Beta prior for a probability parameter.
struct BetaPrior {
    double a = 0.0;
    double b = 0.0;
};

// Returns the Gamma prior whose induced distribution on log x has the given
// mean and variance: trigamma(shape) = log_variance and
// digamma(shape) - log(rate) = log_mean.  Solved numerically at call time.
GammaPrior match_gamma_to_log_moments(double log_mean, double log_variance);

// Per-category prior settings for both model families.
//
// The two concentration blocks express a prior on two scales: `alpha_gamma`
// drives the augmentation-based sampler, `alpha_log_normal` the random-walk
// and slice samplers.  `defaults(d)` fills every block: Beta[1, 1] for zeta,
// Gamma[0.1, 0.1] for the multinomial-model rates, Normal[0, 5] on log alpha,
// and a gamma prior matched to those log moments via
// `match_gamma_to_log_moments` (computed at startup, not hard-coded).
struct PriorSpec {
    std::vector<BetaPrior> zeta_beta;                 // zeta_j ~ Beta[a_j, b_j]
    std::vector<GammaPrior> lambda_gamma;             // lambda_j ~ Gamma[c_j, d_j]
    std::vector<GammaPrior> alpha_gamma;              // alpha_j ~ Gamma[c_j, d_j]
    std::vector<LogNormalPrior> alpha_log_normal;     // log alpha_j ~ Normal[m_j, s_j^2]

    static PriorSpec defaults(int d);
};

// ---------------------------------------------------------------------------
// Sampler configuration
// ---------------------------------------------------------------------------

enum class AlphaSamplerKind {
    da_ptn,  // data augmentation + Metropolis-Hastings with power-truncated-normal proposals
    mh_rw,   // Gaussian random walk on log alpha
    slice    // stepping-out / shrinkage slice sampler on log alpha
};

const char* alpha_sampler_name(AlphaSamplerKind kind);

struct McmcConfig {
    long long iterations = 11000;  // total sweeps
    long long burn_in = 1000;      // discarded sweeps, < iterations
    long long thin = 10;           // keep every thin-th post-burn-in sweep
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;      // RNG stream; replicates use distinct streams

    AlphaSamplerKind alpha_sampler = AlphaSamplerKind::da_ptn;
    double mh_step = 0.2;          // random-walk scale on the log-alpha axis
    bool mh_adapt = false;         // adapt mh_step during burn-in only (0.44 target)
    double slice_width = 1.0;      // initial slice interval width
    int slice_max_steps = 50;      // stepping-out cap

    bool fix_zeta_zero = false;    // baseline mode: zeta == 0 and z == 1 throughout
    bool compute_loglik = true;    // fill ChainDraws::loglik after sampling

    // Number of retained draws, (iterations - burn_in) / thin.
    long long retained() const { return (iterations - burn_in) / thin; }

    // Throws std::invalid_argument unless iterations > burn_in >= 0, thin >= 1,
    // retained() >= 1, and the sampler step sizes are positive.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Chain state
// ---------------------------------------------------------------------------

// Full augmented state of a chain after a sweep.  `lambda` is used by the
// multinomial-model sweep (one rate per category); `lambda_cell` by the
// Dirichlet-multinomial sweep (one nonnegative rate per observation and
// category, zero exactly where z is zero).  phi_i is zero if and only if
// observation i has no trials (a point mass at zero stands in for a
// gamma draw with shape zero).
struct LatentState {
    std::vector<double> phi;   // n
    Matrix z;                  // n x d, entries exactly 0.0 or 1.0
    std::vector<double> lambda;      // d (multinomial-model sweep)
    Matrix lambda_cell;              // n x d (Dirichlet-multinomial sweep)
    std::vector<double> zeta;        // d, current values
    std::vector<double> alpha;       // d (Dirichlet-multinomial sweep)

    // Sufficient statistics recomputed from scratch.
    long long t_stat(int j) const;                            // sum_i z_ij
    double r_stat(const CountDataset& data, int j) const;     // sum_i y_ij z_ij
    double s_stat(int j) const;                               // sum_i phi_i z_ij
};

// Observation hook invoked after each completed sweep (post phi update) with
// the current state and the 1-based sweep number.  Used by tests; an empty
// function disables it.
using StateInspector = std::function<void(const LatentState&, long long iteration)>;

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

// Thinned post-burn-in draws.  `draws` has one named column per retained
// parameter: theta1..thetaD (or alpha1..alphaD) followed by zeta1..zetaD;
// the zeta columns are absent under fix_zeta_zero.  `loglik` holds the
// per-observation marginal log-PMF at each retained draw (empty when
// disabled).  `acceptance` reports the post-burn-in acceptance rate of each
// concentration update for the Metropolis-based samplers; the slice sampler
// reports 1 by convention, and the multinomial-model fitter leaves it empty.
struct ChainDraws {
    std::vector<std::string> names;
    Matrix draws;    // M x P
    Matrix loglik;   // M x n
    std::vector<double> acceptance;

    long long retained() const { return static_cast<long long>(draws.nrow); }
};

// ---------------------------------------------------------------------------
// Concentration-parameter updates (one category, one transition)
// ---------------------------------------------------------------------------

struct AlphaUpdate {
    double value = 0.0;   // new alpha (augmentation sampler) or new log alpha
    bool accepted = false;
};

// Log density, up to a constant, of the concentration full conditional under
// a gamma prior: (shape-1)·log a - t·lnΓ(a) - a·(rate - sum_log_lambda).
double log_alpha_target_gamma(long long t, double sum_log_lambda,
                              const GammaPrior& prior, double alpha);

// The same target reparameterized as beta = log alpha under a normal prior
// on beta: -t·lnΓ(e^b) + e^b·sum_log_lambda + b·(mean - 0.5·b)/variance.
double log_alpha_target_log_scale(long long t, double sum_log_lambda,
                                  const LogNormalPrior& prior, double beta);

// Draws from the density ∝ x^{p-1} e^{-a x^2 + b x} on (0, ∞); p > 0, a > 0,
// b of any sign.  Exact: rejection with a truncated-normal envelope for
// p >= 1, and grid inversion of the CDF (4096 points, interpolation solved to
// 1e-10) after the substitution u = x^p for p < 1.
double sample_ptn(double p, double a, double b, Rng& rng);

// One transition targeting the gamma-prior full conditional via beta/gamma
// data augmentation and an independent power-truncated-normal proposal.
// t == 0 reduces the target to the prior, which is sampled directly
// (accepted = true).  A nonfinite augmented statistic raises
// std::runtime_error naming the offending values.  Returns the new alpha.
AlphaUpdate update_alpha_da_ptn(long long t, double sum_log_lambda,
                                const GammaPrior& prior, double alpha_current,
                                Rng& rng);

// One Gaussian random-walk Metropolis transition on beta = log alpha against
// the normal-prior target.  Returns the new beta.
AlphaUpdate update_alpha_mh_rw(long long t, double sum_log_lambda,
                               const LogNormalPrior& prior, double beta_current,
                               double step, Rng& rng);

// One slice-sampling transition on beta = log alpha (stepping out capped at
// max_steps total extensions, then shrinkage).  Throws std::runtime_error if
// shrinkage fails to land on the slice after 1000 contractions.
double update_alpha_slice(long long t, double sum_log_lambda,
                          const LogNormalPrior& prior, double beta_current,
                          double width, int max_steps, Rng& rng);

// ---------------------------------------------------------------------------
// Fitters
// ---------------------------------------------------------------------------

// Gibbs sampler for the zero-&-N-inflated multinomial model.  Each sweep
// visits category j in order (zeta_j, then lambda_j, then the z column, each
// conditional on the z column from the previous sweep and the current phi),
// then refreshes phi.  Reported theta draws are lambda_j / sum_k lambda_k.
ChainDraws fit_zanim(const CountDataset& data, const PriorSpec& priors,
                     const McmcConfig& cfg, const StateInspector& inspect = {});

// Collapsed Gibbs sampler for the zero-&-N-inflated Dirichlet-multinomial
// model.  Each sweep visits category j in order (zeta_j, then alpha_j by the
// configured strategy, then the z column with the cell rates integrated out,
// then the lambda column), then refreshes phi.
ChainDraws fit_zanidm(const CountDataset& data, const PriorSpec& priors,
                      const McmcConfig& cfg, const StateInspector& inspect = {});

} // namespace zani
