#pragma once

// Chain diagnostics and study metrics: effective sample size, posterior
// summary tables, bias/coverage aggregation over replicates, importance-
// sampling ELPD, and posterior predictive frequency bands.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zani/core.hpp"
#include "zani/inference.hpp"

namespace zani {

// ---------------------------------------------------------------------------
// Effective sample size
// ---------------------------------------------------------------------------

// ESS = M / (1 + 2 sum of autocorrelations), with autocovariances from
// direct sums and the sum truncated by the initial monotone positive
// sequence rule on paired lags.  An exactly constant chain returns M by
// convention.  Requires M >= 4; throws std::invalid_argument otherwise.
double effective_sample_size(std::span<const double> chain);

// ---------------------------------------------------------------------------
// Posterior summaries
// ---------------------------------------------------------------------------

struct SummaryRow {
    std::string parameter;
    double mean = 0.0;
    double lower_95 = 0.0;   // 2.5th percentile
    double upper_95 = 0.0;   // 97.5th percentile
    double ess_ratio = 0.0;  // ESS / retained draws
};

// One row per draws column: mean, central 95% interval bounds by linear
// interpolation between order statistics (index h = (M-1)q), and ESS ratio.
std::vector<SummaryRow> posterior_summary(const ChainDraws& draws);

// The interpolation rule above, exposed for reuse: q in [0, 1], values need
// not be sorted (a sorted copy is taken).
double percentile(std::span<const double> values, double q);

// ---------------------------------------------------------------------------
// Replicate recovery metrics
// ---------------------------------------------------------------------------

struct RecoveryReport {
    // Per-parameter averages over replicates.
    std::vector<double> relative_bias;   // mean of (posterior mean / truth - 1)
    std::vector<double> coverage_95;     // fraction of replicates with truth in the interval
    std::vector<double> ess_ratio;       // mean ESS ratio
    std::vector<bool> bias_excluded;     // true where truth == 0 (bias undefined)

    // Grand means over parameters (bias over non-excluded parameters only).
    double overall_bias = 0.0;
    double overall_coverage = 0.0;
    double overall_ess_ratio = 0.0;
    int excluded_from_bias = 0;          // count of zero-truth parameters
};

// Aggregates per-replicate summary tables against the true values.  Every
// replicate must have one row per truth, in the same parameter order.
// Zero truths are excluded from the bias average and flagged, not errors.
RecoveryReport recovery_metrics(const std::vector<std::vector<SummaryRow>>& replicates,
                                const std::vector<double>& truths);

// ---------------------------------------------------------------------------
// Expected log predictive density
// ---------------------------------------------------------------------------

struct ElpdReport {
    double elpd = 0.0;
    double se = 0.0;                  // sqrt(n * sample variance of pointwise)
    std::vector<double> pointwise;    // one contribution per observation
    std::vector<int> excluded_draws;  // per observation, draws dropped for -inf log-PMF
    long long total_excluded = 0;
};

// Importance-sampling ELPD from an M x n per-draw log-PMF matrix.  Raw
// ratios exp(-loglik) are truncated at their mean times sqrt(M) (truncated
// importance sampling rather than full tail smoothing); everything runs in
// log space.  Draws at exactly -inf are excluded per observation with a
// count; an observation with no finite entry raises std::invalid_argument
// naming its (0-based) index.
ElpdReport elpd_is(const Matrix& loglik);

// ---------------------------------------------------------------------------
// Posterior predictive bands
// ---------------------------------------------------------------------------

struct BandRow {
    int category = 0;       // 0-based
    int count = 0;          // count value k
    double mean_freq = 0.0; // mean relative frequency across draws
    double lower = 0.0;     // 2.5th percentile across draws
    double upper = 0.0;     // 97.5th percentile across draws
};

// For each retained draw, simulates a dataset with the given per-row trial
// totals, tabulates the relative frequency of each count-grid value per
// category, and aggregates mean and central 95% bands across draws.
// Draw m uses RNG stream (seed, m), so results are identical however the
// draws loop is scheduled.  `dirichlet_family` selects which model family
// the draw columns parameterize; zeta columns are detected from the names
// and taken as zero when absent.  The default entry point parallelizes over
// draws with OpenMP when available; the `_serial` twin is the reference and
// produces identical output.
std::vector<BandRow> posterior_predictive_bands(const ChainDraws& draws, bool dirichlet_family,
                                                const std::vector<int>& trials,
                                                const std::vector<int>& count_grid,
                                                std::uint64_t seed);
std::vector<BandRow> posterior_predictive_bands_serial(const ChainDraws& draws,
                                                       bool dirichlet_family,
                                                       const std::vector<int>& trials,
                                                       const std::vector<int>& count_grid,
                                                       std::uint64_t seed);

} // namespace zani
