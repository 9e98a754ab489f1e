#include "zani/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zani/distributions.hpp"
#include "zani/rng.hpp"

namespace zani {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

} // namespace

// ---------------------------------------------------------------------------
// Effective sample size
// ---------------------------------------------------------------------------

double effective_sample_size(std::span<const double> chain) {
    const auto m_draws = static_cast<long long>(chain.size());
    if (m_draws < 4)
        throw std::invalid_argument("effective_sample_size: chain must have at least 4 draws");
    for (double v : chain)
        if (!std::isfinite(v))
            throw std::invalid_argument("effective_sample_size: chain contains a non-finite value");

    double lo = chain[0], hi = chain[0];
    for (double v : chain) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) return static_cast<double>(m_draws); // constant chain, by convention

    double mean = 0.0;
    for (double v : chain) mean += v;
    mean /= static_cast<double>(m_draws);
    std::vector<double> c(chain.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = chain[i] - mean;

    auto autocov = [&](long long lag) {
        double s = 0.0;
        for (long long t = 0; t + lag < m_draws; ++t) s += c[t] * c[t + lag];
        return s / static_cast<double>(m_draws);
    };

    const double g0 = autocov(0);
    if (g0 <= 0.0) return static_cast<double>(m_draws); // numerically constant

    // Initial monotone positive sequence over paired lags: keep pair sums
    // G_m = gamma(2m) + gamma(2m+1) while positive, enforce that the kept
    // sequence is non-increasing, and truncate at the first violation of
    // positivity.  1 + 2*sum(rho_k) then telescopes to -1 + 2*sum(G_m)/g0.
    double pair_sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    bool any = false;
    for (long long m = 0; 2 * m + 1 < m_draws; ++m) {
        double g = autocov(2 * m) + autocov(2 * m + 1);
        if (!(g > 0.0)) break;
        g = std::min(g, prev);
        prev = g;
        pair_sum += g;
        any = true;
    }
    if (!any) return static_cast<double>(m_draws);

    const double tau = -1.0 + 2.0 * pair_sum / g0;
    if (!(tau > 0.0)) return static_cast<double>(m_draws);
    return static_cast<double>(m_draws) / tau;
}

// ---------------------------------------------------------------------------
// Posterior summaries
// ---------------------------------------------------------------------------

double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile: q must lie in [0, 1]");
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    const double h = static_cast<double>(s.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= s.size()) return s.back();
    const double frac = h - static_cast<double>(lo);
    return s[lo] + frac * (s[lo + 1] - s[lo]);
}

std::vector<SummaryRow> posterior_summary(const ChainDraws& draws) {
    const std::size_t m_draws = draws.draws.nrow;
    const std::size_t n_params = draws.draws.ncol;
    if (m_draws < 4)
        throw std::invalid_argument("posterior_summary: need at least 4 retained draws");
    if (draws.names.size() != n_params)
        throw std::invalid_argument("posterior_summary: name/column count mismatch");

    std::vector<SummaryRow> out;
    out.reserve(n_params);
    std::vector<double> col(m_draws);
    for (std::size_t p = 0; p < n_params; ++p) {
        double mean = 0.0;
        for (std::size_t m = 0; m < m_draws; ++m) {
            col[m] = draws.draws(m, p);
            mean += col[m];
        }
        mean /= static_cast<double>(m_draws);
        SummaryRow row;
        row.parameter = draws.names[p];
        row.mean = mean;
        row.lower_95 = percentile(col, 0.025);
        row.upper_95 = percentile(col, 0.975);
        row.ess_ratio = effective_sample_size(col) / static_cast<double>(m_draws);
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Replicate recovery metrics
// ---------------------------------------------------------------------------

RecoveryReport recovery_metrics(const std::vector<std::vector<SummaryRow>>& replicates,
                                const std::vector<double>& truths) {
    if (replicates.empty()) throw std::invalid_argument("recovery_metrics: no replicates");
    if (truths.empty()) throw std::invalid_argument("recovery_metrics: no parameters");
    const std::size_t d = truths.size();
    for (std::size_t r = 0; r < replicates.size(); ++r) {
        if (replicates[r].size() != d) {
            std::ostringstream os;
            os << "recovery_metrics: replicate " << r << " has " << replicates[r].size()
               << " rows, expected " << d;
            throw std::invalid_argument(os.str());
        }
    }

    const auto n_rep = static_cast<double>(replicates.size());
    RecoveryReport rep;
    rep.relative_bias.resize(d);
    rep.coverage_95.resize(d);
    rep.ess_ratio.resize(d);
    rep.bias_excluded.resize(d);

    double bias_total = 0.0;
    int bias_params = 0;
    for (std::size_t j = 0; j < d; ++j) {
        const bool excluded = truths[j] == 0.0;
        double bias = 0.0, cover = 0.0, ess = 0.0;
        for (const auto& r : replicates) {
            const SummaryRow& row = r[j];
            if (!excluded) bias += row.mean / truths[j] - 1.0;
            if (truths[j] >= row.lower_95 && truths[j] <= row.upper_95) cover += 1.0;
            ess += row.ess_ratio;
        }
        rep.bias_excluded[j] = excluded;
        rep.relative_bias[j] =
            excluded ? std::numeric_limits<double>::quiet_NaN() : bias / n_rep;
        rep.coverage_95[j] = cover / n_rep;
        rep.ess_ratio[j] = ess / n_rep;
        if (excluded) {
            ++rep.excluded_from_bias;
        } else {
            bias_total += rep.relative_bias[j];
            ++bias_params;
        }
        rep.overall_coverage += rep.coverage_95[j];
        rep.overall_ess_ratio += rep.ess_ratio[j];
    }
    rep.overall_bias = bias_params > 0 ? bias_total / static_cast<double>(bias_params)
                                       : std::numeric_limits<double>::quiet_NaN();
    rep.overall_coverage /= static_cast<double>(d);
    rep.overall_ess_ratio /= static_cast<double>(d);
    return rep;
}

// ---------------------------------------------------------------------------
// Expected log predictive density
// ---------------------------------------------------------------------------

ElpdReport elpd_is(const Matrix& loglik) {
    const std::size_t m_draws = loglik.nrow;
    const std::size_t n_obs = loglik.ncol;
    if (m_draws == 0 || n_obs == 0)
        throw std::invalid_argument("elpd_is: empty log-likelihood matrix");

    ElpdReport rep;
    rep.pointwise.resize(n_obs);
    rep.excluded_draws.assign(n_obs, 0);

    std::vector<double> ll, logr, lw, lwp;
    for (std::size_t i = 0; i < n_obs; ++i) {
        ll.clear();
        for (std::size_t m = 0; m < m_draws; ++m) {
            const double v = loglik(m, i);
            if (v == kNegInf) {
                ++rep.excluded_draws[i];
                continue;
            }
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "elpd_is: entry (" << m << ", " << i << ") is not a log mass";
                throw std::invalid_argument(os.str());
            }
            ll.push_back(v);
        }
        rep.total_excluded += rep.excluded_draws[i];
        if (ll.empty()) {
            std::ostringstream os;
            os << "elpd_is: all " << m_draws
               << " draws have zero predictive mass for observation " << i;
            throw std::invalid_argument(os.str());
        }

        // Raw ratios r_m = exp(-ll_m), truncated at (mean of r) * sqrt(M);
        // everything stays in log space.
        const auto m_valid = static_cast<double>(ll.size());
        logr.resize(ll.size());
        for (std::size_t m = 0; m < ll.size(); ++m) logr[m] = -ll[m];
        const double log_mean_r = log_sum_exp(logr) - std::log(m_valid);
        const double log_cap = log_mean_r + 0.5 * std::log(m_valid);
        lw.resize(ll.size());
        lwp.resize(ll.size());
        for (std::size_t m = 0; m < ll.size(); ++m) {
            lw[m] = std::min(logr[m], log_cap);
            lwp[m] = lw[m] + ll[m];
        }
        rep.pointwise[i] = log_sum_exp(lwp) - log_sum_exp(lw);
        rep.elpd += rep.pointwise[i];
    }

    if (n_obs >= 2) {
        double mean = rep.elpd / static_cast<double>(n_obs);
        double ss = 0.0;
        for (double p : rep.pointwise) ss += (p - mean) * (p - mean);
        const double svar = ss / static_cast<double>(n_obs - 1);
        rep.se = std::sqrt(static_cast<double>(n_obs) * svar);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Posterior predictive bands
// ---------------------------------------------------------------------------

namespace {

std::vector<BandRow> bands_impl(const ChainDraws& draws, bool dirichlet_family,
                                const std::vector<int>& trials,
                                const std::vector<int>& count_grid, std::uint64_t seed,
                                bool threaded) {
    const auto m_draws = static_cast<long long>(draws.draws.nrow);
    const std::size_t n_params = draws.draws.ncol;
    if (m_draws == 0) throw std::invalid_argument("posterior_predictive_bands: no retained draws");
    if (draws.names.size() != n_params)
        throw std::invalid_argument("posterior_predictive_bands: name/column count mismatch");
    if (trials.empty())
        throw std::invalid_argument("posterior_predictive_bands: empty trial list");
    for (int t : trials)
        if (t < 0) throw std::invalid_argument("posterior_predictive_bands: negative trial total");
    if (count_grid.empty())
        throw std::invalid_argument("posterior_predictive_bands: empty count grid");

    bool has_zeta = false;
    for (const auto& name : draws.names)
        if (name.rfind("zeta", 0) == 0) has_zeta = true;
    const std::size_t d = has_zeta ? n_params / 2 : n_params;
    if (d == 0 || (has_zeta ? 2 * d : d) != n_params)
        throw std::invalid_argument("posterior_predictive_bands: unrecognized draw layout");

    int max_count = 0;
    for (int k : count_grid) {
        if (k < 0) throw std::invalid_argument("posterior_predictive_bands: negative count value");
        max_count = std::max(max_count, k);
    }
    std::vector<int> grid_index(static_cast<std::size_t>(max_count) + 1, -1);
    for (std::size_t k = 0; k < count_grid.size(); ++k) {
        if (grid_index[count_grid[k]] >= 0)
            throw std::invalid_argument("posterior_predictive_bands: duplicate count value");
        grid_index[count_grid[k]] = static_cast<int>(k);
    }

    const std::size_t n_grid = count_grid.size();
    const double freq_unit = 1.0 / static_cast<double>(trials.size());

    // One relative-frequency block of d * n_grid cells per draw; draw m uses
    // its own RNG stream, so the loop schedule cannot change the result.
    std::vector<double> freq(static_cast<std::size_t>(m_draws) * d * n_grid, 0.0);
    auto fill_draw = [&](long long m) {
        Rng rng(seed, static_cast<std::uint64_t>(m));
        const auto row = draws.draws.row(static_cast<std::size_t>(m));
        std::vector<double> shape(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(d));
        std::vector<double> zeta(d, 0.0);
        if (has_zeta)
            zeta.assign(row.begin() + static_cast<std::ptrdiff_t>(d),
                        row.begin() + static_cast<std::ptrdiff_t>(2 * d));
        ZanimParams mp;
        ZanidmParams dp;
        if (dirichlet_family) {
            dp.alpha = shape;
            dp.zeta = zeta;
        } else {
            mp.theta = shape;
            mp.zeta = zeta;
        }

        double* block = freq.data() + static_cast<std::size_t>(m) * d * n_grid;
        for (int n_i : trials) {
            const CountVector y =
                dirichlet_family ? zanidm_sample(n_i, dp, rng) : zanim_sample(n_i, mp, rng);
            for (std::size_t j = 0; j < d; ++j) {
                const int v = y[j];
                if (v <= max_count && grid_index[v] >= 0)
                    block[j * n_grid + static_cast<std::size_t>(grid_index[v])] += freq_unit;
            }
        }
    };

    if (threaded) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long m = 0; m < m_draws; ++m) fill_draw(m);
    } else {
        for (long long m = 0; m < m_draws; ++m) fill_draw(m);
    }

    // Serial aggregation across draws.
    std::vector<BandRow> out;
    out.reserve(d * n_grid);
    std::vector<double> col(static_cast<std::size_t>(m_draws));
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < n_grid; ++k) {
            double mean = 0.0;
            for (long long m = 0; m < m_draws; ++m) {
                col[static_cast<std::size_t>(m)] =
                    freq[static_cast<std::size_t>(m) * d * n_grid + j * n_grid + k];
                mean += col[static_cast<std::size_t>(m)];
            }
            mean /= static_cast<double>(m_draws);
            BandRow row;
            row.category = static_cast<int>(j);
            row.count = count_grid[k];
            row.mean_freq = mean;
            row.lower = percentile(col, 0.025);
            row.upper = percentile(col, 0.975);
            out.push_back(row);
        }
    }
    return out;
}

} // namespace

std::vector<BandRow> posterior_predictive_bands(const ChainDraws& draws, bool dirichlet_family,
                                                const std::vector<int>& trials,
                                                const std::vector<int>& count_grid,
                                                std::uint64_t seed) {
    return bands_impl(draws, dirichlet_family, trials, count_grid, seed, true);
}

std::vector<BandRow> posterior_predictive_bands_serial(const ChainDraws& draws,
                                                       bool dirichlet_family,
                                                       const std::vector<int>& trials,
                                                       const std::vector<int>& count_grid,
                                                       std::uint64_t seed) {
    return bands_impl(draws, dirichlet_family, trials, count_grid, seed, false);
}

} // namespace zani
