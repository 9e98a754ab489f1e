#include "zani/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "zani/loglik.hpp"

namespace zani {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Floor for cell rates drawn with very small shapes: an underflow to exactly
// zero would break the "rate zero iff inactive" bookkeeping and produce a
// nonfinite log in the concentration update, so clamp to the smallest normal.
constexpr double kRateFloor = std::numeric_limits<double>::min();

// Target acceptance for the optional burn-in adaptation of the random-walk
// step and the clamp range that keeps the adapted step sane.
constexpr double kAdaptTarget = 0.44;
constexpr double kAdaptStepMin = 1e-3;
constexpr double kAdaptStepMax = 10.0;

std::string format_stat(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// Priors
// ---------------------------------------------------------------------------

GammaPrior match_gamma_to_log_moments(double log_mean, double log_variance) {
    if (!(log_variance > 0.0)) {
        throw std::invalid_argument("match_gamma_to_log_moments: log_variance must be positive");
    }
    double shape = trigamma_inverse(log_variance);
    double rate = std::exp(digamma(shape) - log_mean);
    return GammaPrior{shape, rate};
}

PriorSpec PriorSpec::defaults(int d) {
    if (d < 1) throw std::invalid_argument("PriorSpec::defaults: need at least one category");
    PriorSpec p;
    p.zeta_beta.assign(d, BetaPrior{1.0, 1.0});
    p.lambda_gamma.assign(d, GammaPrior{0.1, 0.1});
    p.alpha_log_normal.assign(d, LogNormalPrior{0.0, 5.0});
    p.alpha_gamma.assign(d, match_gamma_to_log_moments(0.0, 5.0));
    return p;
}

const char* alpha_sampler_name(AlphaSamplerKind kind) {
    switch (kind) {
        case AlphaSamplerKind::da_ptn: return "da_ptn";
        case AlphaSamplerKind::mh_rw: return "mh_rw";
        case AlphaSamplerKind::slice: return "slice";
    }
    throw std::invalid_argument("alpha_sampler_name: unknown sampler kind");
}

void McmcConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("McmcConfig: iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations) {
        throw std::invalid_argument("McmcConfig: burn_in must satisfy 0 <= burn_in < iterations");
    }
    if (thin < 1) throw std::invalid_argument("McmcConfig: thin must be >= 1");
    if (retained() < 1) {
        throw std::invalid_argument("McmcConfig: (iterations - burn_in) / thin must be >= 1");
    }
    if (!(mh_step > 0.0)) throw std::invalid_argument("McmcConfig: mh_step must be positive");
    if (!(slice_width > 0.0)) throw std::invalid_argument("McmcConfig: slice_width must be positive");
    if (slice_max_steps < 1) throw std::invalid_argument("McmcConfig: slice_max_steps must be >= 1");
}

// ---------------------------------------------------------------------------
// Latent-state statistics
// ---------------------------------------------------------------------------

long long LatentState::t_stat(int j) const {
    long long t = 0;
    for (std::size_t i = 0; i < z.nrow; ++i) {
        if (z(i, static_cast<std::size_t>(j)) == 1.0) ++t;
    }
    return t;
}

double LatentState::r_stat(const CountDataset& data, int j) const {
    double r = 0.0;
    for (std::size_t i = 0; i < z.nrow; ++i) {
        if (z(i, static_cast<std::size_t>(j)) == 1.0) r += data.rows[i][static_cast<std::size_t>(j)];
    }
    return r;
}

double LatentState::s_stat(int j) const {
    double s = 0.0;
    for (std::size_t i = 0; i < z.nrow; ++i) {
        if (z(i, static_cast<std::size_t>(j)) == 1.0) s += phi[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Concentration full-conditional targets
// ---------------------------------------------------------------------------

double log_alpha_target_gamma(long long t, double sum_log_lambda,
                              const GammaPrior& prior, double alpha) {
    if (!(prior.shape > 0.0) || !(prior.rate > 0.0)) {
        throw std::invalid_argument("log_alpha_target_gamma: prior hyperparameters must be positive");
    }
    if (t < 0) throw std::invalid_argument("log_alpha_target_gamma: t must be nonnegative");
    if (!(alpha > 0.0)) return kNegInf;
    double val = (prior.shape - 1.0) * std::log(alpha) - prior.rate * alpha;
    if (t > 0) {
        val -= static_cast<double>(t) * log_gamma_fn(alpha);
        val += alpha * sum_log_lambda;
    }
    return val;
}

double log_alpha_target_log_scale(long long t, double sum_log_lambda,
                                  const LogNormalPrior& prior, double beta) {
    if (!(prior.variance > 0.0)) {
        throw std::invalid_argument("log_alpha_target_log_scale: prior variance must be positive");
    }
    if (t < 0) throw std::invalid_argument("log_alpha_target_log_scale: t must be nonnegative");
    // Beyond |beta| = 700 the exponential over- or underflows; the target has
    // no appreciable mass there under any positive-variance prior.
    if (!std::isfinite(beta) || std::abs(beta) > 700.0) return kNegInf;
    double val = beta * (prior.mean - 0.5 * beta) / prior.variance;
    if (t > 0) {
        double alpha = std::exp(beta);
        val -= static_cast<double>(t) * log_gamma_fn(alpha);
        val += alpha * sum_log_lambda;
    }
    return val;
}

// ---------------------------------------------------------------------------
// Power-truncated-normal sampling
// ---------------------------------------------------------------------------

namespace {

// Standard-normal draw conditioned on exceeding `lower`.  Naive rejection
// when the bound leaves ample mass; translated-exponential rejection
// otherwise (acceptance >= 0.76 for any bound).
double sample_standard_normal_above(double lower, Rng& rng) {
    if (lower < 0.5) {
        for (;;) {
            double x = rng.normal();
            if (x > lower) return x;
        }
    }
    double lam = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
    for (;;) {
        double x = lower + rng.exponential() / lam;
        double gap = x - lam;
        if (std::log(rng.uniform_pos()) <= -0.5 * gap * gap) return x;
    }
}

// Normal[mu, sigma^2] conditioned on (0, inf).
double sample_truncated_normal_pos(double mu, double sigma, Rng& rng) {
    return mu + sigma * sample_standard_normal_above(-mu / sigma, rng);
}

// Tabulated CDF for the p < 1 branch, built in u = x^p where the density
// ∝ exp(-a u^{2/p} + b u^{1/p}) is bounded at the origin.  Cached per thread
// keyed on the exact (p, a, b) triple, since samplers typically redraw from
// one parameterization many times.
struct PtnGrid {
    double p = -1.0, a = 0.0, b = 0.0;
    std::vector<double> u;
    std::vector<double> cdf;
};

thread_local PtnGrid g_ptn_grid;

void build_ptn_grid(double p, double a, double b, PtnGrid& g) {
    constexpr int kPoints = 4096;
    // Upper cutoff where the exponent falls 60 nats below its maximum over
    // x > 0 (the power factor only adds mass near the origin when p < 1).
    double peak = (b > 0.0) ? b * b / (4.0 * a) : 0.0;
    double x_hi = (b > 0.0) ? b / (2.0 * a) + std::sqrt(60.0 / a)
                            : (b + std::sqrt(b * b + 240.0 * a)) / (2.0 * a);
    double u_hi = std::pow(x_hi, p);

    g.u.assign(kPoints, 0.0);
    g.cdf.assign(kPoints, 0.0);
    std::vector<double> dens(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        double u = u_hi * static_cast<double>(i) / (kPoints - 1);
        double x = std::pow(u, 1.0 / p);
        g.u[i] = u;
        dens[i] = std::exp((-a * x * x + b * x) - peak);
    }
    double acc = 0.0;
    for (int i = 1; i < kPoints; ++i) {
        acc += 0.5 * (g.u[i] - g.u[i - 1]) * (dens[i] + dens[i - 1]);
        g.cdf[i] = acc;
    }
    if (!(acc > 0.0) || !std::isfinite(acc)) {
        throw std::runtime_error("sample_ptn: degenerate density grid for p=" + format_stat(p) +
                                 " a=" + format_stat(a) + " b=" + format_stat(b));
    }
    for (int i = 0; i < kPoints; ++i) g.cdf[i] /= acc;
    g.cdf[kPoints - 1] = 1.0;
    g.p = p;
    g.a = a;
    g.b = b;
}

double sample_ptn_small_p(double p, double a, double b, Rng& rng) {
    PtnGrid& g = g_ptn_grid;
    if (g.p != p || g.a != a || g.b != b) build_ptn_grid(p, a, b, g);
    double v = rng.uniform_pos();
    auto it = std::upper_bound(g.cdf.begin(), g.cdf.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - g.cdf.begin());
    if (hi == 0) hi = 1;
    if (hi >= g.cdf.size()) hi = g.cdf.size() - 1;
    double c0 = g.cdf[hi - 1], c1 = g.cdf[hi];
    double frac = (c1 > c0) ? (v - c0) / (c1 - c0) : 0.5;
    double u = g.u[hi - 1] + frac * (g.u[hi] - g.u[hi - 1]);
    double x = std::pow(u, 1.0 / p);
    return std::max(x, kRateFloor);
}

} // namespace

double sample_ptn(double p, double a, double b, Rng& rng) {
    if (!(p > 0.0) || !(a > 0.0) || !std::isfinite(b)) {
        throw std::invalid_argument("sample_ptn: require p > 0, a > 0, finite b");
    }
    if (p < 1.0) return sample_ptn_small_p(p, a, b, rng);

    double sigma = std::sqrt(0.5 / a);
    if (p == 1.0) {
        return sample_truncated_normal_pos(b / (2.0 * a), sigma, rng);
    }
    // Mode of the density, the positive root of 2a x^2 - b x - (p - 1) = 0.
    double mode = (b + std::sqrt(b * b + 8.0 * a * (p - 1.0))) / (4.0 * a);
    // Bounding the power factor by its tangent at the mode gives a truncated
    // normal envelope with mean exactly at the mode and variance 1/(2a); the
    // log acceptance ratio below is always <= 0.
    for (;;) {
        double x = sample_truncated_normal_pos(mode, sigma, rng);
        double lr = (p - 1.0) * (std::log(x / mode) - (x - mode) / mode);
        if (std::log(rng.uniform_pos()) <= lr) return std::max(x, kRateFloor);
    }
}

// ---------------------------------------------------------------------------
// Concentration updates
// ---------------------------------------------------------------------------

AlphaUpdate update_alpha_da_ptn(long long t, double sum_log_lambda,
                                const GammaPrior& prior, double alpha_current,
                                Rng& rng) {
    if (!(prior.shape > 0.0) || !(prior.rate > 0.0)) {
        throw std::invalid_argument("update_alpha_da_ptn: prior hyperparameters must be positive");
    }
    if (t < 0) throw std::invalid_argument("update_alpha_da_ptn: t must be nonnegative");
    if (!(alpha_current > 0.0)) {
        throw std::invalid_argument("update_alpha_da_ptn: alpha_current must be positive");
    }
    if (t == 0) {
        // Empty active set: the full conditional reduces to the prior.
        return AlphaUpdate{rng.gamma(prior.shape, prior.rate), true};
    }

    const double td = static_cast<double>(t);
    double sum_log_rho = 0.0;
    for (long long k = 2; k <= t; ++k) {
        sum_log_rho += rng.log_beta_draw(alpha_current + static_cast<double>(k - 1) / td,
                                         static_cast<double>(t - k + 1) / td);
    }
    double w = rng.gamma(td * alpha_current, td * alpha_current * alpha_current);

    double p_star = td + prior.shape;
    double a_star = td * w;
    double b_star = td * std::log(w) + 2.0 * td + sum_log_lambda + sum_log_rho - prior.rate;
    if (!(a_star > 0.0) || !std::isfinite(b_star)) {
        std::ostringstream msg;
        msg << "update_alpha_da_ptn: nonfinite augmented statistics (t=" << t
            << ", alpha=" << format_stat(alpha_current)
            << ", sum_log_lambda=" << format_stat(sum_log_lambda)
            << ", w=" << format_stat(w)
            << ", sum_log_rho=" << format_stat(sum_log_rho)
            << ", b*=" << format_stat(b_star) << ")";
        throw std::runtime_error(msg.str());
    }

    double proposal = sample_ptn(p_star, a_star, b_star, rng);
    auto log_c = [td](double al) {
        double x = td * al;
        return (x - 0.5) * std::log(x) - log_gamma_fn(x) - x;
    };
    double log_accept = 2.0 * (log_c(proposal) - log_c(alpha_current));
    bool accepted = std::log(rng.uniform_pos()) < log_accept;
    return AlphaUpdate{accepted ? proposal : alpha_current, accepted};
}

AlphaUpdate update_alpha_mh_rw(long long t, double sum_log_lambda,
                               const LogNormalPrior& prior, double beta_current,
                               double step, Rng& rng) {
    if (!(step > 0.0)) throw std::invalid_argument("update_alpha_mh_rw: step must be positive");
    double proposal = beta_current + step * rng.normal();
    double log_num = log_alpha_target_log_scale(t, sum_log_lambda, prior, proposal);
    double log_den = log_alpha_target_log_scale(t, sum_log_lambda, prior, beta_current);
    bool accepted;
    if (log_den == kNegInf) {
        // Escape hatch: the chain should never sit at a zero-density point,
        // but if it does, any finite-density proposal is an improvement.
        accepted = log_num > kNegInf;
    } else {
        accepted = std::log(rng.uniform_pos()) < log_num - log_den;
    }
    return AlphaUpdate{accepted ? proposal : beta_current, accepted};
}

double update_alpha_slice(long long t, double sum_log_lambda,
                          const LogNormalPrior& prior, double beta_current,
                          double width, int max_steps, Rng& rng) {
    if (!(width > 0.0)) throw std::invalid_argument("update_alpha_slice: width must be positive");
    if (max_steps < 1) throw std::invalid_argument("update_alpha_slice: max_steps must be >= 1");

    auto target = [&](double beta) {
        return log_alpha_target_log_scale(t, sum_log_lambda, prior, beta);
    };
    double f0 = target(beta_current);
    if (!std::isfinite(f0)) {
        throw std::runtime_error("update_alpha_slice: current point has nonfinite target (beta=" +
                                 format_stat(beta_current) + ", t=" + std::to_string(t) +
                                 ", sum_log_lambda=" + format_stat(sum_log_lambda) + ")");
    }
    double log_height = f0 + std::log(rng.uniform_pos());

    // Stepping out: place a width-sized window uniformly around the current
    // point, then extend each side in width-sized steps, with the total
    // number of extensions capped at max_steps and split randomly.
    double left = beta_current - width * rng.uniform();
    double right = left + width;
    long long budget_left = static_cast<long long>(std::floor(max_steps * rng.uniform()));
    long long budget_right = (max_steps - 1) - budget_left;
    while (budget_left > 0 && target(left) > log_height) {
        left -= width;
        --budget_left;
    }
    while (budget_right > 0 && target(right) > log_height) {
        right += width;
        --budget_right;
    }

    for (int contraction = 0; contraction < 1000; ++contraction) {
        double proposal = left + rng.uniform() * (right - left);
        if (target(proposal) > log_height) return proposal;
        if (proposal < beta_current) left = proposal;
        else right = proposal;
    }
    throw std::runtime_error("update_alpha_slice: no point on the slice after 1000 contractions (beta=" +
                             format_stat(beta_current) + ", t=" + std::to_string(t) +
                             ", sum_log_lambda=" + format_stat(sum_log_lambda) + ")");
}

// ---------------------------------------------------------------------------
// Fitters
// ---------------------------------------------------------------------------

namespace {

void check_fit_inputs(const CountDataset& data, const McmcConfig& cfg) {
    data.validate();
    if (data.n() == 0) throw std::invalid_argument("fit: dataset has no rows");
    if (data.d() < 2) throw std::invalid_argument("fit: need at least two categories");
    cfg.validate();
}

void check_beta_priors(const std::vector<BetaPrior>& pr, int d, const char* what) {
    if (static_cast<int>(pr.size()) != d) {
        throw std::invalid_argument(std::string("fit: ") + what + " prior must have one entry per category");
    }
    for (const auto& p : pr) {
        if (!(p.a > 0.0) || !(p.b > 0.0)) {
            throw std::invalid_argument(std::string("fit: ") + what + " prior hyperparameters must be positive");
        }
    }
}

void check_gamma_priors(const std::vector<GammaPrior>& pr, int d, const char* what) {
    if (static_cast<int>(pr.size()) != d) {
        throw std::invalid_argument(std::string("fit: ") + what + " prior must have one entry per category");
    }
    for (const auto& p : pr) {
        if (!(p.shape > 0.0) || !(p.rate > 0.0)) {
            throw std::invalid_argument(std::string("fit: ") + what + " prior hyperparameters must be positive");
        }
    }
}

void check_log_normal_priors(const std::vector<LogNormalPrior>& pr, int d, const char* what) {
    if (static_cast<int>(pr.size()) != d) {
        throw std::invalid_argument(std::string("fit: ") + what + " prior must have one entry per category");
    }
    for (const auto& p : pr) {
        if (!std::isfinite(p.mean) || !(p.variance > 0.0)) {
            throw std::invalid_argument(std::string("fit: ") + what +
                                        " prior needs a finite mean and positive variance");
        }
    }
}

std::vector<std::string> draw_names(const char* base, int d, bool with_zeta) {
    std::vector<std::string> names;
    for (int j = 1; j <= d; ++j) names.push_back(base + std::to_string(j));
    if (with_zeta) {
        for (int j = 1; j <= d; ++j) names.push_back("zeta" + std::to_string(j));
    }
    return names;
}

// Activation probability of an inactive-capable cell: (1-zeta)*lik /
// (zeta + (1-zeta)*lik) with lik in (0, 1].  Stable for zeta at either
// endpoint.
double activation_probability(double zeta, double log_lik) {
    if (zeta <= 0.0) return 1.0;
    if (zeta >= 1.0) return 0.0;
    double act = (1.0 - zeta) * std::exp(log_lik);
    return act / (zeta + act);
}

} // namespace

ChainDraws fit_zanim(const CountDataset& data, const PriorSpec& priors,
                     const McmcConfig& cfg, const StateInspector& inspect) {
    check_fit_inputs(data, cfg);
    const int n = data.n();
    const int d = data.d();
    if (!cfg.fix_zeta_zero) check_beta_priors(priors.zeta_beta, d, "zeta");
    check_gamma_priors(priors.lambda_gamma, d, "lambda");

    Rng rng(cfg.seed, cfg.stream);
    const std::vector<int> trials = data.trials();

    LatentState st;
    st.phi.assign(n, 0.0);
    st.z = Matrix(n, d, 1.0);
    st.lambda.assign(d, 1.0);
    st.zeta.assign(d, 0.0);
    if (!cfg.fix_zeta_zero) {
        for (int j = 0; j < d; ++j) {
            st.zeta[j] = priors.zeta_beta[j].a / (priors.zeta_beta[j].a + priors.zeta_beta[j].b);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (trials[i] > 0) st.phi[i] = rng.gamma(static_cast<double>(trials[i]), static_cast<double>(d));
    }

    const long long kept = cfg.retained();
    const int p_cols = cfg.fix_zeta_zero ? d : 2 * d;
    ChainDraws out;
    out.names = draw_names("theta", d, !cfg.fix_zeta_zero);
    out.draws = Matrix(static_cast<std::size_t>(kept), static_cast<std::size_t>(p_cols));

    for (long long iter = 1; iter <= cfg.iterations; ++iter) {
        for (int j = 0; j < d; ++j) {
            // Sufficient statistics over the activity column as left by the
            // previous sweep.
            long long t_j = 0;
            double r_j = 0.0, s_j = 0.0;
            for (int i = 0; i < n; ++i) {
                if (st.z(i, j) == 1.0) {
                    ++t_j;
                    r_j += data.rows[i][static_cast<std::size_t>(j)];
                    s_j += st.phi[i];
                }
            }
            if (!cfg.fix_zeta_zero) {
                st.zeta[j] = rng.beta(static_cast<double>(n - t_j) + priors.zeta_beta[j].a,
                                      static_cast<double>(t_j) + priors.zeta_beta[j].b);
            }
            st.lambda[j] = rng.gamma(r_j + priors.lambda_gamma[j].shape,
                                     s_j + priors.lambda_gamma[j].rate);
            if (!cfg.fix_zeta_zero) {
                for (int i = 0; i < n; ++i) {
                    if (data.rows[i][static_cast<std::size_t>(j)] > 0) {
                        st.z(i, j) = 1.0;
                        continue;
                    }
                    double pr = activation_probability(st.zeta[j], -st.phi[i] * st.lambda[j]);
                    st.z(i, j) = rng.bernoulli(pr) ? 1.0 : 0.0;
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            if (trials[i] == 0) {
                st.phi[i] = 0.0;
                continue;
            }
            double rate = 0.0;
            for (int j = 0; j < d; ++j) rate += st.lambda[j] * st.z(i, j);
            st.phi[i] = (rate > 0.0) ? rng.gamma(static_cast<double>(trials[i]), rate) : 0.0;
        }
        if (inspect) inspect(st, iter);
        if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
            const std::size_t m = static_cast<std::size_t>((iter - cfg.burn_in) / cfg.thin - 1);
            double total = std::accumulate(st.lambda.begin(), st.lambda.end(), 0.0);
            for (int j = 0; j < d; ++j) out.draws(m, j) = st.lambda[j] / total;
            if (!cfg.fix_zeta_zero) {
                for (int j = 0; j < d; ++j) out.draws(m, d + j) = st.zeta[j];
            }
        }
    }

    if (cfg.compute_loglik) {
        out.loglik = zanim_loglik_matrix(data, out.draws, !cfg.fix_zeta_zero);
    }
    return out;
}

ChainDraws fit_zanidm(const CountDataset& data, const PriorSpec& priors,
                      const McmcConfig& cfg, const StateInspector& inspect) {
    check_fit_inputs(data, cfg);
    const int n = data.n();
    const int d = data.d();
    if (!cfg.fix_zeta_zero) check_beta_priors(priors.zeta_beta, d, "zeta");
    const bool use_gamma_prior = cfg.alpha_sampler == AlphaSamplerKind::da_ptn;
    if (use_gamma_prior) check_gamma_priors(priors.alpha_gamma, d, "alpha");
    else check_log_normal_priors(priors.alpha_log_normal, d, "log-alpha");

    Rng rng(cfg.seed, cfg.stream);
    const std::vector<int> trials = data.trials();

    LatentState st;
    st.phi.assign(n, 0.0);
    st.z = Matrix(n, d, 1.0);
    st.lambda_cell = Matrix(n, d, 1.0);
    st.alpha.assign(d, 1.0);
    st.zeta.assign(d, 0.0);
    if (!cfg.fix_zeta_zero) {
        for (int j = 0; j < d; ++j) {
            st.zeta[j] = priors.zeta_beta[j].a / (priors.zeta_beta[j].a + priors.zeta_beta[j].b);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (trials[i] > 0) st.phi[i] = rng.gamma(static_cast<double>(trials[i]), static_cast<double>(d));
    }

    std::vector<double> beta(d, 0.0);  // log alpha, used by the log-scale samplers
    std::vector<double> step(d, cfg.mh_step);
    std::vector<long long> accept_count(d, 0), accept_total(d, 0);

    const long long kept = cfg.retained();
    const int p_cols = cfg.fix_zeta_zero ? d : 2 * d;
    ChainDraws out;
    out.names = draw_names("alpha", d, !cfg.fix_zeta_zero);
    out.draws = Matrix(static_cast<std::size_t>(kept), static_cast<std::size_t>(p_cols));

    for (long long iter = 1; iter <= cfg.iterations; ++iter) {
        for (int j = 0; j < d; ++j) {
            long long t_j = 0;
            double sum_log_lambda = 0.0;
            for (int i = 0; i < n; ++i) {
                if (st.z(i, j) == 1.0) {
                    ++t_j;
                    sum_log_lambda += std::log(st.lambda_cell(i, j));
                }
            }
            if (!cfg.fix_zeta_zero) {
                st.zeta[j] = rng.beta(static_cast<double>(n - t_j) + priors.zeta_beta[j].a,
                                      static_cast<double>(t_j) + priors.zeta_beta[j].b);
            }

            bool accepted = true;
            switch (cfg.alpha_sampler) {
                case AlphaSamplerKind::da_ptn: {
                    AlphaUpdate up = update_alpha_da_ptn(t_j, sum_log_lambda,
                                                         priors.alpha_gamma[j], st.alpha[j], rng);
                    st.alpha[j] = up.value;
                    accepted = up.accepted;
                    break;
                }
                case AlphaSamplerKind::mh_rw: {
                    AlphaUpdate up = update_alpha_mh_rw(t_j, sum_log_lambda,
                                                        priors.alpha_log_normal[j], beta[j],
                                                        step[j], rng);
                    beta[j] = up.value;
                    st.alpha[j] = std::max(std::exp(beta[j]), kRateFloor);
                    accepted = up.accepted;
                    if (cfg.mh_adapt && iter <= cfg.burn_in) {
                        double gain = std::pow(static_cast<double>(iter), -0.6);
                        double adjusted = std::log(step[j]) + gain * ((accepted ? 1.0 : 0.0) - kAdaptTarget);
                        step[j] = std::clamp(std::exp(adjusted), kAdaptStepMin, kAdaptStepMax);
                    }
                    break;
                }
                case AlphaSamplerKind::slice: {
                    beta[j] = update_alpha_slice(t_j, sum_log_lambda, priors.alpha_log_normal[j],
                                                 beta[j], cfg.slice_width, cfg.slice_max_steps, rng);
                    st.alpha[j] = std::max(std::exp(beta[j]), kRateFloor);
                    accepted = true;
                    break;
                }
            }
            if (iter > cfg.burn_in) {
                ++accept_total[j];
                if (accepted) ++accept_count[j];
            }

            if (!cfg.fix_zeta_zero) {
                for (int i = 0; i < n; ++i) {
                    if (data.rows[i][static_cast<std::size_t>(j)] > 0) {
                        st.z(i, j) = 1.0;
                        continue;
                    }
                    double pr = activation_probability(st.zeta[j], -st.alpha[j] * std::log1p(st.phi[i]));
                    st.z(i, j) = rng.bernoulli(pr) ? 1.0 : 0.0;
                }
            }
            for (int i = 0; i < n; ++i) {
                if (st.z(i, j) == 1.0) {
                    double shape = st.alpha[j] + data.rows[i][static_cast<std::size_t>(j)];
                    st.lambda_cell(i, j) = std::max(rng.gamma(shape, 1.0 + st.phi[i]), kRateFloor);
                } else {
                    st.lambda_cell(i, j) = 0.0;
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            if (trials[i] == 0) {
                st.phi[i] = 0.0;
                continue;
            }
            double rate = 0.0;
            for (int j = 0; j < d; ++j) rate += st.lambda_cell(i, j);
            st.phi[i] = (rate > 0.0) ? rng.gamma(static_cast<double>(trials[i]), rate) : 0.0;
        }
        if (inspect) inspect(st, iter);
        if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
            const std::size_t m = static_cast<std::size_t>((iter - cfg.burn_in) / cfg.thin - 1);
            for (int j = 0; j < d; ++j) out.draws(m, j) = st.alpha[j];
            if (!cfg.fix_zeta_zero) {
                for (int j = 0; j < d; ++j) out.draws(m, d + j) = st.zeta[j];
            }
        }
    }

    out.acceptance.assign(d, 1.0);
    if (cfg.alpha_sampler != AlphaSamplerKind::slice) {
        for (int j = 0; j < d; ++j) {
            out.acceptance[j] = accept_total[j] > 0
                ? static_cast<double>(accept_count[j]) / static_cast<double>(accept_total[j])
                : 0.0;
        }
    }

    if (cfg.compute_loglik) {
        out.loglik = zanidm_loglik_matrix(data, out.draws, !cfg.fix_zeta_zero);
    }
    return out;
}

} // namespace zani
