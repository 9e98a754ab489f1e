#include "zani/distributions.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace zani {

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

// Below this, a reduced component's renormalizing mass 1 - sum_{l in K}
// theta_l is treated as exactly zero and the component carries no mass; the
// division theta_j / 0 is not defined by the model.
const double kRenormFloor = 1e-14;

// Moments and marginals loop over O(2^(d-1)) subsets per entry.
const int kSubsetWarnDim = 25;

void warn_subset_blowup(const char* what, int d) {
    if (d > kSubsetWarnDim)
        std::fprintf(stderr,
                     "zani: warning: %s at d=%d sums over ~2^%d subsets per "
                     "entry; expect a long wait\n",
                     what, d, d - 1);
}

void check_probability_vector(const std::vector<double>& zeta) {
    for (std::size_t j = 0; j < zeta.size(); ++j)
        if (!(zeta[j] >= 0.0) || !(zeta[j] <= 1.0))
            throw std::invalid_argument("zeta[" + std::to_string(j + 1) +
                                        "] must lie in [0,1]");
}

// Checks y against the support: nonnegative entries summing to N, or the
// zero vector. Returns the zero count.
int check_support(const CountVector& y, int d, int N) {
    if (static_cast<int>(y.size()) != d)
        throw std::invalid_argument("count vector has dimension " +
                                    std::to_string(y.size()) + ", parameters have " +
                                    std::to_string(d));
    long long total = 0;
    int zeros = 0;
    for (int v : y) {
        if (v < 0) throw std::invalid_argument("count vector has a negative entry");
        total += v;
        zeros += (v == 0);
    }
    if (total != N && total != 0) {
        std::ostringstream os;
        os << "count vector sums to " << total << " but the trial total is " << N;
        throw std::invalid_argument(os.str());
    }
    return zeros;
}

long long sum_counts(const CountVector& y) {
    return std::accumulate(y.begin(), y.end(), 0LL);
}

} // namespace

void ZanimParams::validate() const {
    if (theta.size() < 2)
        throw std::invalid_argument("ZanimParams needs at least 2 categories");
    if (theta.size() != zeta.size())
        throw std::invalid_argument("theta and zeta must have the same length");
    double s = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        if (!(theta[j] >= 0.0) || !std::isfinite(theta[j]))
            throw std::invalid_argument("theta[" + std::to_string(j + 1) +
                                        "] must be finite and nonnegative");
        s += theta[j];
    }
    if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("theta must sum to 1 (got " + std::to_string(s) + ")");
    check_probability_vector(zeta);
}

void ZanidmParams::validate() const {
    if (alpha.size() < 2)
        throw std::invalid_argument("ZanidmParams needs at least 2 categories");
    if (alpha.size() != zeta.size())
        throw std::invalid_argument("alpha and zeta must have the same length");
    for (std::size_t j = 0; j < alpha.size(); ++j)
        if (!(alpha[j] > 0.0) || !std::isfinite(alpha[j]))
            throw std::invalid_argument("alpha[" + std::to_string(j + 1) +
                                        "] must be finite and positive");
    check_probability_vector(zeta);
}

double log_binomial_pmf(int k, int n, double p) {
    if (k < 0 || k > n) return kNegInf;
    if (!(p >= 0.0) || !(p <= 1.0))
        throw std::invalid_argument("binomial probability outside [0,1]");
    if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p == 1.0) return k == n ? 0.0 : kNegInf;
    double lchoose = log_gamma_fn(n + 1.0) - log_gamma_fn(k + 1.0) -
                     log_gamma_fn(n - k + 1.0);
    return lchoose + k * std::log(p) + (n - k) * std::log1p(-p);
}

double log_beta_binomial_pmf(int k, int n, double a, double b) {
    if (k < 0 || k > n) return kNegInf;
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("beta-binomial shapes must be positive");
    double lchoose = log_gamma_fn(n + 1.0) - log_gamma_fn(k + 1.0) -
                     log_gamma_fn(n - k + 1.0);
    return lchoose + log_beta(a + k, b + n - k) - log_beta(a, b);
}

// ---------------------------------------------------------------------------
// Joint PMFs
// ---------------------------------------------------------------------------

double zanim_log_pmf(const CountVector& y, const ZanimParams& p, int N) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    const int d = p.d();
    const int zeros = check_support(y, d, N);
    if (N == 0) return 0.0; // the zero vector is the whole support

    LogWeightTable tab(p.zeta);
    if (zeros == d) return tab.log_eta_zero();

    // Shared across the full and every reduced component: the multinomial
    // coefficient and the theta part restricted to positive counts (counts in
    // any admissible K are zero, so those categories never contribute).
    double base = log_multinomial_coeff(N, y);
    for (int j = 0; j < d; ++j) {
        if (y[j] == 0) continue;
        if (p.theta[j] == 0.0) return kNegInf; // impossible under every component
        base += y[j] * std::log(p.theta[j]);
    }

    double acc = kNegInf;
    for (const auto& comp : consistent_components(y)) {
        double term;
        switch (comp.kind) {
        case ComponentKind::Full:
            term = tab.log_eta_full() + base;
            break;
        case ComponentKind::Reduced: {
            double off_mass = 0.0;
            for (int l : comp.subset) off_mass += p.theta[l];
            double denom = 1.0 - off_mass;
            if (denom <= kRenormFloor) {
                term = kNegInf;
            } else {
                // The renormalized probabilities theta_j / denom over the
                // active categories; the positive counts sum to N, so the
                // denominator factors out as denom^(-N).
                term = tab.log_eta_reduced(comp.subset) + base - N * std::log(denom);
            }
            break;
        }
        case ComponentKind::NInflated:
            term = tab.log_eta_n(comp.subset[0]);
            break;
        case ComponentKind::AllZero:
            term = tab.log_eta_zero();
            break;
        }
        acc = log_add_exp(acc, term);
    }
    return acc;
}

double zanim_log_pmf(const CountVector& y, const ZanimParams& p) {
    long long n = sum_counts(y);
    if (n == 0 && !y.empty()) {
        // All-zero y with inferred N: read as the zero atom of an N >= 1
        // model. Use the explicit-N overload for the degenerate N = 0 case.
        p.validate();
        check_support(y, p.d(), 0);
        return LogWeightTable(p.zeta).log_eta_zero();
    }
    return zanim_log_pmf(y, p, static_cast<int>(n));
}

double zanidm_log_pmf(const CountVector& y, const ZanidmParams& p, int N) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    const int d = p.d();
    const int zeros = check_support(y, d, N);
    if (N == 0) return 0.0;

    LogWeightTable tab(p.zeta);
    if (zeros == d) return tab.log_eta_zero();

    const double alpha_total = std::accumulate(p.alpha.begin(), p.alpha.end(), 0.0);
    const double log_gamma_n1 = log_gamma_fn(N + 1.0);

    // Positive-count part of the Dirichlet-multinomial product; categories
    // with zero counts contribute a factor of 1 under every component.
    double base = 0.0;
    for (int j = 0; j < d; ++j) {
        if (y[j] == 0) continue;
        base += log_gamma_fn(y[j] + p.alpha[j]) - log_gamma_fn(p.alpha[j]) -
                log_gamma_fn(y[j] + 1.0);
    }

    double acc = kNegInf;
    for (const auto& comp : consistent_components(y)) {
        double term;
        switch (comp.kind) {
        case ComponentKind::Full:
        case ComponentKind::Reduced: {
            double a_s = alpha_total;
            for (int l : comp.subset) a_s -= p.alpha[l];
            term = tab.log_component_weight(comp) + log_gamma_fn(a_s) + log_gamma_n1 -
                   log_gamma_fn(N + a_s) + base;
            break;
        }
        case ComponentKind::NInflated:
            term = tab.log_eta_n(comp.subset[0]);
            break;
        case ComponentKind::AllZero:
            term = tab.log_eta_zero();
            break;
        }
        acc = log_add_exp(acc, term);
    }
    return acc;
}

double zanidm_log_pmf(const CountVector& y, const ZanidmParams& p) {
    long long n = sum_counts(y);
    if (n == 0 && !y.empty()) {
        p.validate();
        check_support(y, p.d(), 0);
        return LogWeightTable(p.zeta).log_eta_zero();
    }
    return zanidm_log_pmf(y, p, static_cast<int>(n));
}

double zanim_pmf(const CountVector& y, const ZanimParams& p) {
    return std::exp(zanim_log_pmf(y, p));
}

double zanidm_pmf(const CountVector& y, const ZanidmParams& p) {
    return std::exp(zanidm_log_pmf(y, p));
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

CountVector zanim_sample(int N, const ZanimParams& p, Rng& rng) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    const int d = p.d();
    CountVector y(d, 0);
    if (N == 0) return y;

    std::vector<double> probs(d, 0.0);
    double active_mass = 0.0;
    for (int j = 0; j < d; ++j) {
        if (rng.bernoulli(1.0 - p.zeta[j])) {
            probs[j] = p.theta[j];
            active_mass += p.theta[j];
        }
    }
    // No active category (or the active ones carry no theta mass, which the
    // PMF also treats as a zero-mass component): the zero vector.
    if (active_mass <= kRenormFloor) return y;
    for (double& q : probs) q /= active_mass;
    rng.multinomial(N, probs, y);
    return y;
}

CountVector zanidm_sample(int N, const ZanidmParams& p, Rng& rng) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    const int d = p.d();
    CountVector y(d, 0);
    if (N == 0) return y;

    // Log-domain gamma weights for the active categories keep tiny alpha_j
    // from underflowing the whole weight vector to zero.
    std::vector<double> log_w(d, kNegInf);
    bool any_active = false;
    for (int j = 0; j < d; ++j) {
        if (rng.bernoulli(1.0 - p.zeta[j])) {
            log_w[j] = rng.log_gamma_draw(p.alpha[j]);
            any_active = true;
        }
    }
    if (!any_active) return y;

    double norm = log_sum_exp(log_w);
    std::vector<double> probs(d, 0.0);
    for (int j = 0; j < d; ++j)
        if (log_w[j] != kNegInf) probs[j] = std::exp(log_w[j] - norm);
    rng.multinomial(N, probs, y);
    return y;
}

// ---------------------------------------------------------------------------
// Marginals
// ---------------------------------------------------------------------------

namespace {

// Shared scaffolding: the marginal of Y_j is
//   zeta_j * 1(k=0) + eta_N[j] * 1(k=N) + eta_full * f_full(k)
//   + sum over admissible subsets S of the other categories of eta_S * f_S(k)
// where f is binomial (ZANIM) or beta-binomial (ZANIDM). `component_term`
// maps a switched-off subset S (possibly empty, meaning the full component)
// to the log component PMF at k.
template <typename ComponentTerm>
double marginal_mixture(int j, int k, int N, const std::vector<double>& zeta,
                        ComponentTerm component_term) {
    const int d = static_cast<int>(zeta.size());
    if (j < 0 || j >= d)
        throw std::invalid_argument("category index out of range");
    if (k < 0 || k > N) throw std::domain_error("marginal count outside [0, N]");
    if (N == 0) return 0.0;

    warn_subset_blowup("marginal", d);
    LogWeightTable tab(zeta);
    double acc = kNegInf;
    if (k == 0 && zeta[j] > 0.0) acc = std::log(zeta[j]);
    if (k == N) acc = log_add_exp(acc, tab.log_eta_n(j));
    acc = log_add_exp(acc, tab.log_eta_full() + component_term(std::span<const int>{}));
    const int exclude[] = {j};
    SubsetRange subsets(d, exclude, d - 2);
    for (const auto& s : subsets)
        acc = log_add_exp(acc, tab.log_eta_reduced(s) + component_term(std::span<const int>(s)));
    return acc;
}

} // namespace

double zanim_marginal_log_pmf(int j, int k, const ZanimParams& p, int N) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    return marginal_mixture(j, k, N, p.zeta, [&](std::span<const int> s) {
        double off_mass = 0.0;
        for (int l : s) off_mass += p.theta[l];
        double denom = 1.0 - off_mass;
        if (denom <= kRenormFloor) return kNegInf;
        // Rounding can push theta_j / denom a hair above 1 when S covers
        // nearly all other mass; the exact value is at most 1.
        double pj = std::min(p.theta[j] / denom, 1.0);
        return log_binomial_pmf(k, N, pj);
    });
}

double zanidm_marginal_log_pmf(int j, int k, const ZanidmParams& p, int N) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    const double alpha_total = std::accumulate(p.alpha.begin(), p.alpha.end(), 0.0);
    return marginal_mixture(j, k, N, p.zeta, [&](std::span<const int> s) {
        double a_s = alpha_total;
        for (int l : s) a_s -= p.alpha[l];
        // Active categories besides j always remain, so the second shape is
        // positive for every admissible subset.
        return log_beta_binomial_pmf(k, N, p.alpha[j], a_s - p.alpha[j]);
    });
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

namespace {

// Accumulates mean and covariance entries given closures for the component
// conditional moments, then fills in the DI/ZI indexes from the marginal at
// zero. `mean1(j, s)` is E[Y_j | component with S switched off] / N restated
// as the component success probability; `m2(j, s)` is the full second moment
// E[Y_j^2 | component]; `cross(j, h, r)` is E[Y_j Y_h | component] for the
// full/reduced component with R switched off.
template <typename M1, typename M2, typename Cross, typename LogP0>
MomentsReport moments_mixture(int d, int N, const std::vector<double>& zeta,
                              M1 mean1, M2 m2, Cross cross, LogP0 log_p0) {
    warn_subset_blowup("moments", d);
    LogWeightTable tab(zeta);
    const double eta_full = std::exp(tab.log_eta_full());

    MomentsReport rep;
    rep.mean.assign(d, 0.0);
    rep.covariance = Matrix(d, d);
    rep.dispersion_index.assign(d, std::nullopt);
    rep.zero_inflation_index.assign(d, std::nullopt);

    std::vector<double> second(d, 0.0);
    for (int j = 0; j < d; ++j) {
        double eta_nj = std::exp(tab.log_eta_n(j));
        double mean_acc = eta_nj + eta_full * mean1(j, std::span<const int>{});
        double sec_acc =
            static_cast<double>(N) * N * eta_nj + eta_full * m2(j, std::span<const int>{});
        const int exclude[] = {j};
        SubsetRange subsets(d, exclude, d - 2);
        for (const auto& s : subsets) {
            double w = std::exp(tab.log_eta_reduced(s));
            if (w == 0.0) continue;
            mean_acc += w * mean1(j, std::span<const int>(s));
            sec_acc += w * m2(j, std::span<const int>(s));
        }
        rep.mean[j] = N * mean_acc;
        second[j] = sec_acc;
    }

    for (int j = 0; j < d; ++j) {
        double var = second[j] - rep.mean[j] * rep.mean[j];
        if (var < 0.0 && var > -1e-9) var = 0.0; // rounding guard
        rep.covariance(j, j) = var;
    }

    for (int j = 0; j < d; ++j) {
        for (int h = j + 1; h < d; ++h) {
            double acc = eta_full * cross(j, h, std::span<const int>{});
            const int exclude[] = {j, h};
            SubsetRange subsets(d, exclude, d - 2);
            for (const auto& r : subsets) {
                double w = std::exp(tab.log_eta_reduced(r));
                if (w == 0.0) continue;
                acc += w * cross(j, h, std::span<const int>(r));
            }
            double cov = static_cast<double>(N) * (N - 1) * acc - rep.mean[j] * rep.mean[h];
            rep.covariance(j, h) = cov;
            rep.covariance(h, j) = cov;
        }
    }

    for (int j = 0; j < d; ++j) {
        if (rep.mean[j] <= 0.0) continue; // DI and ZI undefined at mean zero
        rep.dispersion_index[j] = rep.covariance(j, j) / rep.mean[j];
        rep.zero_inflation_index[j] = 1.0 + log_p0(j) / rep.mean[j];
    }
    return rep;
}

} // namespace

MomentsReport zanim_moments(const ZanimParams& p, int N) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    const int d = p.d();

    // Component success probability theta_j / (1 - sum_{l in S} theta_l).
    auto prob = [&](int j, std::span<const int> s) {
        double off = 0.0;
        for (int l : s) off += p.theta[l];
        double denom = 1.0 - off;
        if (denom <= kRenormFloor) return 0.0; // zero-mass component
        return std::min(p.theta[j] / denom, 1.0);
    };
    auto m2 = [&](int j, std::span<const int> s) {
        double q = prob(j, s);
        // Binomial second moment: N q (1 + q (N - 1)).
        return N * q * (1.0 + q * (N - 1));
    };
    auto cross = [&](int j, int h, std::span<const int> r) {
        return prob(j, r) * prob(h, r);
    };
    auto log_p0 = [&](int j) { return zanim_marginal_log_pmf(j, 0, p, N); };
    return moments_mixture(d, N, p.zeta, prob, m2, cross, log_p0);
}

MomentsReport zanidm_moments(const ZanidmParams& p, int N) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    const int d = p.d();
    const double alpha_total = std::accumulate(p.alpha.begin(), p.alpha.end(), 0.0);

    auto active_total = [&](std::span<const int> s) {
        double a_s = alpha_total;
        for (int l : s) a_s -= p.alpha[l];
        return a_s;
    };
    auto prob = [&](int j, std::span<const int> s) {
        return p.alpha[j] / active_total(s); // beta-binomial mean fraction
    };
    auto m2 = [&](int j, std::span<const int> s) {
        // Beta-binomial(N, a, b) second moment: N a (N (1 + a) + b) /
        // ((a + b)(1 + a + b)).
        double a = p.alpha[j];
        double ab = active_total(s);
        double b = ab - a;
        return N * a * (N * (1.0 + a) + b) / (ab * (1.0 + ab));
    };
    auto cross = [&](int j, int h, std::span<const int> r) {
        double ab = active_total(r);
        return p.alpha[j] * p.alpha[h] / (ab * (ab + 1.0));
    };
    auto log_p0 = [&](int j) { return zanidm_marginal_log_pmf(j, 0, p, N); };
    return moments_mixture(d, N, p.zeta, prob, m2, cross, log_p0);
}

// ---------------------------------------------------------------------------
// Moment generating function
// ---------------------------------------------------------------------------

double zanim_log_mgf(std::span<const double> t, const ZanimParams& p, int N) {
    p.validate();
    if (N < 0) throw std::invalid_argument("trial total N must be nonnegative");
    const int d = p.d();
    if (static_cast<int>(t.size()) != d)
        throw std::invalid_argument("t has dimension " + std::to_string(t.size()) +
                                    ", parameters have " + std::to_string(d));
    for (double v : t)
        if (!std::isfinite(v)) throw std::invalid_argument("t must be finite");

    LogWeightTable tab(p.zeta);
    std::vector<double> log_theta(d);
    for (int j = 0; j < d; ++j)
        log_theta[j] = p.theta[j] > 0.0 ? std::log(p.theta[j]) : kNegInf;

    // log of sum_{j not in S} theta_j e^{t_j}, or -inf if that sum is zero.
    auto log_active_sum = [&](std::span<const int> s) {
        double acc = kNegInf;
        std::size_t si = 0;
        for (int j = 0; j < d; ++j) {
            if (si < s.size() && s[si] == j) {
                ++si;
                continue;
            }
            acc = log_add_exp(acc, log_theta[j] + t[j]);
        }
        return acc;
    };

    double acc = tab.log_eta_zero();
    for (int j = 0; j < d; ++j)
        acc = log_add_exp(acc, tab.log_eta_n(j) + static_cast<double>(N) * t[j]);

    // Full component: eta_full * (sum theta_j e^{t_j})^N.
    {
        double inner = log_active_sum(std::span<const int>{});
        double term = (N == 0) ? tab.log_eta_full()
                               : tab.log_eta_full() + N * inner;
        acc = log_add_exp(acc, term);
    }

    SubsetRange subsets(d, {}, d - 2);
    for (const auto& s : subsets) {
        double off = 0.0;
        for (int l : s) off += p.theta[l];
        double denom = 1.0 - off;
        double w = tab.log_eta_reduced(s);
        if (w == kNegInf) continue;
        double term;
        if (N == 0) {
            term = w; // x^0 = 1 regardless of the component's inner sum
        } else if (denom <= kRenormFloor) {
            continue; // zero-mass component, same guard as the PMF
        } else {
            term = w + N * (log_active_sum(s) - std::log(denom));
        }
        acc = log_add_exp(acc, term);
    }
    return acc;
}

double zanim_mgf(std::span<const double> t, const ZanimParams& p, int N) {
    return std::exp(zanim_log_mgf(t, p, N));
}

} // namespace zani
