// End-to-end acceptance suite.  Each numbered check prints exactly one
// [PASS]/[FAIL] line with its measured values and pinned tolerances; the
// process exits nonzero if any check fails.  Checks 6, 7, 8, and 10 use
// fixed documented seeds (root seed 16 with the stream layout noted inline);
// the tolerances themselves are never loosened to fit a seed.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "zani/core.hpp"
#include "zani/diagnostics.hpp"
#include "zani/distributions.hpp"
#include "zani/inference.hpp"
#include "zani/io.hpp"
#include "zani/rng.hpp"
#include "zani/study.hpp"

#include "oracles.hpp"

using namespace zani;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buffer[512];
    std::vsnprintf(buffer, sizeof buffer, pattern, args);
    va_end(args);
    return buffer;
}

ZanimParams random_zanim(Rng& rng, int d, bool allow_edge_zeta = false) {
    ZanimParams p;
    p.theta.resize(static_cast<std::size_t>(d));
    p.zeta.resize(static_cast<std::size_t>(d));
    double s = 0.0;
    for (auto& t : p.theta) {
        t = 0.05 + rng.uniform();
        s += t;
    }
    for (auto& t : p.theta) t /= s;
    double resid = 1.0;
    for (double t : p.theta) resid -= t;
    p.theta[0] += resid;
    for (auto& z : p.zeta) {
        const double u = rng.uniform();
        if (allow_edge_zeta && u < 0.15)
            z = (u < 0.075) ? 0.0 : 1.0;
        else
            z = 0.8 * rng.uniform();
    }
    return p;
}

ZanidmParams random_zanidm(Rng& rng, int d) {
    ZanidmParams p;
    p.alpha.resize(static_cast<std::size_t>(d));
    p.zeta.resize(static_cast<std::size_t>(d));
    for (auto& a : p.alpha) a = 0.2 + 4.0 * rng.uniform();
    for (auto& z : p.zeta) z = 0.8 * rng.uniform();
    return p;
}

struct RunningMoments {
    double sum = 0.0, sum_sq = 0.0;
    long long count = 0;
    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++count;
    }
    double mean() const { return sum / static_cast<double>(count); }
    double variance() const {
        const double m = mean();
        return sum_sq / static_cast<double>(count) - m * m;
    }
};

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() /
                         ("zani_acceptance_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& cli, const fs::path& dir, const std::string& args,
            const std::string& out_name) {
    const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args + " > " +
                            out_name + " 2> cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------
// 1. Joint PMF normalization over the full support
// ---------------------------------------------------------------------------

bool check_normalization(std::string& detail) {
    const auto start = Clock::now();
    Rng rng(2718);
    double worst = 0.0;
    int sums = 0;
    for (int trial = 0; trial < 40; ++trial) { // 20 parameter sets per dimension
        const int d = 2 + trial % 2;
        const ZanimParams pm = random_zanim(rng, d);
        const ZanidmParams pd = random_zanidm(rng, d);
        for (int N = 0; N <= 6; ++N) {
            long double tm = 0.0L, td = 0.0L;
            for (const auto& y : oracle::enumerate_support(d, N)) {
                tm += std::exp(static_cast<long double>(zanim_log_pmf(y, pm, N)));
                td += std::exp(static_cast<long double>(zanidm_log_pmf(y, pd, N)));
            }
            worst = std::max(worst, std::abs(static_cast<double>(tm) - 1.0));
            worst = std::max(worst, std::abs(static_cast<double>(td) - 1.0));
            sums += 2;
        }
    }
    const double sec = seconds_since(start);
    detail = fmt("max |sum - 1| = %.2e over %d support sums (tol 1e-10) in %.1f s (limit 10 s)",
                 worst, sums, sec);
    return worst <= 1e-10 && sec < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Joint PMF equivalence with the term-by-term long-double reference
// ---------------------------------------------------------------------------

bool check_oracle_equivalence(std::string& detail) {
    const auto start = Clock::now();
    Rng rng(31415);
    double worst = 0.0;
    int mismatched_infinities = 0;
    for (int pair = 0; pair < 200; ++pair) {
        const int d = 3 + pair % 3; // 3, 4, 5
        const int N = 1 + static_cast<int>(rng.uniform() * 8);
        const ZanimParams pm = random_zanim(rng, d, true);
        const ZanidmParams pd = random_zanidm(rng, d);
        const auto support = oracle::enumerate_support(d, N);
        std::size_t pick = static_cast<std::size_t>(rng.uniform() * support.size());
        if (pick >= support.size()) pick = support.size() - 1;
        const CountVector& y = support[pick];

        const double om = oracle::zanim_log_pmf(y, pm.theta, pm.zeta, N);
        const double gm = zanim_log_pmf(y, pm, N);
        if (om == -kInf || gm == -kInf) {
            if (om != gm) ++mismatched_infinities;
        } else {
            worst = std::max(worst, std::abs(gm - om) / std::max(1.0, std::abs(om)));
        }
        const double od = oracle::zanidm_log_pmf(y, pd.alpha, pd.zeta, N);
        const double gd = zanidm_log_pmf(y, pd, N);
        if (od == -kInf || gd == -kInf) {
            if (od != gd) ++mismatched_infinities;
        } else {
            worst = std::max(worst, std::abs(gd - od) / std::max(1.0, std::abs(od)));
        }
    }
    const double sec = seconds_since(start);
    detail = fmt("max rel |log diff| = %.2e over 200 pairs x 2 models, d in {3,4,5} "
                 "(tol 1e-10, zero-mass disagreements %d) in %.1f s (limit 30 s)",
                 worst, mismatched_infinities, sec);
    return worst <= 1e-10 && mismatched_infinities == 0 && sec < 30.0;
}

// ---------------------------------------------------------------------------
// 3. Reference moment tables
// ---------------------------------------------------------------------------

bool check_moment_tables(std::string& detail) {
    const auto start = Clock::now();
    const ZanimParams pm{{0.05, 0.70, 0.25}, {0.05, 0.15, 0.10}};
    const ZanidmParams pd{{2.0, 28.0, 10.0}, {0.05, 0.15, 0.10}};
    const MomentsReport rm = zanim_moments(pm, 30);
    const MomentsReport rd = zanidm_moments(pd, 30);

    // Three-decimal reference values: means, variances, dispersion and
    // zero-inflation indices for both models, plus the covariances.
    const double em[] = {2.320, 18.496, 9.161};
    const double vm[] = {14.326, 69.178, 50.409};
    const double dim[] = {6.174, 3.740, 5.502};
    const double zim[] = {0.341, 0.897, 0.749};
    const double vd[] = {16.392, 72.723, 54.658};
    const double did[] = {7.064, 3.932, 5.966};
    const double zid[] = {0.492, 0.897, 0.750};
    const double cov_m[] = {-16.416, 2.143, -52.346}; // (1,2), (1,3), (2,3)
    const double cov_d[] = {-17.097, 0.758, -55.210};

    double worst = 0.0;
    int values = 0;
    const auto track = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want));
        ++values;
    };
    for (int j = 0; j < 3; ++j) {
        track(rm.mean[static_cast<std::size_t>(j)], em[j]);
        track(rm.covariance(j, j), vm[j]);
        track(rm.dispersion_index[static_cast<std::size_t>(j)].value(), dim[j]);
        track(rm.zero_inflation_index[static_cast<std::size_t>(j)].value(), zim[j]);
        track(rd.mean[static_cast<std::size_t>(j)], em[j]);
        track(rd.covariance(j, j), vd[j]);
        track(rd.dispersion_index[static_cast<std::size_t>(j)].value(), did[j]);
        track(rd.zero_inflation_index[static_cast<std::size_t>(j)].value(), zid[j]);
    }
    track(rm.covariance(0, 1), cov_m[0]);
    track(rm.covariance(0, 2), cov_m[1]);
    track(rm.covariance(1, 2), cov_m[2]);
    track(rd.covariance(0, 1), cov_d[0]);
    track(rd.covariance(0, 2), cov_d[1]);
    track(rd.covariance(1, 2), cov_d[2]);

    const double sec = seconds_since(start);
    detail = fmt("worst |error| = %.2e over %d reference values (tol 1e-3) in %.2f s "
                 "(limit 1 s)",
                 worst, values, sec);
    return worst < 1e-3 && sec < 1.0;
}

// ---------------------------------------------------------------------------
// 4. Marginal PMFs: brute-force equality and tail limits
// ---------------------------------------------------------------------------

bool check_marginals(std::string& detail) {
    const int d = 3, N = 6;
    Rng rng(1123);
    double worst = 0.0;
    int mismatched_infinities = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const ZanimParams pm = random_zanim(rng, d, true);
        const ZanidmParams pd = random_zanidm(rng, d);
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k <= N; ++k) {
                const double om = oracle::marginal_by_joint_sum(
                    j, k, d, N,
                    [&](const CountVector& y) { return zanim_log_pmf(y, pm, N); });
                const double gm = zanim_marginal_log_pmf(j, k, pm, N);
                if (om == -kInf || gm == -kInf) {
                    if (om != gm) ++mismatched_infinities;
                } else {
                    worst = std::max(worst, std::abs(gm - om) / std::max(1.0, std::abs(om)));
                }
                const double od = oracle::marginal_by_joint_sum(
                    j, k, d, N,
                    [&](const CountVector& y) { return zanidm_log_pmf(y, pd, N); });
                const double gd = zanidm_marginal_log_pmf(j, k, pd, N);
                if (od == -kInf || gd == -kInf) {
                    if (od != gd) ++mismatched_infinities;
                } else {
                    worst = std::max(worst, std::abs(gd - od) / std::max(1.0, std::abs(od)));
                }
            }
        }
    }

    // Tail limits: P(Y_j = 0) decreases to zeta_j and P(Y_j = N) decreases to
    // the single-active-category weight, monotonically along N = 10^1..10^4.
    const ZanimParams pm{{0.2, 0.5, 0.3}, {0.1, 0.2, 0.3}};
    const ZanidmParams pd{{1.0, 2.0, 3.0}, {0.1, 0.2, 0.3}};
    const LogWeightTable tab(pm.zeta);
    bool limits_ok = true;
    for (int j = 0; j < d; ++j) {
        const double atom = std::exp(tab.log_eta_n(j));
        double prev0_m = kInf, prev0_d = kInf, prevN_m = kInf, prevN_d = kInf;
        for (const int n : {10, 100, 1000, 10000}) {
            const double e0_m = std::exp(zanim_marginal_log_pmf(j, 0, pm, n)) - pm.zeta[static_cast<std::size_t>(j)];
            const double e0_d = std::exp(zanidm_marginal_log_pmf(j, 0, pd, n)) - pd.zeta[static_cast<std::size_t>(j)];
            const double eN_m = std::abs(std::exp(zanim_marginal_log_pmf(j, n, pm, n)) - atom);
            const double eN_d = std::abs(std::exp(zanidm_marginal_log_pmf(j, n, pd, n)) - atom);
            limits_ok = limits_ok && e0_m >= -1e-12 && e0_d >= -1e-12;
            limits_ok = limits_ok && e0_m <= prev0_m + 1e-12 && e0_d <= prev0_d + 1e-12;
            limits_ok = limits_ok && eN_m <= prevN_m + 1e-12 && eN_d <= prevN_d + 1e-12;
            prev0_m = e0_m;
            prev0_d = e0_d;
            prevN_m = eN_m;
            prevN_d = eN_d;
        }
    }

    detail = fmt("max rel |log diff| = %.2e vs joint sums (tol 1e-10, zero-mass "
                 "disagreements %d); tail limits monotone: %s",
                 worst, mismatched_infinities, limits_ok ? "yes" : "NO");
    return worst <= 1e-10 && mismatched_infinities == 0 && limits_ok;
}

// ---------------------------------------------------------------------------
// 5. Exact samplers against the PMF in total variation
// ---------------------------------------------------------------------------

bool check_sampler_tv(std::string& detail) {
    const auto start = Clock::now();
    const int d = 3, N = 5, draws = 1000000;
    const auto tv_of = [&](auto sample, auto log_pmf) {
        std::map<CountVector, long long> hist;
        for (int i = 0; i < draws; ++i) ++hist[sample()];
        double tv = 0.0;
        for (const auto& y : oracle::enumerate_support(d, N)) {
            const auto it = hist.find(y);
            const double emp =
                it == hist.end() ? 0.0 : static_cast<double>(it->second) / draws;
            tv += std::abs(emp - std::exp(log_pmf(y)));
        }
        return 0.5 * tv;
    };

    const ZanimParams pm{{0.2, 0.5, 0.3}, {0.1, 0.2, 0.3}};
    Rng r1(1001);
    const double tv_m = tv_of([&] { return zanim_sample(N, pm, r1); },
                              [&](const CountVector& y) { return zanim_log_pmf(y, pm, N); });
    const ZanidmParams pd{{1.0, 2.0, 3.0}, {0.1, 0.2, 0.3}};
    Rng r2(1002);
    const double tv_d = tv_of([&] { return zanidm_sample(N, pd, r2); },
                              [&](const CountVector& y) { return zanidm_log_pmf(y, pd, N); });

    const double sec = seconds_since(start);
    detail = fmt("TV(10^6 draws, exact) = %.4f / %.4f for the two models "
                 "(tol 0.01) in %.1f s (limit 60 s)",
                 tv_m, tv_d, sec);
    return tv_m < 0.01 && tv_d < 0.01 && sec < 60.0;
}

// ---------------------------------------------------------------------------
// 6. Multinomial-family recovery against fixed reference values
// ---------------------------------------------------------------------------

bool check_zanim_recovery(std::string& detail) {
    const auto start = Clock::now();
    ZanimParams truth;
    truth.theta = {0.05, 0.70, 0.25};
    truth.zeta = {0.05, 0.15, 0.10};
    Rng rng(16, 500); // pinned data stream
    CountDataset data;
    for (int i = 0; i < 500; ++i) data.rows.push_back(zanim_sample(30, truth, rng));

    McmcConfig cfg;
    cfg.iterations = 110000;
    cfg.burn_in = 10000;
    cfg.thin = 100;
    cfg.seed = 16;
    cfg.stream = 501;
    cfg.compute_loglik = false;
    const auto rows = posterior_summary(fit_zanim(data, PriorSpec::defaults(3), cfg));

    const double theta_ref[] = {0.047, 0.706, 0.246};
    const double zeta_ref[] = {0.025, 0.140, 0.122};
    double worst_theta = 0.0, worst_zeta = 0.0;
    bool cover = true;
    for (int j = 0; j < 3; ++j) {
        worst_theta = std::max(worst_theta,
                               std::abs(rows[static_cast<std::size_t>(j)].mean - theta_ref[j]));
        const auto& z = rows[static_cast<std::size_t>(3 + j)];
        worst_zeta = std::max(worst_zeta, std::abs(z.mean - zeta_ref[j]));
        cover = cover && z.lower_95 <= truth.zeta[static_cast<std::size_t>(j)] &&
                truth.zeta[static_cast<std::size_t>(j)] <= z.upper_95;
    }
    const double sec = seconds_since(start);
    detail = fmt("worst |theta mean - reference| = %.4f (tol 0.02), worst zeta = %.4f "
                 "(tol 0.03), true zeta in all CIs: %s, %.0f s (limit 120 s)",
                 worst_theta, worst_zeta, cover ? "yes" : "NO", sec);
    return worst_theta <= 0.02 && worst_zeta <= 0.03 && cover && sec < 120.0;
}

// ---------------------------------------------------------------------------
// 7. Dirichlet-family recovery in the balanced case
// ---------------------------------------------------------------------------

bool check_zanidm_recovery(std::string& detail) {
    const auto start = Clock::now();
    ZanidmParams truth;
    truth.alpha = {1.0, 1.0, 1.0};
    truth.zeta = {0.05, 0.15, 0.10};
    Rng rng(16, 402); // pinned data stream
    CountDataset data;
    for (int i = 0; i < 500; ++i) data.rows.push_back(zanidm_sample(30, truth, rng));

    McmcConfig cfg;
    cfg.iterations = 110000;
    cfg.burn_in = 10000;
    cfg.thin = 100;
    cfg.seed = 16;
    cfg.stream = 403;
    cfg.alpha_sampler = AlphaSamplerKind::da_ptn;
    cfg.compute_loglik = false;
    const auto rows = posterior_summary(fit_zanidm(data, PriorSpec::defaults(3), cfg));

    const double zeta_ref[] = {0.038, 0.182, 0.119};
    bool alpha_window = true, cover = true;
    double worst_zeta = 0.0;
    for (int j = 0; j < 3; ++j) {
        const auto& a = rows[static_cast<std::size_t>(j)];
        alpha_window = alpha_window && a.mean >= 0.7 && a.mean <= 1.3;
        cover = cover && a.lower_95 <= 1.0 && 1.0 <= a.upper_95;
        const auto& z = rows[static_cast<std::size_t>(3 + j)];
        worst_zeta = std::max(worst_zeta, std::abs(z.mean - zeta_ref[j]));
        cover = cover && z.lower_95 <= truth.zeta[static_cast<std::size_t>(j)] &&
                truth.zeta[static_cast<std::size_t>(j)] <= z.upper_95;
    }
    const double sec = seconds_since(start);
    detail = fmt("alpha means in [0.7, 1.3]: %s, all truths in CIs: %s, worst zeta "
                 "|mean - reference| = %.4f (tol 0.05), 110k iterations in %.0f s "
                 "(limit 900 s)",
                 alpha_window ? "yes" : "NO", cover ? "yes" : "NO", worst_zeta, sec);
    return alpha_window && cover && worst_zeta <= 0.05 && sec < 900.0;
}

// ---------------------------------------------------------------------------
// 8. Cross-fit predictive ranking and band coverage
// ---------------------------------------------------------------------------

bool check_elpd_ordering(std::string& detail) {
    StudyOptions opt;
    opt.output_dir = scratch_dir("dgp_recovery").string();
    opt.seed = 16;
    const StudyResult result = run_dgp_recovery(opt);
    if (result.failed() != 0 || result.fits.size() != 8) {
        detail = fmt("%d of %d cells failed", result.failed(), result.attempted());
        return false;
    }
    const auto elpd = [&](const std::string& dgp, Model model) {
        for (const auto& rec : result.fits)
            if (rec.dgp == dgp && rec.model == model) return rec.elpd;
        return -kInf;
    };
    // DGP 1: fits ranked matching model > other inflated model > dm > multinomial.
    const double m_m = elpd("zanim", Model::zanim), m_d = elpd("zanim", Model::zanidm);
    const double m_dm = elpd("zanim", Model::dm), m_mu = elpd("zanim", Model::multinomial);
    const bool order1 = m_m > m_d && m_d > m_dm && m_dm > m_mu;
    // DGP 2: the matching Dirichlet-family fit beats the multinomial-family one.
    const double d_d = elpd("zanidm", Model::zanidm), d_m = elpd("zanidm", Model::zanim);
    const bool order2 = d_d > d_m;

    // Band coverage of the observed frequencies for the matching-model refits.
    double worst_cover = 1.0;
    for (const auto& band : result.bands) {
        int nonzero = 0, inside = 0;
        for (std::size_t i = 0; i < band.bands.size(); ++i) {
            if (band.observed[i] <= 0.0) continue;
            ++nonzero;
            if (band.bands[i].lower <= band.observed[i] &&
                band.observed[i] <= band.bands[i].upper)
                ++inside;
        }
        if (nonzero > 0)
            worst_cover = std::min(worst_cover,
                                   static_cast<double>(inside) / nonzero);
    }

    detail = fmt("first ranking %.1f > %.1f > %.1f > %.1f: %s; second %.1f > %.1f: %s; "
                 "band coverage >= 0.90: %.3f",
                 m_m, m_d, m_dm, m_mu, order1 ? "yes" : "NO", d_d, d_m,
                 order2 ? "yes" : "NO", worst_cover);
    return order1 && order2 && result.bands.size() == 2 && worst_cover >= 0.90;
}

// ---------------------------------------------------------------------------
// 9. Concentration updates against high-precision quadrature
// ---------------------------------------------------------------------------

bool check_alpha_samplers(std::string& detail) {
    // Shared synthetic statistics: fifty active cells with rates 0.5 + i/50.
    const long long t = 50;
    double S = 0.0;
    for (int i = 1; i <= 50; ++i) S += std::log(0.5 + i / 50.0);

    // 40-digit adaptive quadrature of each update's stationary target.
    // Gamma prior matched to log-moments (0, 5):
    //   density ∝ a^{shape-1} e^{-rate·a} Γ(a)^{-t} e^{S a}.
    const double gamma_mean = 1.4263925706714766604;
    const double gamma_var = 0.019939435631080423719;
    // Normal(0, 5) prior on log alpha: same likelihood factor.
    const double logn_mean = 1.4212012726369651501;
    const double logn_var = 0.0199130525077063086;

    const GammaPrior gprior = match_gamma_to_log_moments(0.0, 5.0);
    const LogNormalPrior lprior{0.0, 5.0};
    double worst = 0.0;
    const auto rel = [](double got, double want) { return std::abs(got / want - 1.0); };

    {
        Rng rng(2024);
        double alpha = 1.0;
        for (int k = 0; k < 2000; ++k) alpha = update_alpha_da_ptn(t, S, gprior, alpha, rng).value;
        RunningMoments acc;
        for (int k = 0; k < 400000; ++k) {
            alpha = update_alpha_da_ptn(t, S, gprior, alpha, rng).value;
            acc.add(alpha);
        }
        worst = std::max({worst, rel(acc.mean(), gamma_mean), rel(acc.variance(), gamma_var)});
    }
    {
        Rng rng(77);
        double beta = 0.0;
        for (int k = 0; k < 5000; ++k) beta = update_alpha_mh_rw(t, S, lprior, beta, 0.5, rng).value;
        RunningMoments acc;
        for (int k = 0; k < 600000; ++k) {
            beta = update_alpha_mh_rw(t, S, lprior, beta, 0.5, rng).value;
            acc.add(std::exp(beta));
        }
        worst = std::max({worst, rel(acc.mean(), logn_mean), rel(acc.variance(), logn_var)});
    }
    {
        Rng rng(99);
        double beta = 0.0;
        for (int k = 0; k < 2000; ++k) beta = update_alpha_slice(t, S, lprior, beta, 1.0, 50, rng);
        RunningMoments acc;
        for (int k = 0; k < 200000; ++k) {
            beta = update_alpha_slice(t, S, lprior, beta, 1.0, 50, rng);
            acc.add(std::exp(beta));
        }
        worst = std::max({worst, rel(acc.mean(), logn_mean), rel(acc.variance(), logn_var)});
    }

    // Proposal-family check: mean and variance of x^{p-1} e^{-a x^2 + b x}
    // on (0, ∞), frozen from the same quadrature, matched within 1%.
    struct PtnCase { double p, a, b, mean, var; };
    const PtnCase grid[] = {
        {0.5, 2.0, -1.0, 0.18297866061542193129, 0.045774144605530756158},
        {0.5, 10.0, 5.0, 0.21616417969229814787, 0.032314092341030373974},
        {0.5, 0.7, 3.0, 1.9205373620092137469, 0.78411630257500543761},
        {1.0, 2.0, -1.0, 0.32053888518403224044, 0.067120101788969736545},
        {1.0, 10.0, 5.0, 0.30499577790711825583, 0.0332265199356113596},
        {1.0, 0.7, 3.0, 2.1564824063537119742, 0.68490307327342952464},
        {3.0, 2.0, -1.0, 0.69350913744593107631, 0.095667791917517909931},
        {3.0, 10.0, 5.0, 0.49158283395645723064, 0.031242025848452507582},
        {3.0, 0.7, 3.0, 2.7202713324508859653, 0.57213387595492279913},
        {8.0, 2.0, -1.0, 1.2555513821898106928, 0.10970288113380324752},
        {8.0, 10.0, 5.0, 0.74660599009973360317, 0.029230993072129889716},
        {8.0, 0.7, 3.0, 3.5937485954062405638, 0.50014659460047427202},
    };
    double worst_ptn = 0.0;
    int idx = 0;
    for (const PtnCase& c : grid) {
        Rng rng(7000 + idx++);
        RunningMoments acc;
        for (int k = 0; k < 4000000; ++k) acc.add(sample_ptn(c.p, c.a, c.b, rng));
        worst_ptn = std::max({worst_ptn, rel(acc.mean(), c.mean), rel(acc.variance(), c.var)});
    }

    detail = fmt("worst update-kernel rel error = %.4f over 3 schemes x (mean, var) "
                 "(tol 0.02); worst proposal-family rel error = %.4f over 12 "
                 "configurations (tol 0.01)",
                 worst, worst_ptn);
    return worst < 0.02 && worst_ptn < 0.01;
}

// ---------------------------------------------------------------------------
// 10. Replicated sampler-comparison study at desk scale
// ---------------------------------------------------------------------------

bool check_sampler_study(std::string& detail) {
    StudyOptions opt;
    opt.output_dir = scratch_dir("sampler_comparison").string();
    opt.seed = 16;
    const StudyResult result = run_sampler_comparison(opt);
    if (result.failed() != 0) {
        detail = fmt("%d of %d fit cells failed", result.failed(), result.attempted());
        return false;
    }
    bool ok = true;
    double min_essr = kInf, worst_bias = 0.0;
    std::string per_method;
    for (const auto& m : result.sampler) {
        if (m.n != 200) continue;
        ok = ok && m.replicates_used == 10;
        min_essr = std::min(min_essr, m.zeta.overall_ess_ratio);
        worst_bias = std::max({worst_bias, std::abs(m.alpha.overall_bias),
                               std::abs(m.zeta.overall_bias)});
        per_method += fmt("%s%s essr %.2f bias %.3f/%.3f", per_method.empty() ? "" : ", ",
                          alpha_sampler_name(m.method), m.zeta.overall_ess_ratio,
                          m.alpha.overall_bias, m.zeta.overall_bias);
    }
    detail = fmt("n=200: %s; min zeta ESS ratio %.2f (floor 0.3), worst |bias| %.3f "
                 "(cap 0.15), 60/60 fits",
                 per_method.c_str(), min_essr, worst_bias);
    return ok && min_essr > 0.3 && worst_bias < 0.15;
}

// ---------------------------------------------------------------------------
// 11. Byte-identical command reruns
// ---------------------------------------------------------------------------

bool check_determinism(std::string& detail) {
    const char* cli_env = std::getenv("ZANI_CLI");
    if (!cli_env || !*cli_env) {
        detail = "ZANI_CLI is not set; cannot locate the command-line binary";
        return false;
    }
    const std::string cli(cli_env);
    const fs::path dir = scratch_dir("determinism");
    {
        std::ofstream params(dir / "params.json");
        params << R"({"theta": [0.05, 0.70, 0.25], "zeta": [0.05, 0.15, 0.10]})" << "\n";
    }

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate --model zanim --params params.json --n 60 --trials 30 --seed 16 --out sim",
         "sim_stdout.txt"},
        {"fit --model zanim --data sim/counts.csv --out fit --iterations 2000 "
         "--burn-in 500 --thin 5 --seed 16",
         "fit_stdout.txt"},
        {"eval marginal --model zanim --params params.json --trials 12 --category 2",
         "eval_stdout.txt"},
        {"study dgp-recovery --seed 16 --out study", "study_stdout.txt"},
    };
    const std::vector<fs::path> files = {
        dir / "sim" / "counts.csv",        dir / "sim" / "counts.meta.json",
        dir / "fit" / "draws.csv",         dir / "fit" / "summary.json",
        dir / "fit" / "loglik.csv",        dir / "eval_stdout.txt",
        dir / "study_stdout.txt",
        dir / "study" / "recovery_data_zanim.csv",
        dir / "study" / "recovery_data_zanidm.csv",
        dir / "study" / "recovery_summary.csv",
        dir / "study" / "recovery_elpd.csv",
        dir / "study" / "recovery_bands_zanim.csv",
        dir / "study" / "recovery_bands_zanidm.csv",
        dir / "study" / "recovery_cells.csv",
    };

    for (const auto& [cmd, out] : commands)
        if (run_cli(cli, dir, cmd, out) != 0) {
            detail = "command failed on first run: " + cmd;
            return false;
        }
    std::vector<std::string> first;
    first.reserve(files.size());
    for (const auto& path : files) first.push_back(read_file(path));

    for (const auto& [cmd, out] : commands)
        if (run_cli(cli, dir, cmd, out) != 0) {
            detail = "command failed on rerun: " + cmd;
            return false;
        }
    int identical = 0;
    for (std::size_t i = 0; i < files.size(); ++i)
        if (read_file(files[i]) == first[i] && !first[i].empty()) ++identical;

    detail = fmt("%d of %zu output files byte-identical across reruns of 4 commands "
                 "(simulate, fit, eval, study)",
                 identical, files.size());
    return identical == static_cast<int>(files.size());
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*run)(std::string&);
    };
    const Criterion criteria[] = {
        {"joint PMF normalizes over its support", check_normalization},
        {"joint PMF matches the long-double reference", check_oracle_equivalence},
        {"moment report reproduces the reference moment tables", check_moment_tables},
        {"marginals match joint sums and tail limits", check_marginals},
        {"exact samplers match the PMF in total variation", check_sampler_tv},
        {"multinomial-family fit recovers the reference posterior", check_zanim_recovery},
        {"dirichlet-family fit recovers the balanced case", check_zanidm_recovery},
        {"predictive ranking and band coverage", check_elpd_ordering},
        {"concentration updates match quadrature", check_alpha_samplers},
        {"desk-scale sampler study meets its floors", check_sampler_study},
        {"command reruns are byte-identical", check_determinism},
    };

    int failures = 0;
    int index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        std::string det;
        bool ok = false;
        try {
            ok = c.run(det);
        } catch (const std::exception& e) {
            det = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %2d. %s: %s\n", ok ? "PASS" : "FAIL", index, c.name, det.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures == 0)
        std::printf("all 11 acceptance checks passed\n");
    else
        std::printf("%d of 11 acceptance checks FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
