#pragma once

// Brute-force reference implementations used only by tests. These transcribe
// the mixture definitions term by term — every one of the 2^d subsets is
// visited explicitly and each component PMF is evaluated from scratch in long
// double arithmetic — deliberately sharing no code with the library paths
// they check.

#include "zani/core.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using zani::CountVector;

// All count vectors with the given total, in lexicographic order, plus the
// zero vector appended at the end when total > 0.
inline std::vector<CountVector> enumerate_support(int d, int total) {
    std::vector<CountVector> out;
    CountVector cur(d, 0);
    // Recursive composition enumeration without recursion: walk positions.
    std::vector<int> rem(d + 1, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == d - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    rec(rec, 0, total);
    (void)rem;
    if (total > 0) out.push_back(CountVector(d, 0));
    return out;
}

// Mixture weight of the component whose switched-off set is the bit mask.
inline long double mask_weight(std::uint32_t mask, const std::vector<double>& zeta) {
    long double w = 1.0L;
    for (std::size_t j = 0; j < zeta.size(); ++j)
        w *= (mask >> j & 1u) ? static_cast<long double>(zeta[j])
                              : 1.0L - static_cast<long double>(zeta[j]);
    return w;
}

// Reduced multinomial PMF over the categories NOT in mask, with
// probabilities theta_j renormalized by the active mass.
inline long double multinomial_component(const CountVector& y, std::uint32_t mask,
                                         const std::vector<double>& theta, int N) {
    const int d = static_cast<int>(y.size());
    long double active_mass = 0.0L;
    long long active_total = 0;
    for (int j = 0; j < d; ++j) {
        if (mask >> j & 1u) {
            if (y[j] != 0) return 0.0L; // off category observed positive
        } else {
            active_mass += theta[j];
            active_total += y[j];
        }
    }
    if (active_total != N) return 0.0L; // y not in this component's support
    if (active_mass <= 0.0L) return 0.0L;
    long double lp = std::lgamma(N + 1.0L);
    for (int j = 0; j < d; ++j) {
        if (mask >> j & 1u) continue;
        lp -= std::lgamma(y[j] + 1.0L);
        if (y[j] > 0) {
            if (theta[j] <= 0.0) return 0.0L;
            lp += y[j] * std::log(static_cast<long double>(theta[j]) / active_mass);
        }
    }
    return std::exp(lp);
}

// Reduced Dirichlet-multinomial PMF over the categories NOT in mask.
inline long double dm_component(const CountVector& y, std::uint32_t mask,
                                const std::vector<double>& alpha, int N) {
    const int d = static_cast<int>(y.size());
    long double a_sum = 0.0L;
    long long active_total = 0;
    for (int j = 0; j < d; ++j) {
        if (mask >> j & 1u) {
            if (y[j] != 0) return 0.0L;
        } else {
            a_sum += alpha[j];
            active_total += y[j];
        }
    }
    if (active_total != N) return 0.0L; // y not in this component's support
    long double lp = std::lgamma(a_sum) + std::lgamma(N + 1.0L) - std::lgamma(N + a_sum);
    for (int j = 0; j < d; ++j) {
        if (mask >> j & 1u) continue;
        lp += std::lgamma(y[j] + static_cast<long double>(alpha[j])) -
              std::lgamma(static_cast<long double>(alpha[j])) - std::lgamma(y[j] + 1.0L);
    }
    return std::exp(lp);
}

// Point-mass components shared by both models: all off -> zero vector; one
// active category j -> N * e_j.
inline long double atom_component(const CountVector& y, std::uint32_t mask, int N) {
    const int d = static_cast<int>(y.size());
    int active = -1, off = 0;
    for (int j = 0; j < d; ++j) {
        if (mask >> j & 1u)
            ++off;
        else
            active = j;
    }
    if (off == d) {
        for (int v : y)
            if (v != 0) return 0.0L;
        return 1.0L;
    }
    // off == d-1: the single active category absorbs all N trials.
    for (int j = 0; j < d; ++j) {
        int want = (j == active) ? N : 0;
        if (y[j] != want) return 0.0L;
    }
    return 1.0L;
}

// Full 2^d-term mixture sum, linear long double arithmetic.
inline double zanim_log_pmf(const CountVector& y, const std::vector<double>& theta,
                            const std::vector<double>& zeta, int N) {
    const int d = static_cast<int>(y.size());
    long double total = 0.0L;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
        int off = __builtin_popcount(mask);
        long double comp;
        if (off >= d - 1)
            comp = atom_component(y, mask, N);
        else
            comp = multinomial_component(y, mask, theta, N);
        total += mask_weight(mask, zeta) * comp;
    }
    return static_cast<double>(std::log(total));
}

inline double zanidm_log_pmf(const CountVector& y, const std::vector<double>& alpha,
                             const std::vector<double>& zeta, int N) {
    const int d = static_cast<int>(y.size());
    long double total = 0.0L;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
        int off = __builtin_popcount(mask);
        long double comp;
        if (off >= d - 1)
            comp = atom_component(y, mask, N);
        else
            comp = dm_component(y, mask, alpha, N);
        total += mask_weight(mask, zeta) * comp;
    }
    return static_cast<double>(std::log(total));
}

// Marginal P(Y_j = k) by summing the brute-force joint over the support.
template <typename LogPmf>
double marginal_by_joint_sum(int j, int k, int d, int N, LogPmf log_pmf) {
    long double total = 0.0L;
    for (const auto& y : enumerate_support(d, N))
        if (y[j] == k) total += std::exp(static_cast<long double>(log_pmf(y)));
    return static_cast<double>(std::log(total));
}

// Exact mean vector and second-moment matrix by support enumeration.
template <typename LogPmf>
void moments_by_enumeration(int d, int N, LogPmf log_pmf, std::vector<double>& mean,
                            std::vector<std::vector<double>>& second) {
    std::vector<long double> m(d, 0.0L);
    std::vector<std::vector<long double>> s(d, std::vector<long double>(d, 0.0L));
    for (const auto& y : enumerate_support(d, N)) {
        long double p = std::exp(static_cast<long double>(log_pmf(y)));
        for (int a = 0; a < d; ++a) {
            m[a] += p * y[a];
            for (int b = 0; b < d; ++b) s[a][b] += p * y[a] * y[b];
        }
    }
    mean.assign(d, 0.0);
    second.assign(d, std::vector<double>(d, 0.0));
    for (int a = 0; a < d; ++a) {
        mean[a] = static_cast<double>(m[a]);
        for (int b = 0; b < d; ++b) second[a][b] = static_cast<double>(s[a][b]);
    }
}

// MGF by direct expectation over the support.
template <typename LogPmf>
double mgf_by_expectation(const std::vector<double>& t, int d, int N, LogPmf log_pmf) {
    long double total = 0.0L;
    for (const auto& y : enumerate_support(d, N)) {
        long double dot = 0.0L;
        for (int j = 0; j < d; ++j) dot += t[j] * y[j];
        total += std::exp(static_cast<long double>(log_pmf(y)) + dot);
    }
    return static_cast<double>(total);
}

} // namespace oracle
