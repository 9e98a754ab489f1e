#include "zani/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zani {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed + stream * 0x9e3779b97f4a7c15ULL;
    for (auto& w : s_) w = splitmix64_next(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
    for (;;) {
        double u = uniform();
        if (u > 0.0) return u;
    }
}

double Rng::normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() {
    return -std::log(uniform_pos());
}

double Rng::gamma_mt(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = uniform_pos();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape >= 1.0) return gamma_mt(shape) / rate;
    double g = gamma_mt(shape + 1.0);
    double u = uniform_pos();
    return g * std::pow(u, 1.0 / shape) / rate;
}

double Rng::log_gamma_draw(double shape) {
    if (!(shape > 0.0))
        throw std::invalid_argument("log_gamma_draw: shape must be positive");
    if (shape >= 1.0) return std::log(gamma_mt(shape));
    double g = gamma_mt(shape + 1.0);
    double u = uniform_pos();
    return std::log(g) + std::log(u) / shape;
}

double Rng::beta(double a, double b) {
    double lg1 = log_gamma_draw(a);
    double lg2 = log_gamma_draw(b);
    // G1/(G1+G2) = 1/(1+exp(lg2-lg1))
    return 1.0 / (1.0 + std::exp(lg2 - lg1));
}

double Rng::log_beta_draw(double a, double b) {
    double lg1 = log_gamma_draw(a);
    double lg2 = log_gamma_draw(b);
    return -std::log1p(std::exp(lg2 - lg1));
}

bool Rng::bernoulli(double p) {
    return uniform() < p;
}

int Rng::binomial(int n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    int c = 0;
    for (int i = 0; i < n; ++i) c += (uniform() < p) ? 1 : 0;
    return c;
}

void Rng::multinomial(int n, std::span<const double> prob, std::span<int> out) {
    if (prob.size() != out.size())
        throw std::invalid_argument("multinomial: prob/out size mismatch");
    double total = 0.0;
    for (double p : prob) {
        if (!(p >= 0.0)) throw std::invalid_argument("multinomial: negative probability");
        total += p;
    }
    if (!(total > 0.0)) throw std::invalid_argument("multinomial: all probabilities zero");
    int left = n;
    double rest = total;
    const std::size_t d = prob.size();
    for (std::size_t j = 0; j + 1 < d; ++j) {
        if (left == 0) { out[j] = 0; rest -= prob[j]; continue; }
        double q = prob[j] / rest;
        if (q > 1.0) q = 1.0;
        int k = binomial(left, q);
        out[j] = k;
        left -= k;
        rest -= prob[j];
    }
    out[d - 1] = left;
}

} // namespace zani
