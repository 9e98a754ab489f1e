#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace zani {

// Reproducible random number generation.
//
// Generator: xoshiro256++ whose 256-bit state is expanded from a 64-bit seed
// with splitmix64.  Independent streams are derived from the same root seed by
// starting the splitmix64 expansion at
//     seed + stream_id * 0x9e3779b97f4a7c15   (the splitmix64 golden gamma),
// so stream 0 is the base generator and streams never share state.  One stream
// is used per chain / replicate / simulated dataset.  All variates (normal,
// gamma, beta, binomial, multinomial) are produced by the samplers below, not
// by std::<random> distributions, so a seed gives the same draw sequence on
// every platform.  The string kRngAlgorithmId names this scheme in output
// metadata.
inline constexpr const char* kRngAlgorithmId = "xoshiro256++(splitmix64-streams)";

std::uint64_t splitmix64_next(std::uint64_t& state);

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double uniform();
    // Uniform on (0, 1); never returns 0 so log(uniform_pos()) is finite.
    double uniform_pos();
    // Standard normal via Box-Muller (cosine branch only, one value per pair
    // of uniforms; nothing is cached so the draw sequence is stateless).
    double normal();
    // Exponential with rate 1.
    double exponential();

    // Gamma(shape, rate) via Marsaglia-Tsang; shapes below 1 use the boost
    // x = Gamma(shape + 1) * U^(1/shape).
    double gamma(double shape, double rate = 1.0);
    // log of a Gamma(shape, 1) draw, exact even when the linear value would
    // underflow (small shapes); consumes the same variates as gamma(shape).
    double log_gamma_draw(double shape);
    // Beta(a, b) as G1 / (G1 + G2) computed from log-domain gamma draws, so
    // tiny shapes cannot produce 0/0.
    double beta(double a, double b);
    // log of a Beta(a, b) draw, exact near 0.
    double log_beta_draw(double a, double b);

    bool bernoulli(double p);
    // Counting implementation: n independent uniforms.  All uses here have
    // small n (number of trials per observation), so O(n) is fine and keeps
    // the draw sequence trivially reproducible.
    int binomial(int n, double p);
    // Conditional-binomial multinomial; prob need not be normalised.
    void multinomial(int n, std::span<const double> prob, std::span<int> out);

private:
    std::uint64_t s_[4];
    double gamma_mt(double shape); // shape >= 1, rate 1
};

} // namespace zani
