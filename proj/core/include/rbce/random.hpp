#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rbce {

/// Derives a 64-bit stream seed from a master seed and a list of stream ids.
/// Chains for different (replicate, prior) cells get statistically independent
/// streams while remaining reproducible from the master seed alone.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream);

/// Random source owned by one chain. Not thread-safe; give each thread its own.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();            // (0, 1), never 0 or 1
    double normal();             // N(0, 1)
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double gamma(double shape, double rate);
    /// log of a Gamma(shape, 1) draw, accurate for shapes far below 1.
    double log_gamma_variate(double shape);
    double beta(double a, double b);
    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Standard normal restricted to (lower, +inf).
/// Inverse-CDF when |lower| <= 6, exponential rejection deep in the upper
/// tail and plain rejection when the restriction is negligible.
double standard_normal_above(Rng& rng, double lower);

/// Draw from N(mean, 1) truncated to (0, +inf) when `positive`, else (-inf, 0].
double truncated_normal_unit(Rng& rng, double mean, bool positive);

}  // namespace rbce
