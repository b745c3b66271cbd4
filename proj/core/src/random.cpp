#include "rbce/random.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>

namespace rbce {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr double kTailSwitch = 6.0;

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t id : stream) {
        h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    }
    return h;
}

double Rng::uniform() {
    // 53 random bits mapped to the open interval (0, 1).
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

double Rng::log_gamma_variate(double shape) {
    if (shape >= 1.0) {
        std::gamma_distribution<double> g(shape, 1.0);
        return std::log(g(engine_));
    }
    // G(a) = G(a + 1) * U^(1/a)
    std::gamma_distribution<double> g(shape + 1.0, 1.0);
    return std::log(g(engine_)) + std::log(uniform()) / shape;
}

double Rng::gamma(double shape, double rate) {
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    return g(engine_);
}

double Rng::beta(double a, double b) {
    const double la = log_gamma_variate(a);
    const double lb = log_gamma_variate(b);
    const double m = std::max(la, lb);
    const double lse = m + std::log(std::exp(la - m) + std::exp(lb - m));
    double x = std::exp(la - lse);
    // keep strictly inside (0, 1)
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    if (x < lo) x = lo;
    if (x > hi) x = hi;
    return x;
}

double standard_normal_above(Rng& rng, double lower) {
    if (lower > kTailSwitch) {
        // Robert (1995) translated-exponential proposal with the optimal rate.
        const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
        for (;;) {
            const double x = lower - std::log(rng.uniform()) / rate;
            const double d = x - rate;
            if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
        }
    }
    if (lower < -kTailSwitch) {
        for (;;) {
            const double x = rng.normal();
            if (x > lower) return x;
        }
    }
    // Upper-tail mass Q = Phi(-lower); draw v ~ U(0, Q) and invert the upper tail.
    const double tail = 0.5 * std::erfc(lower / std::sqrt(2.0));
    const double v = rng.uniform() * tail;
    const double x = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * v);
    return x > lower ? x : std::nextafter(lower, std::numeric_limits<double>::infinity());
}

double truncated_normal_unit(Rng& rng, double mean, bool positive) {
    if (positive) {
        const double x = mean + standard_normal_above(rng, -mean);
        return x > 0.0 ? x : std::numeric_limits<double>::denorm_min();
    }
    const double x = mean - standard_normal_above(rng, mean);
    return x <= 0.0 ? x : 0.0;
}

}  // namespace rbce
