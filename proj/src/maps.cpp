#include "chaoscomm/maps.hpp"

#include <cmath>
#include <string>

namespace chaoscomm {

namespace {
constexpr double kTwoPi = 6.2831853071795864769252867665590;

// Fractional part of tau/T with a snap to zero at integer multiples, so the
// factor formulas are exact there and well conditioned for large tau.
double period_fraction(double tau, const OscParams& params) {
    const double ratio = tau * params.freq;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) < 1e-9)
        return 0.0;
    return ratio - std::floor(ratio);
}
} // namespace

ShiftStep shift_map(double u, int k) {
    if (k < 1)
        throw DomainError("shift_map requires k >= 1");
    if (!(u >= 0.0) || u >= 1.0)
        throw DomainError("shift_map argument outside [0, 1)");
    const double scaled = std::ldexp(u, k);
    const int b = static_cast<int>(std::floor(scaled));
    return {scaled - static_cast<double>(b), b};
}

double direct_path_map(double r, int s, const OscParams& params) {
    return params.growth() * (r - (1.0 - params.q()) * static_cast<double>(s));
}

double k_factor(double tau, const OscParams& params) {
    if (tau < 0.0)
        throw DomainError("tap delay must be nonnegative");
    const double frac = period_fraction(tau, params);
    if (frac == 0.0)
        return 1.0;
    const double phase = kTwoPi * frac;
    const double envelope = std::exp(params.beta_base * (1.0 - frac));
    return envelope * (std::cos(phase) + params.beta / params.omega * std::sin(phase));
}

long shifted_index(long n, double tau, const OscParams& params) {
    const double ratio = tau * params.freq;
    const double nearest = std::round(ratio);
    const long ceil_ratio = std::abs(ratio - nearest) < 1e-9
                                ? static_cast<long>(nearest)
                                : static_cast<long>(std::ceil(ratio));
    return n - ceil_ratio;
}

double multipath_map(double r, const TapSet& taps, const std::vector<TapSymbols>& symbols,
                     const OscParams& params) {
    if (symbols.size() != taps.count())
        throw DomainError("one symbol pair required per tap");
    const double g = params.growth();
    double acc = g * r;
    for (std::size_t l = 0; l < taps.count(); ++l) {
        const double kl = k_factor(taps.taps[l].tau, params);
        acc -= taps.taps[l].alpha *
               ((g - kl) * symbols[l].s_shifted + (kl - 1.0) * symbols[l].s_shifted_next);
    }
    return acc;
}

std::vector<TapSymbols> multipath_symbols(const SymbolStream& stream, long n, const TapSet& taps,
                                          const OscParams& params) {
    std::vector<TapSymbols> out;
    out.reserve(taps.count());
    for (const Tap& tap : taps.taps) {
        const long np = shifted_index(n, tap.tau, params);
        if (!stream.covers(np))
            throw InsufficientSymbols("tap with delay " + std::to_string(tap.tau) +
                                      " needs a symbol before the stream start");
        out.push_back({stream.sign(np), stream.sign(np + 1)});
    }
    return out;
}

ComposedStep composed_map(double O, double u1, int b1, int b2, double gain1, double gain2,
                          int f2) {
    if (!(gain1 > 0.0 && gain1 < 1.0 && gain2 > 0.0 && gain2 < 1.0))
        throw DomainError("superposition gains must lie in (0, 1)");
    if (f2 != 1 && f2 != 2)
        throw DomainError("composed_map supports second-user multipliers 1 and 2");
    const double pow2 = f2 == 1 ? 2.0 : 4.0;
    const double O_next =
        pow2 * O - (pow2 - 2.0) * gain1 * u1 - gain1 * static_cast<double>(b1) -
        gain2 * static_cast<double>(b2);
    return {O_next, 2.0 * u1 - static_cast<double>(b1)};
}

double interference_map(double r, int s, double c, double alpha0, const OscParams& params) {
    const double g = params.growth();
    return g * r - (g - 1.0) * (c + alpha0 * static_cast<double>(s));
}

double baker_inverse(double z, int b, int k) {
    if (k < 1)
        throw DomainError("baker_inverse requires k >= 1");
    if (!(z >= 0.0) || z > 1.0)
        throw DomainError("baker_inverse argument outside [0, 1]");
    if (b < 0 || b >= (1 << k))
        throw DomainError("branch symbol outside {0, ..., 2^k - 1}");
    return std::ldexp(z + static_cast<double>(b), -k);
}

BakerStep unfolded_baker_step(double u, double z, int k) {
    const ShiftStep fwd = shift_map(u, k);
    return {fwd.u_next, baker_inverse(z, fwd.symbol, k), fwd.symbol};
}

} // namespace chaoscomm
