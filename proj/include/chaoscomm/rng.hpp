#pragma once

#include <cmath>
#include <cstdint>

namespace chaoscomm {

/// Counter-based deterministic random generator (splitmix64 core).
///
/// The standard library distributions are implementation-defined, so noise
/// sequences produced through them would differ between toolchains.  This
/// generator produces bit-identical streams for a given seed on any IEEE-754
/// platform, which the reproducibility contract of the experiment harness
/// relies on.  Copies are cheap values; disjoint seeds give disjoint streams.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * ++counter_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in (0, 1].
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

    /// Standard normal via Box-Muller; pairs are cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace chaoscomm
