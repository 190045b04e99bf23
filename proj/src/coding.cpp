#include "chaoscomm/coding.hpp"

#include <algorithm>
#include <cmath>

namespace chaoscomm {

GainPlan plan_gains(int n_users, const std::vector<int>& freq_multipliers, double zeta1) {
    if (n_users < 1)
        throw DomainError("need at least one user");
    if (!(zeta1 > 0.0))
        throw DomainError("zeta(1) must be positive");
    if (static_cast<int>(freq_multipliers.size()) != n_users)
        throw DomainError("one frequency multiplier per user required");
    for (int i = 0; i < n_users; ++i)
        if (freq_multipliers[i] != i + 1)
            throw Unsupported("gain planning is defined for the ladder f^(i) = i only");

    GainPlan plan;
    plan.n_users = n_users;
    plan.zeta.resize(n_users);
    plan.zeta[0] = zeta1;
    for (int i = 1; i < n_users; ++i)
        plan.zeta[i] = std::ldexp(plan.zeta[i - 1], freq_multipliers[i]); // zeta(f^(i)) = 2^{f^(i)} zeta(i-1)

    double sum = 0.0;
    for (double z : plan.zeta)
        sum += z;
    plan.gains.resize(n_users);
    for (int i = 0; i < n_users; ++i)
        plan.gains[i] = plan.zeta[i] / sum;
    return plan;
}

std::vector<int> bits_to_symbols(const std::vector<std::uint8_t>& bits, int k) {
    if (k < 1)
        throw DomainError("bits per symbol must be >= 1");
    if (bits.size() % static_cast<std::size_t>(k) != 0)
        throw LengthError("bit count not divisible by the packing width");
    std::vector<int> out;
    out.reserve(bits.size() / static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < bits.size(); i += static_cast<std::size_t>(k)) {
        int v = 0;
        for (int j = 0; j < k; ++j) {
            const std::uint8_t b = bits[i + static_cast<std::size_t>(j)];
            if (b > 1)
                throw DomainError("bits must be 0 or 1");
            v = (v << 1) | b;
        }
        out.push_back(v);
    }
    return out;
}

std::vector<std::uint8_t> symbols_to_bits(const std::vector<int>& symbols, int k) {
    if (k < 1)
        throw DomainError("bits per symbol must be >= 1");
    std::vector<std::uint8_t> out;
    out.reserve(symbols.size() * static_cast<std::size_t>(k));
    for (int v : symbols) {
        if (v < 0 || v >= (1 << k))
            throw DomainError("symbol outside the packed alphabet");
        for (int j = k - 1; j >= 0; --j)
            out.push_back(static_cast<std::uint8_t>((v >> j) & 1));
    }
    return out;
}

std::vector<OffsetBand> offset_bands(double gain1, double gain2) {
    std::vector<OffsetBand> bands;
    for (int b2 = 0; b2 < 4; ++b2)
        for (int b1 = 0; b1 < 2; ++b1) {
            const double lo = 2.0 * gain1 * b1 + gain2 * b2;
            bands.push_back({b1, b2, lo, lo + gain1});
        }
    std::sort(bands.begin(), bands.end(),
              [](const OffsetBand& a, const OffsetBand& b) { return a.lo < b.lo; });
    return bands;
}

} // namespace chaoscomm
