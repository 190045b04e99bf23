#pragma once

#include <cstdint>
#include <vector>

#include "chaoscomm/errors.hpp"

namespace chaoscomm {

/// Superposition gains for N users on the frequency ladder f^(i) = i.
/// Branch lengths follow zeta(f^(i)) = 2^{f^(i)} zeta(i-1); the normalised
/// gains sum to one, which keeps the composed signal inside [0,1] and the
/// return-map branches disjoint.
struct GainPlan {
    std::vector<double> zeta;
    std::vector<double> gains;
    int n_users = 0;
};

/// Builds the gain plan.  Only the ladder freq_multipliers = (1, 2, ..., N)
/// is supported; other ladders are rejected (Unsupported) rather than
/// guessed, since the branch-length recursion is stated for this family.
GainPlan plan_gains(int n_users, const std::vector<int>& freq_multipliers, double zeta1);

/// Packs k consecutive bits MSB-first into one integer per base period, so
/// that for k = 2 the pair (b_{2n}, b_{2n+1}) becomes 2*b_{2n} + b_{2n+1}.
/// Bit count must be divisible by k.
std::vector<int> bits_to_symbols(const std::vector<std::uint8_t>& bits, int k);

/// Exact inverse of bits_to_symbols.
std::vector<std::uint8_t> symbols_to_bits(const std::vector<int>& symbols, int k);

/// The 2^N residual offset bands of the two-user composed map: band j covers
/// R in [2 g1 b1 + g2 b2, +g1) with j = b1 + 2 b2.  Returned sorted by lower
/// edge; consecutive gaps equal g1 for the planned gains.
struct OffsetBand {
    int b1;
    int b2;
    double lo;
    double hi;
};
std::vector<OffsetBand> offset_bands(double gain1, double gain2);

} // namespace chaoscomm
