#pragma once

#include <vector>

#include "chaoscomm/channel_types.hpp"
#include "chaoscomm/oscillator.hpp"

namespace chaoscomm {

struct ShiftStep {
    double u_next; ///< 2^k u mod 1
    int symbol;    ///< floor(2^k u), in {0, ..., 2^k - 1}
};

/// k-fold Bernoulli shift. u in [0,1), k >= 1.  At exact dyadic points the
/// half-open branch convention applies: u = 0.5, k = 1 gives symbol 1.
ShiftStep shift_map(double u, int k);

/// Single-path return map of the received signal,
/// r_{n+1} = e^{beta/f} [r_n - (1 - e^{-beta/f}) s_n].
double direct_path_map(double r, int s, const OscParams& params);

/// Delay correction factor of a propagation path,
/// K = e^{-beta (tau - ceil(tau/T) T)} [cos(2 pi tau/T) + (beta/omega) sin(2 pi tau/T)].
/// Evaluated through the fractional part of tau/T so that K = 1 exactly when
/// tau is an integer number of periods.
double k_factor(double tau, const OscParams& params);

/// Symbols entering one tap's contribution: the pair at the shifted index
/// n' = n - ceil(f tau_l) and at n' + 1.
struct TapSymbols {
    int s_shifted;
    int s_shifted_next;
};

/// Multipath return map,
/// r_{n+1} = e^{beta/f} r_n
///           - sum_l alpha_l [ (e^{beta/f} - K_l) s_{n'} + (K_l - 1) s_{n'+1} ].
/// One TapSymbols entry per tap, in tap order.
double multipath_map(double r, const TapSet& taps, const std::vector<TapSymbols>& symbols,
                     const OscParams& params);

/// Shifted period index n' = n - ceil(f tau) for a tap delay.
long shifted_index(long n, double tau, const OscParams& params);

/// Collects the per-tap symbol pairs for step n from a transmitted stream.
/// Throws InsufficientSymbols if a tap needs a symbol before the stream
/// start (prepend the dummy-symbol bootstrap in that case).
std::vector<TapSymbols> multipath_symbols(const SymbolStream& stream, long n,
                                          const TapSet& taps, const OscParams& params);

struct ComposedStep {
    double O_next;
    double u1_next;
};

/// One step of the two-user composed received map,
///   O_{n+1}  = 2^{f2} O_n - (2^{f2} - 2) g1 u1 - g1 b1 - g2 b2,
///   u1_{n+1} = 2 u1 - b1,
/// valid for user frequencies (f, f2*f) with f2 in {1, 2}.  For f2 = 1 the
/// u1 coupling vanishes and the map degenerates to O' = 2O - g1 b1 - g2 b2.
ComposedStep composed_map(double O, double u1, int b1, int b2, double gain1, double gain2,
                          int f2);

/// Direct-path map with an additive periodic interferer sampled at the
/// symbol rate (f_p = f, so the contribution c = A sin(phi0) is constant):
/// r_{n+1} = e^{beta/f} r_n - (e^{beta/f} - 1)(c + alpha0 s).
/// The interferer shifts every branch down by (e^{beta/f}-1) c and leaves
/// the slope, hence the Lyapunov exponent, unchanged.
double interference_map(double r, int s, double c, double alpha0, const OscParams& params);

/// Contracting inverse of the k-fold shift, z_{n+1} = 2^{-k} (z_n + b).
/// For z in [0,1) the branch is recoverable: floor(2^k z_{n+1}) = b.
double baker_inverse(double z, int b, int k);

struct BakerStep {
    double u_next;
    double z_next;
    int symbol;
};

/// One step of the unfolded Baker map for branch number 2^k: the forward
/// shift paired with its inverse coordinate driven by the emitted symbol.
BakerStep unfolded_baker_step(double u, double z, int k);

} // namespace chaoscomm
