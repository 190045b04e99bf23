#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "chaoscomm/coding.hpp"
#include "chaoscomm/oscillator.hpp"

namespace chaoscomm {

/// The 7-line partition separating the 8 branches of the two-user composed
/// return map: T_j = [3 g1 + (j-1) g2] / 2, j = 1..7.  Each threshold sits
/// at the midpoint of the gap between adjacent residual offset bands.
struct PartitionSpec {
    std::array<double, 7> thresholds{};
    double gain1 = 0.0;
    double gain2 = 0.0;
    double slope = 4.0;

    static PartitionSpec from_gains(double gain1, double gain2);
    static PartitionSpec from_plan(const GainPlan& plan);
};

struct ThresholdDecision {
    int branch; ///< j in {0..7}: count of thresholds below the residual
    int b1;     ///< j mod 2
    int b2;     ///< floor(j / 2)
};

/// Decodes one step from consecutive composed samples.  The residual
/// R = 4 O_n - O_{n+1} falls into band j = b1 + 2 b2; out-of-band residuals
/// saturate at j = 0 or 7 (flagged downstream by the error mask).
ThresholdDecision threshold_decode(double O_n, double O_next, const PartitionSpec& spec);

struct InverseStep {
    double z_next;
    int decoded; ///< floor(2^k z_next); echoes the supplied estimate
};

/// Inverse-dynamics decoding step of user k: z' = 2^{-k}(z + b_est).  The
/// decoded value always echoes b_est for z in [0,1) (a wrong estimate is not
/// corrected); the z orbit is the contracting coordinate of the unfolded
/// Baker map and is what the matched filter reconstructs.
InverseStep inverse_map_decode(double z, int b_est, int k);

/// Whole-stream two-user decode with per-user error masks against the
/// transmitted symbols.
struct DecodeResult {
    std::vector<int> branch;
    std::vector<int> b1;
    std::vector<int> b2;
    std::vector<std::uint8_t> err1;
    std::vector<std::uint8_t> err2;
};
DecodeResult decode_stream(const std::vector<double>& O, const PartitionSpec& spec,
                           const std::vector<int>& sent_b1, const std::vector<int>& sent_b2);

struct FilterPeriodSymbol {
    long n; ///< period index on the filter clock
    int S;
};

struct FilterRun {
    std::vector<double> t;    ///< dense grid, starting one period into the input
    std::vector<double> eta;  ///< symbol estimate driving the filter
    std::vector<double> y;    ///< filter state (time-reversed oscillator)
    std::vector<double> ydot;
    std::vector<int> S;       ///< discrete state of the filter, per grid point
    std::vector<FilterPeriodSymbol> symbols; ///< per-period S, post warm-up
    long first_period = 0;    ///< period index of symbols.front()
};

/// Runs the matched filter on a dense received signal sampled at step dt:
///
///   eta'(t) = x~(t) - x~(t - T)          (one-period-shifted form)
///   y''(t)  = -2 beta y' - (omega^2 + beta^2)(y - eta)
///
/// with y(0) = y'(0) = 0 and eta anchored to eta_init_sign, the symbol
/// active over the first signal period (the agreed preamble; eta is a pure
/// integral of the input, so its anchor is never forgotten).  S switches to
/// sign(y) at every velocity zero of y; the generator's |y| < 1 strip is not
/// applied because the driven filter overshoots it at exactly the
/// symbol-bearing extrema.  Per-period symbols are reported after discarding
/// warmup_periods.  The filter is stable (exponents -beta), so y forgets its
/// initialisation at rate e^{-beta t}.
///
/// dt must divide the period exactly (the delayed lookup is a fixed offset
/// of T/dt samples) and the signal must cover warmup + at least two periods.
FilterRun matched_filter_run(const std::vector<double>& received, const OscParams& params,
                             double dt, int warmup_periods, int eta_init_sign);

/// Per-period match rate of S(t + T) against the transmitted s(t):
/// compares filter symbol at period n+1 with sent symbol at period n over
/// all overlapping post-warm-up periods.
double filter_match_rate(const FilterRun& run, const SymbolStream& sent);

/// Integrates the filter equation with eta forced exactly to s(t) (the
/// reverse-time approximation of the generator/filter pair) and returns the
/// period-sampled pairs (z_n, z_{n+1}), z = (y+1)/2.  These land on the
/// branches z' = (z + b)/2 of the inverse map.
std::vector<std::pair<double, double>> reverse_time_map_check(const OscParams& params,
                                                              const SymbolStream& symbols,
                                                              int periods,
                                                              int steps_per_period = 2000);

struct BootstrapResult {
    std::vector<int> symbols;            ///< decoded s_n, entry 0 = the dummy
    std::vector<std::uint8_t> ambiguous; ///< residual margin below tolerance
};

/// Sequential decoder for a dispersive single-tap channel (K0 != 1).  The
/// residual between consecutive received samples mixes two adjacent symbols,
///   e^{beta/f} r_n - r_{n+1} = alpha0 [ (e^{beta/f} - K0) s_{n-1} + (K0 - 1) s_n ],
/// so each symbol is recovered from the previously decoded one; the chain is
/// seeded by the agreed dummy first symbol.  No correction is attempted:
/// a flipped decision propagates until the residuals re-anchor it.
BootstrapResult dispersion_bootstrap_decode(const std::vector<double>& received, double k0,
                                            int dummy_sign, const OscParams& params,
                                            double alpha0 = 1.0, double margin_tol = 0.0);

} // namespace chaoscomm
