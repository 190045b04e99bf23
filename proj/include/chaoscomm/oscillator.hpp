#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "chaoscomm/errors.hpp"
#include "chaoscomm/rng.hpp"

namespace chaoscomm {

/// Constants of the solvable hybrid oscillator
///
///     x'' - 2*beta*x' + (omega^2 + beta^2) * (x - s(t)) = 0,
///
/// where the binary state s switches at guard events (x' = 0 and |x| < 1).
/// The family is parametrised by the per-period growth rate beta_base
/// (nepits/period, in (0, ln 2]) and the base frequency freq; everything
/// else is derived:  omega = 2*pi*freq,  beta = beta_base*freq,
/// period = 1/freq.
struct OscParams {
    double beta_base = 0.0; ///< nepits per period, 0 < beta_base <= ln 2
    double freq = 0.0;      ///< cycles per unit time
    double omega = 0.0;     ///< 2*pi*freq, rad per unit time
    double beta = 0.0;      ///< beta_base*freq, nepits per unit time
    double period = 0.0;    ///< 1/freq

    static OscParams make(double beta_base, double freq);
    void validate() const;

    /// e^{-beta/f}, the per-period contraction of the symbol weights.
    double q() const { return std::exp(-beta_base); }
    /// e^{+beta/f}, the per-period slope of the return map.
    double growth() const { return std::exp(beta_base); }
};

/// A binary message and its +/-1 encoding.  Index n is an absolute period
/// index; entry n lives at bits[n - offset].
class SymbolStream {
public:
    SymbolStream() = default;
    explicit SymbolStream(std::vector<std::uint8_t> bits, long offset = 0);

    static SymbolStream random(std::size_t n, CounterRng& rng);
    static SymbolStream constant(std::size_t n, int bit);

    std::size_t size() const { return bits_.size(); }
    long offset() const { return offset_; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    int bit(long n) const;
    /// s_n = 2*b_n - 1.
    int sign(long n) const { return 2 * bit(n) - 1; }
    bool covers(long n) const {
        return n >= offset_ && n - offset_ < static_cast<long>(bits_.size());
    }

private:
    std::vector<std::uint8_t> bits_;
    long offset_ = 0;
};

struct HybridState {
    double x = 0.0;
    double xdot = 0.0;
    int s = 1; ///< exactly -1 or +1
    double t = 0.0;
};

struct TrajectorySample {
    double t;
    double x;
    double xdot;
    int s;
};

/// One guard event (x' = 0).  `switched` records whether |x| < 1 held, i.e.
/// whether a symbol decision was taken.  `correction` is the magnitude of
/// the control perturbation applied in message mode (0 in free run).
struct GuardEvent {
    double t;
    double x;
    int s_before;
    int s_after;
    bool switched;
    double correction;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<GuardEvent> events;
    double dt = 0.0;

    double t_begin() const { return samples.empty() ? 0.0 : samples.front().t; }
    double t_end() const { return samples.empty() ? 0.0 : samples.back().t; }
};

struct IntegrateOptions {
    /// Message mode only: steer the state onto the symbol-consistent bounded
    /// solution at each guard decision.  The imposed symbols pin the branch
    /// sequence, so without this the per-step truncation error is amplified
    /// by e^{beta T} per period and a run longer than ~35 periods overflows.
    /// The correction is the small-perturbation control of the encoder; its
    /// magnitude stays at the integration-error scale (~1e-10) and is
    /// recorded per event.
    bool control_correction = true;
    /// Number of future symbols used for the bounded-solution target.
    int truncation = 60;
};

/// Integrate the hybrid oscillator with guard-event detection.
///
/// Events are located by a sign change of x' between fixed RK4 steps and
/// refined by bisection to |x'| < 1e-12.  At an event with |x| < 1 the
/// discrete state switches to sign(x) (free run, msg == nullptr) or is set
/// to 2*b_n - 1 for the current period index n (message mode).  Events with
/// |x| >= 1 are recorded but never switch the symbol.
///
/// Preconditions: dt <= period/200, duration > 0, and in message mode the
/// stream must cover ceil(duration/period) symbols.
/// Throws NonFiniteState on overflow and EventMiss if two guard events fall
/// inside one step.
Trajectory integrate_hybrid(const OscParams& params, const SymbolStream* msg,
                            const HybridState& init, double duration, double dt,
                            const IntegrateOptions& opts = {});

/// Closed-form solution
///
///   x(t) = s_n + { -s_n + (1 - e^{-beta/f}) * sum_{i=0}^{trunc} s_{n+i} e^{-i beta/f} }
///               * e^{beta (t - nT)} (cos wt - (beta/w) sin wt),   n = floor(f t).
///
/// The truncated tail contributes at most e^{-truncation * beta/f}, so the
/// returned value carries an absolute error bound of e^{-truncation*beta_base}
/// (2^-60 at the defaults).  Requires truncation >= ceil(40/beta_base) and a
/// stream covering periods n .. n+truncation.
double analytic_solution(const OscParams& params, const SymbolStream& symbols,
                         double t, int truncation = 60);

/// State on the bounded message-consistent trajectory at t = 0:
/// x = analytic value, x' = 0, s = first symbol.  Message-mode integrations
/// must start here (or at the analytic state of some period boundary);
/// arbitrary states are incompatible with an imposed symbol sequence.
HybridState message_initial_state(const OscParams& params, const SymbolStream& msg,
                                  int truncation = 60);

/// Free-running warm-up from (x, x', s) = (0.1, 0, +1); returns the state
/// after `periods` periods with the clock reset to zero.
HybridState warmed_up_state(const OscParams& params, int periods = 500,
                            int steps_per_period = 2000);

struct PeriodSample {
    long n;   ///< period index
    double x; ///< x(nT), linear interpolation on the sample grid
    int s;    ///< symbol active on [nT, (n+1)T)
};

/// Samples x at the period boundaries t = nT together with the symbol active
/// over each period (read at the mid-period sample, where it is unambiguous).
/// Periods whose midpoint lies outside the trajectory are dropped.
std::vector<PeriodSample> sample_at_periods(const Trajectory& traj, const OscParams& params);

/// (x+1)/2 and its inverse: the shift-map coordinate u in [0,1] versus the
/// oscillator coordinate r in [-1,1].
inline double to_unit_interval(double r) { return 0.5 * (r + 1.0); }
inline double to_signed_interval(double u) { return 2.0 * u - 1.0; }

} // namespace chaoscomm
