#include "chaoscomm/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chaoscomm {

namespace {

constexpr double kTwoPi = 6.2831853071795864769252867665590;
constexpr double kLn2 = 0.69314718055994530941723212145818;

struct Phase {
    double x;
    double v;
};

struct Rhs {
    double two_beta;
    double stiffness; // omega^2 + beta^2
    double s;

    Phase operator()(const Phase& p) const {
        return {p.v, two_beta * p.v - stiffness * (p.x - s)};
    }
};

Phase rk4_step(const Rhs& f, const Phase& p, double h) {
    const Phase k1 = f(p);
    const Phase k2 = f({p.x + 0.5 * h * k1.x, p.v + 0.5 * h * k1.v});
    const Phase k3 = f({p.x + 0.5 * h * k2.x, p.v + 0.5 * h * k2.v});
    const Phase k4 = f({p.x + h * k3.x, p.v + h * k3.v});
    return {p.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            p.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

// Truncated bounded-solution value x_n = (1 - q) sum_i s_{n+i} q^i, using at
// most `truncation` symbols and stopping early at the stream end.
double bounded_value(const OscParams& params, const SymbolStream& msg, long n, int truncation) {
    const double q = params.q();
    const long last = msg.offset() + static_cast<long>(msg.size()) - 1;
    const long m = std::min<long>(n + truncation, last);
    double acc = 0.0;
    for (long i = m; i >= n; --i) // Horner from the tail keeps the sum exact for q = 1/2
        acc = msg.sign(i) + q * acc;
    return (1.0 - q) * acc;
}

} // namespace

OscParams OscParams::make(double beta_base, double freq) {
    OscParams p;
    p.beta_base = beta_base;
    p.freq = freq;
    p.omega = kTwoPi * freq;
    p.beta = beta_base * freq;
    p.period = 1.0 / freq;
    p.validate();
    return p;
}

void OscParams::validate() const {
    if (!(beta_base > 0.0) || beta_base > kLn2 * (1.0 + 1e-12))
        throw DomainError("beta_base must lie in (0, ln 2], got " + std::to_string(beta_base));
    if (!(freq > 0.0))
        throw DomainError("freq must be positive");
    const double tol = 4.0 * 2.220446049250313e-16;
    if (std::abs(omega - kTwoPi * freq) > tol * omega || std::abs(beta - beta_base * freq) > tol * std::abs(beta) ||
        std::abs(period * freq - 1.0) > tol)
        throw DomainError("inconsistent derived oscillator constants");
}

SymbolStream::SymbolStream(std::vector<std::uint8_t> bits, long offset)
    : bits_(std::move(bits)), offset_(offset) {
    for (auto b : bits_)
        if (b > 1)
            throw DomainError("symbol bits must be 0 or 1");
}

SymbolStream SymbolStream::random(std::size_t n, CounterRng& rng) {
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits)
        b = static_cast<std::uint8_t>(rng.next_bit());
    return SymbolStream(std::move(bits));
}

SymbolStream SymbolStream::constant(std::size_t n, int bit) {
    if (bit != 0 && bit != 1)
        throw DomainError("bit must be 0 or 1");
    return SymbolStream(std::vector<std::uint8_t>(n, static_cast<std::uint8_t>(bit)));
}

int SymbolStream::bit(long n) const {
    if (!covers(n))
        throw InsufficientSymbols("symbol stream does not cover period " + std::to_string(n));
    return bits_[static_cast<std::size_t>(n - offset_)];
}

Trajectory integrate_hybrid(const OscParams& params, const SymbolStream* msg,
                            const HybridState& init, double duration, double dt,
                            const IntegrateOptions& opts) {
    params.validate();
    if (!(duration > 0.0))
        throw DomainError("duration must be positive");
    if (!(dt > 0.0) || dt > params.period / 200.0 * (1.0 + 1e-12))
        throw DomainError("dt must satisfy dt <= T/200");
    if (init.s != 1 && init.s != -1)
        throw DomainError("initial discrete state must be -1 or +1");
    const long n_steps = static_cast<long>(std::ceil(duration / dt - 1e-9));
    if (msg) {
        const long needed = static_cast<long>(std::ceil(params.freq * (init.t + duration) - 1e-9));
        if (!msg->covers(needed - 1))
            throw InsufficientSymbols("message shorter than ceil(duration/T) periods");
    }

    Trajectory traj;
    traj.dt = dt;
    traj.samples.reserve(static_cast<std::size_t>(n_steps) + 1);

    Phase p{init.x, init.xdot};
    int s = init.s;
    const double t0 = init.t;

    auto handle_event = [&](double t_event, Phase& at_event) {
        GuardEvent ev{t_event, at_event.x, s, s, false, 0.0};
        if (std::abs(at_event.x) < 1.0) {
            if (msg) {
                const long n = std::llround(params.freq * t_event);
                if (msg->covers(n)) { // a final-instant event may index past the stream
                    ev.switched = true;
                    ev.s_after = msg->sign(n);
                    if (opts.control_correction) {
                        const double target = bounded_value(params, *msg, n, opts.truncation);
                        ev.correction = std::hypot(at_event.x - target, at_event.v);
                        at_event.x = target;
                        at_event.v = 0.0;
                        ev.x = target;
                    }
                }
            } else {
                ev.switched = true;
                ev.s_after = at_event.x >= 0.0 ? 1 : -1;
            }
            s = ev.s_after;
        }
        traj.events.push_back(ev);
    };

    if (msg) {
        // The symbol of the starting period is imposed immediately; t = 0 of a
        // message-compatible state is itself a guard point (x' = 0).
        const long n0 = static_cast<long>(std::floor(params.freq * t0 + 0.5));
        GuardEvent ev{t0, p.x, s, msg->sign(n0), true, 0.0};
        s = ev.s_after;
        traj.events.push_back(ev);
    }

    traj.samples.push_back({t0, p.x, p.v, s});

    for (long i = 0; i < n_steps; ++i) {
        const double t_a = t0 + static_cast<double>(i) * dt;
        const Rhs f{2.0 * params.beta, params.omega * params.omega + params.beta * params.beta,
                    static_cast<double>(s)};
        const Phase before = p;
        Phase after = rk4_step(f, before, dt);

        if (before.v * after.v < 0.0) {
            // Bisect the step length until the velocity zero is pinned down.
            double lo = 0.0, hi = dt;
            Phase at_event = after;
            double h = dt;
            for (int it = 0; it < 200; ++it) {
                h = 0.5 * (lo + hi);
                at_event = rk4_step(f, before, h);
                if (std::abs(at_event.v) < 1e-12)
                    break;
                if (before.v * at_event.v > 0.0)
                    lo = h;
                else
                    hi = h;
                if (hi - lo < 1e-16 * dt)
                    break;
            }
            handle_event(t_a + h, at_event);

            const Rhs f2{f.two_beta, f.stiffness, static_cast<double>(s)};
            after = rk4_step(f2, at_event, dt - h);
            // A second guard inside the same step means dt is too coarse.  The
            // velocity leaves the event with the sign of the acceleration; a
            // disagreement at the step end reveals another crossing.
            const double accel = f2({at_event.x, 0.0}).v;
            if (after.v * accel < 0.0 && std::abs(after.v) > 1e-9)
                throw EventMiss("two guard events inside one dt step; reduce dt");
        }

        if (!std::isfinite(after.x) || !std::isfinite(after.v))
            throw NonFiniteState("state overflow at t = " + std::to_string(t_a + dt));
        p = after;
        traj.samples.push_back({t_a + dt, p.x, p.v, s});
    }
    return traj;
}

double analytic_solution(const OscParams& params, const SymbolStream& symbols, double t,
                         int truncation) {
    params.validate();
    const int min_trunc = static_cast<int>(std::ceil(40.0 / params.beta_base));
    if (truncation < min_trunc)
        throw DomainError("truncation below tail-bound requirement ceil(40/beta_base)");

    const double ft = params.freq * t;
    const long n = static_cast<long>(std::floor(ft));
    if (!symbols.covers(n) || !symbols.covers(n + truncation))
        throw InsufficientSymbols("analytic solution needs symbols through period " +
                                  std::to_string(n + truncation));

    const double q = params.q();
    double acc = 0.0;
    for (long i = n + truncation; i >= n; --i)
        acc = symbols.sign(i) + q * acc;
    const double xn = (1.0 - q) * acc;

    // cos(wt) and the envelope evaluated through the in-period phase; wt is a
    // whole number of turns plus 2*pi*frac.
    const double frac = ft - static_cast<double>(n);
    const double tau = frac * params.period;
    const double osc = std::cos(kTwoPi * frac) - params.beta / params.omega * std::sin(kTwoPi * frac);
    const double sn = symbols.sign(n);
    return sn + (xn - sn) * std::exp(params.beta * tau) * osc;
}

HybridState message_initial_state(const OscParams& params, const SymbolStream& msg,
                                  int truncation) {
    return HybridState{analytic_solution(params, msg, 0.0, truncation), 0.0, msg.sign(0), 0.0};
}

HybridState warmed_up_state(const OscParams& params, int periods, int steps_per_period) {
    const HybridState start{0.1, 0.0, 1, 0.0};
    const double dt = params.period / static_cast<double>(steps_per_period);
    const Trajectory traj =
        integrate_hybrid(params, nullptr, start, periods * params.period, dt);
    const TrajectorySample& last = traj.samples.back();
    return HybridState{last.x, last.xdot, last.s, 0.0};
}

std::vector<PeriodSample> sample_at_periods(const Trajectory& traj, const OscParams& params) {
    std::vector<PeriodSample> out;
    if (traj.samples.size() < 2)
        return out;
    const double t0 = traj.t_begin();
    const double t1 = traj.t_end();
    const double T = params.period;

    auto interp_x = [&](double t) {
        const double pos = (t - t0) / traj.dt;
        const auto i = static_cast<std::size_t>(std::floor(pos));
        if (i + 1 >= traj.samples.size())
            return traj.samples.back().x;
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * traj.samples[i].x + w * traj.samples[i + 1].x;
    };
    auto symbol_at = [&](double t) {
        auto i = static_cast<std::size_t>(std::llround((t - t0) / traj.dt));
        i = std::min(i, traj.samples.size() - 1);
        return traj.samples[i].s;
    };

    const long n_first = static_cast<long>(std::ceil(t0 / T - 1e-9));
    for (long n = n_first;; ++n) {
        const double tn = static_cast<double>(n) * T;
        if (tn > t1 + 1e-9 * T)
            break;
        if (tn + 0.5 * T > t1 + 1e-9 * T)
            break; // symbol of this period not observable
        out.push_back({n, interp_x(std::min(tn, t1)), symbol_at(tn + 0.5 * T)});
    }
    return out;
}

} // namespace chaoscomm
