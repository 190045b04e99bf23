#include "chaoscomm/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaoscomm/maps.hpp"

namespace chaoscomm {

PartitionSpec PartitionSpec::from_gains(double gain1, double gain2) {
    if (!(gain1 > 0.0 && gain2 > 0.0))
        throw DomainError("partition gains must be positive");
    PartitionSpec spec;
    spec.gain1 = gain1;
    spec.gain2 = gain2;
    for (int j = 1; j <= 7; ++j)
        spec.thresholds[static_cast<std::size_t>(j - 1)] =
            0.5 * (3.0 * gain1 + static_cast<double>(j - 1) * gain2);
    return spec;
}

PartitionSpec PartitionSpec::from_plan(const GainPlan& plan) {
    if (plan.n_users != 2)
        throw Unsupported("the threshold partition is defined for two users only");
    return from_gains(plan.gains[0], plan.gains[1]);
}

ThresholdDecision threshold_decode(double O_n, double O_next, const PartitionSpec& spec) {
    const double residual = spec.slope * O_n - O_next;
    int j = 0;
    for (double t : spec.thresholds)
        if (t < residual)
            ++j;
    return {j, j % 2, j / 2};
}

InverseStep inverse_map_decode(double z, int b_est, int k) {
    const double z_next = baker_inverse(z, b_est, k);
    return {z_next, static_cast<int>(std::floor(std::ldexp(z_next, k)))};
}

DecodeResult decode_stream(const std::vector<double>& O, const PartitionSpec& spec,
                           const std::vector<int>& sent_b1, const std::vector<int>& sent_b2) {
    if (O.size() < 2)
        throw DomainError("need at least two composed samples to decode");
    const std::size_t n = O.size() - 1;
    if (sent_b1.size() < n || sent_b2.size() < n)
        throw DomainError("transmitted symbol streams shorter than the received stream");
    DecodeResult res;
    res.branch.reserve(n);
    res.b1.reserve(n);
    res.b2.reserve(n);
    res.err1.reserve(n);
    res.err2.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ThresholdDecision d = threshold_decode(O[i], O[i + 1], spec);
        res.branch.push_back(d.branch);
        res.b1.push_back(d.b1);
        res.b2.push_back(d.b2);
        res.err1.push_back(d.b1 != sent_b1[i]);
        res.err2.push_back(d.b2 != sent_b2[i]);
    }
    return res;
}

namespace {

struct FilterPhase {
    double y;
    double v;
};

// RK4 step of y'' = -2 beta y' - (omega^2 + beta^2)(y - eta(t)) with the
// forcing interpolated linearly between grid samples eta0 (step start) and
// eta1 (step end).
FilterPhase filter_rk4(const FilterPhase& p, double eta0, double eta1, double two_beta,
                       double stiffness, double h) {
    auto accel = [&](double y, double v, double eta) {
        return -two_beta * v - stiffness * (y - eta);
    };
    const double eta_mid = 0.5 * (eta0 + eta1);
    const double k1y = p.v, k1v = accel(p.y, p.v, eta0);
    const double k2y = p.v + 0.5 * h * k1v, k2v = accel(p.y + 0.5 * h * k1y, k2y, eta_mid);
    const double k3y = p.v + 0.5 * h * k2v, k3v = accel(p.y + 0.5 * h * k2y, k3y, eta_mid);
    const double k4y = p.v + h * k3v, k4v = accel(p.y + h * k3y, k4y, eta1);
    return {p.y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
            p.v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

long steps_per_period_checked(const OscParams& params, double dt) {
    const double ratio = params.period / dt;
    const long n = std::lround(ratio);
    if (n < 200 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
        throw DomainError("dt must divide the period exactly (T/dt integer, >= 200)");
    return n;
}

} // namespace

FilterRun matched_filter_run(const std::vector<double>& received, const OscParams& params,
                             double dt, int warmup_periods, int eta_init_sign) {
    params.validate();
    if (eta_init_sign != 1 && eta_init_sign != -1)
        throw DomainError("eta anchor must be -1 or +1");
    const long per = steps_per_period_checked(params, dt);
    const long total = static_cast<long>(received.size());
    if (total < per * (warmup_periods + 3))
        throw CoverageError("received signal shorter than warm-up plus two periods");
    for (double v : received)
        if (!std::isfinite(v))
            throw NonFiniteState("received signal contains non-finite samples");

    FilterRun run;
    const long n_grid = total - per; // filter clock starts at t = T
    run.t.resize(static_cast<std::size_t>(n_grid));
    run.eta.resize(static_cast<std::size_t>(n_grid));
    run.y.resize(static_cast<std::size_t>(n_grid));
    run.ydot.resize(static_cast<std::size_t>(n_grid));
    run.S.resize(static_cast<std::size_t>(n_grid));

    // eta is the running integral of x~(t) - x~(t - T), anchored to the
    // agreed symbol at the filter start; trapezoid accumulation.
    run.eta[0] = static_cast<double>(eta_init_sign);
    for (long i = 1; i < n_grid; ++i) {
        const double d1 = received[static_cast<std::size_t>(per + i)] -
                          received[static_cast<std::size_t>(i)];
        const double d0 = received[static_cast<std::size_t>(per + i - 1)] -
                          received[static_cast<std::size_t>(i - 1)];
        run.eta[static_cast<std::size_t>(i)] =
            run.eta[static_cast<std::size_t>(i - 1)] + 0.5 * dt * (d0 + d1);
    }

    const double two_beta = 2.0 * params.beta;
    const double stiffness = params.omega * params.omega + params.beta * params.beta;
    FilterPhase p{0.0, 0.0};
    int S = eta_init_sign;

    for (long i = 0; i < n_grid; ++i)
        run.t[static_cast<std::size_t>(i)] = static_cast<double>(per + i) * dt;
    run.y[0] = p.y;
    run.ydot[0] = p.v;
    run.S[0] = S;

    for (long i = 0; i + 1 < n_grid; ++i) {
        const double e0 = run.eta[static_cast<std::size_t>(i)];
        const double e1 = run.eta[static_cast<std::size_t>(i + 1)];
        const FilterPhase before = p;
        FilterPhase after = filter_rk4(before, e0, e1, two_beta, stiffness, dt);

        if (before.v * after.v < 0.0) {
            // Guard event of the filter copy: refine and apply the same
            // signum rule as the forward oscillator.
            double lo = 0.0, hi = dt, h = dt;
            FilterPhase at_event = after;
            for (int it = 0; it < 200; ++it) {
                h = 0.5 * (lo + hi);
                const double eh = e0 + (e1 - e0) * (h / dt);
                at_event = filter_rk4(before, e0, eh, two_beta, stiffness, h);
                if (std::abs(at_event.v) < 1e-12)
                    break;
                if (before.v * at_event.v > 0.0)
                    lo = h;
                else
                    hi = h;
                if (hi - lo < 1e-16 * dt)
                    break;
            }
            // The filter overshoots the |y| < 1 strip at exactly the
            // symbol-bearing extrema near the period boundaries, so unlike
            // the generator the readout switches on every velocity zero.
            S = at_event.y >= 0.0 ? 1 : -1;
            const double eh = e0 + (e1 - e0) * (h / dt);
            after = filter_rk4(at_event, eh, e1, two_beta, stiffness, dt - h);
        }

        if (!std::isfinite(after.y) || !std::isfinite(after.v))
            throw NonFiniteState("filter state overflow");
        p = after;
        run.y[static_cast<std::size_t>(i + 1)] = p.y;
        run.ydot[static_cast<std::size_t>(i + 1)] = p.v;
        run.S[static_cast<std::size_t>(i + 1)] = S;
    }

    // Per-period symbol: the S value at the mid-period sample, skipping the
    // warm-up periods after the filter start.
    const long first = 1 + warmup_periods; // filter clock starts at period 1
    run.first_period = first;
    for (long n = first;; ++n) {
        const long mid = (n - 1) * per + per / 2; // grid index of n*T + T/2
        if (mid >= n_grid)
            break;
        run.symbols.push_back({n, run.S[static_cast<std::size_t>(mid)]});
    }
    return run;
}

double filter_match_rate(const FilterRun& run, const SymbolStream& sent) {
    long matched = 0;
    long compared = 0;
    for (const FilterPeriodSymbol& ps : run.symbols) {
        const long sent_period = ps.n - 1; // S(t + T) estimates s(t)
        if (!sent.covers(sent_period))
            continue;
        ++compared;
        if (ps.S == sent.sign(sent_period))
            ++matched;
    }
    if (compared == 0)
        throw DomainError("no overlapping periods to compare");
    return static_cast<double>(matched) / static_cast<double>(compared);
}

std::vector<std::pair<double, double>> reverse_time_map_check(const OscParams& params,
                                                              const SymbolStream& symbols,
                                                              int periods,
                                                              int steps_per_period) {
    params.validate();
    if (periods < 2)
        throw DomainError("need at least two periods of forcing");
    const double dt = params.period / static_cast<double>(steps_per_period);
    const double two_beta = 2.0 * params.beta;
    const double stiffness = params.omega * params.omega + params.beta * params.beta;

    std::vector<double> y_at_period;
    y_at_period.reserve(static_cast<std::size_t>(periods) + 1);
    FilterPhase p{0.0, 0.0};
    y_at_period.push_back(p.y);
    for (int n = 0; n < periods; ++n) {
        const double eta = symbols.sign(n); // exact forcing eta(t) = s(t)
        for (int i = 0; i < steps_per_period; ++i)
            p = filter_rk4(p, eta, eta, two_beta, stiffness, dt);
        if (!std::isfinite(p.y) || !std::isfinite(p.v))
            throw NonFiniteState("reverse-time state overflow");
        y_at_period.push_back(p.y);
    }

    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(y_at_period.size() - 1);
    for (std::size_t i = 0; i + 1 < y_at_period.size(); ++i)
        pairs.emplace_back(to_unit_interval(y_at_period[i]), to_unit_interval(y_at_period[i + 1]));
    return pairs;
}

BootstrapResult dispersion_bootstrap_decode(const std::vector<double>& received, double k0,
                                            int dummy_sign, const OscParams& params,
                                            double alpha0, double margin_tol) {
    if (received.size() < 3)
        throw DomainError("need at least three received samples");
    if (dummy_sign != 1 && dummy_sign != -1)
        throw DomainError("dummy symbol must be -1 or +1");
    const double g = params.growth();
    if (std::abs(k0 - 1.0) < 1e-12)
        throw DomainError("bootstrap decoding requires K0 != 1 (use threshold decoding)");
    const double w_prev = g - k0;      // weight of s_{n-1}
    const double w_cur = k0 - 1.0;     // weight of s_n
    if (margin_tol <= 0.0)
        margin_tol = 0.5 * std::abs(alpha0 * w_cur);

    BootstrapResult res;
    res.symbols.push_back(dummy_sign);
    res.ambiguous.push_back(0);
    int prev = dummy_sign;
    // The residual of the first sample pair consumes the dummy in its older
    // slot; each later step consumes the previously decoded symbol, so
    // symbols[i] is the symbol paired with the transition into received[i].
    for (std::size_t n = 0; n + 1 < received.size(); ++n) {
        const double residual = g * received[n] - received[n + 1];
        const double cand_plus = alpha0 * (w_prev * prev + w_cur);
        const double cand_minus = alpha0 * (w_prev * prev - w_cur);
        const double d_plus = std::abs(residual - cand_plus);
        const double d_minus = std::abs(residual - cand_minus);
        const int decoded = d_plus <= d_minus ? 1 : -1;
        const double margin = std::abs(d_plus - d_minus);
        res.symbols.push_back(decoded);
        res.ambiguous.push_back(margin < margin_tol ? 1 : 0);
        prev = decoded;
    }
    return res;
}

} // namespace chaoscomm
