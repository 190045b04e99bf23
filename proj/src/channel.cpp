#include "chaoscomm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaoscomm/rng.hpp"

namespace chaoscomm {

double TapSet::max_delay() const {
    double m = 0.0;
    for (const Tap& t : taps)
        m = std::max(m, t.tau);
    return m;
}

void TapSet::validate() const {
    if (taps.empty())
        throw DomainError("channel needs at least one propagation path");
    double prev = -1.0;
    for (const Tap& t : taps) {
        if (!(t.alpha > 0.0))
            throw DomainError("tap attenuation factors must be positive");
        if (t.tau < 0.0 || t.tau <= prev)
            throw DomainError("tap delays must be nonnegative and strictly increasing");
        prev = t.tau;
    }
}

void ChannelSpec::validate() const {
    for (const TapSet& t : taps_per_user)
        t.validate();
    if (snr_db && !std::isfinite(*snr_db))
        throw DomainError("snr_db must be finite");
    if (interference && interference->amplitude < 0.0)
        throw DomainError("interference amplitude must be nonnegative");
}

std::vector<double> awgn(const NoiseStream& noise, std::size_t n) {
    if (noise.sigma < 0.0)
        throw DomainError("noise sigma must be nonnegative");
    std::vector<double> out(n);
    if (noise.sigma == 0.0)
        return out;
    CounterRng rng(noise.seed);
    for (auto& v : out)
        v = noise.sigma * rng.next_gaussian();
    return out;
}

double snr_to_sigma(double snr_db, double signal_power) {
    if (!(signal_power > 0.0))
        throw DomainError("signal power must be positive");
    return std::sqrt(signal_power * std::pow(10.0, -snr_db / 10.0));
}

double mean_power(const std::vector<double>& samples) {
    if (samples.empty())
        throw DomainError("cannot estimate power of an empty stream");
    double acc = 0.0;
    for (double v : samples)
        acc += v * v;
    return acc / static_cast<double>(samples.size());
}

TapSet apply_dispersion(const TapSet& taps, double extra_delay, const OscParams& params) {
    taps.validate();
    if (extra_delay < 0.0)
        throw DomainError("dispersion delay must be nonnegative");
    if (extra_delay >= params.period)
        throw Unsupported("dispersion delays of a full period or more are not modelled");
    TapSet out = taps;
    out.taps.front().tau += extra_delay;
    out.validate();
    return out;
}

double trajectory_value(const Trajectory& traj, double t) {
    if (traj.samples.size() < 2)
        throw CoverageError("trajectory too short for interpolation");
    const double t0 = traj.t_begin();
    const double pos = (t - t0) / traj.dt;
    if (pos < -1e-9 || t > traj.t_end() + 1e-9 * traj.dt)
        throw CoverageError("lookup at t = " + std::to_string(t) + " outside stored trajectory");
    const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    if (i + 1 >= traj.samples.size())
        return traj.samples.back().x;
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * traj.samples[i].x + w * traj.samples[i + 1].x;
}

std::vector<double> uplink_compose(const std::vector<UserSignal>& users, const NoiseStream* noise,
                                   const std::vector<double>& t_grid) {
    if (users.empty())
        throw DomainError("uplink needs at least one user");
    std::vector<double> out(t_grid.size(), 0.0);
    for (const UserSignal& u : users) {
        u.taps.validate();
        const double gain = u.plan.equalizer_gain * u.plan.superposition_gain;
        for (const Tap& tap : u.taps.taps) {
            const double w = tap.alpha * gain;
            for (std::size_t i = 0; i < t_grid.size(); ++i)
                out[i] += w * trajectory_value(*u.traj, t_grid[i] - tap.tau);
        }
    }
    if (noise) {
        const std::vector<double> w = awgn(*noise, t_grid.size());
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            out[i] += w[i];
    }
    return out;
}

double downlink_gain(const std::vector<double>& alpha0_per_user) {
    if (alpha0_per_user.empty())
        throw DomainError("downlink needs at least one attenuation factor");
    double lo = alpha0_per_user.front();
    for (double a : alpha0_per_user) {
        if (!(a > 0.0))
            throw DomainError("attenuation factors must be positive");
        lo = std::min(lo, a);
    }
    return 1.0 / lo;
}

std::vector<std::vector<double>> downlink_compose(const std::vector<UserSignal>& users,
                                                  const std::vector<double>& alpha0_per_user,
                                                  const std::vector<NoiseStream>& per_user_noise,
                                                  const NoiseStream* base_station_noise,
                                                  const std::vector<double>& t_grid) {
    if (alpha0_per_user.size() != users.size())
        throw DomainError("one direct-path attenuation per user required");
    if (!per_user_noise.empty() && per_user_noise.size() != users.size())
        throw DomainError("per-user noise must be empty or one stream per user");

    // Composed broadcast signal, sum_k gtilde^(k) x^(k)(t).
    std::vector<double> bs(t_grid.size(), 0.0);
    for (const UserSignal& u : users) {
        const double w = u.plan.superposition_gain;
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            bs[i] += w * trajectory_value(*u.traj, t_grid[i]);
    }
    if (base_station_noise) {
        const std::vector<double> w = awgn(*base_station_noise, t_grid.size());
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            bs[i] += w[i];
    }

    const double gamma_star = downlink_gain(alpha0_per_user);
    std::vector<std::vector<double>> out(users.size());
    for (std::size_t m = 0; m < users.size(); ++m) {
        out[m].resize(t_grid.size());
        const double scale = alpha0_per_user[m] * gamma_star;
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            out[m][i] = scale * bs[i];
        if (!per_user_noise.empty() && per_user_noise[m].sigma > 0.0) {
            const std::vector<double> w = awgn(per_user_noise[m], t_grid.size());
            for (std::size_t i = 0; i < t_grid.size(); ++i)
                out[m][i] += w[i];
        }
    }
    return out;
}

} // namespace chaoscomm
