#pragma once

#include <cstddef>
#include <vector>

#include "chaoscomm/channel_types.hpp"
#include "chaoscomm/oscillator.hpp"

namespace chaoscomm {

/// n independent Gaussian(0, sigma^2) samples from the counter generator.
std::vector<double> awgn(const NoiseStream& noise, std::size_t n);

/// sigma = sqrt(P * 10^{-snr_db/10}); signal_power must be > 0.
double snr_to_sigma(double snr_db, double signal_power);

/// Empirical mean square, the power estimator used for SNR calibration.
double mean_power(const std::vector<double>& samples);

/// Dispersion modelled as an added arrival delay on the direct path:
/// tau_0 += extra_delay, which makes K_0 != 1 and couples s_{n'+1} into the
/// return map.  Only 0 <= extra_delay < T is modelled.
TapSet apply_dispersion(const TapSet& taps, double extra_delay, const OscParams& params);

/// Delayed trajectory value x(t) by linear interpolation on the sample grid.
/// Throws CoverageError outside the stored range.
double trajectory_value(const Trajectory& traj, double t);

struct UserSignal {
    const Trajectory* traj = nullptr;
    const OscParams* params = nullptr;
    UserPlan plan;
    TapSet taps;
};

/// Composed uplink signal on t_grid,
///   O_u(t) = sum_k sum_l alpha_l^(k) gamma^(k) gtilde^(k) x^(k)(t - tau_l^(k)) + w(t).
/// Every user signal must cover t_grid shifted by its largest delay.
std::vector<double> uplink_compose(const std::vector<UserSignal>& users,
                                   const NoiseStream* noise, const std::vector<double>& t_grid);

/// Per-user downlink signals,
///   O_d^(m)(t) = alpha0^(m) gamma_star sum_k gtilde^(k) x^(k)(t) + w^(m)(t),
/// with the common gain gamma_star = 1 / min_i alpha0^(i) compensating the
/// worst channel.  base_station_noise, when given, is added to the composed
/// signal before the per-user attenuation; per_user_noise may be empty
/// (noiseless) or hold one independent stream per user.
std::vector<std::vector<double>> downlink_compose(const std::vector<UserSignal>& users,
                                                  const std::vector<double>& alpha0_per_user,
                                                  const std::vector<NoiseStream>& per_user_noise,
                                                  const NoiseStream* base_station_noise,
                                                  const std::vector<double>& t_grid);

/// gamma_star = 1 / min alpha0.
double downlink_gain(const std::vector<double>& alpha0_per_user);

} // namespace chaoscomm
