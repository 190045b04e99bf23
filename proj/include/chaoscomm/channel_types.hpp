#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "chaoscomm/errors.hpp"

namespace chaoscomm {

struct Tap {
    double alpha; ///< attenuation factor, > 0
    double tau;   ///< arrival delay, >= 0
};

/// Propagation paths of one user's channel, sorted by strictly increasing
/// delay.  A physical channel has tau_0 = 0; dispersion moves the first
/// arrival to tau_0 > 0 (see apply_dispersion).
struct TapSet {
    std::vector<Tap> taps;

    std::size_t count() const { return taps.size(); }
    double max_delay() const;
    void validate() const;

    static TapSet direct(double alpha0 = 1.0) { return TapSet{{{alpha0, 0.0}}}; }
};

/// Per-user transmission plan: frequency multiplier f^(k)/f, the equalising
/// gain (1/alpha_0 when equalisation is on) and the superposition gain from
/// the gain plan.
struct UserPlan {
    int user_id = 1;
    int freq_multiplier = 1;
    double equalizer_gain = 1.0;
    double superposition_gain = 1.0;
};

/// Seeded additive-noise source.  Identical seed => identical samples.
struct NoiseStream {
    std::uint64_t seed = 0;
    double sigma = 0.0;
};

struct Interference {
    double amplitude = 0.0; ///< A >= 0
    double freq = 0.0;      ///< f_p
    double phase = 0.0;     ///< phi_0
};

struct ChannelSpec {
    std::vector<TapSet> taps_per_user;
    std::optional<double> snr_db;
    std::vector<double> dispersion_extra_delay; ///< per user, added to tau_0
    std::optional<Interference> interference;

    void validate() const;
};

} // namespace chaoscomm
