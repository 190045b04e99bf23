#include <doctest.h>

#include <cmath>
#include <vector>

#include "chaoscomm/channel.hpp"
#include "chaoscomm/coding.hpp"
#include "chaoscomm/decoder.hpp"
#include "chaoscomm/maps.hpp"
#include "chaoscomm/oscillator.hpp"

using namespace chaoscomm;

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;
const OscParams kP1 = OscParams::make(kLn2, 1.0);

SymbolStream random_stream(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    return SymbolStream::random(n, rng);
}

Trajectory message_run(const OscParams& p, const SymbolStream& msg, double periods,
                       int steps_per_period = 2000) {
    return integrate_hybrid(p, &msg, message_initial_state(p, msg), periods * p.period,
                            p.period / steps_per_period);
}
} // namespace

TEST_CASE("awgn determinism and calibration") {
    const NoiseStream quiet{123, 0.0};
    for (double v : awgn(quiet, 100))
        CHECK(v == 0.0);

    const NoiseStream n1{42, 1.3};
    CHECK(awgn(n1, 1000) == awgn(n1, 1000));

    const std::size_t big = 1000000;
    const std::vector<double> samples = awgn(NoiseStream{7, 1.0}, big);
    double mean = 0.0;
    for (double v : samples)
        mean += v;
    mean /= static_cast<double>(big);
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(big)));

    // Requested-versus-measured SNR within 0.1 dB.
    const double p_signal = 0.30;
    const double sigma = snr_to_sigma(23.0, p_signal);
    const std::vector<double> w = awgn(NoiseStream{9, sigma}, big);
    const double measured_db = 10.0 * std::log10(p_signal / mean_power(w));
    CHECK(std::abs(measured_db - 23.0) < 0.1);
}

TEST_CASE("snr to sigma") {
    CHECK(snr_to_sigma(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(snr_to_sigma(40.0, 1.0) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK_THROWS_AS(snr_to_sigma(10.0, 0.0), DomainError);
}

TEST_CASE("tap set validation") {
    CHECK_THROWS_AS(TapSet{}.validate(), DomainError);
    CHECK_THROWS_AS((TapSet{{{1.0, 0.0}, {0.5, 0.0}}}).validate(), DomainError);
    CHECK_THROWS_AS((TapSet{{{-1.0, 0.0}}}).validate(), DomainError);
    TapSet ok{{{1.0, 0.0}, {0.5, 1.5}}};
    ok.validate();
    CHECK(ok.max_delay() == 1.5);
}

TEST_CASE("uplink identity pass-through") {
    const SymbolStream msg = random_stream(100, 1);
    const Trajectory traj = message_run(kP1, msg, 20.0);

    std::vector<double> grid;
    for (int i = 0; i < 200; ++i)
        grid.push_back(0.05 + 0.09 * i);
    const std::vector<UserSignal> users{{&traj, &kP1, UserPlan{1, 1, 1.0, 1.0}, TapSet::direct(1.0)}};
    const std::vector<double> out = uplink_compose(users, nullptr, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(out[i] == doctest::Approx(trajectory_value(traj, grid[i])).epsilon(1e-15));
}

TEST_CASE("coverage error when a delay reaches before the signal start") {
    const SymbolStream msg = random_stream(80, 2);
    const Trajectory traj = message_run(kP1, msg, 5.0);
    const std::vector<UserSignal> users{
        {&traj, &kP1, UserPlan{1, 1, 1.0, 1.0}, TapSet{{{1.0, 2.0}}}}};
    CHECK_THROWS_AS(uplink_compose(users, nullptr, std::vector<double>{1.0}), CoverageError);
}

TEST_CASE("two-user uplink matches the composed map samples") {
    const GainPlan plan = plan_gains(2, {1, 2}, 0.2);
    const OscParams p2 = OscParams::make(kLn2, 2.0);
    const SymbolStream msg1 = random_stream(200, 3);
    const SymbolStream msg2 = random_stream(400, 4);
    const Trajectory t1 = message_run(kP1, msg1, 102.0);
    const Trajectory t2 = message_run(p2, msg2, 204.0);

    std::vector<double> grid;
    for (int n = 0; n <= 100; ++n)
        grid.push_back(n * kP1.period);
    const std::vector<UserSignal> users{
        {&t1, &kP1, UserPlan{1, 1, 1.0, plan.gains[0]}, TapSet::direct(1.0)},
        {&t2, &p2, UserPlan{2, 2, 1.0, plan.gains[1]}, TapSet::direct(1.0)}};
    const std::vector<double> composed = uplink_compose(users, nullptr, grid);

    // In unit coordinates O_n = g1 u1 + g2 u2; the x-coordinate composition
    // is the affine image 2 O - 1 because the gains sum to one.
    const auto s1 = sample_at_periods(t1, kP1);
    const auto s2 = sample_at_periods(t2, p2);
    double max_dev = 0.0;
    for (std::size_t n = 0; n <= 100; ++n) {
        const double expected = plan.gains[0] * to_unit_interval(s1[n].x) +
                                plan.gains[1] * to_unit_interval(s2[2 * n].x);
        max_dev = std::max(max_dev, std::abs(to_unit_interval(composed[n]) - expected));
    }
    CHECK(max_dev < 1e-3);
}

TEST_CASE("uplink noise variance calibration at 40 dB") {
    const SymbolStream msg = random_stream(200, 5);
    const Trajectory traj = message_run(kP1, msg, 60.0);
    std::vector<double> grid;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i)
        grid.push_back(1e-4 + 5.9e-4 * static_cast<double>(i));

    const std::vector<UserSignal> users{{&traj, &kP1, UserPlan{1, 1, 1.0, 1.0}, TapSet::direct(1.0)}};
    const std::vector<double> clean = uplink_compose(users, nullptr, grid);
    const double power = mean_power(clean);
    const NoiseStream noise{77, snr_to_sigma(40.0, power)};
    const std::vector<double> received = uplink_compose(users, &noise, grid);

    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        var += (received[i] - clean[i]) * (received[i] - clean[i]);
    var /= static_cast<double>(n);
    CHECK(var == doctest::Approx(power * 1e-4).epsilon(0.05));
}

TEST_CASE("uplink is linear in each user signal") {
    const SymbolStream msg = random_stream(80, 6);
    const Trajectory traj = message_run(kP1, msg, 10.0);
    std::vector<double> grid;
    for (int i = 0; i < 100; ++i)
        grid.push_back(0.01 + 0.09 * i);

    auto compose_with_gain = [&](double gtilde) {
        const std::vector<UserSignal> users{
            {&traj, &kP1, UserPlan{1, 1, 1.0, gtilde}, TapSet::direct(1.0)}};
        return uplink_compose(users, nullptr, grid);
    };
    const auto half = compose_with_gain(0.4);
    const auto full = compose_with_gain(0.8);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(full[i] == doctest::Approx(2.0 * half[i]).epsilon(1e-12));
}

TEST_CASE("equalization removes the attenuation exactly") {
    const SymbolStream msg = random_stream(80, 7);
    const Trajectory traj = message_run(kP1, msg, 10.0);
    std::vector<double> grid;
    for (int i = 0; i < 64; ++i)
        grid.push_back(0.03 + 0.14 * i);

    auto compose_attenuated = [&](double alpha0) {
        const std::vector<UserSignal> users{
            {&traj, &kP1, UserPlan{1, 1, 1.0 / alpha0, 1.0}, TapSet::direct(alpha0)}};
        return uplink_compose(users, nullptr, grid);
    };
    const auto reference = compose_attenuated(1.0);
    const auto power_of_two = compose_attenuated(0.5);
    const auto generic = compose_attenuated(0.7);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(power_of_two[i] == reference[i]); // 0.5 * (1/0.5) is exact
        CHECK(generic[i] == doctest::Approx(reference[i]).epsilon(1e-14));
    }
}

TEST_CASE("multipath return map matches the continuous channel") {
    const SymbolStream msg = random_stream(300, 8);
    const Trajectory traj = message_run(kP1, msg, 110.0);
    const TapSet taps{{{1.0, 0.0}, {0.3, 1.0}}}; // tau_1 = T

    std::vector<double> grid;
    for (int n = 2; n <= 105; ++n)
        grid.push_back(n * kP1.period);
    const std::vector<UserSignal> users{{&traj, &kP1, UserPlan{1, 1, 1.0, 1.0}, taps}};
    const std::vector<double> r = uplink_compose(users, nullptr, grid);

    double max_dev = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const long n = 2 + static_cast<long>(i);
        const double predicted =
            multipath_map(r[i], taps, multipath_symbols(msg, n, taps, kP1), kP1);
        max_dev = std::max(max_dev, std::abs(predicted - r[i + 1]));
    }
    CHECK(max_dev < 1e-3);
}

TEST_CASE("dispersion moves the first arrival and the map follows") {
    CHECK_THROWS_AS(apply_dispersion(TapSet::direct(1.0), kP1.period, kP1), Unsupported);
    const TapSet unchanged = apply_dispersion(TapSet::direct(1.0), 0.0, kP1);
    CHECK(unchanged.taps.front().tau == 0.0);

    const double delay = kP1.period / 4.0;
    const TapSet dispersed = apply_dispersion(TapSet::direct(1.0), delay, kP1);
    CHECK(dispersed.taps.front().tau == delay);
    CHECK(k_factor(delay, kP1) != 1.0);

    const SymbolStream msg = random_stream(300, 9);
    const Trajectory traj = message_run(kP1, msg, 110.0);
    std::vector<double> grid;
    for (int n = 1; n <= 105; ++n)
        grid.push_back(n * kP1.period);
    const std::vector<UserSignal> users{{&traj, &kP1, UserPlan{1, 1, 1.0, 1.0}, dispersed}};
    const std::vector<double> r = uplink_compose(users, nullptr, grid);

    double max_dev = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const long n = 1 + static_cast<long>(i);
        const double predicted =
            multipath_map(r[i], dispersed, multipath_symbols(msg, n, dispersed, kP1), kP1);
        max_dev = std::max(max_dev, std::abs(predicted - r[i + 1]));
    }
    CHECK(max_dev < 1e-3);
}

TEST_CASE("downlink reduces to the uplink for the weakest channel") {
    const GainPlan plan = plan_gains(2, {1, 2}, 0.2);
    const OscParams p2 = OscParams::make(kLn2, 2.0);
    const SymbolStream msg1 = random_stream(80, 10);
    const SymbolStream msg2 = random_stream(160, 11);
    const Trajectory t1 = message_run(kP1, msg1, 22.0);
    const Trajectory t2 = message_run(p2, msg2, 44.0);

    std::vector<double> grid;
    for (int n = 0; n <= 20; ++n)
        grid.push_back(n * kP1.period);
    const std::vector<UserSignal> users{
        {&t1, &kP1, UserPlan{1, 1, 1.0, plan.gains[0]}, TapSet::direct(1.0)},
        {&t2, &p2, UserPlan{2, 2, 1.0, plan.gains[1]}, TapSet::direct(1.0)}};

    const std::vector<double> alpha0{0.4, 0.9};
    const auto received = downlink_compose(users, alpha0, {}, nullptr, grid);
    REQUIRE(received.size() == 2);

    // User with the smallest alpha0 sees exactly the clean composed signal.
    const std::vector<double> uplink = uplink_compose(users, nullptr, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(received[0][i] == doctest::Approx(uplink[i]).epsilon(1e-12));

    // All-equal attenuations give every user an identical signal.
    const auto equal = downlink_compose(users, {0.7, 0.7}, {}, nullptr, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(equal[0][i] == equal[1][i]);
}

TEST_CASE("downlink scaling cancels in the decoded symbols") {
    const GainPlan plan = plan_gains(2, {1, 2}, 0.2);
    const PartitionSpec spec = PartitionSpec::from_plan(plan);
    const OscParams p2 = OscParams::make(kLn2, 2.0);
    const SymbolStream msg1 = random_stream(160, 12);
    const SymbolStream msg2 = random_stream(320, 13);
    const Trajectory t1 = message_run(kP1, msg1, 82.0);
    const Trajectory t2 = message_run(p2, msg2, 164.0);

    std::vector<double> grid;
    for (int n = 0; n <= 80; ++n)
        grid.push_back(n * kP1.period);
    const std::vector<UserSignal> users{
        {&t1, &kP1, UserPlan{1, 1, 1.0, plan.gains[0]}, TapSet::direct(1.0)},
        {&t2, &p2, UserPlan{2, 2, 1.0, plan.gains[1]}, TapSet::direct(1.0)}};

    const std::vector<double> alpha0{0.35, 0.8};
    const auto received = downlink_compose(users, alpha0, {}, nullptr, grid);
    const double gamma_star = downlink_gain(alpha0);

    // Decoding user 1's stream after rescaling by 1/(alpha0 gamma*) equals
    // decoding the unscaled composition.
    const std::vector<double> uplink = uplink_compose(users, nullptr, grid);
    for (std::size_t m = 0; m < 2; ++m) {
        const double scale = 1.0 / (alpha0[m] * gamma_star);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double o0 = to_unit_interval(received[m][i] * scale);
            const double o1 = to_unit_interval(received[m][i + 1] * scale);
            const double u0 = to_unit_interval(uplink[i]);
            const double u1 = to_unit_interval(uplink[i + 1]);
            const ThresholdDecision a = threshold_decode(o0, o1, spec);
            const ThresholdDecision b = threshold_decode(u0, u1, spec);
            CHECK(a.branch == b.branch);
        }
    }
}
