#include <doctest.h>

#include <cmath>
#include <vector>

#include "chaoscomm/lyapunov.hpp"
#include "chaoscomm/maps.hpp"

using namespace chaoscomm;

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;
const OscParams kP1 = OscParams::make(kLn2, 1.0);

MapStep natural_direct(double r) {
    if (r == 0.0)
        return {direct_path_map(r, 1, kP1), std::nan("")};
    const int s = r >= 0.0 ? 1 : -1;
    return {direct_path_map(r, s, kP1), kP1.growth()};
}
} // namespace

TEST_CASE("map LE of the direct-path dynamics is the per-period rate") {
    const LESpectrum spec = le_map_1d(natural_direct, 0.37, 100000);
    CHECK(spec.exponents.size() == 1);
    CHECK(std::abs(spec.exponents[0] - kLn2) < 1e-12);
    CHECK(spec.unit == LEUnit::nepits_per_period);
}

TEST_CASE("map LE of the double shift is two bits per period") {
    auto shift2 = [](double u) {
        if (4.0 * u == std::floor(4.0 * u))
            return MapStep{shift_map(u, 2).u_next, std::nan("")};
        return MapStep{shift_map(u, 2).u_next, 4.0};
    };
    const LESpectrum spec = le_map_1d(shift2, 0.323, 100000);
    CHECK(std::abs(spec.exponents[0] - 2.0 * kLn2) < 1e-12);
    // The float orbit eventually hits an exact dyadic point and sticks at 0;
    // those points are skipped and counted, never averaged.
    CHECK(spec.n_steps + spec.skipped == 100000);
}

TEST_CASE("interference leaves the map LE unchanged") {
    for (double c : {0.0, 0.05, -0.3}) {
        auto interfering = [c](double r) {
            const double underlying = r - c;
            if (underlying == 0.0)
                return MapStep{interference_map(r, 1, c, 1.0, kP1), std::nan("")};
            const int s = underlying >= 0.0 ? 1 : -1;
            return MapStep{interference_map(r, s, c, 1.0, kP1), kP1.growth()};
        };
        const LESpectrum spec = le_map_1d(interfering, 0.37 + c, 100000);
        CHECK(std::abs(spec.exponents[0] - kLn2) < 1e-3);
    }
}

TEST_CASE("derivative-undefined points raise when nothing remains") {
    auto degenerate = [](double) { return MapStep{0.0, std::nan("")}; };
    CHECK_THROWS_AS(le_map_1d(degenerate, 0.5, 100), DomainError);
}

TEST_CASE("QR spectrum of the composed-map Jacobian") {
    Eigen::MatrixXd j(2, 2);
    j << 4.0, -0.4, 0.0, 2.0;
    const LESpectrum spec = le_qr(std::vector<Eigen::MatrixXd>(5000, j));
    REQUIRE(spec.exponents.size() == 2);
    CHECK(std::abs(spec.exponents[0] - std::log(4.0)) < 1e-10);
    CHECK(std::abs(spec.exponents[1] - std::log(2.0)) < 1e-10);

    // Union identity: the composed spectrum is the per-user map LEs.
    const LESpectrum user1 = le_map_1d(natural_direct, 0.37, 20000);
    auto shift2 = [](double u) {
        if (4.0 * u == std::floor(4.0 * u))
            return MapStep{shift_map(u, 2).u_next, std::nan("")};
        return MapStep{shift_map(u, 2).u_next, 4.0};
    };
    const LESpectrum user2 = le_map_1d(shift2, 0.323, 20000);
    CHECK(std::abs(spec.exponents[0] - user2.exponents[0]) < 1e-12);
    CHECK(std::abs(spec.exponents[1] - user1.exponents[0]) < 1e-12);
}

TEST_CASE("QR spectrum of the identity is zero") {
    const LESpectrum spec = le_qr(std::vector<Eigen::MatrixXd>(100, Eigen::MatrixXd::Identity(2, 2)));
    CHECK(spec.exponents[0] == 0.0);
    CHECK(spec.exponents[1] == 0.0);
}

TEST_CASE("QR estimator on tangent maps of the Roessler flow") {
    // Independent oracle route: per-step tangent propagators accumulated by
    // a local RK4, fed to le_qr; signs of the spectrum must come out as
    // (+, ~0, -).
    const double a = 0.2, b = 0.2, c = 5.7;
    Eigen::Vector3d x(1.0, 1.0, 1.0);
    auto rhs = [&](const Eigen::Vector3d& v) {
        return Eigen::Vector3d(-v.y() - v.z(), v.x() + a * v.y(), b + v.z() * (v.x() - c));
    };
    auto jac = [&](const Eigen::Vector3d& v) {
        Eigen::Matrix3d m;
        m << 0, -1, -1, 1, a, 0, v.z(), 0, v.x() - c;
        return m;
    };
    const double dt = 0.01;
    auto flow_step = [&](Eigen::Vector3d& v, Eigen::Matrix3d& tangent) {
        const Eigen::Vector3d k1 = rhs(v);
        const Eigen::Matrix3d m1 = jac(v) * tangent;
        const Eigen::Vector3d k2 = rhs(v + 0.5 * dt * k1);
        const Eigen::Matrix3d m2 = jac(v + 0.5 * dt * k1) * (tangent + 0.5 * dt * m1);
        const Eigen::Vector3d k3 = rhs(v + 0.5 * dt * k2);
        const Eigen::Matrix3d m3 = jac(v + 0.5 * dt * k2) * (tangent + 0.5 * dt * m2);
        const Eigen::Vector3d k4 = rhs(v + dt * k3);
        const Eigen::Matrix3d m4 = jac(v + dt * k3) * (tangent + dt * m3);
        v += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        tangent += dt / 6.0 * (m1 + 2 * m2 + 2 * m3 + m4);
    };

    for (int i = 0; i < 20000; ++i) {
        Eigen::Matrix3d ignore = Eigen::Matrix3d::Identity();
        flow_step(x, ignore);
    }
    std::vector<Eigen::MatrixXd> tangents;
    tangents.reserve(200000);
    for (int i = 0; i < 200000; ++i) {
        Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
        flow_step(x, t);
        tangents.push_back(t);
    }
    const LESpectrum spec = le_qr(tangents, "roessler_tangent");
    // Per step of dt: convert to per unit time.
    const double l1 = spec.exponents[0] / dt;
    const double l2 = spec.exponents[1] / dt;
    const double l3 = spec.exponents[2] / dt;
    CHECK(l1 > 0.02);
    CHECK(l1 < 0.2);
    CHECK(std::abs(l2) < 1e-2);
    CHECK(l3 < -4.0);
}

TEST_CASE("singular Jacobians are rejected") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(le_qr({z}), SingularJacobian);
}

TEST_CASE("continuous hybrid exponents are the degenerate pair beta") {
    const LESpectrum f1 = le_continuous_hybrid(kP1, 500.0 * kP1.period);
    REQUIRE(f1.exponents.size() == 2);
    CHECK(std::abs(f1.exponents[0] - kP1.beta) < 0.02 * kP1.beta);
    CHECK(std::abs(f1.exponents[1] - kP1.beta) < 0.02 * kP1.beta);
    CHECK(f1.unit == LEUnit::nepits_per_time);

    const OscParams p2 = OscParams::make(kLn2, 2.0);
    const LESpectrum f2 = le_continuous_hybrid(p2, 500.0 * p2.period);
    CHECK(std::abs(f2.exponents[0] - 2.0 * kLn2) < 0.02 * 2.0 * kLn2);

    const LESpectrum rev = le_continuous_hybrid(kP1, 500.0 * kP1.period, true);
    CHECK(std::abs(rev.exponents[0] + kP1.beta) < 0.02 * kP1.beta);
    CHECK(std::abs(rev.exponents[1] + kP1.beta) < 0.02 * kP1.beta);

    CHECK_THROWS_AS(le_continuous_hybrid(kP1, 10.0), DomainError);
}

TEST_CASE("Roessler pair scales with the frequency ratio") {
    const auto [u1, u2] = le_rossler_pair(0.2, 0.2, 5.7, 2.0, 300000, 0.01);
    REQUIRE(u1.spectrum.exponents.size() == 3);

    // Q = 1: two independent runs of the same system agree within the
    // finite-time fluctuation scale.
    const auto [same1, same2] = le_rossler_pair(0.2, 0.2, 5.7, 1.0, 300000, 0.01);
    for (int i = 0; i < 3; ++i) {
        const double d = std::abs(same1.spectrum.exponents[static_cast<std::size_t>(i)] -
                                  same2.spectrum.exponents[static_cast<std::size_t>(i)]);
        CHECK(d < std::max(0.02, 0.05 * std::abs(same1.spectrum.exponents[static_cast<std::size_t>(i)])));
    }

    // Componentwise doubling; the near-zero exponent gets an absolute floor.
    for (int i = 0; i < 3; ++i) {
        const double expected = 2.0 * u1.spectrum.exponents[static_cast<std::size_t>(i)];
        const double got = u2.spectrum.exponents[static_cast<std::size_t>(i)];
        const double tol = std::max(0.05 * std::abs(expected), 0.02);
        CHECK(std::abs(got - expected) < tol);
    }

    // Divergence identity: sum of exponents equals the orbit-mean trace.
    const double sum1 = u1.spectrum.exponents[0] + u1.spectrum.exponents[1] + u1.spectrum.exponents[2];
    CHECK(std::abs(sum1 - u1.mean_trace) < 0.02 * std::abs(u1.mean_trace));
    const double sum2 = u2.spectrum.exponents[0] + u2.spectrum.exponents[1] + u2.spectrum.exponents[2];
    CHECK(std::abs(sum2 - u2.mean_trace) < 0.02 * std::abs(u2.mean_trace));
}

TEST_CASE("delay-embedded Jacobian structure") {
    const Eigen::Vector3d s1(1.0, 2.0, 3.0);
    const Eigen::Vector3d s2(0.5, -1.0, 2.0);
    const int n = 4;
    const double dt = 0.05;
    const Eigen::MatrixXd j = delay_embedded_jacobian(0.2, 5.7, 2.0, n, dt, s1, s2, 0.3, 0.7);
    REQUIRE(j.rows() == 2 * n + 7);

    // Dynamical blocks match the two attractor Jacobians.
    CHECK(j(2, 0) == s1.z());
    CHECK(j(2, 2) == s1.x() - 5.7);
    const int u2 = 3 + 2 * n;
    CHECK(j(u2 + 2, u2) == 2.0 * s2.z());
    CHECK(j(u2 + 2, u2 + 2) == 2.0 * (s2.x() - 5.7));

    // Delay chains carry the (Q dt)^-1 and dt^-1 entries.
    CHECK(j(3, 3) == 1.0 / (2.0 * dt));
    CHECK(j(3, 4) == -1.0 / (2.0 * dt));
    CHECK(j(3 + n, 0) == 1.0 / dt);
    CHECK(j(3 + n, 3) == -1.0 / dt);
    CHECK(j(3 + n + 1, 3 + n) == 1.0 / dt);
}

TEST_CASE("unit conversion round trip") {
    LESpectrum spec;
    spec.exponents = {2.0 * kLn2, kLn2};
    spec.unit = LEUnit::nepits_per_period;
    const LESpectrum bits = convert(spec, LEUnit::bits_per_period, 1.0);
    CHECK(bits.exponents[0] == doctest::Approx(2.0).epsilon(1e-15));
    const LESpectrum back = convert(bits, LEUnit::nepits_per_period, 1.0);
    CHECK(std::abs(back.exponents[0] - spec.exponents[0]) < 1e-15);
    CHECK(std::abs(back.exponents[1] - spec.exponents[1]) < 1e-15);

    const LESpectrum per_time = convert(spec, LEUnit::nepits_per_time, 2.0);
    CHECK(per_time.exponents[0] == doctest::Approx(4.0 * kLn2).epsilon(1e-15));
}

TEST_CASE("shift-map LE equals the symbol entropy per period") {
    // One bit per period for k = 1, two bits for k = 2.
    const LESpectrum user1 = le_map_1d(natural_direct, 0.37, 50000);
    CHECK(convert(user1, LEUnit::bits_per_period, 1.0).exponents[0] ==
          doctest::Approx(1.0).epsilon(1e-12));
    auto shift2 = [](double u) {
        if (4.0 * u == std::floor(4.0 * u))
            return MapStep{shift_map(u, 2).u_next, std::nan("")};
        return MapStep{shift_map(u, 2).u_next, 4.0};
    };
    const LESpectrum user2 = le_map_1d(shift2, 0.323, 50000);
    CHECK(convert(user2, LEUnit::bits_per_period, 1.0).exponents[0] ==
          doctest::Approx(2.0).epsilon(1e-12));
}
