#include "chaoscomm/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace chaoscomm {

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;

// Compensated accumulator: the spectra are means over up to 10^6 identical
// log terms, where plain summation would cost ~1e-11 of the tight
// spectrum-identity tolerances.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// QR factorisation with positive R diagonal; Q is overwritten in place and
// the log-diagonals are accumulated into log_sums.
void qr_accumulate(Eigen::MatrixXd& basis, std::vector<KahanSum>& log_sums) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        const double d = r(i, i);
        if (std::abs(d) < 1e-300)
            throw SingularJacobian("QR diagonal collapsed during spectrum estimation");
        if (d < 0.0)
            q.col(i) = -q.col(i);
        log_sums[static_cast<std::size_t>(i)].add(std::log(std::abs(d)));
    }
    basis = q;
}
} // namespace

const char* to_string(LEUnit unit) {
    switch (unit) {
    case LEUnit::nepits_per_period: return "nepits_per_period";
    case LEUnit::nepits_per_time: return "nepits_per_time";
    case LEUnit::bits_per_period: return "bits_per_period";
    }
    return "unknown";
}

LESpectrum convert(const LESpectrum& spec, LEUnit target, double freq) {
    if (!(freq > 0.0))
        throw DomainError("unit conversion needs a positive frequency");
    auto per_period = [&](double v) {
        switch (spec.unit) {
        case LEUnit::nepits_per_period: return v;
        case LEUnit::nepits_per_time: return v / freq;
        case LEUnit::bits_per_period: return v * kLn2;
        }
        return v;
    };
    LESpectrum out = spec;
    out.unit = target;
    for (double& v : out.exponents) {
        const double nep = per_period(v);
        switch (target) {
        case LEUnit::nepits_per_period: v = nep; break;
        case LEUnit::nepits_per_time: v = nep * freq; break;
        case LEUnit::bits_per_period: v = nep / kLn2; break;
        }
    }
    return out;
}

LESpectrum le_map_1d(const std::function<MapStep(double)>& map, double x0, long n,
                     std::string label) {
    if (n < 1)
        throw DomainError("need at least one iteration");
    double x = x0;
    KahanSum acc;
    long used = 0;
    long skipped = 0;
    for (long i = 0; i < n; ++i) {
        const MapStep step = map(x);
        if (std::isnan(step.slope)) {
            ++skipped; // branch boundary: derivative undefined there
        } else {
            acc.add(std::log(std::abs(step.slope)));
            ++used;
        }
        x = step.next;
    }
    if (used == 0)
        throw DomainError("no points with a defined derivative");
    LESpectrum spec;
    spec.exponents = {acc.sum / static_cast<double>(used)};
    spec.unit = LEUnit::nepits_per_period;
    spec.n_steps = used;
    spec.skipped = skipped;
    spec.system = std::move(label);
    return spec;
}

LESpectrum le_qr(const std::vector<Eigen::MatrixXd>& jacobians, std::string label) {
    if (jacobians.empty())
        throw DomainError("empty Jacobian sequence");
    const Eigen::Index dim = jacobians.front().rows();
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(dim, dim);
    std::vector<KahanSum> sums(static_cast<std::size_t>(dim));
    for (const Eigen::MatrixXd& j : jacobians) {
        if (j.rows() != dim || j.cols() != dim)
            throw DomainError("Jacobian dimensions must agree");
        basis = j * basis;
        qr_accumulate(basis, sums);
    }
    LESpectrum spec;
    spec.unit = LEUnit::nepits_per_period;
    spec.n_steps = static_cast<long>(jacobians.size());
    spec.system = std::move(label);
    spec.exponents.reserve(sums.size());
    for (const KahanSum& s : sums)
        spec.exponents.push_back(s.sum / static_cast<double>(jacobians.size()));
    std::sort(spec.exponents.rbegin(), spec.exponents.rend());
    return spec;
}

LESpectrum le_continuous_hybrid(const OscParams& params, double duration, bool time_reversed,
                                int steps_per_period) {
    params.validate();
    if (duration < 500.0 * params.period)
        throw DomainError("variational run must cover at least 500 periods");
    const double dt = params.period / static_cast<double>(steps_per_period);
    const double stiffness = params.omega * params.omega + params.beta * params.beta;
    const double two_beta = (time_reversed ? -2.0 : 2.0) * params.beta;

    // The hybrid flow is integrated alongside even though the variational
    // matrix is state independent: perturbations are confined to the (x, x')
    // plane and pass through the switch events unchanged.
    HybridState flow{0.1, 0.0, 1, 0.0};
    Eigen::Matrix2d j;
    j << 0.0, 1.0, -stiffness, two_beta;

    auto flow_rhs = [&](double x, double v, double s) {
        return std::pair<double, double>{v, two_beta * v - stiffness * (x - s)};
    };
    auto var_rhs = [&](const Eigen::Matrix2d& d) -> Eigen::Matrix2d { return j * d; };

    Eigen::Matrix2d basis = Eigen::Matrix2d::Identity();
    std::vector<KahanSum> sums(2);
    const long n_steps = static_cast<long>(std::llround(duration / dt));
    double prev_v = flow.xdot;
    long renorm_count = 0;

    for (long i = 0; i < n_steps; ++i) {
        // RK4 on the flow.
        const double s = static_cast<double>(flow.s);
        auto [k1x, k1v] = flow_rhs(flow.x, flow.xdot, s);
        auto [k2x, k2v] = flow_rhs(flow.x + 0.5 * dt * k1x, flow.xdot + 0.5 * dt * k1v, s);
        auto [k3x, k3v] = flow_rhs(flow.x + 0.5 * dt * k2x, flow.xdot + 0.5 * dt * k2v, s);
        auto [k4x, k4v] = flow_rhs(flow.x + dt * k3x, flow.xdot + dt * k3v, s);
        flow.x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        flow.xdot += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!std::isfinite(flow.x) || !std::isfinite(flow.xdot))
            throw NonFiniteState("hybrid flow overflow in variational run");
        if (prev_v * flow.xdot < 0.0 && std::abs(flow.x) < 1.0)
            flow.s = flow.x >= 0.0 ? 1 : -1; // guard switch, grid resolution
        prev_v = flow.xdot;

        // RK4 on the (constant-coefficient) variational system.
        const Eigen::Matrix2d d1 = var_rhs(basis);
        const Eigen::Matrix2d d2 = var_rhs(basis + 0.5 * dt * d1);
        const Eigen::Matrix2d d3 = var_rhs(basis + 0.5 * dt * d2);
        const Eigen::Matrix2d d4 = var_rhs(basis + dt * d3);
        basis += dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);

        if ((i + 1) % 10 == 0 || i + 1 == n_steps) { // flow systems: renormalise every 10 steps
            Eigen::MatrixXd b = basis;
            qr_accumulate(b, sums);
            basis = b;
            ++renorm_count;
        }
    }

    LESpectrum spec;
    spec.unit = LEUnit::nepits_per_time;
    spec.n_steps = n_steps;
    spec.system = time_reversed ? "hybrid_oscillator_reversed" : "hybrid_oscillator";
    const double t_total = static_cast<double>(n_steps) * dt;
    spec.exponents = {sums[0].sum / t_total, sums[1].sum / t_total};
    std::sort(spec.exponents.rbegin(), spec.exponents.rend());
    return spec;
}

namespace {

struct RosslerState {
    Eigen::Vector3d x;
    Eigen::Matrix3d basis;
};

Eigen::Vector3d rossler_rhs(const Eigen::Vector3d& v, double a, double b, double c, double q) {
    return q * Eigen::Vector3d(-v.y() - v.z(), v.x() + a * v.y(), b + v.z() * (v.x() - c));
}

Eigen::Matrix3d rossler_jacobian(const Eigen::Vector3d& v, double a, double c, double q) {
    Eigen::Matrix3d j;
    j << 0.0, -1.0, -1.0,
         1.0, a, 0.0,
         v.z(), 0.0, v.x() - c;
    return q * j;
}

void rossler_step(RosslerState& st, double a, double b, double c, double q, double dt) {
    const Eigen::Vector3d k1 = rossler_rhs(st.x, a, b, c, q);
    const Eigen::Matrix3d m1 = rossler_jacobian(st.x, a, c, q) * st.basis;
    const Eigen::Vector3d x2 = st.x + 0.5 * dt * k1;
    const Eigen::Vector3d k2 = rossler_rhs(x2, a, b, c, q);
    const Eigen::Matrix3d m2 = rossler_jacobian(x2, a, c, q) * (st.basis + 0.5 * dt * m1);
    const Eigen::Vector3d x3 = st.x + 0.5 * dt * k2;
    const Eigen::Vector3d k3 = rossler_rhs(x3, a, b, c, q);
    const Eigen::Matrix3d m3 = rossler_jacobian(x3, a, c, q) * (st.basis + 0.5 * dt * m2);
    const Eigen::Vector3d x4 = st.x + dt * k3;
    const Eigen::Vector3d k4 = rossler_rhs(x4, a, b, c, q);
    const Eigen::Matrix3d m4 = rossler_jacobian(x4, a, c, q) * (st.basis + dt * m3);
    st.x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    st.basis += dt / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
}

FlowSpectrum rossler_block_spectrum(double a, double b, double c, double q, long steps,
                                    double dt, int renorm_every, const char* label,
                                    const Eigen::Vector3d& init) {
    RosslerState st{init, Eigen::Matrix3d::Identity()};
    // Transient off the initial condition before measuring.
    const long transient = 20000;
    for (long i = 0; i < transient; ++i) {
        rossler_step(st, a, b, c, q, dt);
        if ((i + 1) % renorm_every == 0) {
            Eigen::MatrixXd bb = st.basis;
            std::vector<KahanSum> scratch(3);
            qr_accumulate(bb, scratch);
            st.basis = bb;
        }
    }

    std::vector<KahanSum> sums(3);
    KahanSum trace_acc;
    for (long i = 0; i < steps; ++i) {
        trace_acc.add(rossler_jacobian(st.x, a, c, q).trace());
        rossler_step(st, a, b, c, q, dt);
        if (!st.x.allFinite())
            throw NonFiniteState("Roessler orbit overflow");
        if ((i + 1) % renorm_every == 0 || i + 1 == steps) {
            Eigen::MatrixXd bb = st.basis;
            qr_accumulate(bb, sums);
            st.basis = bb;
        }
    }

    FlowSpectrum out;
    const double t_total = static_cast<double>(steps) * dt;
    out.spectrum.unit = LEUnit::nepits_per_time;
    out.spectrum.n_steps = steps;
    out.spectrum.system = label;
    out.spectrum.exponents = {sums[0].sum / t_total, sums[1].sum / t_total, sums[2].sum / t_total};
    std::sort(out.spectrum.exponents.rbegin(), out.spectrum.exponents.rend());
    out.mean_trace = trace_acc.sum / static_cast<double>(steps);
    return out;
}

} // namespace

std::pair<FlowSpectrum, FlowSpectrum> le_rossler_pair(double a, double b, double c, double Q,
                                                      long steps, double dt, int renorm_every) {
    if (!(Q > 0.0))
        throw DomainError("frequency ratio Q must be positive");
    if (steps < 1000)
        throw DomainError("spectrum run too short");
    // The faster copy is integrated with a proportionally smaller step so
    // both blocks resolve their cycles equally well, and from a different
    // initial condition so the two spectra are statistically independent
    // estimates rather than one rescaled computation.
    FlowSpectrum user1 = rossler_block_spectrum(a, b, c, 1.0, steps, dt, renorm_every,
                                                "roessler_user1", Eigen::Vector3d(1.0, 1.0, 1.0));
    FlowSpectrum user2 = rossler_block_spectrum(a, b, c, Q, steps, dt / Q, renorm_every,
                                                "roessler_user2", Eigen::Vector3d(0.0, -6.0, 0.01));
    return {user1, user2};
}

Eigen::MatrixXd delay_embedded_jacobian(double a, double c, double Q, int n_cells,
                                        double delta_t, const Eigen::Vector3d& state1,
                                        const Eigen::Vector3d& state2, double alpha1,
                                        double alpha2) {
    if (n_cells < 2)
        throw DomainError("need at least two delay cells");
    // Layout: [x1 y1 z1 | w^1x_1..w^1x_N | w^2x_0..w^2x_{N-1} | x2 y2 z2 | O]
    const int n = n_cells;
    const int dim = 2 * n + 7;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);

    const int u2 = 3 + n + n; // first index of the user-2 block
    const int o = dim - 1;

    jac.block<3, 3>(0, 0) = rossler_jacobian(state1, a, c, 1.0);
    jac.block<3, 3>(u2, u2) = rossler_jacobian(state2, a, c, Q);

    // Slow delay chain w_k(t) = x1(t - Q k dt): forward differencing gives
    // dw_k/dt = (w_k - w_{k+1})/(Q dt).  The chain entries are what
    // generates the spurious (Q dt)^-1 exponents.
    const double inv_q_dt = 1.0 / (Q * delta_t);
    for (int k = 0; k < n; ++k) {
        const int row = 3 + k; // holds w_{k+1}
        jac(row, row) = inv_q_dt;
        if (k + 1 < n)
            jac(row, row + 1) = -inv_q_dt;
    }
    // Fast chain head couples into the slow chain,
    // dw_0^{2x}/dt = (w_0^{1x} - w_1^{1x})/dt, then transports along itself.
    const double inv_dt = 1.0 / delta_t;
    jac(3 + n, 0) = inv_dt;
    jac(3 + n, 3) = -inv_dt;
    for (int k = 1; k < n; ++k) {
        const int row = 3 + n + k;
        jac(row, row - 1) = inv_dt;
        jac(row, row) = -inv_dt;
    }
    // Received signal O' = alpha1 x1' + alpha2 x2'.
    jac(o, 1) = -alpha1;
    jac(o, 2) = -alpha1;
    jac(o, u2 + 1) = -Q * alpha2;
    jac(o, u2 + 2) = -Q * alpha2;
    return jac;
}

} // namespace chaoscomm
