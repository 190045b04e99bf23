#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chaoscomm/oscillator.hpp"

namespace chaoscomm {

enum class LEUnit {
    nepits_per_period,
    nepits_per_time,
    bits_per_period,
};

const char* to_string(LEUnit unit);

/// Ordered Lyapunov spectrum with its unit attached.
struct LESpectrum {
    std::vector<double> exponents; ///< descending
    LEUnit unit = LEUnit::nepits_per_period;
    long n_steps = 0;
    std::string system;
    long skipped = 0; ///< points with undefined derivative (1-D maps only)
};

/// Unit conversion: bits = nepits / ln 2, per-time = per-period * freq.
LESpectrum convert(const LESpectrum& spec, LEUnit target, double freq);

/// One evaluation of a 1-D map together with its branch derivative; slope is
/// NaN exactly on a branch boundary, where the estimator skips the point.
struct MapStep {
    double next;
    double slope;
};

/// Derivative-product estimate (1/n) sum ln |f'(x_i)| along the orbit of x0.
LESpectrum le_map_1d(const std::function<MapStep(double)>& map, double x0, long n,
                     std::string label = "map");

/// Benettin/QR spectrum of a product of per-step Jacobians: exponents are
/// the mean logs of the R diagonals under reorthonormalisation every step.
/// Throws SingularJacobian when a diagonal collapses.
LESpectrum le_qr(const std::vector<Eigen::MatrixXd>& jacobians, std::string label = "map");

/// Variational exponents of the continuous hybrid oscillator.  Perturbations
/// live in the (x, x') plane with constant Jacobian [[0, 1], [-(w^2+b^2), 2b]]
/// and pass through switch events unchanged (the discrete state carries no
/// perturbation); the spectrum is the degenerate pair (beta, beta) in nepits
/// per unit time.  time_reversed integrates the stable filter copy instead,
/// giving (-beta, -beta).  Requires duration >= 500 periods.
LESpectrum le_continuous_hybrid(const OscParams& params, double duration,
                                bool time_reversed = false, int steps_per_period = 2000);

struct FlowSpectrum {
    LESpectrum spectrum;
    double mean_trace = 0.0; ///< orbit average of tr(J); equals sum of exponents
};

/// Spectra of the two diagonal dynamical blocks of the composed two-user
/// Roessler system: the base attractor and its Q-times-faster copy.  The
/// second block's spectrum is Q times the first.  mean_trace provides the
/// divergence identity check sum(lambda) = <tr J>.
std::pair<FlowSpectrum, FlowSpectrum> le_rossler_pair(double a, double b, double c, double Q,
                                                      long steps = 1000000, double dt = 0.01,
                                                      int renorm_every = 10);

/// Jacobian of the delay-embedded ODE system describing the composed
/// two-user Roessler signal: the two dynamical blocks above plus the
/// delay-line chains whose +-(Q dt)^-1 entries produce exponents that
/// diverge as the embedding step shrinks.  Provided for inspection only;
/// the spurious chain exponents make the full matrix useless for spectrum
/// estimation, which is why only the diagonal blocks are measured.
/// State dimension is 2N + 7 for N delay cells.
Eigen::MatrixXd delay_embedded_jacobian(double a, double c, double Q, int n_cells,
                                        double delta_t, const Eigen::Vector3d& state1,
                                        const Eigen::Vector3d& state2, double alpha1,
                                        double alpha2);

} // namespace chaoscomm
