#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sidx/index.hpp"
#include "sidx/monotonize.hpp"

namespace sidx {

/// Kernel described by its Fourier transform phi_K, supported on [-M0, M0].
struct KernelSpec {
    std::string label = "triweight-fourier";
    std::function<double(double)> fourier;
    double M0 = 1.0;
    int order = 2;

    /// phi_K(t) = (1 - t^2)^3 on [-1, 1]; a second-order kernel.
    static KernelSpec triweight_fourier();
};

struct BandwidthMode {
    enum class Kind { Fixed, Theory };
    Kind kind = Kind::Theory;
    /// Fixed: the bandwidth h. Theory: the constant c_h; a value <= 0 selects the
    /// default c_h = 0.45 / (M0^2 varsigma^2), capped at `max_default_ch`.
    double value = 0.0;

    static constexpr double max_default_ch = 8.0;

    static BandwidthMode fixed(double h) { return {Kind::Fixed, h}; }
    static BandwidthMode theory(double c_h = 0.0) { return {Kind::Theory, c_h}; }
};

struct DeconvConfig {
    std::vector<double> grid;  // strictly increasing; window [a, b] = [grid.front(), grid.back()]
    BandwidthMode bandwidth = BandwidthMode::theory();
    int nodes = 256;
    Monotonizer monotonizer = Monotonizer::Rearrange;
    double eps = 1e-3;           // derivative floor
    double mask_factor = 1e-8;   // grid points with |denominator| < mask_factor * n are invalid
    KernelSpec kernel = KernelSpec::triweight_fourier();

    /// 301 equispaced points on [-3, 3], theory bandwidth, rearrangement.
    static DeconvConfig defaults();
    static std::vector<double> equispaced(double a, double b, int points);

    void validate() const;
};

/// Monotone link estimate on a grid.
struct LinkEstimate {
    std::vector<double> grid;
    std::vector<double> ghat;
    std::vector<double> ghat_deriv;
    double varsigma2 = 0.0;
    double h = 0.0;
    double a = 0.0;
    double b = 0.0;
    double eps = 1e-3;
};

/// Precomputed quadrature form of the deconvolution kernel
///   K_n(u) = (1/pi) int_0^{M0} cos(t u) phi_K(t) exp(t^2 varsigma^2 / (2 h^2)) dt.
class DeconvKernel {
public:
    /// Throws a numerical error when the exponential factor overflows.
    DeconvKernel(double h, double varsigma, const KernelSpec& spec, int nodes);

    double operator()(double u) const;

    const std::vector<double>& frequencies() const { return t_; }
    /// c_k = w_k phi_K(t_k) exp(t_k^2 varsigma^2 / (2 h^2)) / pi
    const std::vector<double>& coefficients() const { return c_; }
    double h() const { return h_; }

private:
    std::vector<double> t_;
    std::vector<double> c_;
    double h_;
};

double deconv_kernel_eval(double u, double h, double varsigma, const KernelSpec& spec, int nodes = 256);

/// Fixed mode returns h; theory mode returns (c_h log n)^{-1/2} after checking 2 M0^2 varsigma^2 c_h < 1.
double select_bandwidth(Eigen::Index n, double varsigma, const KernelSpec& spec, const BandwidthMode& mode);

struct RawDeconv {
    std::vector<double> values;
    std::vector<char> valid;
    std::vector<double> denominators;
};

/// Deconvolution Nadaraya-Watson ratio at every grid point.
///
/// Uses cos(s(x - W)) = cos(sx)cos(sW) + sin(sx)sin(sW) so that the data enter only
/// through the empirical characteristic sums at the quadrature frequencies; the
/// cost is O((n + |grid|) * nodes) instead of O(n * |grid| * nodes).
RawDeconv nw_deconv_grid(const IndexEstimate& index, const VectorXd& y, double h, const DeconvConfig& config);

LinkEstimate estimate_link(const IndexEstimate& index, const VectorXd& y, const DeconvConfig& config);

struct LinkValue {
    double g;
    double dg;
};

/// Piecewise-linear interpolation on the grid, linear extrapolation with the
/// boundary slope outside. Derivative is the local slope floored at eps.
LinkValue eval_link(const LinkEstimate& est, double x);

/// Columns: x, ghat, ghat_deriv.
void write_link_csv(const LinkEstimate& est, std::ostream& out);

}  // namespace sidx
