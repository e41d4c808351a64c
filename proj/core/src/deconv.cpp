#include "sidx/deconv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "sidx/csv.hpp"
#include "sidx/error.hpp"
#include "sidx/quadrature.hpp"

namespace sidx {

KernelSpec KernelSpec::triweight_fourier() {
    KernelSpec spec;
    spec.label = "triweight-fourier";
    spec.fourier = [](double t) {
        const double s = 1.0 - t * t;
        return std::abs(t) <= 1.0 ? s * s * s : 0.0;
    };
    spec.M0 = 1.0;
    spec.order = 2;
    return spec;
}

std::vector<double> DeconvConfig::equispaced(double a, double b, int points) {
    if (points < 2 || !(b > a)) config_error("grid: need at least two points on a nonempty window");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double step = (b - a) / (points - 1);
    for (int k = 0; k < points; ++k) grid[k] = a + step * k;
    grid.back() = b;
    return grid;
}

DeconvConfig DeconvConfig::defaults() {
    DeconvConfig config;
    config.grid = equispaced(-3.0, 3.0, 301);
    return config;
}

void DeconvConfig::validate() const {
    if (grid.size() < 2) config_error("deconv config: grid needs at least two points");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) config_error("deconv config: grid must be strictly increasing");
    if (!(eps > 0.0)) config_error("deconv config: derivative floor eps must be > 0");
    if (nodes < 64) config_error("deconv config: need at least 64 quadrature nodes");
    if (!kernel.fourier || !(kernel.M0 > 0.0)) config_error("deconv config: invalid kernel");
    if (bandwidth.kind == BandwidthMode::Kind::Fixed && !(bandwidth.value > 0.0))
        config_error("deconv config: fixed bandwidth must be > 0");
    if (!(mask_factor >= 0.0)) config_error("deconv config: mask factor must be >= 0");
}

// ---------------------------------------------------------------------------

DeconvKernel::DeconvKernel(double h, double varsigma, const KernelSpec& spec, int nodes) : h_(h) {
    if (!(h > 0.0)) config_error("deconvolution kernel: bandwidth must be > 0");
    if (nodes < 64) config_error("deconvolution kernel: need at least 64 quadrature nodes");
    const double rate = varsigma * varsigma / (2.0 * h * h);
    if (!std::isfinite(rate) || rate * spec.M0 * spec.M0 > 700.0)
        numerical_error("kernel overflow: varsigma / h too large for the deconvolution kernel");
    const QuadratureRule rule = gauss_legendre(nodes, 0.0, spec.M0);
    t_ = rule.nodes;
    c_.resize(t_.size());
    for (std::size_t k = 0; k < t_.size(); ++k)
        c_[k] = rule.weights[k] * spec.fourier(t_[k]) * std::exp(rate * t_[k] * t_[k]) / std::numbers::pi;
}

double DeconvKernel::operator()(double u) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < t_.size(); ++k) sum += c_[k] * std::cos(t_[k] * u);
    return sum;
}

double deconv_kernel_eval(double u, double h, double varsigma, const KernelSpec& spec, int nodes) {
    return DeconvKernel(h, varsigma, spec, nodes)(u);
}

double select_bandwidth(Eigen::Index n, double varsigma, const KernelSpec& spec, const BandwidthMode& mode) {
    if (n < 2) config_error("select_bandwidth: need n >= 2");
    if (mode.kind == BandwidthMode::Kind::Fixed) {
        if (!(mode.value > 0.0)) config_error("select_bandwidth: fixed bandwidth must be > 0");
        return mode.value;
    }
    const double m2s2 = spec.M0 * spec.M0 * varsigma * varsigma;
    double c_h = mode.value;
    if (c_h <= 0.0) c_h = m2s2 > 0.0 ? std::min(0.45 / m2s2, BandwidthMode::max_default_ch)
                                     : BandwidthMode::max_default_ch;
    if (!(2.0 * m2s2 * c_h < 1.0))
        config_error("bandwidth constraint violated: 2 M0^2 varsigma^2 c_h = " + std::to_string(2.0 * m2s2 * c_h) +
                     " >= 1");
    return 1.0 / std::sqrt(c_h * std::log(static_cast<double>(n)));
}

RawDeconv nw_deconv_grid(const IndexEstimate& index, const VectorXd& y, double h, const DeconvConfig& config) {
    config.validate();
    if (index.W.size() != y.size()) config_error("nw_deconv_grid: |W| != |y|");
    if (index.W.size() < 1) config_error("nw_deconv_grid: no observations");
    const DeconvKernel kernel(h, std::sqrt(index.varsigma2), config.kernel, config.nodes);
    const auto& t = kernel.frequencies();
    const auto& c = kernel.coefficients();
    const std::size_t K = t.size();

    // Characteristic sums at frequencies s_k = t_k / h.
    std::vector<double> cy(K, 0.0), sy(K, 0.0), c1(K, 0.0), s1(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const double s = t[k] / h;
        double acy = 0.0, asy = 0.0, ac1 = 0.0, as1 = 0.0;
        for (Eigen::Index i = 0; i < index.W.size(); ++i) {
            const double cs = std::cos(s * index.W(i));
            const double sn = std::sin(s * index.W(i));
            acy += y(i) * cs;
            asy += y(i) * sn;
            ac1 += cs;
            as1 += sn;
        }
        cy[k] = acy;
        sy[k] = asy;
        c1[k] = ac1;
        s1[k] = as1;
    }

    const double threshold = config.mask_factor * static_cast<double>(index.W.size());
    RawDeconv out;
    out.values.assign(config.grid.size(), 0.0);
    out.valid.assign(config.grid.size(), 0);
    out.denominators.assign(config.grid.size(), 0.0);
    bool any = false;
    for (std::size_t g = 0; g < config.grid.size(); ++g) {
        const double x = config.grid[g];
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double s = t[k] / h;
            const double cs = std::cos(s * x);
            const double sn = std::sin(s * x);
            num += c[k] * (cs * cy[k] + sn * sy[k]);
            den += c[k] * (cs * c1[k] + sn * s1[k]);
        }
        out.denominators[g] = den;
        if (std::abs(den) >= threshold && std::isfinite(num / den)) {
            out.values[g] = num / den;
            out.valid[g] = 1;
            any = true;
        }
    }
    if (!any) numerical_error("empty estimate: every grid point has negligible kernel mass");
    return out;
}

namespace {

// Nearest valid neighbor by grid distance; ties go left.
void fill_masked(const std::vector<double>& grid, std::vector<double>& values, const std::vector<char>& valid) {
    const std::size_t m = values.size();
    std::vector<double> filled = values;
    for (std::size_t g = 0; g < m; ++g) {
        if (valid[g]) continue;
        std::ptrdiff_t left = static_cast<std::ptrdiff_t>(g) - 1;
        while (left >= 0 && !valid[left]) --left;
        std::size_t right = g + 1;
        while (right < m && !valid[right]) ++right;
        if (left < 0) {
            filled[g] = values[right];
        } else if (right >= m) {
            filled[g] = values[left];
        } else {
            filled[g] = (grid[g] - grid[left] <= grid[right] - grid[g]) ? values[left] : values[right];
        }
    }
    values.swap(filled);
}

}  // namespace

LinkEstimate estimate_link(const IndexEstimate& index, const VectorXd& y, const DeconvConfig& config) {
    config.validate();
    const double varsigma = std::sqrt(index.varsigma2);
    const double h = select_bandwidth(index.W.size(), varsigma, config.kernel, config.bandwidth);
    RawDeconv raw = nw_deconv_grid(index, y, h, config);
    fill_masked(config.grid, raw.values, raw.valid);

    const GridFunction mono = monotonize(GridFunction{config.grid, raw.values}, config.monotonizer);

    LinkEstimate est;
    est.grid = config.grid;
    est.ghat = mono.vs;
    est.varsigma2 = index.varsigma2;
    est.h = h;
    est.a = config.grid.front();
    est.b = config.grid.back();
    est.eps = config.eps;

    const std::size_t m = est.grid.size();
    est.ghat_deriv.resize(m);
    for (std::size_t g = 0; g < m; ++g) {
        const std::size_t lo = g == 0 ? 0 : g - 1;
        const std::size_t hi = g + 1 == m ? g : g + 1;
        const double slope = (est.ghat[hi] - est.ghat[lo]) / (est.grid[hi] - est.grid[lo]);
        est.ghat_deriv[g] = std::max(slope, config.eps);
    }
    return est;
}

LinkValue eval_link(const LinkEstimate& est, double x) {
    const auto& xs = est.grid;
    const auto& gs = est.ghat;
    const std::size_t m = xs.size();
    if (x <= xs.front()) {
        const double s = est.ghat_deriv.front();
        return {gs.front() + s * (x - xs.front()), s};
    }
    if (x >= xs.back()) {
        const double s = est.ghat_deriv.back();
        return {gs.back() + s * (x - xs.back()), s};
    }
    // segment k with xs[k] <= x < xs[k+1]
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    const std::size_t k1 = std::min(k + 1, m - 1);
    const double slope = (gs[k1] - gs[k]) / (xs[k1] - xs[k]);
    return {gs[k] + slope * (x - xs[k]), std::max(slope, est.eps)};
}

void write_link_csv(const LinkEstimate& est, std::ostream& out) {
    out << "x,ghat,ghat_deriv\n";
    for (std::size_t g = 0; g < est.grid.size(); ++g)
        out << format_double(est.grid[g]) << ',' << format_double(est.ghat[g]) << ','
            << format_double(est.ghat_deriv[g]) << '\n';
}

}  // namespace sidx
