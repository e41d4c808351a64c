#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <doctest.h>

#include "sidx/deconv.hpp"
#include "sidx/model.hpp"
#include "sidx/quadrature.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace sidx;
using testing_support::gaussian_vector;
using testing_support::linspace;
using testing_support::throws_kind;

namespace {

// Composite Simpson of K_n over [-L, L].
double kernel_mass(const DeconvKernel& k, double L, int panels) {
    const double step = 2.0 * L / panels;
    double sum = k(-L) + k(L);
    for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * k(-L + i * step);
    return sum * step / 3.0;
}

}  // namespace

TEST_SUITE("quadrature") {
    TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
        const QuadratureRule r = gauss_legendre(5, -1.0, 2.0);
        double s = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 9);
        CHECK(s == doctest::Approx((std::pow(2.0, 10) - 1.0) / 10.0).epsilon(1e-13));
        CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(3.0).epsilon(1e-14));
    }

    TEST_CASE("Gauss-Legendre handles oscillatory integrands") {
        const QuadratureRule r = gauss_legendre(256, 0.0, 1.0);
        double s = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::cos(40.0 * r.nodes[i]);
        CHECK(s == doctest::Approx(std::sin(40.0) / 40.0).epsilon(1e-12));
        CHECK(throws_kind([] { gauss_legendre(0, 0.0, 1.0); }, ErrorKind::Config));
    }
}

TEST_SUITE("deconv") {
    TEST_CASE("kernel value at the origin without noise") {
        const double k0 = deconv_kernel_eval(0.0, 0.5, 0.0, KernelSpec::triweight_fourier());
        CHECK(k0 == doctest::Approx(16.0 / (35.0 * std::numbers::pi)).epsilon(1e-12));
        CHECK(k0 == doctest::Approx(0.145513).epsilon(1e-5));
    }

    TEST_CASE("kernel is even") {
        const DeconvKernel k(0.4, 0.25, KernelSpec::triweight_fourier(), 256);
        for (double u : {0.3, 1.7, 4.2, 12.5}) CHECK(k(u) == k(-u));
    }

    TEST_CASE("kernel without noise matches adaptive quadrature") {
        const DeconvKernel k(1.0, 0.0, KernelSpec::triweight_fourier(), 256);
        for (double u : {0.0, 0.5, 2.0, 7.5, 20.0}) CHECK(std::abs(k(u) - oracles::plain_kernel(u)) < 1e-12);
    }

    TEST_CASE("kernel has unit mass at (0.3, 0.5)") {
        const DeconvKernel k(0.5, 0.3, KernelSpec::triweight_fourier(), 256);
        CHECK(std::abs(kernel_mass(k, 200.0, 40000) - 1.0) < 1e-3);
    }

    TEST_CASE("kernel overflow is a numerical error") {
        CHECK(throws_kind([] { DeconvKernel(0.01, 1.0, KernelSpec::triweight_fourier(), 256); }, ErrorKind::Numerical));
    }

    TEST_CASE("theory bandwidth formula") {
        const auto spec = KernelSpec::triweight_fourier();
        CHECK(select_bandwidth(100, 0.01, spec, BandwidthMode::theory(1.0)) ==
              doctest::Approx(1.0 / std::sqrt(std::log(100.0))));
        CHECK(select_bandwidth(3, 0.01, spec, BandwidthMode::theory(1.0 / std::log(3.0))) == doctest::Approx(1.0));
        CHECK(select_bandwidth(50, 1.0, spec, BandwidthMode::fixed(0.3)) == 0.3);
    }

    TEST_CASE("bandwidth constraint") {
        const auto spec = KernelSpec::triweight_fourier();
        CHECK(throws_kind([&] { select_bandwidth(100, 1.0, spec, BandwidthMode::theory(0.6)); }, ErrorKind::Config));
        // default c_h = 0.45 / varsigma^2 leaves 2 varsigma^2 c_h = 0.9
        const double h = select_bandwidth(100, 1.0, spec, BandwidthMode::theory());
        CHECK(h == doctest::Approx(1.0 / std::sqrt(0.45 * std::log(100.0))));
    }

    TEST_CASE("constant responses give a constant estimate") {
        IndexEstimate w{gaussian_vector(200, 3), 0.05};
        const VectorXd y = VectorXd::Constant(200, 2.5);
        DeconvConfig cfg = DeconvConfig::defaults();
        const RawDeconv raw = nw_deconv_grid(w, y, 0.4, cfg);
        for (std::size_t g = 0; g < cfg.grid.size(); ++g)
            if (raw.valid[g]) CHECK(raw.values[g] == doctest::Approx(2.5).epsilon(1e-9));
        const LinkEstimate est = estimate_link(w, y, cfg);
        for (std::size_t g = 0; g < est.grid.size(); ++g) {
            CHECK(est.ghat[g] == doctest::Approx(2.5).epsilon(1e-9));
            CHECK(est.ghat_deriv[g] == cfg.eps);
        }
    }

    TEST_CASE("without noise the estimator is plain Nadaraya-Watson") {
        const VectorXd W = gaussian_vector(150, 8);
        VectorXd y(150);
        for (Eigen::Index i = 0; i < 150; ++i) y(i) = std::tanh(W(i)) + 0.1 * std::sin(7.0 * i);
        DeconvConfig cfg = DeconvConfig::defaults();
        cfg.grid = linspace(-2.0, 2.0, 41);
        const double h = 0.35;
        const RawDeconv raw = nw_deconv_grid(IndexEstimate{W, 0.0}, y, h, cfg);
        for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
            REQUIRE(raw.valid[g]);
            CHECK(std::abs(raw.values[g] - oracles::nadaraya_watson(cfg.grid[g], W, y, h)) < 1e-6);
        }
    }

    TEST_CASE("points without kernel mass are masked") {
        IndexEstimate w{VectorXd::LinSpaced(20, -0.5, 0.5), 0.0};
        DeconvConfig cfg = DeconvConfig::defaults();
        cfg.grid = {-1.0, 0.0, 1.0, 50.0};
        const RawDeconv raw = nw_deconv_grid(w, VectorXd::Ones(20), 0.2, cfg);
        CHECK(raw.valid[1]);
        CHECK_FALSE(raw.valid[3]);
        for (double v : raw.values) CHECK(std::isfinite(v));
        cfg.grid = {50.0, 60.0};
        CHECK(throws_kind([&] { nw_deconv_grid(w, VectorXd::Ones(20), 0.2, cfg); }, ErrorKind::Numerical));
    }

    TEST_CASE("link estimate ignores the order of observations") {
        IndexEstimate w{gaussian_vector(300, 4), 0.1};
        VectorXd y(300);
        for (Eigen::Index i = 0; i < 300; ++i) y(i) = w.W(i) + 0.3 * std::cos(3.0 * i);
        std::vector<Eigen::Index> perm(300);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), std::mt19937_64(2));
        IndexEstimate wp{VectorXd(300), 0.1};
        VectorXd yp(300);
        for (Eigen::Index i = 0; i < 300; ++i) {
            wp.W(i) = w.W(perm[i]);
            yp(i) = y(perm[i]);
        }
        const DeconvConfig cfg = DeconvConfig::defaults();
        const LinkEstimate a = estimate_link(w, y, cfg), b = estimate_link(wp, yp, cfg);
        for (std::size_t g = 0; g < a.grid.size(); ++g) CHECK(std::abs(a.ghat[g] - b.ghat[g]) < 1e-9);
    }

    TEST_CASE("eval_link interpolates and extrapolates") {
        LinkEstimate est;
        est.grid = {-1.0, 0.0, 1.0};
        est.ghat = {-2.0, 0.0, 0.5};
        est.ghat_deriv = {2.0, 1.25, 0.5};
        est.eps = 1e-3;
        CHECK(eval_link(est, 0.0).g == 0.0);
        CHECK(eval_link(est, 1.0).g == 0.5);
        CHECK(eval_link(est, 0.5).g == doctest::Approx(0.25));
        CHECK(eval_link(est, 0.5).dg == doctest::Approx(0.5));
        CHECK(eval_link(est, 2.0).g == doctest::Approx(0.5 + 0.5 * 1.0));
        CHECK(eval_link(est, 2.0).dg == doctest::Approx(0.5));
        CHECK(eval_link(est, -3.0).g == doctest::Approx(-2.0 - 2.0 * 2.0));
    }

    TEST_CASE("estimated link is continuous and nondecreasing everywhere") {
        const VectorXd W = gaussian_vector(400, 12);
        const SimModel m = SimModel::builtin("piecewise");
        VectorXd y(400);
        std::mt19937_64 rng(5);
        std::normal_distribution<double> z;
        for (Eigen::Index i = 0; i < 400; ++i) y(i) = m.link.eval(W(i)) + 0.3 * z(rng);
        const LinkEstimate est = estimate_link(IndexEstimate{W + 0.2 * gaussian_vector(400, 13), 0.04}, y,
                                               DeconvConfig::defaults());
        double prev = eval_link(est, -10.0).g;
        for (double x = -10.0 + 1e-3; x <= 10.0; x += 1e-3) {
            const LinkValue v = eval_link(est, x);
            CHECK(v.g >= prev - 1e-12);
            CHECK(v.g - prev < 1e-3 * 100.0);
            CHECK(v.dg >= est.eps);
            prev = v.g;
        }
    }

    TEST_CASE("noise-free cloglog link is recovered") {
        const Eigen::Index n = 4096;
        const VectorXd W = gaussian_vector(n, 21);
        const SimModel m = SimModel::builtin("cloglog");
        const VectorXd y = generate_responses(W, Coefficients{VectorXd::Ones(1)}, m, 22);
        const LinkEstimate est = estimate_link(IndexEstimate{W, 0.0}, y, DeconvConfig::defaults());
        double sup = 0.0;
        for (std::size_t g = 0; g < est.grid.size(); ++g)
            sup = std::max(sup, std::abs(est.ghat[g] - m.link.eval(est.grid[g])));
        CHECK(sup < 0.1);
    }

    TEST_CASE("link CSV has one row per grid point") {
        LinkEstimate est;
        est.grid = {0.0, 1.0};
        est.ghat = {0.25, 0.5};
        est.ghat_deriv = {0.25, 0.25};
        std::ostringstream out;
        write_link_csv(est, out);
        CHECK(out.str() == "x,ghat,ghat_deriv\n0,0.25,0.25\n1,0.5,0.25\n");
    }

    TEST_CASE("invalid configurations") {
        DeconvConfig cfg = DeconvConfig::defaults();
        cfg.grid = {0.0, 0.0};
        CHECK(throws_kind([&] { cfg.validate(); }, ErrorKind::Config));
        cfg = DeconvConfig::defaults();
        cfg.eps = 0.0;
        CHECK(throws_kind([&] { cfg.validate(); }, ErrorKind::Config));
    }
}
