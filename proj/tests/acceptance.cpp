// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sidx/deconv.hpp"
#include "sidx/experiment.hpp"
#include "sidx/inference.hpp"
#include "sidx/linalg.hpp"
#include "sidx/monotonize.hpp"
#include "sidx/pilot.hpp"
#include "sidx/pipeline.hpp"
#include "sidx/surrogate.hpp"
#include "support.hpp"

using namespace sidx;
using nlohmann::json;
using testing_support::gaussian_matrix;
using testing_support::gaussian_vector;
using testing_support::linspace;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

using Criterion = std::function<void(Outcome&)>;

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

// --- 1: index normality -----------------------------------------------------

void index_normality(Outcome& out) {
    ExperimentSpec spec;
    spec.experiment = "figure1";
    spec.models = {"cubic", "xsqrt"};
    spec.sizes = {{500, 200}};
    spec.replications = 200;
    const ExperimentResult res = run_experiment(spec);
    for (const json& cell : res.manifest.at("summary")) {
        const std::string model = cell.at("model");
        const double ks = cell.at("ks"), mean = cell.at("mean"), var = cell.at("variance");
        out.detail << model << "(" << cell.at("pilot").get<std::string>() << "): ks=" << ks << " mean=" << mean
                   << " var=" << var << " failures=" << cell.at("failures") << "; ";
        out.require(ks < 0.08, model + " ks < 0.08");
        out.require(within(mean, -0.15, 0.15), model + " mean in [-0.15, 0.15]");
        out.require(within(var, 0.8, 1.2), model + " variance in [0.8, 1.2]");
        out.require(cell.at("count").get<int>() == 200, model + " all 200 replications succeed");
    }
}

// --- 2: link loss trend -----------------------------------------------------

void link_trend(Outcome& out) {
    ExperimentSpec spec;
    spec.experiment = "figure2";
    spec.models = {"piecewise"};
    spec.sizes = {{64, 38}, {128, 77}, {256, 154}, {512, 307}};
    spec.replications = 50;
    const ExperimentResult res = run_experiment(spec);
    std::vector<double> loss;
    for (const json& cell : res.manifest.at("summary")) {
        loss.push_back(cell.at("mean_loss"));
        out.detail << "n=" << cell.at("n") << ": " << loss.back() << "; ";
    }
    int rises = 0;
    for (std::size_t k = 1; k < loss.size(); ++k) rises += loss[k] >= loss[k - 1] ? 1 : 0;
    const double drop = 1.0 - loss.back() / loss.front();
    out.detail << "drop=" << drop << " non-monotone steps=" << rises;
    out.require(loss.size() == 4, "four sizes");
    out.require(drop >= 0.5, "loss drops by at least 50%");
    out.require(rises <= 1, "at most one non-monotone step");
}

// --- 3: coverage ------------------------------------------------------------

void coverage(Outcome& out) {
    ExperimentSpec spec;
    spec.experiment = "figure3";
    spec.models = {"cloglog"};
    spec.sizes = {{250, 500}};
    spec.replications = 300;
    spec.lambda = 0.1;
    const ExperimentResult res = run_experiment(spec);
    const json& cell = res.manifest.at("summary").at(0);
    const double cov = cell.at("coverage"), ks = cell.at("ks");
    out.detail << "coverage=" << cov << " ks(T1)=" << ks << " count=" << cell.at("count");
    out.require(within(cov, 0.91, 0.985), "coverage in [0.91, 0.985]");
    out.require(ks < 0.08, "ks < 0.08");
}

// --- 4: efficiency table ordering ---------------------------------------------

void table_ordering(Outcome& out) {
    ExperimentSpec spec;
    spec.experiment = "table1";
    spec.models = {"logit", "piecewise", "cubic+"};
    const ExperimentResult res = run_experiment(spec);
    const json& s = res.manifest.at("summary");
    auto mean = [&](const char* model, const char* est) { return s.at(model).at(est).at("mean").get<double>(); };
    const double lp = mean("logit", "Proposed"), lm = mean("logit", "LogitMLE");
    const double pp = mean("piecewise", "Proposed"), pl = mean("piecewise", "LeastSquares");
    const double cp = mean("cubic+", "Proposed"), cl = mean("cubic+", "LeastSquares");
    out.detail << "logit " << lp << " vs mle " << lm << "; piecewise " << pp << " vs ls " << pl << "; cubic+ " << cp
               << " vs ls " << cl;
    out.require(std::abs(lp - lm) <= 0.10 * lm, "logit within 10%");
    out.require(pp < pl, "piecewise proposed < LS");
    out.require(cl >= 3.0 * cp, "cubic+ LS >= 3x proposed");
}

// --- 5: exact oracles -------------------------------------------------------

void exact_oracles(Outcome& out) {
    {
        const MatrixXd X = gaussian_matrix(200, 20, 1);
        const VectorXd y = gaussian_vector(200, 2);
        const CoefFit fit = fit_coefficients(X, y, {identity_link(), Penalty::none()});
        const double err = (fit.beta_hat - X.colPivHouseholderQr().solve(y)).cwiseAbs().maxCoeff();
        out.detail << "identity/LS=" << err << "; ";
        out.require(err < 1e-8, "identity link equals least squares");
    }
    {
        const MatrixXd X = gaussian_matrix(500, 10, 3) * 0.4;
        const VectorXd eta = X * VectorXd::LinSpaced(10, -1.0, 1.0);
        std::mt19937_64 rng(4);
        VectorXd y(500);
        for (Eigen::Index i = 0; i < 500; ++i)
            y(i) = std::bernoulli_distribution(1.0 / (1.0 + std::exp(-eta(i))))(rng) ? 1.0 : 0.0;
        const CoefFit fit = fit_coefficients(X, y, {logistic_link(), Penalty::none()});
        const double err = (fit.beta_hat - oracles::irls(X, y, oracles::Family::Logistic)).cwiseAbs().maxCoeff();
        out.detail << "logistic/IRLS=" << err << "; ";
        out.require(err < 1e-6, "logistic link equals IRLS");
    }
    {
        const MatrixXd X = gaussian_matrix(300, 90, 5);
        const double err = std::abs(vhat(X, gaussian_vector(90, 6), identity_link(), 0.0) - (1.0 - 0.3));
        out.detail << "v0=1-kappa err=" << err << "; ";
        out.require(err < 1e-10, "unit-weight v0 equals 1 - kappa");
    }
    {
        const VectorXd W = gaussian_vector(200, 7);
        VectorXd y(200);
        for (Eigen::Index i = 0; i < 200; ++i) y(i) = std::atan(2.0 * W(i)) + 0.2 * std::cos(5.0 * i);
        DeconvConfig cfg = DeconvConfig::defaults();
        cfg.grid = linspace(-2.5, 2.5, 51);
        const double h = 0.3;
        const RawDeconv raw = nw_deconv_grid(IndexEstimate{W, 0.0}, y, h, cfg);
        double err = 0.0;
        for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
            out.require(raw.valid[g] != 0, "noise-free grid point valid");
            err = std::max(err, std::abs(raw.values[g] - oracles::nadaraya_watson(cfg.grid[g], W, y, h)));
        }
        out.detail << "deconv/NW=" << err << "; ";
        out.require(err < 1e-6, "noise-free deconvolution equals Nadaraya-Watson");
    }
    {
        const MatrixXd X = gaussian_matrix(300, 60, 8);
        const VectorXd b = gaussian_vector(60, 9) * 0.15;
        const VectorXd y = gaussian_vector(300, 10).cwiseAbs();
        const LinkFunction g = link_registry_lookup(ModelVariant::XSqrt);
        const double reach = (X * b).cwiseAbs().maxCoeff() + 0.5;
        const InferentialParams u = adjust_inferential(X, y, b, g, InferenceMode::unregularized());
        const InferentialParams c = adjust_inferential(X, y, b, g, InferenceMode::censored(-reach, reach));
        const bool same = u.mu_hat == c.mu_hat && u.sigma2_hat == c.sigma2_hat && u.v_hat == c.v_hat;
        out.detail << "censored==uncensored: " << (same ? "exact" : "differs");
        out.require(same, "covering censoring window is exact");
    }
}

// --- 6: numerical properties ------------------------------------------------

void properties(Outcome& out) {
    // gradient vs central differences
    double worst = 0.0;
    const std::vector<LinkFunction> links = {logistic_link(), link_registry_lookup(ModelVariant::Cloglog),
                                             link_registry_lookup(ModelVariant::XSqrt),
                                             link_registry_lookup(ModelVariant::Cubic)};
    for (int inst = 0; inst < 20; ++inst) {
        const MatrixXd X = gaussian_matrix(40, 8, 1000 + inst) * 0.35;
        const VectorXd y = gaussian_vector(40, 2000 + inst).cwiseAbs();
        const VectorXd b = gaussian_vector(8, 3000 + inst);
        const SurrogateProblem prob{links[static_cast<std::size_t>(inst) % links.size()],
                                    inst % 2 ? Penalty::ridge(0.3) : Penalty::none()};
        const VectorXd grad = surrogate_objective(b, X, y, prob).gradient;
        VectorXd fd(8);
        for (int j = 0; j < 8; ++j) {
            VectorXd bp = b, bm = b;
            bp(j) += 1e-5;
            bm(j) -= 1e-5;
            fd(j) = (surrogate_objective(bp, X, y, prob).value - surrogate_objective(bm, X, y, prob).value) / 2e-5;
        }
        worst = std::max(worst, (fd - grad).norm() / grad.norm());
    }
    out.detail << "grad rel err=" << worst << "; ";
    out.require(worst < 1e-5, "gradient matches central differences");

    // kernel mass over theory bandwidths inside the constraint
    double mass_err = 0.0;
    const KernelSpec kernel = KernelSpec::triweight_fourier();
    for (double varsigma : {0.0, 0.1, 0.25, 0.4, 0.6}) {
        for (Eigen::Index n : {100, 1000, 10000}) {
            for (double frac : {0.25, 0.6, 0.9}) {
                const double ch = varsigma > 0.0 ? frac * 0.5 / (varsigma * varsigma) : 4.0 * frac;
                const double h = select_bandwidth(n, varsigma, kernel, BandwidthMode::theory(ch));
                const DeconvKernel k(h, varsigma, kernel, 256);
                const double L = 300.0;
                const int panels = 60000;
                const double step = 2.0 * L / panels;
                double sum = k(-L) + k(L);
                for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * k(-L + i * step);
                mass_err = std::max(mass_err, std::abs(sum * step / 3.0 - 1.0));
            }
        }
    }
    out.detail << "kernel mass err=" << mass_err << "; ";
    out.require(mass_err < 1e-3, "kernel integrates to one");

    // monotonizers
    std::mt19937_64 rng(99);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> size(2, 120);
    bool mono_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = size(rng);
        GridFunction f{linspace(-3.0, 3.0, m), std::vector<double>(static_cast<std::size_t>(m))};
        std::vector<double> ref(static_cast<std::size_t>(m));
        for (auto& v : f.vs) v = z(rng);
        for (auto& r : ref) r = z(rng);
        std::sort(ref.begin(), ref.end());
        double before = 0.0;
        for (int i = 0; i < m; ++i) before = std::max(before, std::abs(f.vs[i] - ref[i]));
        for (Monotonizer method : {Monotonizer::Rearrange, Monotonizer::Naive}) {
            const GridFunction once = monotonize(f, method);
            mono_ok &= monotonize(once, method).vs == once.vs;
            double after = 0.0;
            for (int i = 0; i < m; ++i) after = std::max(after, std::abs(once.vs[i] - ref[i]));
            mono_ok &= after <= before + 1e-15;
        }
    }
    out.detail << "monotonizers " << (mono_ok ? "ok" : "violated") << "; ";
    out.require(mono_ok, "idempotence and non-expansion");

    // rotation invariance
    double rot = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const VectorXd beta = gaussian_vector(30, 4000 + s).normalized();
        const VectorXd bh = 1.7 * beta + 0.5 * gaussian_vector(30, 5000 + s);
        const MatrixXd U = gaussian_matrix(30, 30, 6000 + s).householderQr().householderQ();
        const OracleParams a = oracle_params(bh, beta, DesignSpec::identity(30));
        const OracleParams b = oracle_params(U * bh, U * beta, DesignSpec::identity(30));
        rot = std::max({rot, std::abs(a.mu_oracle - b.mu_oracle), std::abs(a.sigma_oracle - b.sigma_oracle)});
    }
    out.detail << "rotation diff=" << rot << "; ";
    out.require(rot < 1e-12, "oracle parameters rotation invariant");

    // bit-identical reruns
    PipelineConfig cfg;
    cfg.split.seed = 17;
    const std::string a = to_json(run_pipeline(simulate(cfg, 23).data, cfg)).dump();
    const std::string b = to_json(run_pipeline(simulate(cfg, 23).data, cfg)).dump();
    out.detail << "reruns " << (a == b ? "identical" : "differ");
    out.require(a == b, "bit-identical pipeline reruns");
}

// --- 7: adjustment consistency ----------------------------------------------

void adjustment_consistency(Outcome& out) {
    ExperimentSpec spec;
    spec.experiment = "custom";
    spec.replications = 200;
    spec.base.model = "cloglog";
    spec.base.n = 500;
    spec.base.p = 200;
    spec.base.pilot = PilotKind::ridge(1.0);
    spec.base.penalty = Penalty::ridge(0.1);
    spec.base.inference = InferenceMode::ridge(0.1);
    const ExperimentResult res = run_experiment(spec);
    const json& cell = res.manifest.at("summary").at(0);
    const double mu_err = cell.at("mean_abs_mu_error"), s2_err = cell.at("mean_abs_sigma2_error");
    out.detail << "mean|mu-mu_n|=" << mu_err << " mean|s2-s2_n|=" << s2_err << " count=" << cell.at("count");
    out.require(mu_err < 0.08, "mean |mu_hat - mu_n| < 0.08");
    out.require(s2_err < 0.1, "mean |sigma2_hat - sigma2_n| < 0.1");
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Criterion run;
        double limit_seconds;
    };
    const std::vector<Entry> criteria = {
        {"1 index normality", index_normality, 180.0},
        {"2 link loss trend", link_trend, 300.0},
        {"3 coverage", coverage, 300.0},
        {"4 efficiency ordering", table_ordering, 600.0},
        {"5 exact oracles", exact_oracles, 30.0},
        {"6 numerical properties", properties, 60.0},
        {"7 adjustment consistency", adjustment_consistency, 180.0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(out);
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream limit;
        limit << "runtime " << secs << "s < " << c.limit_seconds << "s";
        out.require(secs < c.limit_seconds, limit.str());
        std::printf("%s criterion %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", c.name, out.detail.str().c_str(), secs);
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
