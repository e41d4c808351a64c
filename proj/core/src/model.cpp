#include "sidx/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/special_functions/expint.hpp>

#include "sidx/error.hpp"
#include "sidx/random.hpp"

namespace sidx {

void Dataset::validate() const {
    if (X.rows() < 1 || X.cols() < 1) config_error("dataset: need n >= 1 and p >= 1");
    if (y.size() != X.rows()) config_error("dataset: X has " + std::to_string(X.rows()) +
                                           " rows but y has " + std::to_string(y.size()) + " entries");
    if (!X.allFinite()) config_error("dataset: X contains non-finite entries");
    if (!y.allFinite()) config_error("dataset: y contains non-finite entries");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.X.row(static_cast<Eigen::Index>(k)) = X.row(rows[k]);
        out.y(static_cast<Eigen::Index>(k)) = y(rows[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// DesignSpec

DesignSpec DesignSpec::identity(Eigen::Index p) {
    if (p < 1) config_error("design: p must be >= 1");
    DesignSpec spec;
    spec.sigma_ = MatrixXd::Identity(p, p);
    spec.chol_ = MatrixXd::Identity(p, p);
    spec.tau_ = VectorXd::Ones(p);
    spec.identity_ = true;
    return spec;
}

DesignSpec DesignSpec::from_covariance(const MatrixXd& sigma) {
    if (sigma.rows() < 1 || sigma.rows() != sigma.cols()) config_error("invalid design: Sigma must be square");
    if (!sigma.allFinite()) config_error("invalid design: Sigma has non-finite entries");
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        config_error("invalid design: Sigma is not symmetric");

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0.0) config_error("invalid design: Sigma is not positive definite");

    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) config_error("invalid design: Cholesky factorization failed");

    DesignSpec spec;
    spec.sigma_ = sigma;
    spec.chol_ = llt.matrixL();
    const MatrixXd theta = llt.solve(MatrixXd::Identity(sigma.rows(), sigma.rows()));
    spec.tau_ = theta.diagonal().cwiseInverse().cwiseSqrt();
    spec.identity_ = sigma.isIdentity(0.0);
    return spec;
}

MatrixXd DesignSpec::precision() const {
    if (identity_) return MatrixXd::Identity(p(), p());
    return sigma_.llt().solve(MatrixXd::Identity(p(), p()));
}

// ---------------------------------------------------------------------------
// Links

namespace {

double piecewise_g(double t) {
    if (t <= -1.0) return 0.2 * t - 2.3;
    if (t < 1.0) return 2.5 * t;
    return 0.2 * t + 2.3;
}

double piecewise_dg(double t) { return (t <= -1.0 || t >= 1.0) ? 0.2 : 2.5; }

double piecewise_G(double t) {
    if (t <= -1.0) return 1.25 + 0.1 * (t * t - 1.0) - 2.3 * (t + 1.0);
    if (t < 1.0) return 1.25 * t * t;
    return 1.25 + 0.1 * (t * t - 1.0) + 2.3 * (t - 1.0);
}

// t + sqrt(t^2 + 1), written to avoid cancellation for t << 0.
double xsqrt_g(double t) {
    const double r = std::hypot(t, 1.0);
    return t >= 0.0 ? t + r : 1.0 / (r - t);
}

double logistic(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// log(1 + e^t)
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace

LinkFunction identity_link() {
    return {"identity", [](double t) { return t; }, [](double) { return 1.0; },
            [](double t) { return 0.5 * t * t; }};
}

LinkFunction logistic_link() {
    return {"logistic", logistic,
            [](double t) {
                const double g = logistic(t);
                return g * (1.0 - g);
            },
            softplus};
}

LinkFunction link_registry_lookup(ModelVariant variant) {
    switch (variant) {
        case ModelVariant::Cloglog:
            return {"cloglog", [](double t) { return -std::expm1(-std::exp(t)); },
                    [](double t) { return std::exp(t - std::exp(t)); },
                    // d/dt E1(e^t) = -exp(-e^t)
                    [](double t) { return t + boost::math::expint(1, std::exp(t)); }};
        case ModelVariant::XSqrt:
            return {"xsqrt", xsqrt_g, [](double t) { return xsqrt_g(t) / std::hypot(t, 1.0); },
                    [](double t) { return 0.5 * t * t + 0.5 * (t * std::hypot(t, 1.0) + std::asinh(t)); }};
        case ModelVariant::Cubic:
        case ModelVariant::CubicPlus:
            return {"cubic", [](double t) { return t * t * t / 3.0; }, [](double t) { return t * t; },
                    [](double t) { return t * t * t * t / 12.0; }};
        case ModelVariant::Piecewise:
        case ModelVariant::PiecewisePlus:
            return {"piecewise", piecewise_g, piecewise_dg, piecewise_G};
        case ModelVariant::Logit:
            return logistic_link();
        case ModelVariant::Poisson:
            return {"exp", [](double t) { return std::exp(t); }, [](double t) { return std::exp(t); },
                    [](double t) { return std::exp(t); }};
    }
    config_error("link lookup: unknown model variant");
}

LinkFunction link_registry_lookup(std::string_view name) {
    return link_registry_lookup(SimModel::parse_model_variant(name));
}

ModelVariant SimModel::parse_model_variant(std::string_view name) {
    if (name == "cloglog") return ModelVariant::Cloglog;
    if (name == "xsqrt") return ModelVariant::XSqrt;
    if (name == "cubic") return ModelVariant::Cubic;
    if (name == "piecewise") return ModelVariant::Piecewise;
    if (name == "logit") return ModelVariant::Logit;
    if (name == "poisson") return ModelVariant::Poisson;
    if (name == "cubic+") return ModelVariant::CubicPlus;
    if (name == "piecewise+") return ModelVariant::PiecewisePlus;
    config_error("unknown model '" + std::string(name) + "'");
}

std::string to_string(ModelVariant variant) {
    switch (variant) {
        case ModelVariant::Cloglog: return "cloglog";
        case ModelVariant::XSqrt: return "xsqrt";
        case ModelVariant::Cubic: return "cubic";
        case ModelVariant::Piecewise: return "piecewise";
        case ModelVariant::Logit: return "logit";
        case ModelVariant::Poisson: return "poisson";
        case ModelVariant::CubicPlus: return "cubic+";
        case ModelVariant::PiecewisePlus: return "piecewise+";
    }
    return "?";
}

SimModel SimModel::builtin(ModelVariant variant) {
    SimModel m;
    m.variant = variant;
    m.link = link_registry_lookup(variant);
    switch (variant) {
        case ModelVariant::Cloglog:
        case ModelVariant::Logit: m.noise = {NoiseFamily::Bernoulli, 0.0, 0.0}; break;
        case ModelVariant::XSqrt:
        case ModelVariant::Poisson: m.noise = {NoiseFamily::Poisson, 0.0, 0.0}; break;
        case ModelVariant::Cubic: m.noise = {NoiseFamily::Gaussian, 0.5, 0.0}; break;
        case ModelVariant::Piecewise: m.noise = {NoiseFamily::Gaussian, 0.2, 0.0}; break;
        case ModelVariant::CubicPlus: m.noise = {NoiseFamily::Gaussian, 0.5, 5.0}; break;
        case ModelVariant::PiecewisePlus: m.noise = {NoiseFamily::Gaussian, 0.2, 5.0}; break;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Sampling

MatrixXd sample_design(Eigen::Index n, const DesignSpec& spec, std::uint64_t seed) {
    if (n < 1) config_error("sample_design: n must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const Eigen::Index p = spec.p();
    // Draw row-major so that the first rows do not depend on n.
    MatrixXd Z(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) Z(i, j) = normal(rng);
    if (spec.is_identity()) return Z;
    return Z * spec.cholesky().transpose();
}

Coefficients sample_coefficients(Eigen::Index p, CoefficientScheme scheme, const DesignSpec& spec,
                                 std::uint64_t seed) {
    if (p < 1) config_error("sample_coefficients: p must be >= 1");
    if (spec.p() != p) config_error("sample_coefficients: design dimension mismatch");
    VectorXd beta = VectorXd::Zero(p);
    if (scheme.kind == CoefficientScheme::Kind::UniformSphere) {
        Rng rng(seed);
        std::normal_distribution<double> normal;
        for (Eigen::Index j = 0; j < p; ++j) beta(j) = normal(rng);
    } else {
        if (scheme.support < 1 || scheme.support > p)
            config_error("invalid coefficient scheme: sparse support must lie in [1, p]");
        beta.head(scheme.support).setOnes();
    }
    const double quad = spec.is_identity() ? beta.squaredNorm() : beta.dot(spec.sigma() * beta);
    if (!(quad > 0.0)) numerical_error("sample_coefficients: zero coefficient draw");
    beta /= std::sqrt(quad);
    return {beta};
}

VectorXd generate_responses(const MatrixXd& X, const Coefficients& beta, const SimModel& model,
                            std::uint64_t seed) {
    if (X.cols() != beta.beta.size()) config_error("generate_responses: X has wrong column count");
    const VectorXd index = X * beta.beta;
    Rng rng(seed);
    VectorXd y(X.rows());
    switch (model.noise.family) {
        case NoiseFamily::Bernoulli:
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double prob = std::clamp(model.link.eval(index(i)), 0.0, 1.0);
                std::bernoulli_distribution draw(prob);
                y(i) = draw(rng) ? 1.0 : 0.0;
            }
            break;
        case NoiseFamily::Poisson:
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double mean = model.link.eval(index(i));
                if (!std::isfinite(mean) || mean < 0.0)
                    numerical_error("generate_responses: invalid Poisson mean at row " + std::to_string(i));
                if (mean == 0.0) {
                    y(i) = 0.0;
                    continue;
                }
                std::poisson_distribution<long long> draw(mean);
                y(i) = static_cast<double>(draw(rng));
            }
            break;
        case NoiseFamily::Gaussian: {
            std::normal_distribution<double> normal;
            const double sd = std::sqrt(model.noise.variance);
            for (Eigen::Index i = 0; i < y.size(); ++i)
                y(i) = model.link.eval(index(i)) + model.noise.mean_shift + sd * normal(rng);
            break;
        }
    }
    return y;
}

}  // namespace sidx
