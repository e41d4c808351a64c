#include "sidx/pilot.hpp"

#include <cmath>

#include "sidx/error.hpp"
#include "sidx/linalg.hpp"

namespace sidx {

PilotKind PilotKind::parse(std::string_view name, double lambda) {
    if (name == "ridge") {
        if (!(lambda > 0.0)) config_error("ridge pilot needs lambda > 0");
        return ridge(lambda);
    }
    if (name == "ls") return least_squares();
    if (name == "logit-mle") return logistic_mle();
    if (name == "pois-mle") return poisson_mle();
    config_error("unknown pilot kind '" + std::string(name) + "'");
}

std::string PilotKind::name() const {
    switch (kind) {
        case Kind::Ridge: return "ridge";
        case Kind::LeastSquares: return "ls";
        case Kind::LogisticMLE: return "logit-mle";
        case Kind::PoissonMLE: return "pois-mle";
    }
    return "?";
}

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

struct GlmTerms {
    double (*cumulant)(double);
    double (*mean)(double);
    double (*variance)(double);
};

GlmTerms glm_terms(GlmFamily family) {
    if (family == GlmFamily::Logistic)
        return {softplus, sigmoid, [](double t) {
                    const double s = sigmoid(t);
                    return s * (1.0 - s);
                }};
    return {[](double t) { return std::exp(t); }, [](double t) { return std::exp(t); },
            [](double t) { return std::exp(t); }};
}

double glm_objective(const GlmTerms& terms, const VectorXd& eta, const VectorXd& y) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) f += terms.cumulant(eta(i)) - y(i) * eta(i);
    return f;
}

void check_glm_response(const VectorXd& y, GlmFamily family) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double v = y(i);
        const bool ok = family == GlmFamily::Logistic ? (v == 0.0 || v == 1.0)
                                                      : (v >= 0.0 && v == std::floor(v));
        if (!ok)
            config_error(std::string(family == GlmFamily::Logistic ? "logistic" : "Poisson") +
                         " MLE: invalid response at row " + std::to_string(i));
    }
}

Adjustments ridge_adjustments(const GramFactor& factor, const VectorXd& beta_tilde, double lambda,
                              const MatrixXd& X, const VectorXd& y) {
    const double n = static_cast<double>(X.rows());
    Adjustments adj;
    adj.kappa = static_cast<double>(X.cols()) / n;
    adj.v_tilde = 1.0 - factor.hat_diagonal().sum() / n;
    const double denom = adj.v_tilde + lambda;
    if (denom == 0.0) numerical_error("degenerate adjustment: v + lambda = 0");
    adj.gamma_tilde = adj.kappa / denom;
    adj.sigma2_tilde = ((y - X * beta_tilde).squaredNorm() / n) / (denom * denom / adj.kappa);
    adj.mu_tilde = std::sqrt(std::abs(beta_tilde.squaredNorm() - adj.sigma2_tilde));
    return adj;
}

}  // namespace

VectorXd ridge_fit(const MatrixXd& X, const VectorXd& y, double lambda) {
    if (!(lambda > 0.0)) config_error("ridge_fit: lambda must be > 0");
    if (y.size() != X.rows()) config_error("ridge_fit: dimension mismatch");
    const double n = static_cast<double>(X.rows());
    const GramFactor factor(X, VectorXd::Ones(X.rows()), n * lambda);
    return factor.solve(X.transpose() * y);
}

VectorXd least_squares_fit(const MatrixXd& X, const VectorXd& y) {
    if (y.size() != X.rows()) config_error("least_squares_fit: dimension mismatch");
    if (X.cols() >= X.rows()) numerical_error("least squares: non-identifiable (p >= n)");
    try {
        const GramFactor factor(X, VectorXd::Ones(X.rows()), 0.0);
        return factor.solve(X.transpose() * y);
    } catch (const Error&) {
        numerical_error("least squares: non-identifiable (rank-deficient design)");
    }
}

VectorXd glm_mle_fit(const MatrixXd& X, const VectorXd& y, GlmFamily family, const NewtonOptions& opts) {
    if (y.size() != X.rows()) config_error("glm_mle_fit: dimension mismatch");
    check_glm_response(y, family);
    const GlmTerms terms = glm_terms(family);
    const char* label = family == GlmFamily::Logistic ? "logistic MLE" : "Poisson MLE";

    VectorXd b = VectorXd::Zero(X.cols());
    VectorXd eta = VectorXd::Zero(X.rows());
    double f = glm_objective(terms, eta, y);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        VectorXd mean(eta.size()), weight(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            mean(i) = terms.mean(eta(i));
            weight(i) = terms.variance(eta(i));
        }
        const VectorXd grad = X.transpose() * (mean - y);
        if (grad.lpNorm<Eigen::Infinity>() < opts.tol) {
            // A vanishing gradient with every fitted probability at 0 or 1 is separation, not an optimum.
            if (family == GlmFamily::Logistic && (mean - y).cwiseAbs().maxCoeff() < 1e-6)
                numerical_error(std::string(label) + " does not exist: the classes are separated");
            return b;
        }

        VectorXd step;
        try {
            step = -GramFactor(X, weight, 0.0).solve(grad);
        } catch (const Error&) {
            numerical_error(std::string(label) + " does not exist: Hessian became singular (separation?)");
        }
        const VectorXd dEta = X * step;
        const double slope = grad.dot(step);
        if (-slope <= 1e-12 * (1.0 + std::abs(f))) {
            // The predicted decrease is below the resolution of f; Armijo would
            // accept arbitrarily short steps here, so take the Newton step.
            b += step;
            eta += dEta;
            f = glm_objective(terms, eta, y);
            continue;
        }
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
            const VectorXd trial = eta + t * dEta;
            const double ft = glm_objective(terms, trial, y);
            if (std::isfinite(ft) && ft <= f + 1e-4 * t * slope) {
                b += t * step;
                eta = trial;
                f = ft;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // No decrease available: accept the point if it is already stationary to rounding.
            if (grad.lpNorm<Eigen::Infinity>() < 1e3 * opts.tol) return b;
            numerical_error(std::string(label) + ": line search failed");
        }
        if (b.norm() > opts.norm_guard)
            numerical_error(std::string(label) + " does not exist: coefficient norm diverged");
    }
    numerical_error(std::string(label) + " does not exist: Newton did not converge in " +
                    std::to_string(opts.max_iter) + " iterations");
}

double pilot_mean(PilotKind kind, double t) {
    switch (kind.kind) {
        case PilotKind::Kind::LogisticMLE: return sigmoid(t);
        case PilotKind::Kind::PoissonMLE: return std::exp(t);
        default: return t;
    }
}

Adjustments pilot_adjustments(const VectorXd& beta_tilde, PilotKind kind, const MatrixXd& X, const VectorXd& y) {
    if (beta_tilde.size() != X.cols() || y.size() != X.rows())
        config_error("pilot_adjustments: dimension mismatch");
    const double n = static_cast<double>(X.rows());
    Adjustments adj;
    adj.kappa = static_cast<double>(X.cols()) / n;
    const double kappa = adj.kappa;
    const VectorXd fitted = X * beta_tilde;

    switch (kind.kind) {
        case PilotKind::Kind::Ridge:
            if (!(kind.lambda > 0.0)) config_error("ridge pilot needs lambda > 0");
            return ridge_adjustments(GramFactor(X, VectorXd::Ones(X.rows()), n * kind.lambda), beta_tilde,
                                     kind.lambda, X, y);
        case PilotKind::Kind::LeastSquares: {
            if (kappa >= 1.0) numerical_error("degenerate adjustment: least squares needs p/n < 1");
            adj.v_tilde = 1.0 - kappa;
            adj.gamma_tilde = kappa / (1.0 - kappa);
            adj.sigma2_tilde = adj.gamma_tilde * (y - fitted).squaredNorm() / (n * (1.0 - kappa));
            adj.mu_tilde = std::sqrt(std::abs(fitted.squaredNorm() / n - (1.0 - kappa) * adj.sigma2_tilde));
            break;
        }
        case PilotKind::Kind::LogisticMLE:
        case PilotKind::Kind::PoissonMLE: {
            const GlmTerms terms =
                glm_terms(kind.kind == PilotKind::Kind::LogisticMLE ? GlmFamily::Logistic : GlmFamily::Poisson);
            VectorXd weight(fitted.size()), resid(fitted.size());
            for (Eigen::Index i = 0; i < fitted.size(); ++i) {
                weight(i) = terms.variance(fitted(i));
                resid(i) = y(i) - terms.mean(fitted(i));
            }
            adj.v_tilde = weighted_residual_trace(X, weight, 0.0);
            if (adj.v_tilde == 0.0) numerical_error("degenerate adjustment: v_mle = 0");
            adj.gamma_tilde = kappa / adj.v_tilde;
            adj.sigma2_tilde = resid.squaredNorm() / (n * adj.v_tilde * adj.v_tilde / kappa);
            adj.mu_tilde = std::sqrt(std::abs(fitted.squaredNorm() / n - (1.0 - kappa) * adj.sigma2_tilde));
            break;
        }
    }
    return adj;
}

PilotFit fit_pilot(const MatrixXd& X, const VectorXd& y, PilotKind kind, const NewtonOptions& opts) {
    PilotFit fit;
    fit.kind = kind;
    if (kind.kind == PilotKind::Kind::Ridge) {
        if (!(kind.lambda > 0.0)) config_error("ridge pilot needs lambda > 0");
        if (y.size() != X.rows()) config_error("ridge pilot: dimension mismatch");
        // one factorization serves both the solve and the trace
        const GramFactor factor(X, VectorXd::Ones(X.rows()), static_cast<double>(X.rows()) * kind.lambda);
        fit.beta_tilde = factor.solve(X.transpose() * y);
        fit.adjustments = ridge_adjustments(factor, fit.beta_tilde, kind.lambda, X, y);
        return fit;
    }
    switch (kind.kind) {
        case PilotKind::Kind::Ridge: break;
        case PilotKind::Kind::LeastSquares: fit.beta_tilde = least_squares_fit(X, y); break;
        case PilotKind::Kind::LogisticMLE: fit.beta_tilde = glm_mle_fit(X, y, GlmFamily::Logistic, opts); break;
        case PilotKind::Kind::PoissonMLE: fit.beta_tilde = glm_mle_fit(X, y, GlmFamily::Poisson, opts); break;
    }
    if (!fit.beta_tilde.allFinite()) numerical_error("pilot fit produced non-finite coefficients");
    fit.adjustments = pilot_adjustments(fit.beta_tilde, kind, X, y);
    return fit;
}

}  // namespace sidx
