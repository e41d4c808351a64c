#include "sidx/inference.hpp"

#include <cmath>

#include "sidx/csv.hpp"
#include "sidx/error.hpp"
#include "sidx/linalg.hpp"
#include "sidx/stats.hpp"

namespace sidx {

void CensoredAdjustment::validate() const {
    if (!(std::isfinite(a) && std::isfinite(b) && a < b)) config_error("censoring window needs finite a < b");
}

std::string InferenceMode::name() const {
    switch (kind) {
        case Kind::Ridge: return "ridge";
        case Kind::Unregularized: return "unregularized";
        case Kind::Censored: return "censored";
    }
    return "unknown";
}

namespace {

double trace_at(const MatrixXd& X, const VectorXd& eta, const LinkFunction& link, double lambda) {
    VectorXd d(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) d(i) = link.deriv(eta(i));
    if (!d.allFinite() || (d.array() < 0.0).any()) numerical_error("vhat: link derivative not finite and nonnegative");
    try {
        return weighted_residual_trace(X, d, static_cast<double>(X.rows()) * lambda);
    } catch (const Error& e) {
        numerical_error(std::string("vhat: rank error, X^T D X is singular (") + e.what() + ")");
    }
}

void check_shapes(const MatrixXd& X, const VectorXd& beta_hat) {
    if (beta_hat.size() != X.cols()) config_error("inference: beta_hat length does not match X");
}

}  // namespace

double vhat(const MatrixXd& X, const VectorXd& beta_hat, const LinkFunction& link, double lambda) {
    check_shapes(X, beta_hat);
    if (!(lambda >= 0.0)) config_error("vhat: lambda must be nonnegative");
    return trace_at(X, X * beta_hat, link, lambda);
}

double vhat_censored(const MatrixXd& X, const VectorXd& beta_hat, const LinkFunction& link,
                     const CensoredAdjustment& window) {
    check_shapes(X, beta_hat);
    window.validate();
    VectorXd eta = X * beta_hat;
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta(i) = window.censor(eta(i));
    return trace_at(X, eta, link, 0.0);
}

InferentialParams adjust_inferential(const MatrixXd& X, const VectorXd& y, const VectorXd& beta_hat,
                                     const LinkFunction& link, const InferenceMode& mode) {
    check_shapes(X, beta_hat);
    if (y.size() != X.rows()) config_error("adjust_inferential: y length does not match X");
    const double n = static_cast<double>(X.rows());
    const double kappa = static_cast<double>(X.cols()) / n;

    VectorXd eta = X * beta_hat;
    double lambda = 0.0;
    if (mode.kind == InferenceMode::Kind::Ridge) {
        if (!(mode.lambda > 0.0)) config_error("adjust_inferential: ridge mode needs lambda > 0");
        lambda = mode.lambda;
    } else if (mode.kind == InferenceMode::Kind::Censored) {
        mode.window.validate();
        for (Eigen::Index i = 0; i < eta.size(); ++i) eta(i) = mode.window.censor(eta(i));
    }

    InferentialParams out;
    out.v_hat = trace_at(X, eta, link, lambda);
    const double denom = out.v_hat + lambda;
    if (denom == 0.0 || !std::isfinite(denom)) numerical_error("adjust_inferential: degenerate, v_hat + lambda = 0");

    double rss = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double r = y(i) - link.eval(eta(i));
        rss += r * r;
    }
    out.sigma2_hat = rss / (n * denom * denom / kappa);
    const double mu2 = mode.kind == InferenceMode::Kind::Ridge
                           ? beta_hat.squaredNorm() - out.sigma2_hat
                           : eta.squaredNorm() / n - (1.0 - kappa) * out.sigma2_hat;
    out.mu_hat = std::sqrt(std::abs(mu2));
    if (!std::isfinite(out.sigma2_hat) || !std::isfinite(out.mu_hat))
        numerical_error("adjust_inferential: non-finite inferential parameters");
    return out;
}

InferenceReport marginal_inference(const VectorXd& beta_hat, double mu_hat, double sigma2_hat, const VectorXd& tau,
                                   double alpha, const VectorXd& null_values) {
    if (!(alpha > 0.0 && alpha < 1.0)) config_error("marginal_inference: alpha must lie in (0, 1)");
    const Eigen::Index p = beta_hat.size();
    if (tau.size() != p) config_error("marginal_inference: tau length does not match beta_hat");
    if (null_values.size() != 0 && null_values.size() != p)
        config_error("marginal_inference: null_values length does not match beta_hat");
    if (!(tau.array() > 0.0).all()) config_error("marginal_inference: tau must be positive");
    if (!(sigma2_hat > 0.0) || !std::isfinite(sigma2_hat)) numerical_error("marginal_inference: degenerate, sigma2_hat <= 0");
    if (!(mu_hat > 0.0) || !std::isfinite(mu_hat)) numerical_error("marginal_inference: degenerate, mu_hat <= 0");

    InferenceReport rep;
    rep.mu_hat = mu_hat;
    rep.sigma2_hat = sigma2_hat;
    rep.alpha = alpha;
    rep.beta_hat = beta_hat;
    rep.null_values = null_values.size() == 0 ? VectorXd::Zero(p) : null_values;
    rep.T.resize(p);
    rep.ci_lo.resize(p);
    rep.ci_hi.resize(p);
    rep.p_values.resize(p);
    rep.reject.assign(static_cast<std::size_t>(p), false);

    const double sigma = std::sqrt(sigma2_hat);
    const double root_p = std::sqrt(static_cast<double>(p));
    const double z = normal_quantile(1.0 - alpha / 2.0);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double scale = root_p * tau(j);
        rep.T(j) = scale * (beta_hat(j) - mu_hat * rep.null_values(j)) / sigma;
        const double half = z * sigma / scale;
        rep.ci_lo(j) = (beta_hat(j) - half) / mu_hat;
        rep.ci_hi(j) = (beta_hat(j) + half) / mu_hat;
        rep.p_values(j) = std::erfc(std::abs(rep.T(j)) / std::sqrt(2.0));
        rep.reject[static_cast<std::size_t>(j)] = rep.ci_lo(j) > 0.0 || rep.ci_hi(j) < 0.0;
    }
    return rep;
}

InferenceReport infer(const MatrixXd& X, const VectorXd& y, const VectorXd& beta_hat, const LinkFunction& link,
                      const InferenceMode& mode, const VectorXd& tau, double alpha, const VectorXd& null_values) {
    const InferentialParams params = adjust_inferential(X, y, beta_hat, link, mode);
    InferenceReport rep = marginal_inference(beta_hat, params.mu_hat, params.sigma2_hat, tau, alpha, null_values);
    rep.mode = mode;
    rep.v_hat = params.v_hat;
    return rep;
}

nlohmann::json to_json(const InferenceReport& report) {
    nlohmann::json mode = {{"kind", report.mode.name()}};
    if (report.mode.kind == InferenceMode::Kind::Ridge) mode["lambda"] = report.mode.lambda;
    if (report.mode.kind == InferenceMode::Kind::Censored) mode["window"] = {report.mode.window.a, report.mode.window.b};

    nlohmann::json coords = nlohmann::json::array();
    for (Eigen::Index j = 0; j < report.beta_hat.size(); ++j) {
        coords.push_back({{"j", j + 1},
                          {"beta_hat", report.beta_hat(j)},
                          {"T", report.T(j)},
                          {"ci_lo", report.ci_lo(j)},
                          {"ci_hi", report.ci_hi(j)},
                          {"p_value", report.p_values(j)},
                          {"reject", static_cast<bool>(report.reject[static_cast<std::size_t>(j)])}});
    }
    return {{"mode", mode},
            {"mu_hat", report.mu_hat},
            {"sigma2_hat", report.sigma2_hat},
            {"v_hat", report.v_hat},
            {"alpha", report.alpha},
            {"coordinates", coords}};
}

void write_inference_json(const InferenceReport& report, std::ostream& out) { out << to_json(report).dump(2) << '\n'; }

void write_inference_csv(const InferenceReport& report, std::ostream& out) {
    out << "j,beta_hat,T,ci_lo,ci_hi,p_value\n";
    for (Eigen::Index j = 0; j < report.beta_hat.size(); ++j) {
        out << (j + 1) << ',' << format_double(report.beta_hat(j)) << ',' << format_double(report.T(j)) << ','
            << format_double(report.ci_lo(j)) << ',' << format_double(report.ci_hi(j)) << ','
            << format_double(report.p_values(j)) << '\n';
    }
}

OracleParams oracle_params(const VectorXd& beta_hat, const VectorXd& beta, const DesignSpec& design) {
    if (beta_hat.size() != design.p() || beta.size() != design.p())
        config_error("oracle_params: vector lengths do not match the design");
    VectorXd theta, theta_hat;
    if (design.is_identity()) {
        theta = beta;
        theta_hat = beta_hat;
    } else {
        theta = design.cholesky().transpose() * beta;
        theta_hat = design.cholesky().transpose() * beta_hat;
    }
    const double norm2 = theta.squaredNorm();
    if (!(norm2 > 0.0)) numerical_error("oracle_params: degenerate, beta^T Sigma beta = 0");
    OracleParams out;
    out.mu_oracle = theta.dot(theta_hat) / norm2;
    out.sigma_oracle = (theta_hat - out.mu_oracle * theta).norm();
    return out;
}

OracleParams oracle_params(const VectorXd& beta_hat, const VectorXd& beta, const MatrixXd& sigma) {
    return oracle_params(beta_hat, beta, DesignSpec::from_covariance(sigma));
}

double effective_variance(const VectorXd& beta_hat, const VectorXd& beta) {
    if (beta_hat.size() != beta.size()) config_error("effective_variance: length mismatch");
    const double cross = beta_hat.dot(beta);
    if (cross == 0.0) numerical_error("effective_variance: degenerate, beta_hat^T beta = 0");
    return beta_hat.squaredNorm() / cross - 1.0;
}

double effective_variance(double mu_hat, double sigma2_hat) {
    if (!(mu_hat > 0.0)) numerical_error("effective_variance: degenerate, mu_hat <= 0");
    return sigma2_hat / (mu_hat * mu_hat);
}

MatrixXd joint_whitening(const DesignSpec& design, const std::vector<Eigen::Index>& coords) {
    if (coords.empty()) config_error("joint_whitening: empty coordinate set");
    for (auto j : coords)
        if (j < 0 || j >= design.p()) config_error("joint_whitening: coordinate out of range");
    const auto k = static_cast<Eigen::Index>(coords.size());
    MatrixXd block(k, k);
    if (design.is_identity()) {
        block.setIdentity();
    } else {
        const MatrixXd theta = design.precision();
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) block(a, b) = theta(coords[a], coords[b]);
    }
    Eigen::LLT<MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) config_error("joint_whitening: precision block is not positive definite (repeated coordinate?)");
    return llt.matrixL().solve(MatrixXd::Identity(k, k));
}

VectorXd joint_statistic(const VectorXd& beta_hat, double mu_hat, double sigma2_hat, const VectorXd& null_values,
                         const DesignSpec& design, const std::vector<Eigen::Index>& coords) {
    if (beta_hat.size() != design.p()) config_error("joint_statistic: beta_hat length does not match the design");
    if (null_values.size() != 0 && null_values.size() != design.p())
        config_error("joint_statistic: null_values length does not match the design");
    if (!(sigma2_hat > 0.0)) numerical_error("joint_statistic: degenerate, sigma2_hat <= 0");
    const MatrixXd whiten = joint_whitening(design, coords);
    VectorXd centered(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t a = 0; a < coords.size(); ++a) {
        const double b0 = null_values.size() == 0 ? 0.0 : null_values(coords[a]);
        centered(static_cast<Eigen::Index>(a)) = beta_hat(coords[a]) - mu_hat * b0;
    }
    return std::sqrt(static_cast<double>(design.p())) / std::sqrt(sigma2_hat) * (whiten * centered);
}

EfficiencyCheck ridge_efficiency(const RidgeEfficiencySide& pilot, const RidgeEfficiencySide& proposed) {
    const double num = proposed.coef_norm * std::abs(proposed.v + proposed.lambda) * proposed.n * pilot.resid_norm;
    const double den = pilot.coef_norm * std::abs(pilot.v + pilot.lambda) * pilot.n * proposed.resid_norm;
    if (!(den > 0.0)) numerical_error("ridge_efficiency: degenerate pilot quantities");
    return {num / den, num > den};
}

EfficiencyCheck ls_efficiency(const LsEfficiencySide& pilot, const LsEfficiencySide& proposed) {
    if (pilot.kappa != proposed.kappa) config_error("ls_efficiency: both sides need the same kappa");
    const double num = proposed.fitted_norm * std::abs(proposed.v) * pilot.resid_norm;
    const double den = pilot.fitted_norm * std::abs(pilot.v) * proposed.resid_norm;
    if (!(den > 0.0)) numerical_error("ls_efficiency: degenerate pilot quantities");
    return {num / den, num > den};
}

bool direct_efficiency_comparison(double mu_hat, double sigma2_hat, double mu_tilde, double sigma2_tilde) {
    return sigma2_hat * mu_tilde * mu_tilde < sigma2_tilde * mu_hat * mu_hat;
}

}  // namespace sidx
