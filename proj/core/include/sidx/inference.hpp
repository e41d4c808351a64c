#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sidx/model.hpp"

namespace sidx {

/// Censoring window [a, b] with iota(z) = max(a, min(b, z)).
struct CensoredAdjustment {
    double a = -3.0;
    double b = 3.0;

    double censor(double z) const { return std::max(a, std::min(b, z)); }
    void validate() const;
};

struct InferenceMode {
    enum class Kind { Ridge, Unregularized, Censored };
    Kind kind = Kind::Ridge;
    double lambda = 0.0;  // Ridge only
    CensoredAdjustment window;  // Censored only

    static InferenceMode ridge(double lambda) { return {Kind::Ridge, lambda, {}}; }
    static InferenceMode unregularized() { return {Kind::Unregularized, 0.0, {}}; }
    static InferenceMode censored(double a, double b) { return {Kind::Censored, 0.0, {a, b}}; }

    std::string name() const;
};

/// v_lambda = n^{-1} tr(D - D X (X^T D X + n lambda I)^{-1} X^T D), D = diag(g'(X beta_hat)).
double vhat(const MatrixXd& X, const VectorXd& beta_hat, const LinkFunction& link, double lambda);

/// Same with D_c = diag(g'(iota(X beta_hat))) and lambda = 0.
double vhat_censored(const MatrixXd& X, const VectorXd& beta_hat, const LinkFunction& link,
                     const CensoredAdjustment& window);

struct InferentialParams {
    double mu_hat = 0.0;
    double sigma2_hat = 0.0;
    double v_hat = 0.0;
};

/// Estimates (mu, sigma^2) of the surrogate fit from observables only.
InferentialParams adjust_inferential(const MatrixXd& X, const VectorXd& y, const VectorXd& beta_hat,
                                     const LinkFunction& link, const InferenceMode& mode);

struct InferenceReport {
    InferenceMode mode;
    double mu_hat = 0.0;
    double sigma2_hat = 0.0;
    double v_hat = 0.0;
    double alpha = 0.05;
    VectorXd beta_hat;
    VectorXd null_values;
    VectorXd T;
    VectorXd ci_lo;
    VectorXd ci_hi;
    VectorXd p_values;
    std::vector<bool> reject;  // H0: beta_j = 0
};

/// Coordinate-wise t-statistics, intervals for beta_j and p-values.
/// `null_values` may be empty (all zero).
InferenceReport marginal_inference(const VectorXd& beta_hat, double mu_hat, double sigma2_hat, const VectorXd& tau,
                                   double alpha, const VectorXd& null_values = {});

/// adjust_inferential followed by marginal_inference.
InferenceReport infer(const MatrixXd& X, const VectorXd& y, const VectorXd& beta_hat, const LinkFunction& link,
                      const InferenceMode& mode, const VectorXd& tau, double alpha,
                      const VectorXd& null_values = {});

nlohmann::json to_json(const InferenceReport& report);
void write_inference_json(const InferenceReport& report, std::ostream& out);
/// Columns j, beta_hat, T, ci_lo, ci_hi, p_value; j counts from 1.
void write_inference_csv(const InferenceReport& report, std::ostream& out);

struct OracleParams {
    double mu_oracle = 0.0;
    double sigma_oracle = 0.0;
};

/// With theta = L^T beta and theta_hat = L^T beta_hat (Sigma = L L^T):
/// mu = theta^T theta_hat / theta^T theta, sigma = ||theta_hat - mu theta||.
OracleParams oracle_params(const VectorXd& beta_hat, const VectorXd& beta, const DesignSpec& design);
OracleParams oracle_params(const VectorXd& beta_hat, const VectorXd& beta, const MatrixXd& sigma);

/// beta_hat^T beta_hat / beta_hat^T beta - 1.
double effective_variance(const VectorXd& beta_hat, const VectorXd& beta);
/// sigma2_hat / mu_hat^2.
double effective_variance(double mu_hat, double sigma2_hat);

/// L^{-1} with Theta_S = L L^T the precision block on `coords`; maps
/// sqrt(p) (beta_hat_S - mu beta_S) / sigma to approximately N(0, I).
MatrixXd joint_whitening(const DesignSpec& design, const std::vector<Eigen::Index>& coords);

/// Whitened joint statistic for the coordinate set.
VectorXd joint_statistic(const VectorXd& beta_hat, double mu_hat, double sigma2_hat, const VectorXd& null_values,
                         const DesignSpec& design, const std::vector<Eigen::Index>& coords);

/// Quantities entering the ridge efficiency comparison for one fit.
struct RidgeEfficiencySide {
    double coef_norm = 0.0;   // ||b||
    double v = 0.0;           // v~ or v_hat
    double lambda = 0.0;
    double resid_norm = 0.0;  // ||y - g(X b)||
    double n = 0.0;
};

/// Quantities entering the unregularized comparison; the pilot side has v = 1 - kappa.
struct LsEfficiencySide {
    double fitted_norm = 0.0;  // ||X b||
    double v = 0.0;
    double resid_norm = 0.0;
    double kappa = 0.0;
};

struct EfficiencyCheck {
    double statistic = 0.0;  // > 1 iff the proposed estimator is more efficient
    bool proposed_more_efficient = false;
};

EfficiencyCheck ridge_efficiency(const RidgeEfficiencySide& pilot, const RidgeEfficiencySide& proposed);

/// Requires equal kappa on both sides.
EfficiencyCheck ls_efficiency(const LsEfficiencySide& pilot, const LsEfficiencySide& proposed);

/// sigma2_hat / mu_hat^2 < sigma2_tilde / mu_tilde^2.
bool direct_efficiency_comparison(double mu_hat, double sigma2_hat, double mu_tilde, double sigma2_tilde);

}  // namespace sidx
