#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "sidx/model.hpp"

namespace sidx {

/// Which pilot estimator produced beta_tilde.
struct PilotKind {
    enum class Kind { Ridge, LeastSquares, LogisticMLE, PoissonMLE };
    Kind kind = Kind::Ridge;
    double lambda = 1.0;  // Ridge only

    static PilotKind ridge(double lambda) { return {Kind::Ridge, lambda}; }
    static PilotKind least_squares() { return {Kind::LeastSquares, 0.0}; }
    static PilotKind logistic_mle() { return {Kind::LogisticMLE, 0.0}; }
    static PilotKind poisson_mle() { return {Kind::PoissonMLE, 0.0}; }

    /// "ridge", "ls", "logit-mle", "pois-mle".
    static PilotKind parse(std::string_view name, double lambda = 1.0);
    std::string name() const;
};

/// Observable adjustments of a pilot fit.
struct Adjustments {
    double v_tilde = 0.0;
    double gamma_tilde = 0.0;
    double mu_tilde = 0.0;
    double sigma2_tilde = 0.0;
    double kappa = 0.0;  // p / n of the data the pilot was fitted on
};

struct PilotFit {
    VectorXd beta_tilde;
    PilotKind kind;
    Adjustments adjustments;
};

enum class GlmFamily { Logistic, Poisson };

struct NewtonOptions {
    double tol = 1e-8;         // gradient infinity-norm
    int max_iter = 100;
    int max_halvings = 30;
    double norm_guard = 1e6;   // ||b|| beyond this is reported as nonexistence
};

/// (X^T X + n lambda I)^{-1} X^T y.
VectorXd ridge_fit(const MatrixXd& X, const VectorXd& y, double lambda);

/// argmin ||y - X b||^2; requires n > p and full column rank.
VectorXd least_squares_fit(const MatrixXd& X, const VectorXd& y);

/// Canonical-link GLM maximum likelihood by damped Newton.
VectorXd glm_mle_fit(const MatrixXd& X, const VectorXd& y, GlmFamily family, const NewtonOptions& opts = {});

Adjustments pilot_adjustments(const VectorXd& beta_tilde, PilotKind kind, const MatrixXd& X, const VectorXd& y);

/// Fit + adjustments in one call.
PilotFit fit_pilot(const MatrixXd& X, const VectorXd& y, PilotKind kind, const NewtonOptions& opts = {});

/// g_0 and its derivative for the MLE pilots (logistic / exp); identity for ridge and LS.
double pilot_mean(PilotKind kind, double t);

}  // namespace sidx
