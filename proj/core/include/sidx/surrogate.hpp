#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sidx/deconv.hpp"
#include "sidx/error.hpp"
#include "sidx/model.hpp"

namespace sidx {

/// Convex penalty J. Ridge is applied to the averaged loss, i.e. the summed
/// objective carries n * lambda * ||b||^2 / 2 (the scaling under which the
/// ridge pilot is the identity-link case).
struct Penalty {
    enum class Kind { None, Ridge };
    Kind kind = Kind::None;
    double lambda = 0.0;

    static Penalty none() { return {}; }
    static Penalty ridge(double lambda) { return {Kind::Ridge, lambda}; }
    std::string name() const { return kind == Kind::None ? "none" : "ridge"; }
};

/// Surrogate loss l(b; x, y) = G(x^T b) - y x^T b with G' = g, plus J.
struct SurrogateProblem {
    LinkFunction link;
    Penalty penalty;
};

/// Cumulative trapezoid of g from the left grid edge; G[0] = 0.
std::vector<double> build_antiderivative(const std::vector<double>& xs, const std::vector<double>& gs);

/// Evaluable (g, g', G) for an estimated link: the eval_link interpolant, its
/// local slope floored at eps, and the exact piecewise-quadratic antiderivative
/// (continued quadratically outside the window).
LinkFunction grid_link_function(const LinkEstimate& est);

struct ObjectiveValue {
    double value = 0.0;
    VectorXd gradient;
    MatrixXd hessian;
};

ObjectiveValue surrogate_objective(const VectorXd& b, const MatrixXd& X, const VectorXd& y,
                                   const SurrogateProblem& prob);

struct FitOptions {
    double tol = 1e-8;           // gradient infinity-norm
    int max_iter = 100;
    int max_halvings = 30;
    double weight_floor = 1e-8;  // lower bound on g'(x^T b) inside the Newton system
};

struct CoefFit {
    VectorXd beta_hat;
    Penalty penalty;
    int iterations = 0;
    double gradient_norm = 0.0;
    double objective = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;  // objective at every accepted iterate, starting from b = 0
};

/// Raised when Newton stops without meeting the tolerance; carries the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, CoefFit diagnostics)
        : Error(ErrorKind::Numerical, msg), diagnostics_(std::move(diagnostics)) {}
    const CoefFit& diagnostics() const { return diagnostics_; }

private:
    CoefFit diagnostics_;
};

/// Damped Newton from b = 0 with step halving.
CoefFit fit_coefficients(const MatrixXd& X, const VectorXd& y, const SurrogateProblem& prob,
                         const FitOptions& opts = {});

}  // namespace sidx
