#include "sidx/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "sidx/linalg.hpp"

namespace sidx {

std::vector<double> build_antiderivative(const std::vector<double>& xs, const std::vector<double>& gs) {
    if (xs.size() != gs.size() || xs.size() < 2) config_error("build_antiderivative: invalid grid");
    std::vector<double> G(xs.size(), 0.0);
    for (std::size_t k = 1; k < xs.size(); ++k) G[k] = G[k - 1] + 0.5 * (gs[k] + gs[k - 1]) * (xs[k] - xs[k - 1]);
    return G;
}

namespace {

struct GridTables {
    std::vector<double> xs, gs, G;
    double left_slope = 0.0, right_slope = 0.0, eps = 1e-3;

    std::size_t segment(double x) const {
        return static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    }
    double slope(std::size_t k) const { return (gs[k + 1] - gs[k]) / (xs[k + 1] - xs[k]); }

    double value(double x) const {
        if (x <= xs.front()) return gs.front() + left_slope * (x - xs.front());
        if (x >= xs.back()) return gs.back() + right_slope * (x - xs.back());
        const std::size_t k = segment(x);
        return gs[k] + slope(k) * (x - xs[k]);
    }
    double deriv(double x) const {
        if (x <= xs.front()) return left_slope;
        if (x >= xs.back()) return right_slope;
        return std::max(slope(segment(x)), eps);
    }
    double antideriv(double x) const {
        if (x <= xs.front()) {
            const double d = x - xs.front();
            return G.front() + gs.front() * d + 0.5 * left_slope * d * d;
        }
        if (x >= xs.back()) {
            const double d = x - xs.back();
            return G.back() + gs.back() * d + 0.5 * right_slope * d * d;
        }
        const std::size_t k = segment(x);
        const double d = x - xs[k];
        return G[k] + gs[k] * d + 0.5 * slope(k) * d * d;
    }
};

struct Evaluation {
    double value;
    VectorXd gradient;
    VectorXd weights;  // g'(x_i^T b), floored
};

Evaluation evaluate(const VectorXd& b, const MatrixXd& X, const VectorXd& y, const SurrogateProblem& prob,
                    double weight_floor, bool need_weights) {
    const VectorXd eta = X * b;
    VectorXd resid(eta.size());
    Evaluation ev;
    ev.value = 0.0;
    if (need_weights) ev.weights.resize(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        ev.value += prob.link.antideriv(eta(i)) - y(i) * eta(i);
        resid(i) = prob.link.eval(eta(i)) - y(i);
        if (need_weights) ev.weights(i) = std::max(prob.link.deriv(eta(i)), weight_floor);
    }
    ev.gradient = X.transpose() * resid;
    if (prob.penalty.kind == Penalty::Kind::Ridge) {
        const double scale = static_cast<double>(X.rows()) * prob.penalty.lambda;
        ev.value += 0.5 * scale * b.squaredNorm();
        ev.gradient += scale * b;
    }
    if (!std::isfinite(ev.value) || !ev.gradient.allFinite())
        numerical_error("objective overflow: non-finite surrogate loss");
    return ev;
}

double penalty_shift(const MatrixXd& X, const Penalty& penalty) {
    return penalty.kind == Penalty::Kind::Ridge ? static_cast<double>(X.rows()) * penalty.lambda : 0.0;
}

}  // namespace

LinkFunction grid_link_function(const LinkEstimate& est) {
    auto tables = std::make_shared<GridTables>();
    tables->xs = est.grid;
    tables->gs = est.ghat;
    tables->G = build_antiderivative(est.grid, est.ghat);
    tables->eps = est.eps;
    tables->left_slope = std::max(est.ghat_deriv.front(), est.eps);
    tables->right_slope = std::max(est.ghat_deriv.back(), est.eps);
    return {"estimated", [tables](double x) { return tables->value(x); },
            [tables](double x) { return tables->deriv(x); }, [tables](double x) { return tables->antideriv(x); }};
}

ObjectiveValue surrogate_objective(const VectorXd& b, const MatrixXd& X, const VectorXd& y,
                                   const SurrogateProblem& prob) {
    if (b.size() != X.cols() || y.size() != X.rows()) config_error("surrogate_objective: dimension mismatch");
    Evaluation ev = evaluate(b, X, y, prob, 0.0, true);
    ObjectiveValue out;
    out.value = ev.value;
    out.gradient = std::move(ev.gradient);
    out.hessian = X.transpose() * ev.weights.asDiagonal() * X;
    out.hessian.diagonal().array() += penalty_shift(X, prob.penalty);
    if (!out.hessian.allFinite()) numerical_error("objective overflow: non-finite Hessian");
    return out;
}

CoefFit fit_coefficients(const MatrixXd& X, const VectorXd& y, const SurrogateProblem& prob, const FitOptions& opts) {
    if (y.size() != X.rows()) config_error("fit_coefficients: dimension mismatch");
    if (prob.penalty.kind == Penalty::Kind::None && X.cols() >= X.rows())
        config_error("fit_coefficients: unpenalized fit needs n > p; use a ridge penalty");
    if (prob.penalty.kind == Penalty::Kind::Ridge && !(prob.penalty.lambda > 0.0))
        config_error("fit_coefficients: ridge penalty needs lambda > 0");
    const double shift = penalty_shift(X, prob.penalty);

    CoefFit fit;
    fit.penalty = prob.penalty;
    fit.beta_hat = VectorXd::Zero(X.cols());
    Evaluation ev = evaluate(fit.beta_hat, X, y, prob, opts.weight_floor, true);
    for (int iter = 0;; ++iter) {
        fit.iterations = iter;
        fit.objective = ev.value;
        fit.objective_trace.push_back(ev.value);
        fit.gradient_norm = ev.gradient.lpNorm<Eigen::Infinity>();
        if (fit.gradient_norm < opts.tol) {
            fit.converged = true;
            return fit;
        }
        if (iter == opts.max_iter) break;

        const VectorXd step = -GramFactor(X, ev.weights, shift).solve(ev.gradient);
        const double slope = ev.gradient.dot(step);
        if (-slope <= 1e-12 * (1.0 + std::abs(ev.value))) {
            // Decrease below the resolution of the objective: take the Newton step.
            ev = evaluate(fit.beta_hat + step, X, y, prob, opts.weight_floor, true);
            fit.beta_hat += step;
            continue;
        }
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
            const VectorXd trial = fit.beta_hat + t * step;
            Evaluation next;
            try {
                next = evaluate(trial, X, y, prob, opts.weight_floor, true);
            } catch (const Error&) {
                continue;
            }
            if (next.value <= ev.value + 1e-4 * t * slope) {
                fit.beta_hat = trial;
                ev = std::move(next);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // At rounding level the objective stops resolving decreases; a full
            // Newton step that still shrinks the gradient is taken instead.
            const VectorXd trial = fit.beta_hat + step;
            Evaluation next = evaluate(trial, X, y, prob, opts.weight_floor, true);
            if (next.gradient.lpNorm<Eigen::Infinity>() < fit.gradient_norm) {
                fit.beta_hat = trial;
                ev = std::move(next);
            } else {
                throw ConvergenceError("surrogate fit: line search failed at iteration " + std::to_string(iter) +
                                           " with gradient norm " + std::to_string(fit.gradient_norm),
                                       fit);
            }
        }
    }
    throw ConvergenceError("surrogate fit: no convergence in " + std::to_string(opts.max_iter) +
                               " iterations (gradient norm " + std::to_string(fit.gradient_norm) + ")",
                           fit);
}

}  // namespace sidx
