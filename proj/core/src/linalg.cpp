#include "sidx/linalg.hpp"

#include <cmath>

#include "sidx/error.hpp"

namespace sidx {

namespace {

// Cholesky with a relative pivot check; LLT alone accepts numerically singular input.
void factor_or_throw(Eigen::LLT<MatrixXd>& llt, const MatrixXd& M) {
    llt.compute(M);
    if (llt.info() != Eigen::Success) numerical_error("gram factorization: matrix is not positive definite");
    const VectorXd piv = llt.matrixLLT().diagonal().cwiseAbs2();
    if (piv.minCoeff() <= 1e-13 * piv.maxCoeff())
        numerical_error("gram factorization: matrix is singular to working precision");
}

}  // namespace

GramFactor::GramFactor(const MatrixXd& X, const VectorXd& weights, double shift)
    : shift_(shift), dual_(X.rows() < X.cols() && shift > 0.0) {
    if (weights.size() != X.rows()) config_error("gram factorization: weight length mismatch");
    if (shift < 0.0) config_error("gram factorization: negative shift");
    if ((weights.array() < 0.0).any()) config_error("gram factorization: negative weight");
    Xw_ = weights.cwiseSqrt().asDiagonal() * X;
    if (dual_) {
        MatrixXd G = Xw_ * Xw_.transpose();
        G.diagonal().array() += shift;
        factor_or_throw(llt_, G);
    } else {
        MatrixXd M = Xw_.transpose() * Xw_;
        M.diagonal().array() += shift;
        factor_or_throw(llt_, M);
    }
}

VectorXd GramFactor::solve(const VectorXd& rhs) const {
    if (!dual_) return llt_.solve(rhs);
    // Woodbury: (A^T A + c I)^{-1} r = (r - A^T (A A^T + c I)^{-1} A r) / c
    const VectorXd inner = llt_.solve(Xw_ * rhs);
    return (rhs - Xw_.transpose() * inner) / shift_;
}

VectorXd GramFactor::hat_diagonal() const {
    if (dual_) {
        // H = G (G + cI)^{-1} = I - c (G + cI)^{-1}
        const Eigen::Index n = Xw_.rows();
        const MatrixXd inv = llt_.solve(MatrixXd::Identity(n, n));
        return (1.0 - shift_ * inv.diagonal().array()).matrix();
    }
    // h_i = || L^{-1} xw_i ||^2
    const MatrixXd B = llt_.matrixL().solve(Xw_.transpose());
    return B.colwise().squaredNorm().transpose();
}

double weighted_residual_trace(const MatrixXd& X, const VectorXd& weights, double shift) {
    const GramFactor factor(X, weights, shift);
    const VectorXd h = factor.hat_diagonal();
    // tr(W^{1/2} H W^{1/2}) = sum_i w_i h_i
    return (weights.sum() - weights.dot(h)) / static_cast<double>(X.rows());
}

}  // namespace sidx
