#pragma once

#include <Eigen/Dense>

namespace sidx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Factorization of M = X^T W X + shift * I for a nonnegative diagonal W.
///
/// When n < p and shift > 0 the n x n dual system (W^{1/2} X X^T W^{1/2} + shift I)
/// is factored instead of the p x p primal one. Both solves and the diagonal of
/// the weighted hat matrix W^{1/2} X M^{-1} X^T W^{1/2} come from the same factor.
class GramFactor {
public:
    /// Throws a numerical error when M is singular to working precision.
    GramFactor(const MatrixXd& X, const VectorXd& weights, double shift);

    /// M^{-1} rhs.
    VectorXd solve(const VectorXd& rhs) const;

    /// h_i = (W^{1/2} X M^{-1} X^T W^{1/2})_ii.
    VectorXd hat_diagonal() const;

    bool dual() const { return dual_; }

private:
    MatrixXd Xw_;  // W^{1/2} X
    double shift_;
    bool dual_;
    Eigen::LLT<MatrixXd> llt_;
};

/// v = n^{-1} tr(W - W X (X^T W X + shift I)^{-1} X^T W).
double weighted_residual_trace(const MatrixXd& X, const VectorXd& weights, double shift);

}  // namespace sidx
