#pragma once

#include <Eigen/Dense>

#include "sidx/model.hpp"
#include "sidx/pilot.hpp"

namespace sidx {

/// Debiased index estimate W together with its noise level varsigma^2 = sigma~^2 / mu~^2.
struct IndexEstimate {
    VectorXd W;
    double varsigma2 = 0.0;
};

/// W_i = (beta~^T X_i - gamma~ * r_i) / mu~, with r_i the pilot's score residual
/// y_i - g_0(beta~^T X_i) (g_0 = identity for ridge and least squares).
IndexEstimate debias_index(const MatrixXd& X, const VectorXd& y, const PilotFit& fit);

/// mu~ (W - X beta) / sigma~; simulation diagnostic, needs the true beta.
VectorXd index_zscores(const IndexEstimate& index, const MatrixXd& X, const Coefficients& beta, const PilotFit& fit);

}  // namespace sidx
