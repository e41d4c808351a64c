#include "sidx/index.hpp"

#include <cmath>

#include "sidx/error.hpp"

namespace sidx {

IndexEstimate debias_index(const MatrixXd& X, const VectorXd& y, const PilotFit& fit) {
    if (X.cols() != fit.beta_tilde.size() || X.rows() != y.size())
        config_error("debias_index: dimension mismatch");
    const Adjustments& adj = fit.adjustments;
    if (!(adj.mu_tilde > 0.0)) numerical_error("degenerate pilot: mu~ = 0");

    const VectorXd fitted = X * fit.beta_tilde;
    IndexEstimate out;
    out.W.resize(fitted.size());
    for (Eigen::Index i = 0; i < fitted.size(); ++i) {
        const double resid = y(i) - pilot_mean(fit.kind, fitted(i));
        out.W(i) = (fitted(i) - adj.gamma_tilde * resid) / adj.mu_tilde;
    }
    out.varsigma2 = adj.sigma2_tilde / (adj.mu_tilde * adj.mu_tilde);
    if (!out.W.allFinite() || !std::isfinite(out.varsigma2)) numerical_error("debias_index: non-finite index");
    return out;
}

VectorXd index_zscores(const IndexEstimate& index, const MatrixXd& X, const Coefficients& beta, const PilotFit& fit) {
    const double sigma = std::sqrt(fit.adjustments.sigma2_tilde);
    if (!(sigma > 0.0)) numerical_error("index_zscores: degenerate sigma~ = 0");
    return fit.adjustments.mu_tilde * (index.W - X * beta.beta) / sigma;
}

}  // namespace sidx
