#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sidx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Observations (X_i, y_i), one row of X per observation.
struct Dataset {
    MatrixXd X;
    VectorXd y;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }

    /// Throws a config error on shape mismatch, empty data or non-finite entries.
    void validate() const;

    /// Rows selected by `rows`, in the given order.
    Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Gaussian design N_p(0, Sigma). Construction validates Sigma and caches its
/// Cholesky factor and tau_j = Theta_jj^{-1/2}, Theta = Sigma^{-1}.
class DesignSpec {
public:
    static DesignSpec identity(Eigen::Index p);
    /// Throws an invalid-design error unless Sigma is symmetric (1e-10) and positive definite.
    static DesignSpec from_covariance(const MatrixXd& sigma);

    Eigen::Index p() const { return sigma_.rows(); }
    const MatrixXd& sigma() const { return sigma_; }
    /// Lower-triangular L with Sigma = L L^T.
    const MatrixXd& cholesky() const { return chol_; }
    const VectorXd& tau() const { return tau_; }
    MatrixXd precision() const;
    bool is_identity() const { return identity_; }

private:
    MatrixXd sigma_;
    MatrixXd chol_;
    VectorXd tau_;
    bool identity_ = false;
};

/// True coefficient vector, normalized so that beta^T Sigma beta = 1.
struct Coefficients {
    VectorXd beta;
};

struct CoefficientScheme {
    enum class Kind { UniformSphere, Sparse };
    Kind kind = Kind::UniformSphere;
    Eigen::Index support = 0;  // k for Sparse

    static CoefficientScheme uniform_sphere() { return {}; }
    static CoefficientScheme sparse(Eigen::Index k) { return {Kind::Sparse, k}; }
};

/// Scalar link g with analytic derivative and antiderivative (G' = g).
struct LinkFunction {
    std::string label;
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    std::function<double(double)> antideriv;
};

enum class ModelVariant { Cloglog, XSqrt, Cubic, Piecewise, Logit, Poisson, CubicPlus, PiecewisePlus };

enum class NoiseFamily { Bernoulli, Poisson, Gaussian };

struct NoiseSpec {
    NoiseFamily family = NoiseFamily::Gaussian;
    double variance = 0.0;    // Gaussian only
    double mean_shift = 0.0;  // Gaussian only
};

/// A built-in data-generating process: y | X ~ family(g(beta^T X)).
struct SimModel {
    ModelVariant variant = ModelVariant::Cubic;
    LinkFunction link;
    NoiseSpec noise;

    static SimModel builtin(ModelVariant variant);
    static SimModel builtin(std::string_view name) { return builtin(parse_model_variant(name)); }

    static ModelVariant parse_model_variant(std::string_view name);
};

std::string to_string(ModelVariant variant);

/// Analytic link of a built-in variant.
LinkFunction link_registry_lookup(ModelVariant variant);
LinkFunction link_registry_lookup(std::string_view name);

/// Identity link g(t) = t; used as the surrogate-loss form of least squares.
LinkFunction identity_link();
/// g(t) = 1 / (1 + exp(-t)).
LinkFunction logistic_link();

/// n i.i.d. rows from N_p(0, Sigma) via the Cholesky factor.
MatrixXd sample_design(Eigen::Index n, const DesignSpec& spec, std::uint64_t seed);

Coefficients sample_coefficients(Eigen::Index p, CoefficientScheme scheme, const DesignSpec& spec,
                                 std::uint64_t seed);

VectorXd generate_responses(const MatrixXd& X, const Coefficients& beta, const SimModel& model,
                            std::uint64_t seed);

}  // namespace sidx
