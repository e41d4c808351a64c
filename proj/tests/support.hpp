#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sidx/error.hpp"

namespace testing_support {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
    return m;
}

inline VectorXd gaussian_vector(Eigen::Index n, std::uint64_t seed) { return gaussian_matrix(n, 1, seed).col(0); }

inline std::vector<double> linspace(double a, double b, int points) {
    std::vector<double> xs(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) xs[static_cast<std::size_t>(i)] = a + (b - a) * i / (points - 1);
    return xs;
}

inline double max_abs_diff(const VectorXd& a, const VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Runs `f` and reports the kind of sidx::Error it throws; fails the caller's check otherwise.
template <class F>
bool throws_kind(F&& f, sidx::ErrorKind kind) {
    try {
        f();
    } catch (const sidx::Error& e) {
        return e.kind() == kind;
    }
    return false;
}

}  // namespace testing_support
