#pragma once

#include <span>
#include <vector>

namespace sidx {

double normal_cdf(double x);
double normal_quantile(double prob);

/// sup_x |F_n(x) - Phi(x)| of the sample against N(0, 1).
double ks_distance_normal(std::span<const double> sample);

double sample_mean(std::span<const double> xs);
/// Unbiased (n - 1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> xs);

}  // namespace sidx
