#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sidx {

/// Function sampled on strictly increasing abscissae.
struct GridFunction {
    std::vector<double> xs;
    std::vector<double> vs;

    /// Throws a config error unless |xs| == |vs| >= 2 and xs is strictly increasing.
    void validate() const;
};

enum class Monotonizer { Naive, Rearrange };

Monotonizer parse_monotonizer(std::string_view name);
std::string to_string(Monotonizer m);

/// Running maximum from the left: R[f](x) = sup_{x' <= x} f(x').
GridFunction monotonize_naive(const GridFunction& f);

/// Monotone rearrangement: the grid values sorted ascending, abscissae unchanged.
/// On an equispaced grid this is the exact discrete analogue of the quantile
/// (inverse distribution function) of f over the window.
GridFunction rearrange(const GridFunction& f);

GridFunction monotonize(const GridFunction& f, Monotonizer method);

}  // namespace sidx
