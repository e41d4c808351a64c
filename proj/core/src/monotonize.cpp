#include "sidx/monotonize.hpp"

#include <algorithm>

#include "sidx/error.hpp"

namespace sidx {

void GridFunction::validate() const {
    if (xs.size() != vs.size()) config_error("grid function: |xs| != |vs|");
    if (xs.size() < 2) config_error("grid function: need at least two points");
    for (std::size_t k = 1; k < xs.size(); ++k)
        if (!(xs[k] > xs[k - 1])) config_error("grid function: abscissae must be strictly increasing");
}

Monotonizer parse_monotonizer(std::string_view name) {
    if (name == "naive") return Monotonizer::Naive;
    if (name == "rearrange") return Monotonizer::Rearrange;
    config_error("unknown monotonizer '" + std::string(name) + "'");
}

std::string to_string(Monotonizer m) { return m == Monotonizer::Naive ? "naive" : "rearrange"; }

GridFunction monotonize_naive(const GridFunction& f) {
    f.validate();
    GridFunction out = f;
    for (std::size_t k = 1; k < out.vs.size(); ++k) out.vs[k] = std::max(out.vs[k], out.vs[k - 1]);
    return out;
}

GridFunction rearrange(const GridFunction& f) {
    f.validate();
    GridFunction out = f;
    std::sort(out.vs.begin(), out.vs.end());
    return out;
}

GridFunction monotonize(const GridFunction& f, Monotonizer method) {
    return method == Monotonizer::Naive ? monotonize_naive(f) : rearrange(f);
}

}  // namespace sidx
