#include "frontlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "frontlab/error.hpp"

namespace frontlab {

std::vector<double> UniformGrid::points() const {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = x(i);
    return out;
}

UniformGrid UniformGrid::enlarged(double factor) const {
    const double step = h();
    const double left = x_left * factor;
    const int cells = static_cast<int>(std::lround((x_right * factor - left) / step));
    return UniformGrid{left, left + step * cells, cells + 1};
}

double interpolate(const UniformGrid& grid, std::span<const double> values, double x, int npts) {
    require(static_cast<int>(values.size()) == grid.n, "interpolate: value count does not match grid");
    require(npts >= 2 && npts <= grid.n, "interpolate: bad stencil size");
    const double h = grid.h();
    const double s = (x - grid.x_left) / h;
    require(s >= -1e-9 && s <= grid.n - 1 + 1e-9, "interpolate: point outside grid");
    int first = static_cast<int>(std::floor(s)) - (npts / 2 - 1);
    first = std::clamp(first, 0, grid.n - npts);
    double acc = 0.0;
    for (int j = 0; j < npts; ++j) {
        double w = 1.0;
        const double sj = static_cast<double>(first + j);
        for (int k = 0; k < npts; ++k) {
            if (k == j) continue;
            w *= (s - static_cast<double>(first + k)) / (sj - static_cast<double>(first + k));
        }
        acc += w * values[static_cast<std::size_t>(first + j)];
    }
    return acc;
}

}  // namespace frontlab
