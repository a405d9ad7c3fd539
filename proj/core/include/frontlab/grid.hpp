#pragma once

#include <span>
#include <vector>

namespace frontlab {

/// n equispaced points including both ends.
struct UniformGrid {
    double x_left = 0.0;
    double x_right = 1.0;
    int n = 2;

    [[nodiscard]] double h() const { return (x_right - x_left) / static_cast<double>(n - 1); }
    [[nodiscard]] double x(int i) const { return x_left + h() * static_cast<double>(i); }
    [[nodiscard]] std::vector<double> points() const;
    [[nodiscard]] bool contains(double x) const { return x >= x_left && x <= x_right; }
    /// Same spacing, domain scaled by `factor` about the origin.
    [[nodiscard]] UniformGrid enlarged(double factor) const;
};

/// Local Lagrange interpolation through `npts` nodes nearest to x (4 = cubic).
/// Requires x inside the grid.
double interpolate(const UniformGrid& grid, std::span<const double> values, double x, int npts = 4);

}  // namespace frontlab
