#pragma once

#include <span>
#include <vector>

namespace frontlab {

/// Finite-difference weights for derivatives 0..max_order at z over arbitrary nodes.
/// Result is indexed [order][node].
std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes, int max_order);

/// Weights for one derivative on a uniform grid: u^(k)(x_i) ~ sum_j w[j] u[i + offset + j].
struct Stencil {
    int offset = 0;
    std::vector<double> w;

    [[nodiscard]] int first(int i) const { return i + offset; }
    [[nodiscard]] int last(int i) const { return i + offset + static_cast<int>(w.size()) - 1; }
};

/// Order-4 stencils for derivatives 1..max_derivative on a uniform grid of spacing h.
class StencilSet {
public:
    StencilSet(double h, int max_derivative);

    [[nodiscard]] int max_derivative() const { return static_cast<int>(centered_.size()) - 1; }
    /// Half width of the centered stencil for derivative k: floor((k+3)/2).
    [[nodiscard]] static int half_width(int k) { return (k + 3) / 2; }
    [[nodiscard]] const Stencil& centered(int k) const { return centered_[static_cast<std::size_t>(k)]; }
    /// Centered stencil when it fits inside [0, n), otherwise a shifted one-sided one of k+4 nodes.
    [[nodiscard]] Stencil at(int k, int i, int n) const;

    /// Apply derivative k at node i, differencing against u[i] so constants give exactly zero.
    [[nodiscard]] double apply(int k, int i, std::span<const double> u) const;

private:
    double h_;
    std::vector<Stencil> centered_;
};

}  // namespace frontlab
