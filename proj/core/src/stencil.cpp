#include "frontlab/stencil.hpp"

#include <algorithm>
#include <cmath>

#include "frontlab/error.hpp"

namespace frontlab {

std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes, int max_order) {
    const int n = static_cast<int>(nodes.size());
    require(n >= 1 && max_order >= 0, "fornberg_weights: empty node set");
    std::vector<std::vector<double>> c(static_cast<std::size_t>(max_order + 1), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[static_cast<std::size_t>(i)] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

namespace {
Stencil make_stencil(int k, int offset, int count, double h) {
    std::vector<double> nodes(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) nodes[static_cast<std::size_t>(j)] = static_cast<double>(offset + j);
    auto w = fornberg_weights(0.0, nodes, k);
    Stencil s{offset, std::move(w[static_cast<std::size_t>(k)])};
    const double scale = std::pow(h, -k);
    for (double& v : s.w) v *= scale;
    return s;
}
}  // namespace

StencilSet::StencilSet(double h, int max_derivative) : h_(h) {
    require(h > 0.0 && max_derivative >= 1, "StencilSet: bad spacing or order");
    centered_.resize(static_cast<std::size_t>(max_derivative + 1));
    centered_[0] = Stencil{0, {1.0}};
    for (int k = 1; k <= max_derivative; ++k) {
        const int p = half_width(k);
        centered_[static_cast<std::size_t>(k)] = make_stencil(k, -p, 2 * p + 1, h);
    }
}

Stencil StencilSet::at(int k, int i, int n) const {
    if (k == 0) return centered_[0];
    const int p = half_width(k);
    if (i - p >= 0 && i + p < n) return centered_[static_cast<std::size_t>(k)];
    const int count = k + 4;
    require(count <= n, "StencilSet: grid too small for one-sided stencil");
    int first = std::clamp(i - count / 2, 0, n - count);
    return make_stencil(k, first - i, count, h_);
}

double StencilSet::apply(int k, int i, std::span<const double> u) const {
    const int n = static_cast<int>(u.size());
    const Stencil s = at(k, i, n);
    const double ui = u[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (std::size_t j = 0; j < s.w.size(); ++j)
        acc += s.w[j] * (u[static_cast<std::size_t>(i + s.offset + static_cast<int>(j))] - ui);
    if (k == 0) return ui;
    return acc;
}

}  // namespace frontlab
