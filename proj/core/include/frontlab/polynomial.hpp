#pragma once

#include <complex>
#include <span>
#include <vector>

/// Dense real polynomials stored as ascending coefficient lists c0 + c1 x + c2 x^2 + ...
namespace frontlab::poly {

template <class T>
T evaluate(std::span<const double> c, T x) {
    T acc{0};
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + T(*it);
    return acc;
}

std::vector<double> derivative(std::span<const double> c);

/// n-th derivative at x, computed without forming intermediate lists.
template <class T>
T evaluate_derivative(std::span<const double> c, T x, int order) {
    T acc{0};
    for (int k = static_cast<int>(c.size()) - 1; k >= order; --k) {
        double falling = 1.0;
        for (int j = 0; j < order; ++j) falling *= static_cast<double>(k - j);
        acc = acc * x + T(c[static_cast<std::size_t>(k)] * falling);
    }
    return acc;
}

/// Coefficients of q(y) = p(y + s).
std::vector<double> taylor_shift(std::span<const double> c, double s);

std::vector<double> multiply(std::span<const double> a, std::span<const double> b);

/// Drops trailing coefficients with |c| <= tol (keeps at least one).
std::vector<double> trim(std::vector<double> c, double tol = 0.0);

/// All complex roots via eigenvalues of the companion matrix; degree = size-1 after trimming.
std::vector<std::complex<double>> roots(std::span<const double> c);

double binomial(int n, int k);

}  // namespace frontlab::poly
