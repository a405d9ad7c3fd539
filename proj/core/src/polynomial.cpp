#include "frontlab/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include "frontlab/error.hpp"

namespace frontlab::poly {

std::vector<double> derivative(std::span<const double> c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
    return d;
}

std::vector<double> taylor_shift(std::span<const double> c, double s) {
    // Horner-style synthetic division, repeated; exact for small degrees.
    std::vector<double> out(c.begin(), c.end());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t k = n - 1; k > i; --k) out[k - 1] += s * out[k];
    return out;
}

std::vector<double> multiply(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> trim(std::vector<double> c, double tol) {
    while (c.size() > 1 && std::abs(c.back()) <= tol) c.pop_back();
    return c;
}

std::vector<std::complex<double>> roots(std::span<const double> c) {
    auto t = trim(std::vector<double>(c.begin(), c.end()));
    const int deg = static_cast<int>(t.size()) - 1;
    if (deg < 1) return {};
    if (deg == 1) return {std::complex<double>(-t[0] / t[1], 0.0)};
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -t[static_cast<std::size_t>(i)] / t.back();
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) fail(ErrorKind::EigensolverFailure, "companion eigenvalues did not converge");
    std::vector<std::complex<double>> out(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
    return r;
}

}  // namespace frontlab::poly
