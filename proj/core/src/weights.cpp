#include "frontlab/weights.hpp"

#include <cmath>

#include "frontlab/error.hpp"
#include "frontlab/polynomial.hpp"

namespace frontlab {

namespace {

std::vector<double> unit_ramp(int n) {
    // y^{n+1} sum_k C(n+k,k) C(2n+1,n-k) (-y)^k
    std::vector<double> s(static_cast<std::size_t>(2 * n + 2), 0.0);
    for (int k = 0; k <= n; ++k)
        s[static_cast<std::size_t>(n + 1 + k)] =
            poly::binomial(n + k, k) * poly::binomial(2 * n + 1, n - k) * ((k % 2) ? -1.0 : 1.0);
    return s;
}

std::vector<double> jet_from_poly(std::span<const double> c, double x, int order) {
    auto shifted = poly::taylor_shift(c, x);
    shifted.resize(static_cast<std::size_t>(order + 1), 0.0);
    return shifted;
}

}  // namespace

Smoothstep::Smoothstep(double a, double b, int continuity) : a_(a), b_(b) {
    require(b > a && continuity >= 0, "Smoothstep: bad interval");
    auto s = unit_ramp(continuity);
    // y = (x - a)/(b - a): coefficients in x via scaling then shifting
    const double inv = 1.0 / (b - a);
    double scale = 1.0;
    for (double& v : s) {
        v *= scale;
        scale *= inv;
    }
    coeffs_ = poly::taylor_shift(s, -a);
}

double Smoothstep::value(double x) const {
    if (x <= a_) return 0.0;
    if (x >= b_) return 1.0;
    return poly::evaluate<double>(coeffs_, x);
}

double Smoothstep::derivative(double x, int k) const {
    if (k == 0) return value(x);
    if (x <= a_ || x >= b_) return 0.0;
    return poly::evaluate_derivative<double>(coeffs_, x, k);
}

std::vector<double> Smoothstep::jet(double x, int order) const {
    std::vector<double> out(static_cast<std::size_t>(order + 1), 0.0);
    if (x <= a_) return out;
    if (x >= b_) {
        out[0] = 1.0;
        return out;
    }
    return jet_from_poly(coeffs_, x, order);
}

Weights::Weights(double eta, int continuity) : eta_(eta), continuity_(continuity), ramp_(-1.0, 1.0, continuity) {
    const std::vector<double> x_poly{0.0, 1.0};
    std::vector<double> ramp_poly = ramp_.jet(0.0, 2 * continuity + 1);  // exact: degree 2n+1
    g_ = poly::multiply(x_poly, ramp_poly);
}

double Weights::exponent(double x) const {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return x;
    return poly::evaluate<double>(g_, x);
}

double Weights::omega(double x) const { return std::exp(eta_ * exponent(x)); }

double Weights::log_omega_prime(double x) const {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return eta_;
    return eta_ * poly::evaluate_derivative<double>(g_, x, 1);
}

double Weights::rho(double r, double x) const {
    return std::exp(r * ramp_.value(x) * 0.5 * std::log1p(x * x));
}

std::vector<double> Weights::conjugation_jet(double x, int order) const {
    std::vector<double> h(static_cast<std::size_t>(order + 1), 0.0);
    if (x >= 1.0) {
        if (order >= 1) h[1] = -eta_;
    } else if (x > -1.0) {
        h = jet_from_poly(g_, x, order);
        for (double& v : h) v *= -eta_;
    }
    h[0] = 0.0;
    std::vector<double> e(static_cast<std::size_t>(order + 1), 0.0);
    e[0] = 1.0;
    for (int n = 1; n <= order; ++n) {
        double acc = 0.0;
        for (int k = 1; k <= n; ++k) acc += k * h[static_cast<std::size_t>(k)] * e[static_cast<std::size_t>(n - k)];
        e[static_cast<std::size_t>(n)] = acc / n;
    }
    return e;
}

std::vector<double> Weights::conjugated_symbol(std::span<const double> q, double x) const {
    const int deg = static_cast<int>(q.size()) - 1;
    const auto e = conjugation_jet(x, deg);
    std::vector<double> b(q.size(), 0.0);
    std::vector<double> factorial(q.size(), 1.0);
    for (std::size_t k = 1; k < q.size(); ++k) factorial[k] = factorial[k - 1] * static_cast<double>(k);
    for (int j = 0; j <= deg; ++j) {
        double acc = 0.0;
        for (int k = j; k <= deg; ++k)
            acc += q[static_cast<std::size_t>(k)] * poly::binomial(k, j) * factorial[static_cast<std::size_t>(k - j)] *
                   e[static_cast<std::size_t>(k - j)];
        b[static_cast<std::size_t>(j)] = acc;
    }
    return b;
}

}  // namespace frontlab
