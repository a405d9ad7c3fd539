#pragma once

#include <span>
#include <vector>

namespace frontlab {

/// Polynomial ramp from 0 at x = a to 1 at x = b whose first `continuity` derivatives vanish at both ends.
class Smoothstep {
public:
    Smoothstep(double a, double b, int continuity);

    [[nodiscard]] double value(double x) const;
    [[nodiscard]] double derivative(double x, int k) const;
    /// Taylor coefficients of the ramp about x up to `order`.
    [[nodiscard]] std::vector<double> jet(double x, int order) const;
    [[nodiscard]] double a() const { return a_; }
    [[nodiscard]] double b() const { return b_; }

private:
    double a_, b_;
    std::vector<double> coeffs_;  // ascending in x on (a, b)
};

/// Exponential weight omega = exp(eta g(x)) with g = 0 for x <= -1 and g = x for x >= 1,
/// and the algebraic weight rho_r = <x>^r on the right.
class Weights {
public:
    /// `continuity` is the number of continuous derivatives of omega (2m for order-2m models).
    Weights(double eta, int continuity);

    [[nodiscard]] double eta() const { return eta_; }
    [[nodiscard]] int continuity() const { return continuity_; }
    [[nodiscard]] double exponent(double x) const;  ///< g(x)
    [[nodiscard]] double omega(double x) const;
    [[nodiscard]] double rho(double r, double x) const;
    /// (log omega)'
    [[nodiscard]] double log_omega_prime(double x) const;

    /// e_0..e_order with omega(x) * (omega^{-1})^{(n)}(x) = n! e_n.
    [[nodiscard]] std::vector<double> conjugation_jet(double x, int order) const;
    /// Coefficients b_0..b_deg of omega Q(d/dx) omega^{-1} = sum_j b_j(x) d^j for a polynomial Q.
    [[nodiscard]] std::vector<double> conjugated_symbol(std::span<const double> q, double x) const;

private:
    double eta_;
    int continuity_;
    std::vector<double> g_;  // x * S(x) on (-1, 1)
    Smoothstep ramp_;
};

}  // namespace frontlab
