#include "frontlab/model.hpp"

#include <cmath>
#include <sstream>

#include "frontlab/error.hpp"
#include "frontlab/polynomial.hpp"

namespace frontlab {

namespace {
std::vector<double> reaction_poly(const std::vector<double>& f) {
    std::vector<double> c(f.size() + 1, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) c[k + 1] = f[k];
    return c;
}
}  // namespace

std::vector<double> ModelSpec::symbol() const {
    std::vector<double> c(p.size() + 1, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) c[k + 1] = p[k];
    return c;
}

double ModelSpec::reaction(double u) const {
    const auto c = reaction_poly(f);
    return poly::evaluate<double>(c, u);
}

double ModelSpec::reaction_prime(double u) const {
    const auto c = reaction_poly(f);
    return poly::evaluate_derivative<double>(c, u, 1);
}

double ModelSpec::reaction_second(double u) const {
    const auto c = reaction_poly(f);
    return poly::evaluate_derivative<double>(c, u, 2);
}

double ModelSpec::max_abs_p() const {
    double m = 0.0;
    for (double v : p) m = std::max(m, std::abs(v));
    return m;
}

void ModelSpec::validate_shape() const {
    if (order_half < 1) fail(ErrorKind::InvalidModel, "order_half must be a positive integer");
    if (p.size() != static_cast<std::size_t>(2 * order_half))
        fail(ErrorKind::InvalidModel, "p must list exactly 2*order_half coefficients");
    for (double v : p)
        if (!std::isfinite(v)) fail(ErrorKind::InvalidModel, "p has a non-finite coefficient");
    for (double v : f)
        if (!std::isfinite(v)) fail(ErrorKind::InvalidModel, "f has a non-finite coefficient");
    const double lead = (order_half % 2 == 0 ? 1.0 : -1.0) * p.back();
    if (!(lead < 0.0)) fail(ErrorKind::InvalidModel, "P is not elliptic: (-1)^m p_2m must be negative");
    if (f.empty()) fail(ErrorKind::InvalidModel, "f has no coefficients");
}

void ModelSpec::validate() const {
    validate_shape();
    if (!std::isfinite(u_minus) || u_minus == 0.0) fail(ErrorKind::InvalidModel, "u_minus must be finite and nonzero");
    double scale = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        scale += std::abs(f[k]) * std::pow(std::abs(u_minus), static_cast<double>(k + 1));
    if (std::abs(reaction(u_minus)) > 1e-12 * std::max(1.0, scale))
        fail(ErrorKind::InvalidModel, "f(u_minus) must vanish");
    if (!(reaction_prime(0.0) > 0.0)) fail(ErrorKind::InvalidModel, "f'(0) must be positive");
    if (!(reaction_prime(u_minus) < 0.0)) fail(ErrorKind::InvalidModel, "f'(u_minus) must be negative");
}

std::string ModelSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "m=" << order_half << " p=[";
    for (std::size_t k = 0; k < p.size(); ++k) os << (k ? "," : "") << p[k];
    os << "] f=[";
    for (std::size_t k = 0; k < f.size(); ++k) os << (k ? "," : "") << f[k];
    os << "] u_minus=" << u_minus;
    return os.str();
}

namespace models {

ModelSpec fkpp() { return diffusive(1.0, 1.0); }

ModelSpec diffusive(double D, double r) { return ModelSpec{1, {0.0, D}, {r, -r}, 1.0}; }

ModelSpec efkpp(double delta) {
    if (delta == 0.0) return fkpp();
    return ModelSpec{2, {0.0, 1.0, 0.0, -delta * delta}, {1.0, -1.0}, 1.0};
}

ModelSpec cubic(double delta) {
    return ModelSpec{1, {0.0, 1.0}, {delta * (1.0 - delta), 1.0 - 2.0 * delta, -1.0}, 1.0 - delta};
}

ModelFamily efkpp_family() { return [](double d) { return efkpp(d); }; }
ModelFamily cubic_family() { return [](double d) { return cubic(d); }; }

}  // namespace models

}  // namespace frontlab
