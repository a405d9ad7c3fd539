#pragma once

#include <functional>
#include <string>
#include <vector>

namespace frontlab {

/// u_t = P(d/dx) u + f(u) with P(nu) = sum_{k=1}^{2m} p_k nu^k and polynomial f.
struct ModelSpec {
    int order_half = 1;       ///< m
    std::vector<double> p;    ///< p_1 .. p_{2m}
    std::vector<double> f;    ///< coefficients of u, u^2, ...
    double u_minus = 1.0;     ///< stable state left behind the front

    /// P as an ascending list including p_0 = 0.
    [[nodiscard]] std::vector<double> symbol() const;
    [[nodiscard]] double reaction(double u) const;
    [[nodiscard]] double reaction_prime(double u) const;
    [[nodiscard]] double reaction_second(double u) const;
    [[nodiscard]] int order() const { return 2 * order_half; }
    [[nodiscard]] double max_abs_p() const;

    /// Throws Error(InvalidModel) when an invariant of the equation fails.
    void validate() const;
    /// Only the structural checks (sizes, finiteness, ellipticity); f may be arbitrary.
    void validate_shape() const;
    [[nodiscard]] std::string describe() const;
};

/// A one-parameter family of models, e.g. indexed by delta.
using ModelFamily = std::function<ModelSpec(double)>;

namespace models {

ModelSpec fkpp();
/// P = D nu^2, f = r u - r u^2.
ModelSpec diffusive(double D, double r);
/// Extended FKPP: P = nu^2 - delta^2 nu^4, f = u - u^2. delta = 0 collapses to m = 1.
ModelSpec efkpp(double delta);
/// f = u (u + delta)(1 - delta - u), u_minus = 1 - delta.
ModelSpec cubic(double delta);

ModelFamily efkpp_family();
ModelFamily cubic_family();

}  // namespace models

}  // namespace frontlab
