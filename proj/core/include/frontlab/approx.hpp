#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "frontlab/dispersion.hpp"
#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/weights.hpp"

namespace frontlab {

/// Psi0 = beta0 xi e^{-xi^2/4} and the Dirichlet solution Psi1 of
/// Psi1'' + xi Psi1'/2 + 3 Psi1/2 = (3/(2 eta sqrt(alpha))) Psi0' - (alpha3/alpha^{3/2}) Psi0''' on [0, xi_max].
struct SelfSimilarProfiles {
    UniformGrid xi_grid;
    std::vector<double> psi0;
    std::vector<double> psi1;
    std::array<std::vector<double>, 4> derivatives;  ///< Psi1^{(k)}, k = 0..3, on xi_grid
    double beta0 = 0.0;
    double forcing_first = 0.0;  ///< coefficient of Psi0'
    double forcing_third = 0.0;  ///< coefficient of Psi0'''
    double gaussian_constant = 0.0;  ///< max |Psi1| e^{xi^2/8} away from the truncation point
    double discrete_residual = 0.0;  ///< sup of the discrete equation residual
    /// Continuation of the same equation to xi < 0 (needed when x + x0 < 0 in the blend zone).
    UniformGrid extension_grid;
    std::vector<double> extension, extension_prime;

    [[nodiscard]] double psi1_at(double xi) const;
    [[nodiscard]] double psi1_prime_at(double xi) const;
    /// Right-hand side of the Psi1 equation at xi.
    [[nodiscard]] double forcing(double xi) const;
};

SelfSimilarProfiles solve_psi1(double alpha, double alpha3, double eta_star, double beta0, double xi_max = 12.0, int n = 4000);

/// Weight used by the approximate solution: the ramp is smoother than the operator weight so that
/// order-4 differences of omega q* stay order 4 across |x| <= 1.
Weights approx_weights(const ModelSpec& spec, double eta_star);

struct ApproxOptions {
    double T = 100.0;
    double mu = 0.1;
    std::optional<double> x0;     ///< default: the front's tail coefficient a
    std::optional<double> beta0;  ///< default: sqrt(alpha)
    double xi_max = 12.0;
    int psi_n = 4000;
};

/// Blend of the shifted weighted front (interior) and the diffusive tail (leading edge).
class ApproxSolution {
public:
    ApproxSolution(const ModelSpec& spec, const PinchResult& pinch, const FrontProfile& front, const ApproxOptions& options = {});

    [[nodiscard]] double T() const { return T_; }
    [[nodiscard]] double mu() const { return mu_; }
    [[nodiscard]] double r() const { return 2.0 + mu_; }
    [[nodiscard]] double x0() const { return x0_; }
    [[nodiscard]] double beta0() const { return profiles_.beta0; }
    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] double alpha3() const { return alpha3_; }
    [[nodiscard]] const SelfSimilarProfiles& profiles() const { return profiles_; }
    [[nodiscard]] const FrontProfile& front() const { return front_; }
    [[nodiscard]] const Weights& weights() const { return weights_; }
    [[nodiscard]] const ModelSpec& spec() const { return spec_; }
    [[nodiscard]] const PinchResult& pinch() const { return pinch_; }

    [[nodiscard]] double matching_point(double t) const;
    /// omega q* at x (u_minus omega on the left, tail model on the right).
    [[nodiscard]] double weighted_front(double x) const;
    [[nodiscard]] double weighted_front_prime(double x) const;
    [[nodiscard]] double psi_minus(double x, double zeta) const { return weighted_front(x + zeta); }
    [[nodiscard]] double psi_plus(double x, double t) const;
    [[nodiscard]] double psi_plus_prime(double x, double t) const;
    /// chi = 1 - ramp(x - (t+T)^mu), the ramp smooth of order 2m.
    [[nodiscard]] double blend(double x, double t) const;

private:
    ModelSpec spec_;
    PinchResult pinch_;
    FrontProfile front_;
    Weights weights_;
    Smoothstep ramp_;
    SelfSimilarProfiles profiles_;
    double T_, mu_, x0_, alpha_, alpha3_;
};

/// Shift zeta(t+T) matching psi- and psi+ at x = (t+T)^mu (Newton on the matching residual).
double compute_zeta(const ApproxSolution& approx, double t);

struct ZetaTable {
    std::vector<double> t, zeta;
    /// Cubic interpolation in log(t + T).
    [[nodiscard]] double at(double t_query, double T) const;
};
ZetaTable tabulate_zeta(const ApproxSolution& approx, double t_max, int count);

double eval_psi(const ApproxSolution& approx, double x, double t);
/// psi at many points sharing one zeta solve.
std::vector<double> sample_psi(const ApproxSolution& approx, std::span<const double> xs, double t);

struct MatchingDiagnostics {
    double t = 0.0;
    double matching_point = 0.0;
    double zeta = 0.0;
    double value_gap = 0.0;       ///< psi- - psi+ at the matching point
    double derivative_gap = 0.0;  ///< |psi-_x - psi+_x| there
};
MatchingDiagnostics matching_diagnostics(const ApproxSolution& approx, double t);

/// v(x, t) sampled on a set of points.
using FieldSampler = std::function<std::vector<double>(std::span<const double> xs, double t)>;

struct ResidualOptions {
    double dt_fd = -1.0;    ///< time step of the 4-point t-difference; default 1e-4 (t + T)
    bool log_term = true;   ///< include the -3/(2 eta (t+T)) speed correction
};

/// F_res[v] on a uniform grid: v_t - omega (P(d) + c_eff d) omega^{-1} v - omega f(omega^{-1} v).
std::vector<double> residual_of(const ModelSpec& spec, const PinchResult& pinch, const FieldSampler& v, const UniformGrid& x_grid,
                                double t, double T, const ResidualOptions& options = {});
std::vector<double> residual(const ApproxSolution& approx, const UniformGrid& x_grid, double t, const ResidualOptions& options = {});

/// sup <x>^r |g| with the one-sided algebraic weight.
double weighted_sup_norm(std::span<const double> g, const UniformGrid& grid, const Weights& weights, double r);
/// integral of <x> |g|.
double l11_norm(std::span<const double> g, const UniformGrid& grid);

struct DecayRow {
    double t = 0.0;
    double norm = 0.0;    ///< L-infinity_r norm of R(., t)
    double scaled = 0.0;  ///< (t+T)^{1/2 - 4 mu} norm
    double l11 = 0.0;
};
struct DecayTable {
    std::vector<DecayRow> rows;
    double first_half_max = 0.0, second_half_max = 0.0;
    bool bounded = false;  ///< second-half max <= 2 first-half max
};

/// Builds the table from a norm callback returning (L-infinity_r, L^1_1) at t.
DecayTable decay_table(std::span<const double> t_samples, double T, double mu,
                       const std::function<std::pair<double, double>(double)>& norms);
/// Residual grid at t: dx = 0.05 from -20 to (t+T)^mu + 14 sqrt(alpha (t+T)).
UniformGrid residual_grid(const ApproxSolution& approx, double t);
DecayTable residual_decay_check(const ApproxSolution& approx, std::span<const double> t_samples);
/// count samples with t + T log-spaced on [T, 11 T].
std::vector<double> log_spaced_times(double T, double span_factor, int count);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Front with the exact tail (a + x) e^{-eta x} on its grid (test fixture for the matching construction).
FrontProfile exact_tail_front(double a, double eta_star, const UniformGrid& grid);

}  // namespace frontlab
