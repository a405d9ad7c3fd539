#pragma once

#include <span>
#include <string>
#include <vector>

#include "frontlab/dispersion.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/model.hpp"

namespace frontlab {

/// Coefficients of q(x) ~ (a + b x) e^{-eta* x} on a fit window.
struct TailFit {
    double a = 0.0;
    double b = 0.0;
    double eta_fit = 0.0;   ///< free-rate Gauss-Newton fit of (A + B x) e^{-e x}
    double eta0_fit = 0.0;  ///< decay rate of e^{eta* x} q - (a + b x); 0 when unresolved
    double window_left = 0.0;
    double window_right = 0.0;
};

/// Critical front sampled on a uniform grid, translated so that |b| = 1.
struct FrontProfile {
    UniformGrid grid;
    std::vector<double> q;
    double c = 0.0;
    double eta_star = 0.0;
    double u_minus = 1.0;
    double a_coeff = 0.0;
    double b_coeff = 1.0;       ///< +1, or -1 when the tail approaches zero from below
    double b_raw = 0.0;         ///< b before normalization
    double shift = 0.0;         ///< translation applied: x_new = x_solved - shift
    double residual_norm = 0.0;
    double eta_fit = 0.0;
    double eta0_fit = 0.0;
    bool tail_reflected = false;
    int newton_iterations = 0;

    [[nodiscard]] double tail(double x) const;
    /// Quintic interpolation inside the grid, u_minus on the left and the tail model on the right.
    [[nodiscard]] double eval(double x) const;
};

struct FrontOptions {
    double phase_fraction = 0.5;            ///< q(0) = phase_fraction * u_minus before normalization
    const FrontProfile* initial = nullptr;  ///< seed profile (continuation); tanh seed otherwise
    double window_left = 0.5;               ///< fractions of x_right
    double window_right = 0.8;
    int max_iterations = 60;
    double tolerance = 1e-11;
    bool normalize = true;
};

/// Discrete traveling-wave residual P(d)q + c q' + f(q) at the interior nodes where centered stencils fit.
std::vector<double> traveling_wave_residual(const ModelSpec& spec, double c, const UniformGrid& grid, std::span<const double> q);
double traveling_wave_residual_norm(const ModelSpec& spec, double c, const UniformGrid& grid, std::span<const double> q);

FrontProfile solve_front(const ModelSpec& spec, const PinchResult& pinch, double x_left, double x_right, int n,
                         const FrontOptions& options = {});

TailFit extract_asymptotics(const UniformGrid& grid, std::span<const double> q, double eta_star, double x1, double x2);
TailFit extract_asymptotics(const FrontProfile& profile, double eta_star, double x1, double x2);

/// Observed convergence order from the profiles on n, 2n-1 and 4n-3 nodes (shared nodes compared).
struct RefinementStudy {
    std::vector<int> sizes;
    std::vector<double> differences;  ///< sup over shared nodes between consecutive levels
    double order = 0.0;
};
RefinementStudy grid_refinement_order(const ModelSpec& spec, const PinchResult& pinch, double x_left, double x_right, int n);

struct FrontContinuationRow {
    double delta = 0.0;
    double a = 0.0;
    double residual = 0.0;
    bool tail_reflected = false;
    bool ok = false;
    std::string error;
};

/// Sequential continuation in delta; each solve is seeded by the previous profile.
std::vector<FrontContinuationRow> front_continuation(const ModelFamily& family, std::span<const double> delta_grid,
                                                     std::span<const PinchResult> pinch_table, double x_left, double x_right, int n);

}  // namespace frontlab
