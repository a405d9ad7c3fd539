#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "frontlab/banded.hpp"
#include "frontlab/dispersion.hpp"
#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/weights.hpp"

namespace frontlab {

/// omega (P(d) + c* d + f'(q*)) omega^{-1} discretized with order-4 centered differences;
/// values outside the grid are taken as zero.
struct WeightedOperator {
    UniformGrid grid;
    BandedMatrix<double> L;
    ModelSpec spec;
    PinchResult pinch;
    std::vector<double> q;                          ///< front on the grid
    std::vector<std::vector<double>> coefficients;  ///< [node][j]: coefficient of d^j, f'(q*) included in j = 0
    double row_scaling = 0.0;                       ///< eta of an extra e^{eta x} similarity, 0 if none
    double interface_x = 0.0;                       ///< where q* = u_minus / 2
};

WeightedOperator build_weighted_operator(const ModelSpec& spec, const PinchResult& pinch, const FrontProfile& profile,
                                         const UniformGrid& grid);
/// Diag(e^{eta g}) L Diag(e^{-eta g}) with the one-sided exponent g of Weights.
WeightedOperator row_scaled(const WeightedOperator& op, double eta);

enum class EigClass { point_spectrum, essential_artifact };

struct EigCandidate {
    cplx lambda;
    double score = 0.0;            ///< eigenvector mass fraction in the middle half
    double enlargement_shift = -1; ///< |lambda - nearest eigenvalue on the enlarged domain|, -1 if not computed
    EigClass classification = EigClass::essential_artifact;
};

struct ScanOptions {
    int dense_limit = 1000;  ///< dense QR below this size, shift-invert Arnoldi above
    int krylov_dim = 60;
    double localization_threshold = 0.8;
    double enlargement_tolerance = 1e-4;
    double upper = 1.0;       ///< shifts cover [-margin, upper]
    int shift_count = 5;
};

struct EigReport {
    std::vector<EigCandidate> candidates;
    cplx resonance_value{0.0, 0.0};
    bool resonance_computed = false;
    double sigma_min = 0.0;
    double sigma_2 = 0.0;
    bool verdict = false;  ///< Hypothesis 4: no unstable point spectrum and E(0) away from zero
    int unstable_point_count = 0;
    std::string method;
    std::string note;
};

inline constexpr double kResonanceTolerance = 1e-3;

/// Eigenvalues with Re lambda >= -margin; `enlarged` (same spacing, bigger domain) confirms point spectrum.
EigReport eigenvalue_scan(const WeightedOperator& op, double margin, const WeightedOperator* enlarged = nullptr,
                          const ScanOptions& options = {});

/// Builds the operator on `grid` and on a 20% larger domain, scans, and evaluates E(0).
EigReport scan_front_spectrum(const ModelSpec& spec, const PinchResult& pinch, const FrontProfile& profile,
                              const UniformGrid& grid, double margin, const ScanOptions& options = {});

/// All eigenvalues by the dense path (small operators, tests).
std::vector<cplx> dense_eigenvalues(const WeightedOperator& op);

/// E(gamma) through the bordered system on the e^{eta x}-scaled discretization.
class ResonanceFunction {
public:
    explicit ResonanceFunction(const WeightedOperator& op, double scaling_eta = -1.0);

    [[nodiscard]] cplx operator()(cplx gamma) const;
    [[nodiscard]] double sigma_min() const { return sigma_min_; }
    [[nodiscard]] double sigma_2() const { return sigma_2_; }
    [[nodiscard]] double scaling_eta() const { return eta_; }
    [[nodiscard]] const std::vector<double>& adjoint_kernel() const { return phi_; }
    /// Spatial root nu^-(gamma) of S(nu) = gamma^2 near -gamma/sqrt(alpha).
    [[nodiscard]] cplx far_field_root(cplx gamma) const;

private:
    WeightedOperator op_;
    int interface_index_ = 0;
    BandedMatrix<double> M_;
    std::vector<double> far_symbol_;  // S(nu) coefficients
    std::vector<double> scale_;       // e^{eta g(x_i)}
    std::vector<double> phi_, right_;
    double eta_ = 0.0;
    double sigma_min_ = 0.0, sigma_2_ = 0.0;
};

cplx resonance_function(const WeightedOperator& op, cplx gamma);

/// Mean of E over `points` samples on |gamma - center| = radius minus E(center).
double cauchy_reconstruction_error(const ResonanceFunction& E, cplx center, double radius, int points = 16);

struct TransitionOptions {
    double front_left = -40.0, front_right = 60.0;
    int front_n = 4000;
    UniformGrid spectral_grid{-60.0, 100.0, 3200};
    double tolerance = 1e-4;  ///< bracket width
    double zero_tolerance = 1e-6;
    int max_iterations = 40;
};

struct TransitionResult {
    double delta_crit = 0.0;
    std::vector<std::pair<double, double>> evaluations;  ///< (delta, E(0, delta))
};

/// Resonance value E(0, delta) for one member of a family.
double resonance_at(const ModelFamily& family, double delta, const TransitionOptions& options = {});

/// Bisection on the sign of E(0, delta).
TransitionResult pushed_pulled_transition(const ModelFamily& family, double lo, double hi, const TransitionOptions& options = {});

struct SpectrumCurveRow {
    double k = 0.0;
    cplx sigma_plus;   ///< d+(lambda, ik - eta*) = 0
    cplx sigma_minus;  ///< d-(lambda, ik) = 0
};

std::vector<SpectrumCurveRow> essential_spectrum_curves(const ModelSpec& spec, const PinchResult& pinch, std::span<const double> k_grid);

}  // namespace frontlab
