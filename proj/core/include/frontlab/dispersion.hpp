#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frontlab/model.hpp"

namespace frontlab {

using cplx = std::complex<double>;

enum class Side { leading_edge, wake };

/// d(lambda, nu; c) = P(nu) + c nu + f'(u_side) - lambda.
cplx dispersion_eval(const ModelSpec& spec, double c, cplx lambda, cplx nu, Side side);
/// k-th nu-derivative of d (lambda drops out for k >= 1).
cplx dispersion_dnu(const ModelSpec& spec, double c, cplx nu, int k);
/// Ascending coefficients in nu of d(lambda, nu; c) for real lambda.
std::vector<double> dispersion_polynomial(const ModelSpec& spec, double c, double lambda, Side side);

struct PinchCertificate {
    std::vector<double> homotopy_path;            ///< lambda samples
    std::vector<std::vector<cplx>> root_tracks;   ///< [sample][track]
    std::vector<int> labels;                      ///< per track at lambda_max: -1 when Re nu < -eta*, +1 otherwise
    std::array<int, 2> morse_counts{0, 0};        ///< (#stable, #unstable) at lambda_max
    std::array<int, 2> colliding{-1, -1};         ///< track indices meeting at the double root
    int branch_points = 0;                        ///< real-axis collisions passed with optimal matching
    bool opposite_labels = false;
    bool no_crossings = false;
    bool counts_ok = false;

    [[nodiscard]] bool pinched() const { return opposite_labels && no_crossings && counts_ok; }
};

struct PinchResult {
    double c_star = 0.0;
    double eta_star = 0.0;
    double alpha = 0.0;
    cplx lambda_dr{0.0, 0.0};
    double residual_d = 0.0;
    double residual_dnu = 0.0;
    PinchCertificate certificate;
};

struct DoubleRootSeed {
    cplx nu;
    double c;
};

/// Raw output of the double-root Newton iteration.
struct DoubleRoot {
    cplx nu;
    double c = 0.0;
    cplx lambda{0.0, 0.0};
    double alpha = 0.0;
    int iterations = 0;
};

struct EnvelopeResult {
    double c_star = 0.0;
    double eta_star = 0.0;
};

/// Minimizes c(eta) = (P(-eta) + f'(0)) / eta over eta > 0 (first interior local minimum).
EnvelopeResult envelope_speed_oracle(const ModelSpec& spec);

/// Newton for d = d_nu = 0 at lambda = 0 from a seed. Real seeds iterate on (eta, c);
/// complex seeds iterate on (nu, c, Im lambda) and are rejected when they stay complex.
DoubleRoot solve_double_root(const ModelSpec& spec, DoubleRootSeed seed);

double default_lambda_max(const ModelSpec& spec);

PinchCertificate verify_pinching(const ModelSpec& spec, double c, cplx nu_dr, cplx lambda_dr, double eta_ref,
                                 double lambda_max);
PinchCertificate verify_pinching(const ModelSpec& spec, const PinchResult& result, double lambda_max);

/// Selects the pinched double root (seeded by the oracle, else by a coarse grid scan).
PinchResult find_double_root(const ModelSpec& spec, std::optional<DoubleRootSeed> seed = std::nullopt);

struct Offender {
    double k = 0.0;
    double value = 0.0;  ///< worst real part (or margin violation)
};

struct SpectrumReport {
    std::vector<double> k_grid;
    std::vector<cplx> sigma_plus_weighted;
    std::vector<cplx> sigma_minus;
    bool hyp1_ii_ok = false;
    bool hyp1_iii_ok = false;
    bool hyp2_ok = false;
    Offender hyp1_ii_worst, hyp1_iii_worst, hyp2_worst;

    [[nodiscard]] bool all_ok() const { return hyp1_ii_ok && hyp1_iii_ok && hyp2_ok; }
};

inline constexpr double kSpectralMargin = 1e-8;

SpectrumReport check_hypotheses(const ModelSpec& spec, const PinchResult& pinch, double k_max, int n_k);

enum class SweepMode { sequential_seeded, parallel_cold_start };

struct SweepRow {
    double delta = 0.0;
    double c_star = 0.0;
    double eta_star = 0.0;
    double alpha = 0.0;
    bool ok = false;
    std::string error;
};

std::vector<SweepRow> continuation_sweep(const ModelFamily& family, std::span<const double> delta_grid,
                                         SweepMode mode = SweepMode::sequential_seeded, int jobs = 1);

}  // namespace frontlab
