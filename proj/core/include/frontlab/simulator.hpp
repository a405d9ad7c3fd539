#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frontlab/banded.hpp"
#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/model.hpp"
#include "frontlab/weights.hpp"

namespace frontlab {

enum class Scheme { imex_cn_ab2, imex_bdf2 };

std::string_view to_string(Scheme scheme) noexcept;
Scheme parse_scheme(std::string_view name);

enum class InitialKind { step, front_profile, table };

struct InitialData {
    InitialKind kind = InitialKind::step;
    /// front_profile: u0(x) = q*(x - shift); step: jump located at shift.
    std::optional<FrontProfile> front;
    double shift = 0.0;
    /// table: values interpolated linearly, u_minus to the left and 0 to the right of the table.
    std::vector<double> table_x, table_u;
};

struct SimConfig {
    double x_left = -100.0;
    double x_right = 1600.0;
    int n = 17000;
    double dt = 0.01;
    Scheme scheme = Scheme::imex_cn_ab2;
    InitialData initial;
    std::vector<double> sample_times;
    std::vector<double> checkpoint_times;
    /// Ghost values beyond each end; default u_minus on the left and 0 on the right.
    std::optional<double> left_clamp, right_clamp;
    /// Tracking level; default u_minus / 2.
    std::optional<double> level;

    [[nodiscard]] UniformGrid grid() const { return UniformGrid{x_left, x_right, n}; }
};

/// Value snapshot of the solution; the history fields carry what the two-step schemes need.
struct SimState {
    double t = 0.0;
    std::vector<double> u;
    long step = 0;
    std::vector<double> previous_u;         ///< u at the previous step (BDF2)
    std::vector<double> previous_reaction;  ///< f(u) at the previous step (AB2 / BDF2 extrapolation)
};

struct SimMonitor {
    double max_stiffness = 0.0;  ///< dt * max |f'(u)| seen over the run
    long bound_warnings = 0;     ///< steps with u outside [-0.5, 1.5 u_minus]
};

/// Order-4 IMEX integrator with the linear part factored once.
class Simulator {
public:
    Simulator(const ModelSpec& spec, const SimConfig& config);

    [[nodiscard]] const UniformGrid& grid() const { return grid_; }
    [[nodiscard]] const SimConfig& config() const { return config_; }
    [[nodiscard]] const ModelSpec& spec() const { return spec_; }
    [[nodiscard]] const SimMonitor& monitor() const { return monitor_; }

    [[nodiscard]] SimState initial_state() const;
    /// Advances one step; raises BlowUp when |u| exceeds 10 or turns non-finite.
    void step(SimState& state);
    /// P(d) u including the ghost contributions, differenced against u_i so constants give exactly 0.
    [[nodiscard]] std::vector<double> apply_linear(std::span<const double> u) const;

private:
    [[nodiscard]] std::vector<double> reaction(std::span<const double> u);
    [[nodiscard]] BandedMatrix<double> linear_matrix() const;

    ModelSpec spec_;
    SimConfig config_;
    UniformGrid grid_;
    int ghost_ = 0;
    double left_ghost_ = 0.0, right_ghost_ = 0.0;
    std::vector<double> stencil_;  ///< sum_k p_k w_k over offsets -ghost..ghost
    BandedLU<double> startup_, main_;
    SimMonitor monitor_;
};

/// Rightmost downward crossing of `level`, linearly interpolated.
double front_position(const UniformGrid& grid, std::span<const double> u, double level);

struct PositionSample {
    double t = 0.0;
    double sigma = 0.0;
};

struct Checkpoint {
    double t = 0.0;
    std::vector<double> u;
};

struct InvasionResult {
    UniformGrid grid;
    std::vector<PositionSample> series;
    std::vector<Checkpoint> checkpoints;
    SimState final_state;
    SimMonitor monitor;
};

/// Integrates to the last sample or checkpoint time, tracking the front at every sample time.
InvasionResult run_invasion(const ModelSpec& spec, const SimConfig& config);

/// Evenly spaced sample times 0, dt_sample, ..., t_final.
std::vector<double> uniform_samples(double t_final, double spacing);

struct ShiftFit {
    double c_fit = 0.0;
    double B_fit = 0.0;
    double x_inf = 0.0;
    double window_left = 0.0, window_right = 0.0;
    int samples = 0;
    double residual_rms = 0.0;
    double condition = 0.0;
    /// Increments of sigma - c_fit t regressed on increments of log t.
    double B_differentiated = 0.0;
};

/// Least squares of sigma against (t, log t, 1) on the window.
ShiftFit fit_log_shift(std::span<const PositionSample> series, double window_left, double window_right);

/// sup over the grid of rho_{-1} omega |u(x + shift) - q*(x)|.
double weighted_perturbation_norm(const UniformGrid& grid, std::span<const double> u, const FrontProfile& front,
                                  const Weights& weights, double shift);

struct ModelProblemOptions {
    double T = 10.0;
    double t_final = 1000.0;
    double dx = 0.1;
    double dt = 0.05;
    std::optional<double> length;  ///< default 20 sqrt(t_final + T)
    bool drop_nonautonomous = false;
    int samples = 60;              ///< log-spaced in t + T
};

struct ModelProblemRow {
    double t = 0.0;
    double w_weighted = 0.0;   ///< sup <x>^{-1} |w|
    double z_scaled = 0.0;     ///< (t+T)^{3/2} sup <x>^{-1} |z|
    double w_sup = 0.0;        ///< sup |w|
};

struct ModelProblemResult {
    std::vector<ModelProblemRow> rows;
    double max_identity_gap = 0.0;  ///< max over steps and x of |w - (t+T)^{3/2} z|
    double length = 0.0;
    int n = 0;
};

/// w_t = w_xx - 3/(2(t+T)) (w_x - w) on (0, L) with w = 0 at both ends, alongside z = (t+T)^{-3/2} w.
ModelProblemResult model_problem_run(const ModelProblemOptions& options);

/// Slope of log sup <x>^{-1}|w| against log(t + origin) over rows with t in [t_from, t_to].
double model_problem_decay_exponent(const ModelProblemResult& result, double origin, double t_from, double t_to);

}  // namespace frontlab
