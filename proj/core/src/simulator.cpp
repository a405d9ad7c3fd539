#include "frontlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "frontlab/error.hpp"
#include "frontlab/stencil.hpp"

namespace frontlab {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double initial_value(const InitialData& data, double u_minus, double h, double x) {
    switch (data.kind) {
        case InitialKind::step:
            return u_minus * std::clamp((data.shift + h - x) / (2.0 * h), 0.0, 1.0);
        case InitialKind::front_profile:
            return data.front->eval(x - data.shift);
        case InitialKind::table: {
            const auto& tx = data.table_x;
            const auto& tu = data.table_u;
            if (x <= tx.front()) return x < tx.front() ? u_minus : tu.front();
            if (x >= tx.back()) return x > tx.back() ? 0.0 : tu.back();
            const auto it = std::upper_bound(tx.begin(), tx.end(), x);
            const auto j = static_cast<std::size_t>(it - tx.begin());
            const double s = (x - tx[j - 1]) / (tx[j] - tx[j - 1]);
            return (1.0 - s) * tu[j - 1] + s * tu[j];
        }
    }
    return 0.0;
}

void check_finite_bounded(std::span<const double> u, double t) {
    for (double v : u)
        if (!(std::abs(v) <= 10.0)) fail(ErrorKind::BlowUp, "solution left |u| <= 10 at t = " + std::to_string(t));
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
    return scheme == Scheme::imex_cn_ab2 ? "imex-cn-ab2" : "imex-bdf2";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "imex-cn-ab2" || name == "cn-ab2") return Scheme::imex_cn_ab2;
    if (name == "imex-bdf2" || name == "sbdf2" || name == "bdf2") return Scheme::imex_bdf2;
    fail(ErrorKind::InvalidArgument, "unknown scheme '" + std::string(name) + "'");
}

Simulator::Simulator(const ModelSpec& spec, const SimConfig& config) : spec_(spec), config_(config), grid_(config.grid()) {
    spec_.validate_shape();
    require(config.n >= 16, "Simulator: need at least 16 grid points");
    require(config.x_right > config.x_left, "Simulator: empty domain");
    require(config.dt > 0.0, "Simulator: dt must be positive");
    const auto& init = config.initial;
    require(init.kind != InitialKind::front_profile || init.front.has_value(), "Simulator: front_profile data needs a profile");
    if (init.kind == InitialKind::table) {
        require(!init.table_x.empty() && init.table_x.size() == init.table_u.size(), "Simulator: table sizes differ");
        require(std::is_sorted(init.table_x.begin(), init.table_x.end()), "Simulator: table x must be increasing");
    }

    const int order = spec_.order();
    ghost_ = StencilSet::half_width(order);
    left_ghost_ = config.left_clamp.value_or(spec_.u_minus);
    right_ghost_ = config.right_clamp.value_or(0.0);
    const StencilSet st(grid_.h(), order);
    stencil_.assign(idx(2 * ghost_ + 1), 0.0);
    for (int k = 1; k <= order; ++k) {
        const double pk = spec_.p[idx(k - 1)];
        if (pk == 0.0) continue;
        const Stencil& s = st.centered(k);
        for (std::size_t j = 0; j < s.w.size(); ++j) stencil_[idx(s.offset + static_cast<int>(j) + ghost_)] += pk * s.w[j];
    }

    const BandedMatrix<double> A = linear_matrix();
    const double dt = config.dt;
    if (config.scheme == Scheme::imex_cn_ab2) {
        main_.factor(A.affine(-0.5 * dt, 1.0));
    } else {
        startup_.factor(A.affine(-dt, 1.0));
        main_.factor(A.affine(-2.0 * dt, 3.0));
    }
}

BandedMatrix<double> Simulator::linear_matrix() const {
    const int n = grid_.n;
    BandedMatrix<double> A(n, ghost_, ghost_);
    for (int i = 0; i < n; ++i)
        for (int o = -ghost_; o <= ghost_; ++o) {
            const int j = i + o;
            if (j >= 0 && j < n) A(i, j) = stencil_[idx(o + ghost_)];
        }
    return A;
}

std::vector<double> Simulator::apply_linear(std::span<const double> u) const {
    const int n = grid_.n;
    require(static_cast<int>(u.size()) == n, "Simulator: state size does not match grid");
    std::vector<double> out(idx(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double ui = u[idx(i)];
        double acc = 0.0;
        for (int o = -ghost_; o <= ghost_; ++o) {
            const int j = i + o;
            const double uj = j < 0 ? left_ghost_ : (j >= n ? right_ghost_ : u[idx(j)]);
            acc += stencil_[idx(o + ghost_)] * (uj - ui);
        }
        out[idx(i)] = acc;
    }
    return out;
}

std::vector<double> Simulator::reaction(std::span<const double> u) {
    std::vector<double> out(u.size());
    const double lo = -0.5, hi = 1.5 * spec_.u_minus;
    bool outside = false;
    double stiff = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = spec_.reaction(u[i]);
        stiff = std::max(stiff, std::abs(spec_.reaction_prime(u[i])));
        outside = outside || u[i] < lo || u[i] > hi;
    }
    monitor_.max_stiffness = std::max(monitor_.max_stiffness, config_.dt * stiff);
    if (outside) ++monitor_.bound_warnings;
    return out;
}

SimState Simulator::initial_state() const {
    SimState s;
    s.u.resize(idx(grid_.n));
    for (int i = 0; i < grid_.n; ++i) s.u[idx(i)] = initial_value(config_.initial, spec_.u_minus, grid_.h(), grid_.x(i));
    check_finite_bounded(s.u, 0.0);
    return s;
}

void Simulator::step(SimState& state) {
    const int n = grid_.n;
    require(static_cast<int>(state.u.size()) == n, "Simulator: state size does not match grid");
    const double dt = config_.dt;
    const std::vector<double> Lu = apply_linear(state.u);
    std::vector<double> f = reaction(state.u);
    const bool first = state.step == 0 || state.previous_reaction.size() != state.u.size();
    std::vector<double> delta(idx(n));

    // Increment form: rest states give a zero right-hand side and hence exactly zero increments.
    if (config_.scheme == Scheme::imex_cn_ab2) {
        for (int i = 0; i < n; ++i) {
            const double N = first ? f[idx(i)] : 1.5 * f[idx(i)] - 0.5 * state.previous_reaction[idx(i)];
            delta[idx(i)] = dt * (Lu[idx(i)] + N);
        }
        main_.solve_in_place(delta);
    } else if (first) {
        for (int i = 0; i < n; ++i) delta[idx(i)] = dt * (Lu[idx(i)] + f[idx(i)]);
        startup_.solve_in_place(delta);
    } else {
        for (int i = 0; i < n; ++i)
            delta[idx(i)] = (state.u[idx(i)] - state.previous_u[idx(i)]) +
                            2.0 * dt * (Lu[idx(i)] + 2.0 * f[idx(i)] - state.previous_reaction[idx(i)]);
        main_.solve_in_place(delta);
    }

    state.previous_u = state.u;
    for (int i = 0; i < n; ++i) state.u[idx(i)] += delta[idx(i)];
    state.previous_reaction = std::move(f);
    ++state.step;
    state.t = static_cast<double>(state.step) * dt;
    check_finite_bounded(state.u, state.t);
}

double front_position(const UniformGrid& grid, std::span<const double> u, double level) {
    require(static_cast<int>(u.size()) == grid.n, "front_position: value count does not match grid");
    for (int i = grid.n - 2; i >= 0; --i) {
        const double a = u[idx(i)], b = u[idx(i + 1)];
        if (a >= level && b < level) return grid.x(i) + grid.h() * (a - level) / (a - b);
    }
    fail(ErrorKind::NoCrossing, "profile never crosses level " + std::to_string(level));
}

std::vector<double> uniform_samples(double t_final, double spacing) {
    require(t_final >= 0.0 && spacing > 0.0, "uniform_samples: need t_final >= 0 and spacing > 0");
    std::vector<double> t;
    const auto count = static_cast<long>(std::floor(t_final / spacing + 1e-9));
    for (long k = 0; k <= count; ++k) t.push_back(static_cast<double>(k) * spacing);
    if (t.back() < t_final - 1e-12) t.push_back(t_final);
    return t;
}

InvasionResult run_invasion(const ModelSpec& spec, const SimConfig& config) {
    Simulator sim(spec, config);
    InvasionResult out;
    out.grid = sim.grid();
    const double level = config.level.value_or(0.5 * spec.u_minus);
    const double dt = config.dt;
    auto to_step = [&](double t) {
        require(t >= 0.0, "run_invasion: negative sample time");
        return std::lround(t / dt);
    };
    // step index -> (sample?, checkpoint?)
    std::map<long, std::pair<bool, bool>> events;
    for (double t : config.sample_times) events[to_step(t)].first = true;
    for (double t : config.checkpoint_times) events[to_step(t)].second = true;

    SimState state = sim.initial_state();
    auto record = [&](const std::pair<bool, bool>& what) {
        if (what.first) {
            try {
                out.series.push_back({state.t, front_position(out.grid, state.u, level)});
            } catch (const Error& e) {
                fail(e.kind(), "at t = " + std::to_string(state.t) + ": " + e.what());
            }
        }
        if (what.second) out.checkpoints.push_back({state.t, state.u});
    };
    for (const auto& [k, what] : events) {
        while (state.step < k) {
            try {
                sim.step(state);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::BlowUp) throw;
                fail(e.kind(), "at t = " + std::to_string(state.t) + ": " + e.what());
            }
        }
        record(what);
    }
    out.final_state = std::move(state);
    out.monitor = sim.monitor();
    return out;
}

ShiftFit fit_log_shift(std::span<const PositionSample> series, double window_left, double window_right) {
    require(window_left >= 50.0, "fit_log_shift: window must start at t >= 50");
    require(window_right > window_left, "fit_log_shift: empty window");
    std::vector<PositionSample> w;
    for (const auto& s : series)
        if (s.t >= window_left - 1e-9 && s.t <= window_right + 1e-9) w.push_back(s);
    require(w.size() >= 30, "fit_log_shift: need at least 30 samples in the window, got " + std::to_string(w.size()));

    const auto m = static_cast<Eigen::Index>(w.size());
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& s = w[static_cast<std::size_t>(i)];
        X(i, 0) = s.t;
        X(i, 1) = std::log(s.t);
        X(i, 2) = 1.0;
        y(i) = s.sigma;
    }
    const Eigen::VectorXd scale = X.colwise().norm().transpose();
    const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    ShiftFit fit;
    fit.condition = sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
    if (fit.condition > 1e10) fail(ErrorKind::IllConditioned, "fit_log_shift: window too short to separate log t from a constant");
    const Eigen::VectorXd beta = svd.solve(y).cwiseQuotient(scale);
    fit.c_fit = beta(0);
    fit.B_fit = beta(1);
    fit.x_inf = beta(2);
    fit.window_left = window_left;
    fit.window_right = window_right;
    fit.samples = static_cast<int>(m);
    fit.residual_rms = std::sqrt((X * beta - y).squaredNorm() / static_cast<double>(m));

    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double dy = (w[i].sigma - fit.c_fit * w[i].t) - (w[i - 1].sigma - fit.c_fit * w[i - 1].t);
        const double dl = std::log(w[i].t) - std::log(w[i - 1].t);
        num += dy * dl;
        den += dl * dl;
    }
    fit.B_differentiated = den > 0.0 ? num / den : 0.0;
    return fit;
}

double weighted_perturbation_norm(const UniformGrid& grid, std::span<const double> u, const FrontProfile& front,
                                  const Weights& weights, double shift) {
    require(static_cast<int>(u.size()) == grid.n, "weighted_perturbation_norm: value count does not match grid");
    double sup = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double xs = x + shift;
        if (!grid.contains(xs)) continue;
        const double diff = std::abs(interpolate(grid, u, xs) - front.eval(x));
        if (diff == 0.0) continue;
        // omega overflows long before the product does
        const double v = weights.rho(-1.0, x) * std::exp(weights.eta() * weights.exponent(x) + std::log(diff));
        sup = std::max(sup, v);
    }
    return sup;
}

ModelProblemResult model_problem_run(const ModelProblemOptions& o) {
    require(o.T > 0.0 && o.t_final > 0.0 && o.dx > 0.0 && o.dt > 0.0, "model_problem_run: T, t_final, dx, dt must be positive");
    const double L = o.length.value_or(20.0 * std::sqrt(o.t_final + o.T));
    require(L >= 10.0, "model_problem_run: domain too short");
    const int n = static_cast<int>(std::lround(L / o.dx)) + 1;
    const UniformGrid grid{0.0, L, n};
    const StencilSet st(grid.h(), 2);
    const int band = 5;

    // Operator D2 - kappa D1 with one-sided order-4 stencils near the Dirichlet ends.
    auto assemble = [&](double kappa) {
        BandedMatrix<double> A(n, band, band);
        for (int i = 1; i < n - 1; ++i)
            for (int k : {1, 2}) {
                const double coef = k == 2 ? 1.0 : -kappa;
                if (coef == 0.0) continue;
                const Stencil s = st.at(k, i, n);
                for (std::size_t j = 0; j < s.w.size(); ++j) {
                    const int col = i + s.offset + static_cast<int>(j);
                    if (col > 0 && col < n - 1) A.add(i, col, coef * s.w[j]);
                }
            }
        return A;
    };
    auto kappa_at = [&](double t) { return o.drop_nonautonomous ? 0.0 : 1.5 / (t + o.T); };

    std::vector<double> z(idx(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double s = (grid.x(i) - 3.0) / 2.0;
        const double w0 = std::abs(s) < 1.0 ? std::pow(1.0 - s * s, 4) : 0.0;
        z[idx(i)] = o.drop_nonautonomous ? w0 : std::pow(o.T, -1.5) * w0;
    }
    std::vector<double> w = o.drop_nonautonomous ? z : std::vector<double>(idx(n));
    if (!o.drop_nonautonomous)
        for (int i = 0; i < n; ++i) w[idx(i)] = std::pow(o.T, 1.5) * z[idx(i)];

    ModelProblemResult res;
    res.length = L;
    res.n = n;
    const auto steps = std::lround(o.t_final / o.dt);
    // sample steps log-spaced in t + T
    std::vector<long> sample_steps{0};
    for (int k = 1; k <= o.samples; ++k) {
        const double tk = o.T * std::pow((o.t_final + o.T) / o.T, static_cast<double>(k) / o.samples) - o.T;
        const long s = std::lround(tk / o.dt);
        if (s > sample_steps.back()) sample_steps.push_back(std::min(s, steps));
    }
    auto record = [&](double t) {
        ModelProblemRow row;
        row.t = t;
        const double factor = o.drop_nonautonomous ? 1.0 : std::pow(t + o.T, 1.5);
        for (int i = 0; i < n; ++i) {
            const double inv = 1.0 / std::sqrt(1.0 + grid.x(i) * grid.x(i));
            row.w_weighted = std::max(row.w_weighted, inv * std::abs(w[idx(i)]));
            row.z_scaled = std::max(row.z_scaled, factor * inv * std::abs(z[idx(i)]));
            row.w_sup = std::max(row.w_sup, std::abs(w[idx(i)]));
        }
        res.rows.push_back(row);
    };

    std::size_t next = 0;
    if (sample_steps[next] == 0) {
        record(0.0);
        ++next;
    }
    std::vector<double> rhs(idx(n));
    for (long s = 0; s < steps; ++s) {
        const double t0 = static_cast<double>(s) * o.dt, t1 = t0 + o.dt;
        const double kappa = kappa_at(t0 + 0.5 * o.dt);
        const BandedMatrix<double> A = assemble(kappa);
        const BandedLU<double> lu(A.affine(-0.5 * o.dt, 1.0));
        auto cn = [&](std::vector<double>& v) {
            const std::vector<double> Av = A.multiply(v);
            for (int i = 0; i < n; ++i) rhs[idx(i)] = v[idx(i)] + 0.5 * o.dt * Av[idx(i)];
            rhs.front() = 0.0;
            rhs.back() = 0.0;
            lu.solve_in_place(rhs);
            v = rhs;
        };
        cn(z);
        if (o.drop_nonautonomous) {
            w = z;
        } else {
            // w = (t+T)^{3/2} z integrates the zeroth-order term exactly
            cn(w);
            const double g = std::pow((t1 + o.T) / (t0 + o.T), 1.5);
            for (double& v : w) v *= g;
            const double factor = std::pow(t1 + o.T, 1.5);
            for (int i = 0; i < n; ++i) res.max_identity_gap = std::max(res.max_identity_gap, std::abs(w[idx(i)] - factor * z[idx(i)]));
        }
        if (next < sample_steps.size() && s + 1 == sample_steps[next]) {
            record(t1);
            ++next;
        }
    }
    return res;
}

double model_problem_decay_exponent(const ModelProblemResult& result, double origin, double t_from, double t_to) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& r : result.rows) {
        if (r.t < t_from || r.t > t_to || r.w_weighted <= 0.0) continue;
        const double x = std::log(r.t + origin), y = std::log(r.w_weighted);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    require(m >= 3, "model_problem_decay_exponent: fewer than three rows in range");
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace frontlab
