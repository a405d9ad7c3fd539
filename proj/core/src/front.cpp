#include "frontlab/front.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "frontlab/error.hpp"
#include "frontlab/polynomial.hpp"
#include "frontlab/stencil.hpp"

namespace frontlab {

namespace {

using Triplet = Eigen::Triplet<double>;

/// P(d) + c d as ascending coefficients with the constant term dropped.
std::vector<double> operator_symbol(const ModelSpec& spec, double c) {
    auto s = spec.symbol();
    s[1] += c;
    return s;
}

/// Rows of the inverse (generalized) Vandermonde matrix: l_j . Y is the amplitude of mode j in Y.
struct ModeBasis {
    std::vector<cplx> roots;
    Eigen::MatrixXcd inverse;  // row j pairs with roots[j]
};

ModeBasis mode_basis(const std::vector<cplx>& roots, int jordan_index) {
    const int n = static_cast<int>(roots.size());
    Eigen::MatrixXcd V(n, n);
    for (int j = 0; j < n; ++j) {
        const cplx nu = roots[static_cast<std::size_t>(j)];
        const bool derivative_column = jordan_index >= 0 && j == jordan_index + 1;
        for (int r = 0; r < n; ++r) {
            if (derivative_column)
                V(r, j) = r == 0 ? cplx(0.0) : cplx(static_cast<double>(r)) * std::pow(nu, r - 1);
            else
                V(r, j) = std::pow(nu, r);
        }
    }
    return {roots, V.inverse()};
}

/// Adds real conditions Re/Im(l_j . (Y - Y_ref)) = 0 for the selected modes (one row per real root,
/// two per complex-conjugate pair).
struct BoundaryCondition {
    std::vector<std::vector<double>> rows;  // coefficients on (q, q', ..., q^{(2m-1)})
};

BoundaryCondition suppress_modes(const ModeBasis& basis, const std::vector<int>& selected) {
    BoundaryCondition bc;
    std::vector<bool> done(basis.roots.size(), false);
    for (int j : selected) {
        if (done[static_cast<std::size_t>(j)]) continue;
        const cplx nu = basis.roots[static_cast<std::size_t>(j)];
        const auto row = basis.inverse.row(j);
        std::vector<double> re(static_cast<std::size_t>(row.size())), im(re.size());
        for (Eigen::Index k = 0; k < row.size(); ++k) {
            re[static_cast<std::size_t>(k)] = row(k).real();
            im[static_cast<std::size_t>(k)] = row(k).imag();
        }
        bc.rows.push_back(re);
        if (std::abs(nu.imag()) > 1e-10) {
            bc.rows.push_back(im);
            for (int k : selected)
                if (std::abs(basis.roots[static_cast<std::size_t>(k)] - std::conj(nu)) < 1e-8) done[static_cast<std::size_t>(k)] = true;
        }
        done[static_cast<std::size_t>(j)] = true;
    }
    return bc;
}

class FrontSystem {
public:
    FrontSystem(const ModelSpec& spec, const PinchResult& pinch, const UniformGrid& grid, double phase_value)
        : spec_(spec), grid_(grid), c_(pinch.c_star), phase_value_(phase_value), stencils_(grid.h(), spec.order()) {
        const int m = spec.order_half;
        const int order = spec.order();
        symbol_ = operator_symbol(spec, c_);

        // wake: suppress the m modes that decay as x -> -infinity... i.e. grow to the left (Re nu < 0)
        auto wake_roots = poly::roots(dispersion_polynomial(spec, c_, 0.0, Side::wake));
        auto wake = mode_basis(wake_roots, -1);
        std::vector<int> stable;
        for (int j = 0; j < order; ++j)
            if (wake_roots[static_cast<std::size_t>(j)].real() < 0.0) stable.push_back(j);
        if (static_cast<int>(stable.size()) != m) fail(ErrorKind::InvalidModel, "wake state is not hyperbolic with an m/m split");
        left_ = suppress_modes(wake, stable);

        // leading edge: the Jordan pair at -eta* stays, modes with Re nu > -eta* are removed
        auto lead_roots = poly::roots(dispersion_polynomial(spec, c_, 0.0, Side::leading_edge));
        std::sort(lead_roots.begin(), lead_roots.end(), [&](cplx a, cplx b) {
            return std::abs(a + pinch.eta_star) < std::abs(b + pinch.eta_star);
        });
        lead_roots[0] = lead_roots[1] = cplx(-pinch.eta_star, 0.0);
        auto lead = mode_basis(lead_roots, 0);
        std::vector<int> weak;
        for (int j = 2; j < order; ++j)
            if (lead_roots[static_cast<std::size_t>(j)].real() > -pinch.eta_star) weak.push_back(j);
        right_ = suppress_modes(lead, weak);
        if (static_cast<int>(right_.rows.size()) != m - 1)
            fail(ErrorKind::InvalidModel, "leading edge does not have m-1 modes above the double root");

        for (int k = 1; k < order; ++k) {
            left_stencils_.push_back(stencils_.at(k, 0, grid.n));
            right_stencils_.push_back(stencils_.at(k, grid.n - 1, grid.n));
        }
        // phase row: cubic Lagrange weights at x = 0
        const double s = (0.0 - grid.x_left) / grid.h();
        phase_first_ = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, grid.n - 4);
        for (int j = 0; j < 4; ++j) {
            double w = 1.0;
            for (int k = 0; k < 4; ++k)
                if (k != j) w *= (s - (phase_first_ + k)) / static_cast<double>(j - k);
            phase_w_[j] = w;
        }
    }

    [[nodiscard]] int size() const { return grid_.n; }

    /// Full residual vector in row order (left BCs, ODE rows, right BCs, phase).
    [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& q) const {
        const int n = grid_.n, m = spec_.order_half;
        Eigen::VectorXd G(n);
        std::span<const double> qs(q.data(), static_cast<std::size_t>(n));
        int row = 0;
        const auto Yl = boundary_jet(qs, 0, left_stencils_);
        for (const auto& r : left_.rows) {
            double acc = r[0] * (Yl[0] - spec_.u_minus);
            for (std::size_t k = 1; k < r.size(); ++k) acc += r[k] * Yl[k];
            G(row++) = acc;
        }
        for (int i = m; i <= n - m - 1; ++i) G(row++) = ode_row(qs, i);
        const auto Yr = boundary_jet(qs, n - 1, right_stencils_);
        for (const auto& r : right_.rows) {
            double acc = 0.0;
            for (std::size_t k = 0; k < r.size(); ++k) acc += r[k] * Yr[k];
            G(row++) = acc;
        }
        double ph = -phase_value_;
        for (int j = 0; j < 4; ++j) ph += phase_w_[j] * q(phase_first_ + j);
        G(row++) = ph;
        return G;
    }

    [[nodiscard]] Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& q) const {
        const int n = grid_.n, m = spec_.order_half;
        std::vector<Triplet> trip;
        trip.reserve(static_cast<std::size_t>(n) * (2 * spec_.order() + 4));
        int row = 0;
        auto add_boundary = [&](const BoundaryCondition& bc, int node, const std::vector<Stencil>& st) {
            for (const auto& r : bc.rows) {
                trip.emplace_back(row, node, r[0]);
                for (std::size_t k = 1; k < r.size(); ++k) {
                    const Stencil& s = st[k - 1];
                    for (std::size_t j = 0; j < s.w.size(); ++j) trip.emplace_back(row, node + s.offset + static_cast<int>(j), r[k] * s.w[j]);
                }
                ++row;
            }
        };
        add_boundary(left_, 0, left_stencils_);
        for (int i = m; i <= n - m - 1; ++i) {
            for (int k = 1; k <= spec_.order(); ++k) {
                const double coef = symbol_[static_cast<std::size_t>(k)];
                if (coef == 0.0) continue;
                const Stencil s = stencils_.at(k, i, n);
                for (std::size_t j = 0; j < s.w.size(); ++j) trip.emplace_back(row, i + s.offset + static_cast<int>(j), coef * s.w[j]);
            }
            trip.emplace_back(row, i, spec_.reaction_prime(q(i)));
            ++row;
        }
        add_boundary(right_, n - 1, right_stencils_);
        for (int j = 0; j < 4; ++j) trip.emplace_back(row, phase_first_ + j, phase_w_[j]);
        Eigen::SparseMatrix<double> J(n, n);
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    }

    [[nodiscard]] double ode_row(std::span<const double> q, int i) const {
        double acc = spec_.reaction(q[static_cast<std::size_t>(i)]);
        for (int k = 1; k <= spec_.order(); ++k) {
            const double coef = symbol_[static_cast<std::size_t>(k)];
            if (coef != 0.0) acc += coef * stencils_.apply(k, i, q);
        }
        return acc;
    }

private:
    [[nodiscard]] std::vector<double> boundary_jet(std::span<const double> q, int node, const std::vector<Stencil>& st) const {
        std::vector<double> Y(static_cast<std::size_t>(spec_.order()));
        Y[0] = q[static_cast<std::size_t>(node)];
        for (std::size_t k = 1; k < Y.size(); ++k) {
            const Stencil& s = st[k - 1];
            double acc = 0.0;
            for (std::size_t j = 0; j < s.w.size(); ++j)
                acc += s.w[j] * (q[static_cast<std::size_t>(node + s.offset + static_cast<int>(j))] - Y[0]);
            Y[k] = acc;
        }
        return Y;
    }

    const ModelSpec& spec_;
    UniformGrid grid_;
    double c_;
    double phase_value_;
    StencilSet stencils_;
    std::vector<double> symbol_;
    BoundaryCondition left_, right_;
    std::vector<Stencil> left_stencils_, right_stencils_;
    int phase_first_ = 0;
    double phase_w_[4] = {0, 0, 0, 0};
};

double slowest_wake_rate(const ModelSpec& spec, double c) {
    double rate = std::numeric_limits<double>::infinity();
    for (cplx nu : poly::roots(dispersion_polynomial(spec, c, 0.0, Side::wake)))
        if (nu.real() > 0.0) rate = std::min(rate, nu.real());
    return rate;
}

}  // namespace

double FrontProfile::tail(double x) const { return (a_coeff + b_coeff * x) * std::exp(-eta_star * x); }

double FrontProfile::eval(double x) const {
    if (x <= grid.x_left) return u_minus;
    if (x >= grid.x_right) return tail(x);
    return interpolate(grid, q, x, 6);
}

std::vector<double> traveling_wave_residual(const ModelSpec& spec, double c, const UniformGrid& grid, std::span<const double> q) {
    require(static_cast<int>(q.size()) == grid.n, "traveling_wave_residual: size mismatch");
    const auto symbol = operator_symbol(spec, c);
    StencilSet st(grid.h(), spec.order());
    const int reach = StencilSet::half_width(spec.order());
    std::vector<double> out;
    for (int i = reach; i < grid.n - reach; ++i) {
        double acc = spec.reaction(q[static_cast<std::size_t>(i)]);
        for (int k = 1; k <= spec.order(); ++k)
            if (symbol[static_cast<std::size_t>(k)] != 0.0) acc += symbol[static_cast<std::size_t>(k)] * st.apply(k, i, q);
        out.push_back(acc);
    }
    return out;
}

double traveling_wave_residual_norm(const ModelSpec& spec, double c, const UniformGrid& grid, std::span<const double> q) {
    double r = 0.0;
    for (double v : traveling_wave_residual(spec, c, grid, q)) r = std::max(r, std::abs(v));
    return r;
}

TailFit extract_asymptotics(const UniformGrid& grid, std::span<const double> q, double eta_star, double x1, double x2) {
    require(x2 > x1 && x1 >= grid.x_left && x2 <= grid.x_right, "extract_asymptotics: window outside the grid");
    std::vector<double> xs, ws, qs;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        if (x < x1 || x > x2) continue;
        xs.push_back(x);
        qs.push_back(q[static_cast<std::size_t>(i)]);
        ws.push_back(std::exp(eta_star * x) * q[static_cast<std::size_t>(i)]);
    }
    if (xs.size() < 3) fail(ErrorKind::DegenerateFit, "fit window holds fewer than three nodes");
    const Eigen::Index N = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd A(N, 2);
    Eigen::VectorXd y(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = xs[static_cast<std::size_t>(i)];
        y(i) = ws[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector2d ab = A.colPivHouseholderQr().solve(y);
    TailFit fit;
    fit.a = ab(0);
    fit.b = ab(1);
    fit.window_left = x1;
    fit.window_right = x2;
    if (!std::isfinite(fit.b) || std::abs(fit.b) < 1e-12) fail(ErrorKind::DegenerateFit, "tail coefficient b vanishes");

    // free-rate Gauss-Newton on (A + B x) e^{-e x}, residuals scaled by e^{eta* x}
    Eigen::Vector3d p(fit.a, fit.b, eta_star);
    for (int it = 0; it < 30; ++it) {
        Eigen::MatrixXd J(N, 3);
        Eigen::VectorXd r(N);
        for (Eigen::Index i = 0; i < N; ++i) {
            const double x = xs[static_cast<std::size_t>(i)];
            const double scale = std::exp(eta_star * x);
            const double ex = std::exp(-p(2) * x) * scale;
            const double lin = p(0) + p(1) * x;
            r(i) = qs[static_cast<std::size_t>(i)] * scale - lin * ex;
            J(i, 0) = ex;
            J(i, 1) = x * ex;
            J(i, 2) = -x * lin * ex;
        }
        const Eigen::Vector3d dp = J.colPivHouseholderQr().solve(r);
        if (!dp.allFinite()) break;
        p += dp;
        if (dp.cwiseAbs().maxCoeff() < 1e-14 * (1.0 + p.cwiseAbs().maxCoeff())) break;
    }
    fit.eta_fit = p(2);
    return fit;
}

TailFit extract_asymptotics(const FrontProfile& profile, double eta_star, double x1, double x2) {
    return extract_asymptotics(profile.grid, profile.q, eta_star, x1, x2);
}

namespace {

/// Decay rate of e^{eta x} q - (a + b x) on an early window, where it is still above rounding.
double second_order_rate(const UniformGrid& grid, std::span<const double> q, double eta, double a, double b) {
    const double x1 = 0.1 * grid.x_right, x2 = 0.3 * grid.x_right;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    int sign = 0;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        if (x < x1 || x > x2) continue;
        const double rho = std::exp(eta * x) * q[static_cast<std::size_t>(i)] - (a + b * x);
        const int s = rho > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign || rho == 0.0) return 0.0;
        const double y = std::log(std::abs(rho));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 3) return 0.0;
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return slope < 0.0 ? -slope : 0.0;
}

}  // namespace

FrontProfile solve_front(const ModelSpec& spec, const PinchResult& pinch, double x_left, double x_right, int n,
                         const FrontOptions& options) {
    spec.validate();
    require(x_left < 0.0 && x_right > 0.0, "solve_front: the domain must contain x = 0");
    require(n >= 8 * spec.order() + 8, "solve_front: too few grid points");
    const double wake_rate = slowest_wake_rate(spec, pinch.c_star);
    // truncation: the wake deviation and the tail must both be small at the ends
    require(std::exp(wake_rate * x_left) < 1e-6, "solve_front: x_left too close to the interface for the wake decay rate");
    require((1.0 + x_right) * std::exp(-pinch.eta_star * x_right) < 1e-6, "solve_front: x_right too short for the tail decay rate");
    const UniformGrid grid{x_left, x_right, n};
    if (grid.h() * std::max(pinch.eta_star, wake_rate) > 0.5) fail(ErrorKind::GridTooCoarse, "grid spacing does not resolve the decay rates");

    const double phase_value = options.phase_fraction * spec.u_minus;
    FrontSystem system(spec, pinch, grid, phase_value);

    Eigen::VectorXd q(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        if (options.initial) {
            // the seed profile is normalized; undo its translation to land near our phase point
            q(i) = options.initial->eval(x - options.initial->shift);
        } else {
            q(i) = spec.u_minus * 0.5 * (1.0 - std::tanh(pinch.eta_star * x / 2.0));
        }
    }

    Eigen::VectorXd G = system.residual(q);
    double norm = G.lpNorm<Eigen::Infinity>();
    int iterations = 0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    for (; iterations < options.max_iterations && norm > options.tolerance; ++iterations) {
        const auto J = system.jacobian(q);
        lu.compute(J);
        if (lu.info() != Eigen::Success) fail(ErrorKind::NewtonDiverged, "front Jacobian is singular");
        const Eigen::VectorXd dq = lu.solve(G);
        if (!dq.allFinite()) fail(ErrorKind::NewtonDiverged, "front Newton step is not finite");
        double step = 1.0;
        Eigen::VectorXd trial;
        double trial_norm = 0.0;
        for (;;) {
            trial = q - step * dq;
            const Eigen::VectorXd Gt = system.residual(trial);
            trial_norm = Gt.lpNorm<Eigen::Infinity>();
            if (trial_norm <= (1.0 - 1e-4 * step) * norm || step < 1.0 / 1024.0) {
                G = Gt;
                break;
            }
            step *= 0.5;
        }
        if (!(trial_norm < norm) && step < 1.0 / 1024.0) fail(ErrorKind::NewtonDiverged, "Armijo backtracking could not reduce the residual");
        const double move = (trial - q).lpNorm<Eigen::Infinity>();
        q = trial;
        norm = trial_norm;
        if (move < 1e-14 * spec.u_minus && norm < 1e3 * options.tolerance) break;
    }
    if (!(norm < 1e-8)) fail(ErrorKind::NewtonDiverged, "front Newton did not reach the residual tolerance");

    FrontProfile prof;
    prof.grid = grid;
    prof.q.assign(q.data(), q.data() + n);
    prof.c = pinch.c_star;
    prof.eta_star = pinch.eta_star;
    prof.u_minus = spec.u_minus;
    prof.newton_iterations = iterations;
    prof.residual_norm = traveling_wave_residual_norm(spec, prof.c, grid, prof.q);

    const double x1 = options.window_left * x_right, x2 = options.window_right * x_right;
    TailFit fit = extract_asymptotics(grid, prof.q, pinch.eta_star, x1, x2);
    prof.b_raw = fit.b;
    if (options.normalize) {
        const double s = std::log(std::abs(fit.b)) / pinch.eta_star;
        prof.shift = s;
        prof.grid = UniformGrid{x_left - s, x_right - s, n};
        fit = extract_asymptotics(prof.grid, prof.q, pinch.eta_star, x1 - s, x2 - s);
    }
    prof.a_coeff = fit.a;
    prof.b_coeff = options.normalize ? (fit.b > 0 ? 1.0 : -1.0) : fit.b;
    prof.tail_reflected = fit.b < 0.0;
    prof.eta_fit = fit.eta_fit;
    prof.eta0_fit = second_order_rate(prof.grid, prof.q, pinch.eta_star, fit.a, fit.b);
    return prof;
}

RefinementStudy grid_refinement_order(const ModelSpec& spec, const PinchResult& pinch, double x_left, double x_right, int n) {
    RefinementStudy study;
    std::vector<std::vector<double>> sols;
    int size = n;
    for (int level = 0; level < 3; ++level) {
        FrontOptions opt;
        opt.normalize = false;
        const auto p = solve_front(spec, pinch, x_left, x_right, size, opt);
        study.sizes.push_back(size);
        sols.push_back(p.q);
        size = 2 * size - 1;
    }
    for (int level = 0; level < 2; ++level) {
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            const std::size_t coarse = static_cast<std::size_t>(i) << level;
            const std::size_t fine = static_cast<std::size_t>(i) << (level + 1);
            diff = std::max(diff, std::abs(sols[static_cast<std::size_t>(level)][coarse] - sols[static_cast<std::size_t>(level + 1)][fine]));
        }
        study.differences.push_back(diff);
    }
    study.order = std::log2(study.differences[0] / study.differences[1]);
    return study;
}

std::vector<FrontContinuationRow> front_continuation(const ModelFamily& family, std::span<const double> delta_grid,
                                                     std::span<const PinchResult> pinch_table, double x_left, double x_right, int n) {
    require(delta_grid.size() == pinch_table.size(), "front_continuation: grid and pinch table differ in length");
    std::vector<FrontContinuationRow> rows;
    std::optional<FrontProfile> previous;
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        FrontContinuationRow row;
        row.delta = delta_grid[i];
        try {
            FrontOptions opt;
            if (previous) opt.initial = &*previous;
            auto prof = solve_front(family(delta_grid[i]), pinch_table[i], x_left, x_right, n, opt);
            row.a = prof.a_coeff;
            row.residual = prof.residual_norm;
            row.tail_reflected = prof.tail_reflected;
            row.ok = true;
            previous = std::move(prof);
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace frontlab
