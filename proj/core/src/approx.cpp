#include "frontlab/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frontlab/banded.hpp"
#include "frontlab/error.hpp"
#include "frontlab/polynomial.hpp"
#include "frontlab/stencil.hpp"

namespace frontlab {

namespace {

double psi0_prime(double beta0, double xi) { return beta0 * (1.0 - 0.5 * xi * xi) * std::exp(-0.25 * xi * xi); }

double psi0_third(double beta0, double xi) {
    const double x2 = xi * xi;
    return beta0 * (-1.5 + 1.5 * x2 - x2 * x2 / 8.0) * std::exp(-0.25 * x2);
}

/// S(nu) = P(nu - eta*) + c*(nu - eta*) + f'(0).
std::vector<double> far_symbol(const ModelSpec& spec, const PinchResult& pinch) {
    auto s = spec.symbol();
    s[1] += pinch.c_star;
    auto out = poly::taylor_shift(s, -pinch.eta_star);
    out[0] += spec.reaction_prime(0.0);
    return out;
}

}  // namespace

Weights approx_weights(const ModelSpec& spec, double eta_star) { return Weights(eta_star, spec.order() + 4); }

double SelfSimilarProfiles::forcing(double xi) const {
    return forcing_first * psi0_prime(beta0, xi) + forcing_third * psi0_third(beta0, xi);
}

double SelfSimilarProfiles::psi1_at(double xi) const {
    if (xi >= xi_grid.x_right) return 0.0;
    if (xi >= 0.0) return interpolate(xi_grid, psi1, xi, 6);
    if (xi >= extension_grid.x_left) return interpolate(extension_grid, extension, xi, 6);
    return -psi1_at(-xi);
}

double SelfSimilarProfiles::psi1_prime_at(double xi) const {
    if (xi >= xi_grid.x_right) return 0.0;
    if (xi >= 0.0) return interpolate(xi_grid, derivatives[1], xi, 6);
    if (xi >= extension_grid.x_left) return interpolate(extension_grid, extension_prime, xi, 6);
    return psi1_prime_at(-xi);
}

SelfSimilarProfiles solve_psi1(double alpha, double alpha3, double eta_star, double beta0, double xi_max, int n) {
    require(alpha > 0.0 && eta_star > 0.0, "solve_psi1: alpha and eta* must be positive");
    require(xi_max >= 4.0 && n >= 2000, "solve_psi1: need xi_max >= 4 and n >= 2000");
    SelfSimilarProfiles out;
    out.xi_grid = UniformGrid{0.0, xi_max, n};
    out.beta0 = beta0;
    out.forcing_first = 3.0 / (2.0 * eta_star * std::sqrt(alpha));
    out.forcing_third = -alpha3 / std::pow(alpha, 1.5);
    const double h = out.xi_grid.h();
    const StencilSet st(h, 2);

    BandedMatrix<double> A(n, 5, 5);
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    out.psi0.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double xi = out.xi_grid.x(i);
        out.psi0[static_cast<std::size_t>(i)] = beta0 * xi * std::exp(-0.25 * xi * xi);
        if (i == 0 || i == n - 1) {
            A.add(i, i, 1.0);
            continue;
        }
        A.add(i, i, 1.5);
        for (int k = 1; k <= 2; ++k) {
            const Stencil s = st.at(k, i, n);
            const double coef = k == 1 ? 0.5 * xi : 1.0;
            for (std::size_t j = 0; j < s.w.size(); ++j) A.add(i, s.first(i) + static_cast<int>(j), coef * s.w[j]);
        }
        rhs[static_cast<std::size_t>(i)] = out.forcing(xi);
    }
    try {
        const BandedLU<double> lu(A);
        out.psi1 = lu.solve(rhs);
    } catch (const Error& e) {
        fail(ErrorKind::SingularSystem, std::string("solve_psi1: ") + e.what());
    }
    const auto Ax = A.multiply(out.psi1);
    for (int i = 0; i < n; ++i)
        out.discrete_residual = std::max(out.discrete_residual, std::abs(Ax[static_cast<std::size_t>(i)] - rhs[static_cast<std::size_t>(i)]));

    const StencilSet st3(h, 3);
    out.derivatives[0] = out.psi1;
    for (int k = 1; k <= 3; ++k) {
        auto& d = out.derivatives[static_cast<std::size_t>(k)];
        d.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = st3.apply(k, i, out.psi1);
    }
    for (int i = 0; i < n; ++i) {
        const double xi = out.xi_grid.x(i);
        if (xi > xi_max - 2.0) break;
        out.gaussian_constant = std::max(out.gaussian_constant, std::abs(out.psi1[static_cast<std::size_t>(i)]) * std::exp(xi * xi / 8.0));
    }

    // RK4 continuation to xi in [-4, 0] from Psi1(0) = 0 and the computed slope.
    const int m = static_cast<int>(std::ceil(4.0 / h)) + 1;
    out.extension_grid = UniformGrid{-(m - 1) * h, 0.0, m};
    out.extension.assign(static_cast<std::size_t>(m), 0.0);
    out.extension_prime.assign(static_cast<std::size_t>(m), 0.0);
    double y = 0.0, yp = out.derivatives[1][0];
    out.extension_prime[static_cast<std::size_t>(m - 1)] = yp;
    auto accel = [&](double xi, double u, double up) { return out.forcing(xi) - 0.5 * xi * up - 1.5 * u; };
    for (int i = m - 1; i > 0; --i) {
        const double xi = out.extension_grid.x(i), dt = -h;
        const double k1y = yp, k1p = accel(xi, y, yp);
        const double k2y = yp + 0.5 * dt * k1p, k2p = accel(xi + 0.5 * dt, y + 0.5 * dt * k1y, yp + 0.5 * dt * k1p);
        const double k3y = yp + 0.5 * dt * k2p, k3p = accel(xi + 0.5 * dt, y + 0.5 * dt * k2y, yp + 0.5 * dt * k2p);
        const double k4y = yp + dt * k3p, k4p = accel(xi + dt, y + dt * k3y, yp + dt * k3p);
        y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
        yp += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        out.extension[static_cast<std::size_t>(i - 1)] = y;
        out.extension_prime[static_cast<std::size_t>(i - 1)] = yp;
    }
    return out;
}

ApproxSolution::ApproxSolution(const ModelSpec& spec, const PinchResult& pinch, const FrontProfile& front, const ApproxOptions& options)
    : spec_(spec),
      pinch_(pinch),
      front_(front),
      weights_(approx_weights(spec, pinch.eta_star)),
      ramp_(0.0, 1.0, spec.order()),
      T_(options.T),
      mu_(options.mu) {
    require(options.T > 0.0, "ApproxSolution: T must be positive");
    require(options.mu > 0.0 && options.mu < 0.125, "ApproxSolution: mu must lie in (0, 1/8)");
    require(pinch.alpha > 0.0, "ApproxSolution: alpha must be positive");
    const auto s = far_symbol(spec, pinch);
    alpha_ = s[2];
    alpha3_ = s.size() > 3 ? s[3] : 0.0;
    x0_ = options.x0.value_or(front.a_coeff);
    profiles_ = solve_psi1(alpha_, alpha3_, pinch.eta_star, options.beta0.value_or(std::sqrt(alpha_)), options.xi_max, options.psi_n);
}

double ApproxSolution::matching_point(double t) const { return std::pow(t + T_, mu_); }

double ApproxSolution::weighted_front(double x) const {
    // omega = e^{eta x} exactly once x >= 1, so the tail model is (a + b x) there
    if (x >= front_.grid.x_right && x >= 1.0) return front_.a_coeff + front_.b_coeff * x;
    return weights_.omega(x) * front_.eval(x);
}

double ApproxSolution::weighted_front_prime(double x) const {
    if (x >= front_.grid.x_right && x >= 1.0) return front_.b_coeff;
    const double d = 1e-3;
    return (weighted_front(x - 2 * d) - 8.0 * weighted_front(x - d) + 8.0 * weighted_front(x + d) - weighted_front(x + 2 * d)) / (12.0 * d);
}

double ApproxSolution::psi_plus(double x, double t) const {
    const double s = x + x0_;
    const double tau = t + T_;
    return profiles_.beta0 / std::sqrt(alpha_) * s * std::exp(-s * s / (4.0 * alpha_ * tau)) + profiles_.psi1_at(s / std::sqrt(alpha_ * tau));
}

double ApproxSolution::psi_plus_prime(double x, double t) const {
    const double s = x + x0_;
    const double tau = t + T_;
    const double g = std::exp(-s * s / (4.0 * alpha_ * tau));
    return profiles_.beta0 / std::sqrt(alpha_) * g * (1.0 - s * s / (2.0 * alpha_ * tau)) +
           profiles_.psi1_prime_at(s / std::sqrt(alpha_ * tau)) / std::sqrt(alpha_ * tau);
}

double ApproxSolution::blend(double x, double t) const { return 1.0 - ramp_.value(x - matching_point(t)); }

double compute_zeta(const ApproxSolution& approx, double t) {
    require(t + approx.T() > 0.0, "compute_zeta: t + T must be positive");
    const double xm = approx.matching_point(t);
    const double target = approx.psi_plus(xm, t);
    double zeta = 0.0, last = std::numeric_limits<double>::infinity();
    int growth = 0;
    for (int it = 0; it < 30; ++it) {
        const double slope = approx.weighted_front_prime(xm + zeta);
        if (!(std::abs(slope) > 1e-12)) fail(ErrorKind::NoContraction, "compute_zeta: flat weighted front at the matching point; increase T");
        const double update = (target - approx.psi_minus(xm, zeta)) / slope;
        zeta += update;
        if (std::abs(update) < 1e-12) return zeta;
        growth = std::abs(update) > std::abs(last) ? growth + 1 : 0;
        if (growth >= 2) fail(ErrorKind::NoContraction, "compute_zeta: matching update grew twice in a row; increase T");
        last = update;
    }
    fail(ErrorKind::NoContraction, "compute_zeta: no convergence in 30 iterations; increase T");
}

double ZetaTable::at(double t_query, double T) const {
    require(t.size() >= 4, "ZetaTable: need at least four samples");
    const double s = std::log(t_query + T);
    std::vector<double> ls(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) ls[i] = std::log(t[i] + T);
    auto it = std::upper_bound(ls.begin(), ls.end(), s);
    const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(it - ls.begin(), 2, static_cast<std::ptrdiff_t>(ls.size()) - 2);
    const std::size_t lo = static_cast<std::size_t>(hi - 2);
    double acc = 0.0;
    for (std::size_t i = lo; i < lo + 4; ++i) {
        double w = 1.0;
        for (std::size_t j = lo; j < lo + 4; ++j)
            if (j != i) w *= (s - ls[j]) / (ls[i] - ls[j]);
        acc += w * zeta[i];
    }
    return acc;
}

ZetaTable tabulate_zeta(const ApproxSolution& approx, double t_max, int count) {
    require(count >= 4 && t_max > 0.0, "tabulate_zeta: need t_max > 0 and at least four samples");
    ZetaTable table;
    table.t = log_spaced_times(approx.T(), (t_max + approx.T()) / approx.T(), count);
    for (const double t : table.t) table.zeta.push_back(compute_zeta(approx, t));
    return table;
}

std::vector<double> sample_psi(const ApproxSolution& approx, std::span<const double> xs, double t) {
    const double zeta = compute_zeta(approx, t);
    const double xm = approx.matching_point(t);
    std::vector<double> out;
    out.reserve(xs.size());
    for (const double x : xs) {
        if (x <= xm) {
            out.push_back(approx.psi_minus(x, zeta));
        } else if (x >= xm + 1.0) {
            out.push_back(approx.psi_plus(x, t));
        } else {
            const double chi = approx.blend(x, t);
            out.push_back(chi * approx.psi_minus(x, zeta) + (1.0 - chi) * approx.psi_plus(x, t));
        }
    }
    return out;
}

double eval_psi(const ApproxSolution& approx, double x, double t) { return sample_psi(approx, std::span<const double>(&x, 1), t)[0]; }

MatchingDiagnostics matching_diagnostics(const ApproxSolution& approx, double t) {
    MatchingDiagnostics d;
    d.t = t;
    d.matching_point = approx.matching_point(t);
    d.zeta = compute_zeta(approx, t);
    d.value_gap = approx.psi_minus(d.matching_point, d.zeta) - approx.psi_plus(d.matching_point, t);
    d.derivative_gap = std::abs(approx.weighted_front_prime(d.matching_point + d.zeta) - approx.psi_plus_prime(d.matching_point, t));
    return d;
}

std::vector<double> residual_of(const ModelSpec& spec, const PinchResult& pinch, const FieldSampler& v, const UniformGrid& x_grid,
                                double t, double T, const ResidualOptions& options) {
    const int deg = spec.order();
    const int half = StencilSet::half_width(deg);
    const double h = x_grid.h();
    const int n = x_grid.n;
    // extended grid so every output node has a centered stencil
    std::vector<double> xs(static_cast<std::size_t>(n + 2 * half));
    for (int i = 0; i < n + 2 * half; ++i) xs[static_cast<std::size_t>(i)] = x_grid.x_left + (i - half) * h;
    const auto u = v(xs, t);
    require(u.size() == xs.size(), "residual_of: sampler returned the wrong number of values");

    const double dt = options.dt_fd > 0.0 ? options.dt_fd : 1e-4 * (t + T);
    const auto up1 = v(x_grid.points(), t + dt), um1 = v(x_grid.points(), t - dt);
    const auto up2 = v(x_grid.points(), t + 2 * dt), um2 = v(x_grid.points(), t - 2 * dt);

    const Weights w = approx_weights(spec, pinch.eta_star);
    auto symbol = spec.symbol();
    symbol[1] += pinch.c_star;
    const double kappa = options.log_term ? 3.0 / (2.0 * pinch.eta_star * (t + T)) : 0.0;
    const std::vector<double> drift{0.0, 1.0};
    const StencilSet st(h, deg);

    std::vector<double> R(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t e = static_cast<std::size_t>(i + half);
        const double x = xs[e];
        auto b = w.conjugated_symbol(symbol, x);
        const auto d = w.conjugated_symbol(drift, x);
        b[0] -= kappa * d[0];
        b[1] -= kappa * d[1];
        double lin = b[0] * u[e];
        for (int k = 1; k <= deg; ++k) lin += b[static_cast<std::size_t>(k)] * st.apply(k, static_cast<int>(e), u);
        // omega f(omega^{-1} v) = v sum_k f_k (omega^{-1} v)^{k-1}
        const double inner = u[e] / w.omega(x);
        double fr = 0.0;
        for (std::size_t k = spec.f.size(); k-- > 0;) fr = fr * inner + spec.f[k];
        const std::size_t s = static_cast<std::size_t>(i);
        const double vt = (um2[s] - 8.0 * um1[s] + 8.0 * up1[s] - up2[s]) / (12.0 * dt);
        R[s] = vt - lin - u[e] * fr;
    }
    return R;
}

std::vector<double> residual(const ApproxSolution& approx, const UniformGrid& x_grid, double t, const ResidualOptions& options) {
    const FieldSampler sampler = [&approx](std::span<const double> xs, double tt) { return sample_psi(approx, xs, tt); };
    return residual_of(approx.spec(), approx.pinch(), sampler, x_grid, t, approx.T(), options);
}

double weighted_sup_norm(std::span<const double> g, const UniformGrid& grid, const Weights& weights, double r) {
    double out = 0.0;
    for (int i = 0; i < grid.n; ++i) out = std::max(out, weights.rho(r, grid.x(i)) * std::abs(g[static_cast<std::size_t>(i)]));
    return out;
}

double l11_norm(std::span<const double> g, const UniformGrid& grid) {
    double acc = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double wgt = (i == 0 || i == grid.n - 1) ? 0.5 : 1.0;
        acc += wgt * std::sqrt(1.0 + x * x) * std::abs(g[static_cast<std::size_t>(i)]);
    }
    return acc * grid.h();
}

DecayTable decay_table(std::span<const double> t_samples, double T, double mu, const std::function<std::pair<double, double>(double)>& norms) {
    require(t_samples.size() >= 2, "decay_table: need at least two samples");
    DecayTable table;
    for (const double t : t_samples) {
        const auto [linf, l11] = norms(t);
        table.rows.push_back({t, linf, std::pow(t + T, 0.5 - 4.0 * mu) * linf, l11});
    }
    const std::size_t half = table.rows.size() / 2;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        double& target = i < half ? table.first_half_max : table.second_half_max;
        target = std::max(target, table.rows[i].scaled);
    }
    table.bounded = table.second_half_max <= 2.0 * table.first_half_max;
    return table;
}

UniformGrid residual_grid(const ApproxSolution& approx, double t) {
    const double right = approx.matching_point(t) + 14.0 * std::sqrt(approx.alpha() * (t + approx.T()));
    const double left = -20.0;
    const int n = static_cast<int>(std::ceil((right - left) / 0.05)) + 1;
    return UniformGrid{left, left + 0.05 * (n - 1), n};
}

DecayTable residual_decay_check(const ApproxSolution& approx, std::span<const double> t_samples) {
    return decay_table(t_samples, approx.T(), approx.mu(), [&](double t) {
        const auto grid = residual_grid(approx, t);
        const auto R = residual(approx, grid, t);
        return std::pair{weighted_sup_norm(R, grid, approx.weights(), approx.r()), l11_norm(R, grid)};
    });
}

std::vector<double> log_spaced_times(double T, double span_factor, int count) {
    require(T > 0.0 && span_factor > 1.0 && count >= 2, "log_spaced_times: need T > 0, span > 1, count >= 2");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(T * std::pow(span_factor, static_cast<double>(i) / (count - 1)) - T);
    out.front() = 0.0;
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope: samples must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

FrontProfile exact_tail_front(double a, double eta_star, const UniformGrid& grid) {
    FrontProfile p;
    p.grid = grid;
    p.eta_star = eta_star;
    p.a_coeff = a;
    p.b_coeff = 1.0;
    p.b_raw = 1.0;
    p.eta_fit = eta_star;
    p.u_minus = (a + grid.x_left) * std::exp(-eta_star * grid.x_left);
    for (int i = 0; i < grid.n; ++i) p.q.push_back((a + grid.x(i)) * std::exp(-eta_star * grid.x(i)));
    return p;
}

}  // namespace frontlab
