#include <doctest.h>

#include <cmath>

#include "frontlab/approx.hpp"
#include "frontlab/error.hpp"

using namespace frontlab;

namespace {

struct Setup {
    ModelSpec spec = models::fkpp();
    PinchResult pinch;
    FrontProfile front;
};

const Setup& fkpp() {
    static const Setup s = [] {
        Setup x;
        x.pinch = find_double_root(x.spec);
        x.front = solve_front(x.spec, x.pinch, -40.0, 60.0, 4000);
        return x;
    }();
    return s;
}

/// Independent oracle: linear shooting with RK4 for y'' + xi y'/2 + 3y/2 = F, y(0) = 0, y(L) = 0.
std::vector<double> shoot(const std::function<double(double)>& F, double L, int steps, int stride) {
    auto integrate = [&](double slope, bool forced) {
        double y = 0.0, p = slope;
        const double h = L / steps;
        std::vector<double> out{0.0};
        auto acc = [&](double xi, double u, double up) { return (forced ? F(xi) : 0.0) - 0.5 * xi * up - 1.5 * u; };
        for (int i = 0; i < steps; ++i) {
            const double xi = i * h;
            const double k1y = p, k1p = acc(xi, y, p);
            const double k2y = p + 0.5 * h * k1p, k2p = acc(xi + 0.5 * h, y + 0.5 * h * k1y, p + 0.5 * h * k1p);
            const double k3y = p + 0.5 * h * k2p, k3p = acc(xi + 0.5 * h, y + 0.5 * h * k2y, p + 0.5 * h * k2p);
            const double k4y = p + h * k3p, k4p = acc(xi + h, y + h * k3y, p + h * k3p);
            y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
            p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
            if ((i + 1) % stride == 0) out.push_back(y);
        }
        return out;
    };
    const auto particular = integrate(0.0, true);
    const auto homogeneous = integrate(1.0, false);
    const double s = -particular.back() / homogeneous.back();
    std::vector<double> y(particular.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = particular[i] + s * homogeneous[i];
    return y;
}

}  // namespace

TEST_CASE("psi1 vanishes without forcing") {
    const auto p = solve_psi1(1.0, 0.0, 1.0, 0.0, 12.0, 2000);
    for (double v : p.psi1) CHECK(v == 0.0);
}

TEST_CASE("psi1 for fkpp agrees with a shooting oracle") {
    const auto p = solve_psi1(1.0, 0.0, 1.0, 1.0, 12.0, 4000);
    CHECK(std::abs(p.psi1.front()) < 1e-10);
    CHECK(std::abs(p.psi1.back()) < 1e-10);
    CHECK(p.discrete_residual < 1e-8);
    const auto& F = p;
    const auto oracle = shoot([&](double xi) { return F.forcing(xi); }, 12.0, 3999 * 8, 8);
    REQUIRE(oracle.size() == p.psi1.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) worst = std::max(worst, std::abs(oracle[i] - p.psi1[i]));
    CHECK(worst < 1e-8);
    // forcing is 3/2 Psi0' with Psi0' = (1 - xi^2/2) e^{-xi^2/4}
    CHECK(p.forcing(0.0) == doctest::Approx(1.5));
    CHECK(p.forcing(2.0) == doctest::Approx(1.5 * (1.0 - 2.0) * std::exp(-1.0)));
}

TEST_CASE("psi1 obeys a Gaussian envelope") {
    const auto p = solve_psi1(1.0, 0.0, 1.0, 1.0, 12.0, 4000);
    CHECK(p.gaussian_constant > 0.0);
    CHECK(p.gaussian_constant < 50.0);
    for (int i = 0; i < p.xi_grid.n; ++i) {
        const double xi = p.xi_grid.x(i);
        if (xi > 10.0) break;
        CHECK(std::abs(p.psi1[static_cast<std::size_t>(i)]) <= p.gaussian_constant * std::exp(-xi * xi / 8.0) * (1.0 + 1e-12));
    }
    for (int i = 0; i < p.xi_grid.n; ++i)
        if (p.xi_grid.x(i) >= 11.0) CHECK(std::abs(p.psi1[static_cast<std::size_t>(i)]) < 1e-10);
}

TEST_CASE("psi1 is grid independent to round-off") {
    const auto a = solve_psi1(1.3, 0.4, 0.8, 1.1, 12.0, 2001);
    const auto b = solve_psi1(1.3, 0.4, 0.8, 1.1, 12.0, 4001);
    const auto c = solve_psi1(1.3, 0.4, 0.8, 1.1, 12.0, 8001);
    double d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < 2001; ++i) {
        d1 = std::max(d1, std::abs(a.psi1[static_cast<std::size_t>(i)] - b.psi1[static_cast<std::size_t>(2 * i)]));
        d2 = std::max(d2, std::abs(b.psi1[static_cast<std::size_t>(2 * i)] - c.psi1[static_cast<std::size_t>(4 * i)]));
    }
    CHECK(d1 < 1e-8);
    CHECK(d2 < 1e-8);
}

TEST_CASE("psi1 continuation to negative xi solves the same equation") {
    const auto p = solve_psi1(1.0, 0.0, 1.0, 1.0, 12.0, 4000);
    const double h = 1e-3;
    for (double xi : {-3.0, -1.5, -0.5, -0.1}) {
        const double y = p.psi1_at(xi);
        const double ypp = (p.psi1_at(xi - h) - 2 * y + p.psi1_at(xi + h)) / (h * h);
        CHECK(std::abs(ypp + 0.5 * xi * p.psi1_prime_at(xi) + 1.5 * y - p.forcing(xi)) < 1e-4);
    }
    // continuity across xi = 0
    CHECK(std::abs(p.psi1_at(-1e-9)) < 1e-8);
    CHECK(p.psi1_prime_at(-1e-9) == doctest::Approx(p.psi1_prime_at(1e-9)).epsilon(1e-6));
}

TEST_CASE("matching shift on an exact-tail front decays like (t+T)^(mu - 1/2)") {
    const auto& s = fkpp();
    const auto front = exact_tail_front(0.0, 1.0, UniformGrid{-5.0, 60.0, 2601});
    std::vector<double> Ts{1e2, 1e3, 1e4}, zetas;
    for (double T : Ts) {
        ApproxOptions o;
        o.T = T;
        const ApproxSolution A(s.spec, s.pinch, front, o);
        const double z = compute_zeta(A, 0.0);
        zetas.push_back(std::abs(z));
        // bound with C = 2 |Psi1'(0)| / sqrt(alpha)
        CHECK(std::abs(z) <= 2.0 * std::abs(A.profiles().derivatives[1][0]) * std::pow(T, o.mu - 0.5));
        const auto d = matching_diagnostics(A, 0.0);
        CHECK(std::abs(d.value_gap) < 1e-8);
    }
    CHECK(loglog_slope(Ts, zetas) == doctest::Approx(0.1 - 0.5).epsilon(0.1));
}

TEST_CASE("matching derivative gap decays like (t+T)^(-1/2) on an exact-tail front") {
    const auto& s = fkpp();
    const auto front = exact_tail_front(s.front.a_coeff, 1.0, UniformGrid{-5.0, 60.0, 2601});
    std::vector<double> Ts{1e2, 1e3, 1e4}, gaps;
    for (double T : Ts) {
        ApproxOptions o;
        o.T = T;
        gaps.push_back(matching_diagnostics(ApproxSolution(s.spec, s.pinch, front, o), 0.0).derivative_gap);
    }
    CHECK(std::abs(loglog_slope(Ts, gaps) + 0.5) < 0.1);
}

TEST_CASE("mismatched x0 leaves an O(1) matching shift") {
    const auto& s = fkpp();
    const auto front = exact_tail_front(0.0, 1.0, UniformGrid{-5.0, 60.0, 2601});
    ApproxOptions o;
    o.T = 1e6;
    o.x0 = 1.0;
    const ApproxSolution A(s.spec, s.pinch, front, o);
    CHECK(compute_zeta(A, 0.0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("fkpp with T = 100: the diffusive tail is negative at the matching point") {
    // a = -1.95 after normalization, so psi+ ~ (t+T)^mu + a < 0 while omega q* > 0 everywhere
    const auto& s = fkpp();
    const ApproxSolution A(s.spec, s.pinch, s.front, ApproxOptions{});
    CHECK(A.psi_plus(A.matching_point(0.0), 0.0) < 0.0);
    try {
        (void)compute_zeta(A, 0.0);
        FAIL("expected NoContraction");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoContraction);
        CHECK(std::string(e.what()).find("increase T") != std::string::npos);
    }
}

TEST_CASE("blend is exact away from the matching zone and continuous at the matching point") {
    const auto& s = fkpp();
    ApproxOptions o;
    o.T = 1e4;
    const ApproxSolution A(s.spec, s.pinch, s.front, o);
    const double t = 50.0;
    const double xm = A.matching_point(t);
    const double z = compute_zeta(A, t);
    CHECK(eval_psi(A, xm - 1.5, t) == A.psi_minus(xm - 1.5, z));
    CHECK(eval_psi(A, xm + 1.5, t) == A.psi_plus(xm + 1.5, t));
    CHECK(std::abs(A.psi_minus(xm, z) - A.psi_plus(xm, t)) < 1e-8);
    CHECK(std::abs(eval_psi(A, xm, t) - A.psi_plus(xm, t)) < 1e-8);
    const auto table = tabulate_zeta(A, 1e4, 12);
    for (double tq : {10.0, 300.0, 4000.0}) CHECK(table.at(tq, A.T()) == doctest::Approx(compute_zeta(A, tq)).epsilon(1e-3));
}

TEST_CASE("residual of the rest state vanishes") {
    const auto& s = fkpp();
    const FieldSampler zero = [](std::span<const double> xs, double) { return std::vector<double>(xs.size(), 0.0); };
    const auto R = residual_of(s.spec, s.pinch, zero, UniformGrid{-10.0, 10.0, 401}, 0.0, 100.0);
    for (double r : R) CHECK(r == 0.0);
}

TEST_CASE("residual of the frozen weighted front is the speed-correction term only") {
    const auto& s = fkpp();
    const Weights w = approx_weights(s.spec, s.pinch.eta_star);
    const FieldSampler frozen = [&](std::span<const double> xs, double) {
        std::vector<double> v;
        for (double x : xs) v.push_back(w.omega(x) * s.front.eval(x));
        return v;
    };
    ResidualOptions plain;
    plain.log_term = false;
    double e_coarse = 0.0, e_fine = 0.0;
    const UniformGrid coarse{-10.0, 10.0, 401}, fine{-10.0, 10.0, 801};
    for (double r : residual_of(s.spec, s.pinch, frozen, coarse, 0.0, 100.0, plain)) e_coarse = std::max(e_coarse, std::abs(r));
    for (double r : residual_of(s.spec, s.pinch, frozen, fine, 0.0, 100.0, plain)) e_fine = std::max(e_fine, std::abs(r));
    CHECK(e_coarse < 1e-4);
    CHECK(e_coarse / e_fine > 8.0);

    // with the log term: F_res[omega q*] = 3/(2 eta (t+T)) omega q*'
    const double t = 20.0, T = 100.0;
    const auto R = residual_of(s.spec, s.pinch, frozen, fine, t, T);
    const double kappa = 1.5 / (t + T);
    for (int i = 0; i < fine.n; i += 40) {
        const double x = fine.x(i);
        const double qp = (s.front.eval(x + 1e-4) - s.front.eval(x - 1e-4)) / 2e-4;
        CHECK(std::abs(R[static_cast<std::size_t>(i)] - kappa * w.omega(x) * qp) < 2e-5);
    }
}

TEST_CASE("decay table bookkeeping") {
    const auto ts = log_spaced_times(100.0, 11.0, 8);
    CHECK(ts.front() == 0.0);
    CHECK(ts.back() == doctest::Approx(1000.0));
    const auto synthetic = decay_table(ts, 100.0, 0.1, [](double t) { return std::pair{std::pow(t + 100.0, -0.1), 0.0}; });
    for (const auto& r : synthetic.rows) CHECK(r.scaled == doctest::Approx(1.0));
    CHECK(synthetic.bounded);
    const auto zero = decay_table(ts, 100.0, 0.1, [](double) { return std::pair{0.0, 0.0}; });
    for (const auto& r : zero.rows) CHECK(r.scaled == 0.0);
    const auto growing = decay_table(ts, 100.0, 0.1, [](double t) { return std::pair{1.0 + t, 0.0}; });
    CHECK_FALSE(growing.bounded);
}

TEST_CASE("log-log slope recovers exact power laws") {
    const std::vector<double> x{1.0, 10.0, 100.0}, y{3.0, 3.0 * std::pow(10.0, -0.4), 3.0 * std::pow(100.0, -0.4)};
    CHECK(loglog_slope(x, y) == doctest::Approx(-0.4));
}

TEST_CASE("approximate solution rejects mu outside (0, 1/8)") {
    const auto& s = fkpp();
    ApproxOptions o;
    o.mu = 0.2;
    CHECK_THROWS_AS(ApproxSolution(s.spec, s.pinch, s.front, o), Error);
}
