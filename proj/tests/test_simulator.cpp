#include <doctest.h>

#include <cmath>

#include "frontlab/dispersion.hpp"
#include "frontlab/error.hpp"
#include "frontlab/simulator.hpp"

using namespace frontlab;

namespace {

const FrontProfile& fkpp_front() {
    static const FrontProfile f = [] {
        const auto spec = models::fkpp();
        return solve_front(spec, find_double_root(spec), -40.0, 60.0, 4000);
    }();
    return f;
}

ModelSpec heat() {
    ModelSpec s;
    s.p = {0.0, 1.0};
    s.f = {0.0};
    return s;
}

SimConfig small_config(double x_left, double x_right, int n, double dt) {
    SimConfig c;
    c.x_left = x_left;
    c.x_right = x_right;
    c.n = n;
    c.dt = dt;
    return c;
}

std::vector<double> run_to(const ModelSpec& spec, SimConfig c, double t) {
    c.sample_times.clear();
    c.checkpoint_times = {t};
    return run_invasion(spec, c).checkpoints.back().u;
}

}  // namespace

TEST_CASE("rest states are exact fixed points") {
    for (Scheme scheme : {Scheme::imex_cn_ab2, Scheme::imex_bdf2})
        for (const ModelSpec& spec : {models::fkpp(), models::efkpp(0.1)}) {
            for (double level : {0.0, spec.u_minus}) {
                SimConfig c = small_config(-20.0, 20.0, 400, 0.05);
                c.scheme = scheme;
                c.initial.kind = InitialKind::table;
                c.initial.table_x = {-100.0, 100.0};
                c.initial.table_u = {level, level};
                c.left_clamp = level;
                c.right_clamp = level;
                Simulator sim(spec, c);
                SimState s = sim.initial_state();
                for (int k = 0; k < 50; ++k) sim.step(s);
                for (double v : s.u) CHECK(v == level);
            }
        }
}

TEST_CASE("heat equation: second moment grows by 2 dt per step") {
    SimConfig c = small_config(-30.0, 30.0, 2401, 0.01);
    c.initial.kind = InitialKind::table;
    const auto g = c.grid();
    for (int i = 0; i < g.n; ++i) {
        c.initial.table_x.push_back(g.x(i));
        c.initial.table_u.push_back(std::exp(-g.x(i) * g.x(i) / 4.0));
    }
    c.left_clamp = 0.0;
    c.right_clamp = 0.0;
    auto moment = [&](const std::vector<double>& u) {
        double m0 = 0.0, m2 = 0.0;
        for (int i = 0; i < g.n; ++i) {
            m0 += u[static_cast<std::size_t>(i)];
            m2 += g.x(i) * g.x(i) * u[static_cast<std::size_t>(i)];
        }
        return m2 / m0;
    };
    for (Scheme scheme : {Scheme::imex_cn_ab2, Scheme::imex_bdf2}) {
        c.scheme = scheme;
        Simulator sim(heat(), c);
        SimState s = sim.initial_state();
        const double start = moment(s.u);
        CHECK(start == doctest::Approx(2.0).epsilon(1e-8));
        for (int k = 0; k < 100; ++k) sim.step(s);
        CHECK(moment(s.u) - start == doctest::Approx(2.0 * 100 * c.dt).epsilon(1e-8));
    }
}

TEST_CASE("time stepping is second order on fkpp") {
    const auto spec = models::fkpp();
    for (Scheme scheme : {Scheme::imex_cn_ab2, Scheme::imex_bdf2}) {
        SimConfig c = small_config(-20.0, 40.0, 1201, 0.00125);
        c.scheme = scheme;
        c.initial.kind = InitialKind::front_profile;
        c.initial.front = fkpp_front();
        const auto reference = run_to(spec, c, 1.0);
        std::vector<double> errors;
        for (double dt : {0.04, 0.02, 0.01}) {
            c.dt = dt;
            const auto u = run_to(spec, c, 1.0);
            double e = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) e = std::max(e, std::abs(u[i] - reference[i]));
            errors.push_back(e);
        }
        CHECK(std::log2(errors[0] / errors[1]) == doctest::Approx(2.0).epsilon(0.15));
        CHECK(std::log2(errors[1] / errors[2]) == doctest::Approx(2.0).epsilon(0.15));
    }
}

TEST_CASE("front position") {
    const UniformGrid g{0.0, 10.0, 1001};
    std::vector<double> u;
    for (int i = 0; i < g.n; ++i) u.push_back(0.5 * (1.0 - std::tanh(g.x(i) - 5.0)));
    CHECK(std::abs(front_position(g, u, 0.5) - 5.0) <= g.h());

    std::vector<double> two(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) two[static_cast<std::size_t>(i)] = (g.x(i) < 2.0 || (g.x(i) > 4.0 && g.x(i) < 7.0)) ? 1.0 : 0.0;
    CHECK(front_position(g, two, 0.5) == doctest::Approx(7.0).epsilon(2e-3));

    CHECK_THROWS_AS((void)front_position(g, std::vector<double>(static_cast<std::size_t>(g.n), 0.0), 0.5), Error);
}

TEST_CASE("t_final = 0 gives one sample at the jump") {
    SimConfig c = small_config(-20.0, 20.0, 401, 0.01);
    c.initial.shift = 3.0;
    c.sample_times = {0.0};
    const auto r = run_invasion(models::fkpp(), c);
    REQUIRE(r.series.size() == 1);
    CHECK(r.series[0].t == 0.0);
    CHECK(r.series[0].sigma == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("critical front propagates rigidly") {
    const auto spec = models::fkpp();
    SimConfig c = small_config(-40.0, 80.0, 4801, 0.01);
    c.initial.kind = InitialKind::front_profile;
    c.initial.front = fkpp_front();
    c.sample_times = uniform_samples(10.0, 0.5);
    c.checkpoint_times = {10.0};
    const auto r = run_invasion(spec, c);
    const double s0 = r.series.front().sigma;
    for (const auto& s : r.series) CHECK(std::abs(s.sigma - s0 - 2.0 * s.t) < 0.05);
    double e = 0.0;
    for (int i = 0; i < r.grid.n; ++i)
        e = std::max(e, std::abs(r.checkpoints[0].u[static_cast<std::size_t>(i)] - fkpp_front().eval(r.grid.x(i) - 20.0)));
    CHECK(e < 1e-3);
    CHECK(r.monitor.max_stiffness == doctest::Approx(0.01));
    CHECK(r.monitor.bound_warnings == 0);
}

TEST_CASE("blow-up is detected") {
    ModelSpec spec = models::fkpp();
    spec.f = {1.0, 1.0};
    SimConfig c = small_config(-20.0, 20.0, 401, 0.1);
    c.sample_times = {50.0};
    try {
        (void)run_invasion(spec, c);
        FAIL("expected BlowUp");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BlowUp);
    }
}

TEST_CASE("log-shift fit recovers its own model") {
    std::vector<PositionSample> series;
    for (int k = 0; k <= 600; ++k) {
        const double t = k;
        series.push_back({t, t > 0 ? 2.0 * t - 1.5 * std::log(t) + 3.0 : 0.0});
    }
    const auto f = fit_log_shift(series, 200.0, 600.0);
    CHECK(f.c_fit == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(f.B_fit == doctest::Approx(-1.5).epsilon(1e-8));
    CHECK(f.x_inf == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(f.B_differentiated == doctest::Approx(-1.5).epsilon(1e-6));
    CHECK(f.residual_rms < 1e-9);
    CHECK(f.samples == 401);

    std::vector<PositionSample> linear;
    for (int k = 50; k <= 600; ++k) linear.push_back({double(k), 1.7 * k});
    CHECK(std::abs(fit_log_shift(linear, 50.0, 600.0).B_fit) < 1e-8);

    CHECK_THROWS_AS((void)fit_log_shift(series, 20.0, 600.0), Error);
    CHECK_THROWS_AS((void)fit_log_shift(series, 200.0, 220.0), Error);
    std::vector<PositionSample> narrow;
    for (int k = 0; k < 40; ++k) narrow.push_back({1000.0 + 1e-3 * k, 2.0 * (1000.0 + 1e-3 * k)});
    try {
        (void)fit_log_shift(narrow, 999.0, 1001.0);
        FAIL("expected IllConditioned");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IllConditioned);
    }
}

TEST_CASE("weighted perturbation norm") {
    const auto& q = fkpp_front();
    const Weights w(q.eta_star, 2);
    const UniformGrid g{-40.0, 80.0, 4801};
    std::vector<double> u;
    for (int i = 0; i < g.n; ++i) u.push_back(q.eval(g.x(i) - 7.0));
    CHECK(weighted_perturbation_norm(g, u, q, w, 7.0) < 1e-5);

    const std::vector<double> zero(static_cast<std::size_t>(g.n), 0.0);
    double oracle = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        oracle = std::max(oracle, w.rho(-1.0, x) * w.omega(x) * std::abs(q.eval(x)));
    }
    const double n0 = weighted_perturbation_norm(g, zero, q, w, 0.0);
    CHECK(std::isfinite(n0));
    CHECK(n0 == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(n0 < 2.0);
}

TEST_CASE("model problem: change of variables and non-decay") {
    ModelProblemOptions o;
    o.T = 2.0;
    o.t_final = 200.0;
    o.dt = 0.05;
    const auto r = model_problem_run(o);
    CHECK(r.max_identity_gap < 1e-8);
    CHECK(r.length >= 20.0 * std::sqrt(o.t_final + o.T) - 1e-9);
    double w0 = 0.0;
    for (const auto& row : r.rows) {
        if (row.t < o.T) continue;
        if (w0 == 0.0) w0 = row.w_weighted;
        CHECK(row.w_weighted >= 0.2 * w0);
        CHECK(row.w_weighted <= 5.0 * w0);
        CHECK(row.z_scaled == doctest::Approx(row.w_weighted).epsilon(1e-6));
    }
    o.drop_nonautonomous = true;
    const auto h = model_problem_run(o);
    CHECK(model_problem_decay_exponent(h, 0.0, 20.0, 200.0) == doctest::Approx(-1.5).epsilon(0.1 / 1.5));
}

TEST_CASE("simulator rejects malformed configurations") {
    SimConfig c = small_config(0.0, 1.0, 4, 0.01);
    CHECK_THROWS_AS(Simulator(models::fkpp(), c), Error);
    c = small_config(0.0, 10.0, 100, 0.0);
    CHECK_THROWS_AS(Simulator(models::fkpp(), c), Error);
    c = small_config(0.0, 10.0, 100, 0.01);
    c.initial.kind = InitialKind::front_profile;
    CHECK_THROWS_AS(Simulator(models::fkpp(), c), Error);
    CHECK(parse_scheme("sbdf2") == Scheme::imex_bdf2);
    CHECK_THROWS_AS((void)parse_scheme("rk4"), Error);
}
