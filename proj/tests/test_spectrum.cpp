#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "frontlab/error.hpp"
#include "frontlab/spectrum.hpp"
#include "frontlab/stencil.hpp"

using namespace frontlab;

namespace {

struct Fixture {
    ModelSpec spec;
    PinchResult pinch;
    FrontProfile profile;
};

const Fixture& fkpp_front() {
    static const Fixture f = [] {
        Fixture x{models::fkpp(), {}, {}};
        x.pinch = find_double_root(x.spec);
        x.profile = solve_front(x.spec, x.pinch, -40.0, 60.0, 4000);
        return x;
    }();
    return f;
}

const Fixture& cubic_front(double delta) {
    static std::map<double, Fixture> cache;
    auto it = cache.find(delta);
    if (it == cache.end()) {
        Fixture x{models::cubic(delta), {}, {}};
        x.pinch = find_double_root(x.spec);
        x.profile = solve_front(x.spec, x.pinch, -40.0, 60.0, 4000);
        it = cache.emplace(delta, std::move(x)).first;
    }
    return it->second;
}

const UniformGrid kResonanceGrid{-60.0, 100.0, 3200};
const UniformGrid kScanGrid{-40.0, 60.0, 800};

}  // namespace

TEST_CASE("fkpp far-field rows reduce to the second derivative plus f'(q*) - f'(0)") {
    const auto& f = fkpp_front();
    const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, kResonanceGrid);
    for (int i = 0; i < op.grid.n; i += 97) {
        const double x = op.grid.x(i);
        const auto& b = op.coefficients[static_cast<std::size_t>(i)];
        const double q = op.q[static_cast<std::size_t>(i)];
        if (x >= 1.0) {
            CHECK(b[0] == doctest::Approx(-2.0 * q).epsilon(1e-12));
            CHECK(std::abs(b[1]) < 1e-12);
            CHECK(b[2] == doctest::Approx(1.0));
        } else if (x <= -1.0) {
            CHECK(b[0] == doctest::Approx(1.0 - 2.0 * q).epsilon(1e-12));
            CHECK(b[1] == doctest::Approx(2.0));
            CHECK(b[2] == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("operator minus its far-field limit is a small multiplication far ahead of the front") {
    const auto& f = fkpp_front();
    const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, kResonanceGrid);
    const int n = op.grid.n;
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = std::exp(-std::pow(op.grid.x(i) - 30.0, 2));
    const auto Lu = op.L.multiply(u);
    const StencilSet st(op.grid.h(), 2);
    double worst = 0.0;
    for (int i = 2; i + 2 < n; ++i) {
        const double far = st.apply(2, i, u);
        worst = std::max(worst, std::abs(Lu[static_cast<std::size_t>(i)] - far));
    }
    CHECK(worst < 1e-6);
    // the independent size of the multiplication term at x = 30
    CHECK(std::abs(2.0 * f.profile.eval(30.0)) < 1e-6);
}

TEST_CASE("row scaling is a similarity") {
    const auto& f = fkpp_front();
    const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, UniformGrid{-20.0, 30.0, 201});
    auto a = dense_eigenvalues(op);
    auto b = dense_eigenvalues(row_scaled(op, 0.15));
    auto by_value = [](cplx x, cplx y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); };
    std::sort(a.begin(), a.end(), by_value);
    std::sort(b.begin(), b.end(), by_value);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-7 * (1.0 + std::abs(a[i])));
}

TEST_CASE("adjoint kernel matches e^{(c - eta) x} q' away from the boundaries") {
    const auto& f = fkpp_front();
    const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, kResonanceGrid);
    const ResonanceFunction E(op);
    CHECK(E.sigma_min() < 1e-6);
    CHECK(E.sigma_2() > 1e-3);
    const Weights scaling(E.scaling_eta(), 2);
    const Weights omega(f.pinch.eta_star, 2);
    const StencilSet st(op.grid.h(), 1);
    const auto& phi_tilde = E.adjoint_kernel();
    double ratio0 = 0.0, spread = 0.0;
    for (double x : {-10.0, -4.0, -1.0, 0.0, 2.0, 5.0, 10.0, 20.0}) {
        const int i = static_cast<int>(std::lround((x - op.grid.x_left) / op.grid.h()));
        const double xi = op.grid.x(i);
        const double phi = phi_tilde[static_cast<std::size_t>(i)] * std::exp(E.scaling_eta() * scaling.exponent(xi));
        const double oracle = std::exp(f.pinch.c_star * xi) * st.apply(1, i, op.q) / omega.omega(xi);
        const double ratio = phi / oracle;
        if (ratio0 == 0.0) ratio0 = ratio;
        spread = std::max(spread, std::abs(ratio / ratio0 - 1.0));
        CHECK(ratio > 0.0);
    }
    CHECK(spread < 1e-3);
}

TEST_CASE("fkpp: resonance value is bounded away from zero and positive") {
    const auto& f = fkpp_front();
    const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, kResonanceGrid);
    const cplx e0 = resonance_function(op, 0.0);
    CHECK(e0.real() > 1.0);
    CHECK(std::abs(e0.imag()) < 1e-9 * std::abs(e0.real()));
}

TEST_CASE("resonance value does not depend on the auxiliary scaling rate") {
    const auto& f = fkpp_front();
    const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, kResonanceGrid);
    const double e1 = ResonanceFunction(op, 0.1)(0.0).real();
    const double e2 = ResonanceFunction(op, 0.2)(0.0).real();
    CHECK(std::abs(e1 - e2) < 1e-4 * std::abs(e2));
}

TEST_CASE("resonance function is analytic near zero") {
    for (double delta : {-1.0, 0.4}) {
        const auto& f = delta < 0.0 ? fkpp_front() : cubic_front(delta);
        const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, kResonanceGrid);
        const ResonanceFunction E(op);
        const double scale = std::abs(E(0.0));
        CHECK(cauchy_reconstruction_error(E, 0.0, 0.05, 16) < 1e-6 * std::max(1.0, scale));
    }
}

TEST_CASE("far-field root solves S(nu) = gamma^2 on the decaying branch") {
    const auto& f = fkpp_front();
    const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, kResonanceGrid);
    const ResonanceFunction E(op);
    for (cplx g : {cplx(0.0), cplx(0.05, 0.0), cplx(0.03, 0.04), cplx(0.0, -0.05)}) {
        const cplx nu = E.far_field_root(g);
        // FKPP: S(nu) = nu^2 in the weighted frame
        CHECK(std::abs(nu * nu - g * g) < 1e-14);
        CHECK(std::abs(nu + g) < 1e-12);
    }
}

TEST_CASE("cubic family: the resonance value changes sign between pushed and pulled") {
    const auto& lo = cubic_front(0.2);
    const auto& hi = cubic_front(0.4);
    CHECK(lo.profile.tail_reflected);
    const double elo = resonance_function(build_weighted_operator(lo.spec, lo.pinch, lo.profile, kResonanceGrid), 0.0).real();
    const double ehi = resonance_function(build_weighted_operator(hi.spec, hi.pinch, hi.profile, kResonanceGrid), 0.0).real();
    CHECK(elo < 0.0);
    CHECK(ehi > 0.0);
}

TEST_CASE("eigenvalue scan: fkpp satisfies the point-spectrum hypothesis") {
    const auto& f = fkpp_front();
    const auto rep = scan_front_spectrum(f.spec, f.pinch, f.profile, kScanGrid, 0.05);
    CHECK(rep.verdict);
    CHECK(rep.unstable_point_count == 0);
    CHECK(rep.resonance_computed);
    for (const auto& c : rep.candidates) {
        CHECK(c.lambda.real() >= -0.05);
        if (c.lambda.real() >= 0.0) CHECK(c.classification == EigClass::essential_artifact);
    }
}

TEST_CASE("eigenvalue scan: cubic delta = 0.2 has exactly one unstable eigenvalue") {
    const auto& f = cubic_front(0.2);
    const auto rep = scan_front_spectrum(f.spec, f.pinch, f.profile, kScanGrid, 0.05);
    CHECK_FALSE(rep.verdict);
    CHECK(rep.unstable_point_count == 1);
    int found = 0;
    for (const auto& c : rep.candidates)
        if (c.classification == EigClass::point_spectrum) {
            ++found;
            CHECK(c.lambda.real() > 0.0);
            CHECK(std::abs(c.lambda.imag()) < 1e-10);
            CHECK(c.score > 0.8);
            CHECK(c.enlargement_shift < 1e-4);
        }
    CHECK(found == 1);
}

TEST_CASE("eigenvalue scan: zero operator yields only artifacts and no verdict") {
    const auto& f = fkpp_front();
    const UniformGrid grid{-10.0, 10.0, 60};
    WeightedOperator op = build_weighted_operator(f.spec, f.pinch, f.profile, grid);
    op.L = BandedMatrix<double>(grid.n, 3, 3);
    const auto rep = eigenvalue_scan(op, 0.05, &op);
    CHECK(rep.candidates.size() == 60);
    for (const auto& c : rep.candidates) {
        CHECK(c.lambda == cplx(0.0));
        CHECK(c.score < 0.8);
        CHECK(c.classification == EigClass::essential_artifact);
    }
    CHECK_FALSE(rep.resonance_computed);
    CHECK_FALSE(rep.verdict);
    try {
        (void)ResonanceFunction(op);
        FAIL("expected AdjointKernelNotOneDimensional");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AdjointKernelNotOneDimensional);
    }
}

TEST_CASE("shift-invert path agrees with the dense path") {
    const auto& f = cubic_front(0.2);
    const auto op = build_weighted_operator(f.spec, f.pinch, f.profile, UniformGrid{-40.0, 60.0, 600});
    ScanOptions dense, krylov;
    krylov.dense_limit = 100;
    const auto a = eigenvalue_scan(op, 0.0, nullptr, dense);
    const auto b = eigenvalue_scan(op, 0.0, nullptr, krylov);
    CHECK(b.method != a.method);
    REQUIRE(a.candidates.size() == b.candidates.size());
    for (std::size_t i = 0; i < a.candidates.size(); ++i) {
        CHECK(std::abs(a.candidates[i].lambda - b.candidates[i].lambda) < 1e-8);
        CHECK(a.candidates[i].score == doctest::Approx(b.candidates[i].score).epsilon(1e-6));
    }
}

TEST_CASE("operator construction rejects grids narrower than the stencil") {
    const auto& f = fkpp_front();
    try {
        (void)build_weighted_operator(f.spec, f.pinch, f.profile, UniformGrid{-1.0, 1.0, 6});
        FAIL("expected GridTooCoarse");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GridTooCoarse);
    }
}

TEST_CASE("pushed-pulled transition of the cubic family") {
    TransitionOptions opts;
    opts.tolerance = 1e-3;
    const auto res = pushed_pulled_transition(models::cubic_family(), 0.25, 0.45, opts);
    CHECK(res.delta_crit >= 0.28);
    CHECK(res.delta_crit <= 0.38);
    CHECK(res.delta_crit == doctest::Approx(1.0 / 3.0).epsilon(5e-3));
    CHECK(res.evaluations.size() <= 12);

    try {
        (void)pushed_pulled_transition(models::cubic_family(), 0.4, 0.45, opts);
        FAIL("expected NoSignChange");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoSignChange);
    }
    try {
        (void)pushed_pulled_transition(models::cubic_family(), 0.4, 0.4, opts);
        FAIL("expected NoSignChange");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoSignChange);
    }
}

TEST_CASE("essential spectrum curves") {
    const auto& f = fkpp_front();
    std::vector<double> ks;
    for (int i = -20; i <= 20; ++i) ks.push_back(0.25 * i);
    const auto rows = essential_spectrum_curves(f.spec, f.pinch, ks);
    REQUIRE(rows.size() == ks.size());
    double wake_max = -1e300;
    for (const auto& r : rows) {
        CHECK(std::abs(r.sigma_plus - cplx(-r.k * r.k, 0.0)) < 1e-12);
        wake_max = std::max(wake_max, r.sigma_minus.real());
    }
    CHECK(wake_max == doctest::Approx(f.spec.reaction_prime(f.spec.u_minus)));
    CHECK(essential_spectrum_curves(f.spec, f.pinch, std::span<const double>{}).empty());
}
