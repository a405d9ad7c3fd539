#include "frontlab/dispersion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "frontlab/error.hpp"
#include "frontlab/polynomial.hpp"

namespace frontlab {

namespace {

constexpr double kStepTol = 1e-12;
constexpr double kResidualTol = 1e-10;
constexpr int kMaxNewton = 50;

double rest_slope(const ModelSpec& spec, Side side) {
    return spec.reaction_prime(side == Side::leading_edge ? 0.0 : spec.u_minus);
}

double eval_P(const ModelSpec& spec, double nu, int k = 0) {
    const auto P = spec.symbol();
    return poly::evaluate_derivative<double>(P, nu, k);
}

}  // namespace

cplx dispersion_eval(const ModelSpec& spec, double c, cplx lambda, cplx nu, Side side) {
    const auto P = spec.symbol();
    return poly::evaluate<cplx>(P, nu) + c * nu + rest_slope(spec, side) - lambda;
}

cplx dispersion_dnu(const ModelSpec& spec, double c, cplx nu, int k) {
    const auto P = spec.symbol();
    cplx v = poly::evaluate_derivative<cplx>(P, nu, k);
    if (k == 1) v += c;
    return v;
}

std::vector<double> dispersion_polynomial(const ModelSpec& spec, double c, double lambda, Side side) {
    auto coeffs = spec.symbol();
    coeffs[0] = rest_slope(spec, side) - lambda;
    coeffs[1] += c;
    return coeffs;
}

EnvelopeResult envelope_speed_oracle(const ModelSpec& spec) {
    const double r = spec.reaction_prime(0.0);
    auto speed = [&](double eta) { return (eval_P(spec, -eta) + r) / eta; };
    // c'(eta) eta^2 = -eta P'(-eta) - P(-eta) - r
    auto slope = [&](double eta) { return -eta * eval_P(spec, -eta, 1) - eval_P(spec, -eta) - r; };

    constexpr int samples = 4000;
    const double lo = std::log(1e-3), hi = std::log(1e3);
    auto eta_at = [&](int i) { return std::exp(lo + (hi - lo) * i / (samples - 1)); };
    int bracket = -1;
    for (int i = 1; i + 1 < samples; ++i) {
        const double a = speed(eta_at(i - 1)), b = speed(eta_at(i)), c = speed(eta_at(i + 1));
        if (b <= a && b < c) {
            bracket = i;
            break;
        }
    }
    if (bracket < 0) fail(ErrorKind::NoInteriorMinimum, "c(eta) has no interior minimum on [1e-3, 1e3]");
    double a = eta_at(bracket - 1), b = eta_at(bracket + 1);
    // golden section to localize, then bisection on the sign of c'(eta)
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    for (int it = 0; it < 60; ++it) {
        if (speed(x1) < speed(x2)) {
            b = x2;
            x2 = x1;
            x1 = b - g * (b - a);
        } else {
            a = x1;
            x1 = x2;
            x2 = a + g * (b - a);
        }
    }
    double left = eta_at(bracket - 1), right = eta_at(bracket + 1);
    if (slope(left) < 0.0 && slope(right) > 0.0) {
        for (int it = 0; it < 200 && right - left > 1e-16 * right; ++it) {
            const double mid = 0.5 * (left + right);
            (slope(mid) < 0.0 ? left : right) = mid;
        }
        const double eta = 0.5 * (left + right);
        return {speed(eta), eta};
    }
    const double eta = 0.5 * (a + b);
    return {speed(eta), eta};
}

namespace {

double compute_alpha(const ModelSpec& spec, double c, cplx nu) {
    return 0.5 * dispersion_dnu(spec, c, nu, 2).real();
}

DoubleRoot newton_real(const ModelSpec& spec, double eta, double c) {
    for (int it = 1; it <= kMaxNewton; ++it) {
        const double F1 = eval_P(spec, -eta) - c * eta + spec.reaction_prime(0.0);
        const double F2 = eval_P(spec, -eta, 1) + c;
        const double J11 = -F2, J12 = -eta, J21 = -eval_P(spec, -eta, 2), J22 = 1.0;
        const double det = J11 * J22 - J12 * J21;
        if (!std::isfinite(det) || std::abs(det) < 1e-300) fail(ErrorKind::NoConvergence, "singular double-root Jacobian");
        const double d_eta = (F1 * J22 - J12 * F2) / det;
        const double d_c = (J11 * F2 - J21 * F1) / det;
        eta -= d_eta;
        c -= d_c;
        if (!std::isfinite(eta) || !std::isfinite(c)) fail(ErrorKind::NoConvergence, "double-root Newton diverged");
        if (std::abs(d_eta) + std::abs(d_c) < kStepTol * (1.0 + std::abs(eta) + std::abs(c))) {
            const double r1 = eval_P(spec, -eta) - c * eta + spec.reaction_prime(0.0);
            const double r2 = eval_P(spec, -eta, 1) + c;
            if (std::abs(r1) < kResidualTol && std::abs(r2) < kResidualTol)
                return DoubleRoot{cplx(-eta, 0.0), c, cplx(0.0, 0.0), compute_alpha(spec, c, -eta), it};
        }
    }
    fail(ErrorKind::NoConvergence, "double-root Newton exceeded its iteration budget");
}

DoubleRoot newton_complex(const ModelSpec& spec, cplx nu, double c) {
    double omega = 0.0;
    for (int it = 1; it <= kMaxNewton; ++it) {
        const cplx lam(0.0, omega);
        const cplx d = dispersion_eval(spec, c, lam, nu, Side::leading_edge);
        const cplx d1 = dispersion_dnu(spec, c, nu, 1);
        const cplx d2 = dispersion_dnu(spec, c, nu, 2);
        Eigen::Matrix4d J;
        Eigen::Vector4d F(d.real(), d.imag(), d1.real(), d1.imag());
        const cplx col_nr[2] = {d1, d2}, col_ni[2] = {cplx(0, 1) * d1, cplx(0, 1) * d2}, col_c[2] = {nu, 1.0},
                   col_w[2] = {cplx(0, -1), 0.0};
        for (int r = 0; r < 2; ++r) {
            J(2 * r, 0) = col_nr[r].real();
            J(2 * r + 1, 0) = col_nr[r].imag();
            J(2 * r, 1) = col_ni[r].real();
            J(2 * r + 1, 1) = col_ni[r].imag();
            J(2 * r, 2) = col_c[r].real();
            J(2 * r + 1, 2) = col_c[r].imag();
            J(2 * r, 3) = col_w[r].real();
            J(2 * r + 1, 3) = col_w[r].imag();
        }
        Eigen::Vector4d step = J.fullPivLu().solve(F);
        if (!step.allFinite()) fail(ErrorKind::NoConvergence, "complex double-root Newton diverged");
        nu -= cplx(step(0), step(1));
        c -= step(2);
        omega -= step(3);
        if (step.cwiseAbs().sum() < kStepTol * (1.0 + std::abs(nu) + std::abs(c))) {
            if (std::abs(nu.imag()) > 1e-8 || std::abs(omega) > 1e-8)
                fail(ErrorKind::ComplexDoubleRoot, "double root has Im nu or Im lambda away from zero");
            return newton_real(spec, -nu.real(), c);
        }
    }
    fail(ErrorKind::NoConvergence, "complex double-root Newton exceeded its iteration budget");
}

std::vector<DoubleRootSeed> grid_scan_seeds(const ModelSpec& spec) {
    const double r = spec.reaction_prime(0.0);
    const double c_hi = 10.0 * std::sqrt(r * std::abs(spec.p.size() > 1 ? spec.p[1] : 0.0) + 1.0);
    constexpr int N = 80;
    std::vector<std::vector<double>> score(N, std::vector<double>(N));
    auto eta_at = [](int i) { return 0.05 + (10.0 - 0.05) * i / (N - 1); };
    auto c_at = [&](int j) { return 0.05 + (c_hi - 0.05) * j / (N - 1); };
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double eta = eta_at(i), c = c_at(j);
            score[i][j] = std::abs(eval_P(spec, -eta) - c * eta + r) + std::abs(eval_P(spec, -eta, 1) + c);
        }
    std::vector<std::pair<double, DoubleRootSeed>> minima;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if ((di || dj) && a >= 0 && a < N && b >= 0 && b < N && score[a][b] < score[i][j]) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) minima.push_back({score[i][j], DoubleRootSeed{cplx(-eta_at(i), 0.0), c_at(j)}});
        }
    std::sort(minima.begin(), minima.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<DoubleRootSeed> out;
    for (std::size_t k = 0; k < minima.size() && k < 6; ++k) out.push_back(minima[k].second);
    return out;
}

struct Match {
    bool ok = false;
    std::vector<cplx> ordered;
};

Match match_roots(const std::vector<cplx>& prev, const std::vector<cplx>& next) {
    const std::size_t n = prev.size();
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) gap = std::min(gap, std::abs(prev[i] - prev[j]));
    const double radius = 0.5 * gap;
    Match m;
    m.ordered.resize(n);
    std::vector<bool> used(next.size(), false);
    for (std::size_t i = 0; i < n; ++i) {
        int hit = -1;
        for (std::size_t j = 0; j < next.size(); ++j) {
            if (std::abs(next[j] - prev[i]) < radius) {
                if (hit >= 0 || used[j]) return m;
                hit = static_cast<int>(j);
            }
        }
        if (hit < 0) return m;
        used[static_cast<std::size_t>(hit)] = true;
        m.ordered[i] = next[static_cast<std::size_t>(hit)];
    }
    m.ok = true;
    return m;
}

// Minimum total displacement assignment; used where two roots of the same family collide on the real axis.
Match assign_optimal(const std::vector<cplx>& prev, const std::vector<cplx>& next) {
    std::vector<std::size_t> perm(next.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    double best = std::numeric_limits<double>::infinity();
    Match m;
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < prev.size(); ++i) cost += std::abs(next[perm[i]] - prev[i]);
        if (cost < best) {
            best = cost;
            m.ordered.clear();
            for (std::size_t i = 0; i < prev.size(); ++i) m.ordered.push_back(next[perm[i]]);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    m.ok = true;
    return m;
}

}  // namespace

DoubleRoot solve_double_root(const ModelSpec& spec, DoubleRootSeed seed) {
    if (std::abs(seed.nu.imag()) > 1e-12) return newton_complex(spec, seed.nu, seed.c);
    return newton_real(spec, -seed.nu.real(), seed.c);
}

double default_lambda_max(const ModelSpec& spec) { return 10.0 * (1.0 + spec.max_abs_p()); }

PinchCertificate verify_pinching(const ModelSpec& spec, double c, cplx nu_dr, cplx lambda_dr, double eta_ref,
                                 double lambda_max) {
    require(lambda_max > lambda_dr.real(), "verify_pinching: lambda_max must exceed the double-root location");
    PinchCertificate cert;
    const double lam0 = lambda_dr.real();
    const double span = lambda_max - lam0;
    double offset = 1e-6 * span;
    auto roots_at = [&](double lam) {
        auto rts = poly::roots(dispersion_polynomial(spec, c, lam, Side::leading_edge));
        std::sort(rts.begin(), rts.end(), [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
        return rts;
    };
    std::vector<cplx> current = roots_at(lam0 + offset);
    cert.homotopy_path.push_back(lam0 + offset);
    cert.root_tracks.push_back(current);
    const double growth = 1.25;
    while (offset < span) {
        double step = std::min(offset * (growth - 1.0), span - offset);
        Match m;
        int halvings = 0;
        for (;;) {
            const auto next = roots_at(lam0 + offset + step);
            m = match_roots(current, next);
            if (m.ok) break;
            if (++halvings > 12) {
                // a collision of two roots on the real lambda axis: both share Re nu there, so labels survive
                m = assign_optimal(current, next);
                double jump = 0.0, scale = 1.0;
                for (std::size_t i = 0; i < current.size(); ++i) {
                    jump = std::max(jump, std::abs(m.ordered[i] - current[i]));
                    scale = std::max(scale, std::abs(current[i]));
                }
                if (jump > 1e-2 * scale) fail(ErrorKind::TrackAmbiguity, "root tracks could not be matched along the homotopy");
                ++cert.branch_points;
                break;
            }
            step *= 0.5;
        }
        offset += step;
        current = m.ordered;
        cert.homotopy_path.push_back(lam0 + offset);
        cert.root_tracks.push_back(current);
    }

    const std::size_t ntr = current.size();
    const auto& first = cert.root_tracks.front();
    // the colliding pair: the two starting roots nearest the double root
    std::vector<std::size_t> order(ntr);
    for (std::size_t i = 0; i < ntr; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(first[a] - nu_dr) < std::abs(first[b] - nu_dr); });
    cert.colliding = {static_cast<int>(order[0]), static_cast<int>(order[1])};

    cert.labels.resize(ntr);
    for (std::size_t i = 0; i < ntr; ++i) {
        cert.labels[i] = current[i].real() < -eta_ref ? -1 : 1;
        (cert.labels[i] < 0 ? cert.morse_counts[0] : cert.morse_counts[1])++;
    }
    cert.counts_ok = cert.morse_counts[0] == spec.order_half && cert.morse_counts[1] == spec.order_half;
    cert.opposite_labels = cert.labels[order[0]] != cert.labels[order[1]];
    cert.no_crossings = true;
    for (std::size_t i = 0; i < ntr; ++i) {
        const int side0 = first[i].real() < -eta_ref ? -1 : 1;
        for (const auto& sample : cert.root_tracks)
            if ((sample[i].real() < -eta_ref ? -1 : 1) != side0) cert.no_crossings = false;
    }
    return cert;
}

PinchCertificate verify_pinching(const ModelSpec& spec, const PinchResult& result, double lambda_max) {
    return verify_pinching(spec, result.c_star, cplx(-result.eta_star, 0.0), result.lambda_dr, result.eta_star, lambda_max);
}

PinchResult find_double_root(const ModelSpec& spec, std::optional<DoubleRootSeed> seed) {
    spec.validate();
    std::vector<DoubleRootSeed> seeds;
    if (seed) seeds.push_back(*seed);
    try {
        const auto env = envelope_speed_oracle(spec);
        seeds.push_back({cplx(-env.eta_star, 0.0), env.c_star});
    } catch (const Error&) {
        const auto scan = grid_scan_seeds(spec);
        seeds.insert(seeds.end(), scan.begin(), scan.end());
    }

    std::optional<PinchResult> best;
    std::optional<Error> last_error;
    for (const auto& s : seeds) {
        try {
            const DoubleRoot dr = solve_double_root(spec, s);
            if (!(dr.nu.real() < 0.0)) continue;
            if (!(dr.alpha > 0.0)) {
                last_error = Error(ErrorKind::NegativeAlpha, "double root has non-positive alpha");
                continue;
            }
            PinchResult res;
            res.c_star = dr.c;
            res.eta_star = -dr.nu.real();
            res.alpha = dr.alpha;
            res.lambda_dr = dr.lambda;
            res.residual_d = std::abs(dispersion_eval(spec, dr.c, dr.lambda, dr.nu, Side::leading_edge));
            res.residual_dnu = std::abs(dispersion_dnu(spec, dr.c, dr.nu, 1));
            res.certificate = verify_pinching(spec, res, default_lambda_max(spec));
            if (!res.certificate.pinched()) {
                last_error = Error(ErrorKind::NotPinched, "double root is not pinched");
                continue;
            }
            const bool better = !best || res.lambda_dr.real() > best->lambda_dr.real() + 1e-12 ||
                                (std::abs(res.lambda_dr.real() - best->lambda_dr.real()) <= 1e-12 && res.eta_star < best->eta_star - 1e-12);
            if (better) best = res;
        } catch (const Error& e) {
            last_error = e;
        }
    }
    if (!best) {
        if (last_error) throw *last_error;
        fail(ErrorKind::NoConvergence, "no double root found from any seed");
    }
    return *best;
}

SpectrumReport check_hypotheses(const ModelSpec& spec, const PinchResult& pinch, double k_max, int n_k) {
    require(k_max > 0.0 && n_k >= 2, "check_hypotheses: need k_max > 0 and at least two samples");
    SpectrumReport rep;
    const double eta = pinch.eta_star, c = pinch.c_star, alpha = pinch.alpha;
    const double k_sep = eta / 4.0;
    rep.hyp1_ii_ok = rep.hyp1_iii_ok = rep.hyp2_ok = true;
    rep.hyp1_ii_worst = rep.hyp1_iii_worst = rep.hyp2_worst = {0.0, -std::numeric_limits<double>::infinity()};
    for (int i = 0; i < n_k; ++i) {
        const double k = -k_max + 2.0 * k_max * i / (n_k - 1);
        rep.k_grid.push_back(k);
        const cplx lp = dispersion_eval(spec, c, 0.0, cplx(-eta, k), Side::leading_edge);
        const cplx lm = dispersion_eval(spec, c, 0.0, cplx(0.0, k), Side::wake);
        rep.sigma_plus_weighted.push_back(lp);
        rep.sigma_minus.push_back(lm);

        // quadratic touching: Re lambda <= -alpha k^2/2 near k = 0, <= -margin away from it
        const double bound = std::abs(k) >= k_sep ? -kSpectralMargin : -0.5 * alpha * k * k;
        const double excess = lp.real() - bound;
        if (excess > rep.hyp1_ii_worst.value) rep.hyp1_ii_worst = {k, excess};
        if (k != 0.0 && excess > 0.0) rep.hyp1_ii_ok = false;

        const double allowed = std::abs(k) < 1e-12 ? kSpectralMargin : 0.0;
        if (lp.real() > rep.hyp1_iii_worst.value) rep.hyp1_iii_worst = {k, lp.real()};
        if (lp.real() > allowed) rep.hyp1_iii_ok = false;

        if (lm.real() > rep.hyp2_worst.value) rep.hyp2_worst = {k, lm.real()};
        if (lm.real() > -kSpectralMargin) rep.hyp2_ok = false;
    }
    return rep;
}

std::vector<SweepRow> continuation_sweep(const ModelFamily& family, std::span<const double> delta_grid, SweepMode mode,
                                         int jobs) {
    auto solve_one = [&](double delta, std::optional<DoubleRootSeed> seed) {
        SweepRow row;
        row.delta = delta;
        try {
            const ModelSpec spec = family(delta);
            const PinchResult pr = find_double_root(spec, seed);
            row.c_star = pr.c_star;
            row.eta_star = pr.eta_star;
            row.alpha = pr.alpha;
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        return row;
    };
    std::vector<SweepRow> rows(delta_grid.size());
    if (mode == SweepMode::sequential_seeded) {
        std::optional<DoubleRootSeed> seed;
        for (std::size_t i = 0; i < delta_grid.size(); ++i) {
            rows[i] = solve_one(delta_grid[i], seed);
            if (rows[i].ok) seed = DoubleRootSeed{cplx(-rows[i].eta_star, 0.0), rows[i].c_star};
        }
        return rows;
    }
    const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
    for (std::size_t start = 0; start < delta_grid.size(); start += width) {
        std::vector<std::future<SweepRow>> batch;
        for (std::size_t i = start; i < std::min(delta_grid.size(), start + width); ++i)
            batch.push_back(std::async(std::launch::async, solve_one, delta_grid[i], std::nullopt));
        for (std::size_t i = 0; i < batch.size(); ++i) rows[start + i] = batch[i].get();
    }
    return rows;
}

}  // namespace frontlab
