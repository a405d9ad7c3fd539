#include "frontlab/spectrum.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "frontlab/error.hpp"
#include "frontlab/polynomial.hpp"
#include "frontlab/stencil.hpp"

namespace frontlab {

namespace {

std::vector<double> shifted_symbol(const ModelSpec& spec, double c) {
    auto s = spec.symbol();
    s[1] += c;
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

void scale(std::span<double> v, double s) {
    for (double& x : v) x *= s;
}

std::vector<double> random_unit(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = dist(rng);
    scale(v, 1.0 / norm2(v));
    return v;
}

std::vector<double> transpose_solve(const BandedLU<double>& lu, std::vector<double> b) {
    lu.solve_transpose_in_place(b);
    return b;
}

Eigen::MatrixXd to_dense(const BandedMatrix<double>& a) {
    const int n = a.size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - a.lower()); j <= std::min(n - 1, i + a.upper()); ++j) d(i, j) = a(i, j);
    return d;
}

struct EigenPair {
    cplx lambda;
    Eigen::VectorXcd vector;
};

double middle_mass(const Eigen::VectorXcd& v) {
    const Eigen::Index n = v.size();
    const double total = v.squaredNorm();
    if (total == 0.0) return 0.0;
    return v.segment(n / 4, n / 2).squaredNorm() / total;
}

std::vector<EigenPair> dense_pairs(const BandedMatrix<double>& L, bool vectors) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_dense(L), vectors);
    if (es.info() != Eigen::Success) fail(ErrorKind::EigensolverFailure, "dense eigensolver did not converge");
    std::vector<EigenPair> out;
    const auto& values = es.eigenvalues();
    for (Eigen::Index k = 0; k < values.size(); ++k)
        out.push_back({values(k), vectors ? Eigen::VectorXcd(es.eigenvectors().col(k)) : Eigen::VectorXcd()});
    return out;
}

/// Ritz pairs of (L - sigma)^{-1} mapped back to L, kept when their true residual is small.
std::vector<EigenPair> shift_invert_pairs(const BandedMatrix<double>& L, double sigma, int krylov_dim) {
    const int n = L.size();
    BandedLU<double> lu;
    double s = sigma;
    for (int attempt = 0;; ++attempt) {
        try {
            lu.factor(L.shifted(-s));
            break;
        } catch (const Error&) {
            if (attempt > 4) throw;
            s += 1e-7 * (1.0 + std::abs(s));
        }
    }
    const int K = std::min(krylov_dim, n - 1);
    Eigen::MatrixXd V(n, K + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(K + 1, K);
    auto v0 = random_unit(n, 0x5eed + static_cast<unsigned>(std::abs(s) * 1e3));
    V.col(0) = Eigen::Map<Eigen::VectorXd>(v0.data(), n);
    int used = K;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < K; ++j) {
        Eigen::Map<Eigen::VectorXd> wm(w.data(), n);
        wm = V.col(j);
        lu.solve_in_place(w);
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= j; ++i) {
                const double h = V.col(i).dot(wm);
                H(i, j) += h;
                wm -= h * V.col(i);
            }
        H(j + 1, j) = wm.norm();
        if (H(j + 1, j) < 1e-14) {
            used = j + 1;
            break;
        }
        V.col(j + 1) = wm / H(j + 1, j);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(used, used));
    if (es.info() != Eigen::Success) fail(ErrorKind::EigensolverFailure, "Arnoldi Hessenberg eigensolve failed");
    std::vector<EigenPair> out;
    const double lnorm = std::max(1.0, to_dense(L).cwiseAbs().rowwise().sum().maxCoeff());
    for (int k = 0; k < used; ++k) {
        const cplx theta = es.eigenvalues()(k);
        if (std::abs(theta) < 1e-14) continue;
        const cplx lambda = s + 1.0 / theta;
        Eigen::VectorXcd y = V.leftCols(used).cast<cplx>() * es.eigenvectors().col(k);
        y.normalize();
        std::vector<double> re(static_cast<std::size_t>(n)), im(re.size());
        for (int i = 0; i < n; ++i) {
            re[static_cast<std::size_t>(i)] = y(i).real();
            im[static_cast<std::size_t>(i)] = y(i).imag();
        }
        const auto Lre = L.multiply(re), Lim = L.multiply(im);
        double res = 0.0;
        for (int i = 0; i < n; ++i) res += std::norm(cplx(Lre[static_cast<std::size_t>(i)], Lim[static_cast<std::size_t>(i)]) - lambda * y(i));
        if (std::sqrt(res) <= 1e-8 * lnorm) out.push_back({lambda, y});
    }
    return out;
}

std::vector<EigenPair> eigenpairs(const BandedMatrix<double>& L, double margin, const ScanOptions& options, std::string& method,
                                  bool vectors = true) {
    if (L.size() <= options.dense_limit) {
        method = "dense";
        return dense_pairs(L, vectors);
    }
    method = "shift-invert Arnoldi";
    std::vector<EigenPair> all;
    const int shifts = std::max(1, options.shift_count);
    for (int k = 0; k < shifts; ++k) {
        const double sigma = shifts == 1 ? 0.0 : -margin + (options.upper + margin) * k / (shifts - 1);
        for (auto& p : shift_invert_pairs(L, sigma, options.krylov_dim)) {
            const bool seen = std::any_of(all.begin(), all.end(),
                                          [&](const EigenPair& q) { return std::abs(q.lambda - p.lambda) < 1e-7 * (1.0 + std::abs(p.lambda)); });
            if (!seen) all.push_back(std::move(p));
        }
    }
    return all;
}

}  // namespace

WeightedOperator build_weighted_operator(const ModelSpec& spec, const PinchResult& pinch, const FrontProfile& profile,
                                         const UniformGrid& grid) {
    spec.validate();
    const int m = spec.order_half;
    const int deg = 2 * m;
    const int half = StencilSet::half_width(deg);
    if (grid.n < 4 * half + 4) fail(ErrorKind::GridTooCoarse, "build_weighted_operator: grid has fewer points than the stencils need");
    const int n = grid.n;
    const double h = grid.h();
    const StencilSet stencils(h, deg);
    const Weights weights(pinch.eta_star, deg);
    const auto symbol = shifted_symbol(spec, pinch.c_star);

    WeightedOperator op{grid, BandedMatrix<double>(n, half, half), spec, pinch, {}, {}, 0.0, 0.0};
    op.q.resize(static_cast<std::size_t>(n));
    op.coefficients.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        const double q = profile.eval(x);
        op.q[static_cast<std::size_t>(i)] = q;
        auto b = weights.conjugated_symbol(symbol, x);
        b[0] += spec.reaction_prime(q);
        op.L.add(i, i, b[0]);
        for (int k = 1; k <= deg; ++k) {
            const Stencil& st = stencils.centered(k);
            for (std::size_t s = 0; s < st.w.size(); ++s) {
                const int j = st.first(i) + static_cast<int>(s);
                if (j >= 0 && j < n) op.L.add(i, j, b[static_cast<std::size_t>(k)] * st.w[s]);
            }
        }
        op.coefficients[static_cast<std::size_t>(i)] = std::move(b);
    }

    const double half_state = 0.5 * spec.u_minus;
    op.interface_x = grid.x(n / 2);
    for (int i = 0; i + 1 < n; ++i) {
        const double a = op.q[static_cast<std::size_t>(i)] - half_state, b = op.q[static_cast<std::size_t>(i + 1)] - half_state;
        if (a >= 0.0 && b < 0.0) {
            op.interface_x = grid.x(i) + h * a / (a - b);
            break;
        }
    }
    return op;
}

WeightedOperator row_scaled(const WeightedOperator& op, double eta) {
    require(eta >= 0.0, "row_scaled: eta must be non-negative");
    WeightedOperator out = op;
    const Weights w(eta, 2 * op.spec.order_half);
    const int n = op.grid.n;
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = eta * w.exponent(op.grid.x(i));
    BandedMatrix<double> M(n, op.L.lower(), op.L.upper());
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - op.L.lower()); j <= std::min(n - 1, i + op.L.upper()); ++j)
            M.add(i, j, op.L(i, j) * std::exp(g[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(j)]));
    out.L = std::move(M);
    out.row_scaling = op.row_scaling + eta;
    return out;
}

std::vector<cplx> dense_eigenvalues(const WeightedOperator& op) {
    std::vector<cplx> out;
    for (const auto& p : dense_pairs(op.L, false)) out.push_back(p.lambda);
    return out;
}

EigReport eigenvalue_scan(const WeightedOperator& op, double margin, const WeightedOperator* enlarged, const ScanOptions& options) {
    require(margin >= 0.0, "eigenvalue_scan: margin must be non-negative");
    EigReport rep;
    auto pairs = eigenpairs(op.L, margin, options, rep.method);

    std::vector<cplx> reference;
    if (enlarged != nullptr) {
        std::string unused;
        for (const auto& p : eigenpairs(enlarged->L, margin + 0.1, options, unused, false)) reference.push_back(p.lambda);
    }

    std::vector<EigenPair> kept;
    for (auto& p : pairs)
        if (p.lambda.real() >= -margin) kept.push_back(std::move(p));
    std::sort(kept.begin(), kept.end(), [](const EigenPair& a, const EigenPair& b) { return a.lambda.real() > b.lambda.real(); });

    // Eigenvectors of a repeated eigenvalue are arbitrary inside their invariant subspace, so a cluster
    // shares the mean localization of its members.
    std::vector<double> score(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        double sum = 0.0;
        int count = 0;
        for (const auto& other : kept)
            if (std::abs(other.lambda - kept[i].lambda) <= 1e-8 * (1.0 + std::abs(kept[i].lambda))) {
                sum += middle_mass(other.vector);
                ++count;
            }
        score[i] = sum / count;
    }

    for (std::size_t i = 0; i < kept.size(); ++i) {
        EigCandidate c;
        c.lambda = kept[i].lambda;
        c.score = score[i];
        bool stable_under_enlargement = true;
        if (enlarged != nullptr) {
            double best = std::numeric_limits<double>::infinity();
            for (const cplx r : reference) best = std::min(best, std::abs(r - c.lambda));
            c.enlargement_shift = best;
            stable_under_enlargement = best < options.enlargement_tolerance;
        }
        c.classification = c.score >= options.localization_threshold && stable_under_enlargement ? EigClass::point_spectrum
                                                                                                  : EigClass::essential_artifact;
        if (c.classification == EigClass::point_spectrum && c.lambda.real() >= 0.0) ++rep.unstable_point_count;
        rep.candidates.push_back(c);
    }

    try {
        const ResonanceFunction E(op);
        rep.resonance_value = E(cplx(0.0, 0.0));
        rep.resonance_computed = true;
        rep.sigma_min = E.sigma_min();
        rep.sigma_2 = E.sigma_2();
        if (E.sigma_min() >= 1e-6) rep.note = "adjoint kernel resolved only to sigma_min = " + std::to_string(E.sigma_min());
    } catch (const Error& e) {
        rep.note = std::string("resonance not computed: ") + e.what();
    }
    rep.verdict = rep.unstable_point_count == 0 && rep.resonance_computed && std::abs(rep.resonance_value) > kResonanceTolerance;
    return rep;
}

EigReport scan_front_spectrum(const ModelSpec& spec, const PinchResult& pinch, const FrontProfile& profile, const UniformGrid& grid,
                              double margin, const ScanOptions& options) {
    const auto op = build_weighted_operator(spec, pinch, profile, grid);
    const auto big = build_weighted_operator(spec, pinch, profile, grid.enlarged(1.2));
    return eigenvalue_scan(op, margin, &big, options);
}

ResonanceFunction::ResonanceFunction(const WeightedOperator& op, double scaling_eta) : op_(op) {
    const int n = op.grid.n;
    // e^{eta x_right} beyond ~e^{20} ruins the conditioning of the scaled matrix
    eta_ = scaling_eta >= 0.0 ? scaling_eta : std::min({0.2, op.pinch.eta_star / 4.0, 20.0 / std::max(op.grid.x_right, 1.0)});
    const Weights w(eta_, 2 * op.spec.order_half);
    scale_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) scale_[static_cast<std::size_t>(i)] = std::exp(eta_ * w.exponent(op.grid.x(i)));
    M_ = row_scaled(op, eta_).L;

    far_symbol_ = poly::taylor_shift(shifted_symbol(op.spec, op.pinch.c_star), -op.pinch.eta_star);
    far_symbol_[0] += op.spec.reaction_prime(0.0);

    interface_index_ = std::clamp(static_cast<int>(std::lround((op.interface_x - op.grid.x_left) / op.grid.h())), 0, n - 1);

    double norm_inf = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = std::max(0, i - M_.lower()); j <= std::min(n - 1, i + M_.upper()); ++j) row += std::abs(M_(i, j));
        norm_inf = std::max(norm_inf, row);
    }
    BandedLU<double> lu;
    try {
        lu.factor(M_);
    } catch (const Error&) {
        lu.factor(M_.shifted(1e-12 * std::max(1.0, norm_inf)));
    }

    // Inverse iteration on (M M^T)^{-1}: left singular vector of the smallest singular value.
    auto u = random_unit(n, 17);
    std::vector<double> y;
    double sigma = 0.0;
    for (int it = 0; it < 200; ++it) {
        y = lu.solve(u);
        auto z = transpose_solve(lu, y);
        const double ny = norm2(y);
        const double next = 1.0 / ny;
        scale(z, 1.0 / norm2(z));
        double diff = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) diff = std::max(diff, std::abs(z[i] - u[i]));
        u = std::move(z);
        const bool converged = it > 1 && std::abs(next - sigma) <= 1e-12 * std::max(next, 1e-300) && diff < 1e-10;
        sigma = next;
        if (converged) break;
    }
    y = lu.solve(u);
    sigma_min_ = 1.0 / norm2(y);
    right_ = y;
    scale(right_, 1.0 / norm2(right_));

    auto v = random_unit(n, 29);
    auto deflate = [&](std::vector<double>& x) {
        const double d = std::inner_product(x.begin(), x.end(), u.begin(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= d * u[i];
        scale(x, 1.0 / norm2(x));
    };
    deflate(v);
    double sigma2 = 0.0;
    for (int it = 0; it < 100; ++it) {
        auto yy = lu.solve(v);
        const double next = 1.0 / norm2(yy);
        auto z = transpose_solve(lu, yy);
        deflate(z);
        v = std::move(z);
        const bool converged = it > 3 && std::abs(next - sigma2) <= 1e-8 * next;
        sigma2 = next;
        if (converged) break;
    }
    sigma_2_ = sigma2;
    if (sigma_2_ < 1e-6)
        fail(ErrorKind::AdjointKernelNotOneDimensional,
             "two singular values below 1e-6 (" + std::to_string(sigma_min_) + ", " + std::to_string(sigma_2_) + ")");

    // phi = D phi_tilde is the adjoint kernel of the unscaled operator; pin phi = -1 at the interface
    // (the sign of e^{c x} q'), which makes E(0) carry the sign of the tail coefficient b.
    const double pin = u[static_cast<std::size_t>(interface_index_)] * scale_[static_cast<std::size_t>(interface_index_)];
    if (pin == 0.0) fail(ErrorKind::AdjointKernelNotOneDimensional, "adjoint kernel vanishes at the interface");
    phi_ = u;
    scale(phi_, -1.0 / pin);
}

cplx ResonanceFunction::far_field_root(cplx gamma) const {
    const double alpha = op_.pinch.alpha;
    require(alpha > 0.0, "far_field_root: alpha must be positive");
    cplx nu = -gamma / std::sqrt(alpha);
    const cplx target = gamma * gamma;
    const auto ds = poly::derivative(far_symbol_);
    for (int it = 0; it < 60; ++it) {
        const cplx F = poly::evaluate<cplx>(far_symbol_, nu) - target;
        if (std::abs(F) <= 1e-15 * (1.0 + std::abs(target))) break;
        const cplx dF = poly::evaluate<cplx>(ds, nu);
        if (dF == cplx(0.0)) break;
        nu -= F / dF;
    }
    return nu;
}

cplx ResonanceFunction::operator()(cplx gamma) const {
    const int n = op_.grid.n;
    const int deg = 2 * op_.spec.order_half;
    const double h = op_.grid.h();
    const cplx g2 = gamma * gamma;
    const cplx nu = far_field_root(gamma);
    const Smoothstep cutoff(2.0, 3.0, deg);
    const StencilSet stencils(h, deg);
    const int half = StencilSet::half_width(deg);
    const double fp0 = op_.spec.reaction_prime(0.0);
    const Weights w(eta_, deg);

    auto chi = [&](double x) { return cutoff.value(x) * std::exp(nu * x); };

    // r = D (L - gamma^2) chi_+ e^{nu x}; rows whose stencil sits where chi_+ = 1 use the exact symbol
    // identity S(nu) = gamma^2, leaving only the variable-coefficient part f'(q*) - f'(0).
    Eigen::VectorXcd rhs(n + 1);
    for (int i = 0; i < n; ++i) {
        const double x = op_.grid.x(i);
        cplx r = 0.0;
        if (x - half * h >= 3.0) {
            const double dq = op_.spec.reaction_prime(op_.q[static_cast<std::size_t>(i)]) - fp0;
            r = dq * std::exp(eta_ * w.exponent(x) + nu * x);
        } else if (x + half * h > 2.0) {
            const auto& b = op_.coefficients[static_cast<std::size_t>(i)];
            r = (b[0] - g2) * chi(x);
            for (int k = 1; k <= deg; ++k) {
                const Stencil& st = stencils.centered(k);
                cplx acc = 0.0;
                for (std::size_t s = 0; s < st.w.size(); ++s) acc += st.w[s] * chi(x + (st.offset + static_cast<int>(s)) * h);
                r += b[static_cast<std::size_t>(k)] * acc;
            }
            r *= scale_[static_cast<std::size_t>(i)];
        }
        rhs(i) = -r;
    }
    rhs(n) = 0.0;

    using Triplet = Eigen::Triplet<cplx>;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(n) * (2 * half + 3));
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - M_.lower()); j <= std::min(n - 1, i + M_.upper()); ++j) {
            cplx v = M_(i, j);
            if (i == j) v -= g2;
            if (v != cplx(0.0)) trip.emplace_back(i, j, v);
        }
        trip.emplace_back(i, n, phi_[static_cast<std::size_t>(i)]);
        trip.emplace_back(n, i, right_[static_cast<std::size_t>(i)]);
    }
    Eigen::SparseMatrix<cplx> B(n + 1, n + 1);
    B.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> solver;
    solver.compute(B);
    if (solver.info() != Eigen::Success) fail(ErrorKind::BorderedSingular, "bordered resonance system is singular");
    const Eigen::VectorXcd sol = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !sol.allFinite()) fail(ErrorKind::BorderedSingular, "bordered resonance solve failed");

    // (M - gamma^2) w + r = -s phi_tilde; pairing with phi_tilde in the h-weighted product gives E = -s |phi_tilde|^2.
    double phi_norm = 0.0;
    for (double p : phi_) phi_norm += p * p;
    return -sol(n) * phi_norm * h;
}

cplx resonance_function(const WeightedOperator& op, cplx gamma) { return ResonanceFunction(op)(gamma); }

double cauchy_reconstruction_error(const ResonanceFunction& E, cplx center, double radius, int points) {
    require(radius > 0.0 && points >= 3, "cauchy_reconstruction_error: need radius > 0 and at least 3 points");
    cplx mean = 0.0;
    for (int k = 0; k < points; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / points;
        mean += E(center + radius * std::polar(1.0, theta));
    }
    mean /= static_cast<double>(points);
    return std::abs(mean - E(center));
}

double resonance_at(const ModelFamily& family, double delta, const TransitionOptions& options) {
    const auto spec = family(delta);
    const auto pinch = find_double_root(spec);
    const auto profile = solve_front(spec, pinch, options.front_left, options.front_right, options.front_n);
    const auto op = build_weighted_operator(spec, pinch, profile, options.spectral_grid);
    return ResonanceFunction(op)(cplx(0.0, 0.0)).real();
}

TransitionResult pushed_pulled_transition(const ModelFamily& family, double lo, double hi, const TransitionOptions& options) {
    require(lo <= hi, "pushed_pulled_transition: bracket must satisfy lo <= hi");
    TransitionResult res;
    auto eval = [&](double d) {
        const double e = resonance_at(family, d, options);
        res.evaluations.emplace_back(d, e);
        return e;
    };
    double flo = eval(lo);
    if (lo == hi) {
        if (std::abs(flo) < options.zero_tolerance) {
            res.delta_crit = lo;
            return res;
        }
        fail(ErrorKind::NoSignChange, "degenerate bracket and E(0) = " + std::to_string(flo) + " is not zero");
    }
    const double fhi = eval(hi);
    if (std::signbit(flo) == std::signbit(fhi)) fail(ErrorKind::NoSignChange, "E(0, delta) has the same sign at both bracket ends");
    for (int it = 0; it < options.max_iterations && hi - lo > options.tolerance; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval(mid);
        if (std::abs(fm) < options.zero_tolerance) {
            lo = hi = mid;
            break;
        }
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    res.delta_crit = 0.5 * (lo + hi);
    return res;
}

std::vector<SpectrumCurveRow> essential_spectrum_curves(const ModelSpec& spec, const PinchResult& pinch, std::span<const double> k_grid) {
    std::vector<SpectrumCurveRow> rows;
    rows.reserve(k_grid.size());
    for (const double k : k_grid)
        rows.push_back({k, dispersion_eval(spec, pinch.c_star, 0.0, cplx(-pinch.eta_star, k), Side::leading_edge),
                        dispersion_eval(spec, pinch.c_star, 0.0, cplx(0.0, k), Side::wake)});
    return rows;
}

}  // namespace frontlab
