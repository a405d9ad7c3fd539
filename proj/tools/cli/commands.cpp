#include "cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "frontlab/approx.hpp"
#include "frontlab/dispersion.hpp"
#include "frontlab/error.hpp"
#include "frontlab/front.hpp"
#include "frontlab/simulator.hpp"
#include "frontlab/spectrum.hpp"

#ifndef FRONTLAB_VERSION
#define FRONTLAB_VERSION "0.0.0"
#endif

namespace frontlab::cli {

namespace {

using json = nlohmann::ordered_json;

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

/// Runs body(i) for i in [0, count) on up to `jobs` threads; results must be written by index.
template <class F>
void parallel_for(int count, int jobs, F&& body) {
    const int workers = std::max(1, std::min(jobs, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) body(i);
        });
}

void check_domain(const std::string& section, double left, double right, int n) {
    if (!(right > left)) throw ConfigError("[" + section + "] x_right must exceed x_left");
    if (n < 16) throw ConfigError("[" + section + "] n must be at least 16");
}

FrontProfile front_from_config(const Config& c, const ModelSpec& spec, const PinchResult& pinch) {
    const double left = c.get_double("front", "x_left", -40.0);
    const double right = c.get_double("front", "x_right", 60.0);
    const int n = c.get_int("front", "n", 4000);
    check_domain("front", left, right, n);
    FrontOptions fo;
    fo.phase_fraction = c.get_double("front", "phase_fraction", 0.5);
    return solve_front(spec, pinch, left, right, n, fo);
}

json pinch_json(const PinchResult& p) {
    return json{{"c_star", p.c_star},
                {"eta_star", p.eta_star},
                {"alpha", p.alpha},
                {"lambda_dr", complex_json(p.lambda_dr)},
                {"residual_d", p.residual_d},
                {"residual_dnu", p.residual_dnu},
                {"morse_counts", {p.certificate.morse_counts[0], p.certificate.morse_counts[1]}},
                {"pinched", p.certificate.pinched()}};
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path);
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << "\n";
    char buf[32];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

}  // namespace

Outcome cmd_speed(const Config& c, const RunOptions& options) {
    Outcome o;
    const ModelSpec spec = model_from_config(c);
    spec.validate();
    const PinchResult pinch = find_double_root(spec);
    const double k_max = c.get_double("dispersion", "k_max", 10.0);
    const int n_k = c.get_int("dispersion", "n_k", 2001);
    if (!(k_max > 0.0) || n_k < 3) throw ConfigError("[dispersion] need k_max > 0 and n_k >= 3");
    const SpectrumReport report = check_hypotheses(spec, pinch, k_max, n_k);

    o.result["model"] = spec.describe();
    o.result["pinch"] = pinch_json(pinch);
    o.result["hypotheses"] = json{{"hyp1_ii", report.hyp1_ii_ok},
                                  {"hyp1_iii", report.hyp1_iii_ok},
                                  {"hyp2", report.hyp2_ok},
                                  {"hyp1_ii_worst", {{"k", report.hyp1_ii_worst.k}, {"value", report.hyp1_ii_worst.value}}},
                                  {"hyp1_iii_worst", {{"k", report.hyp1_iii_worst.k}, {"value", report.hyp1_iii_worst.value}}},
                                  {"hyp2_worst", {{"k", report.hyp2_worst.k}, {"value", report.hyp2_worst.value}}}};
    o.checks.emplace_back("pinched", pinch.certificate.pinched());
    o.checks.emplace_back("hyp1_ii", report.hyp1_ii_ok);
    o.checks.emplace_back("hyp1_iii", report.hyp1_iii_ok);
    o.checks.emplace_back("hyp2", report.hyp2_ok);

    try {
        const EnvelopeResult env = envelope_speed_oracle(spec);
        const bool agree = std::abs(env.c_star - pinch.c_star) < 1e-8 && std::abs(env.eta_star - pinch.eta_star) < 1e-8;
        o.result["oracle"] = json{{"c_star", env.c_star}, {"eta_star", env.eta_star}, {"agrees", agree}};
        o.checks.emplace_back("oracle_agreement", agree);
    } catch (const Error& e) {
        o.result["oracle"] = json{{"unavailable", e.what()}};
    }

    CsvTable curves{"spectrum_curves.csv", {"k", "sigma_plus_re", "sigma_plus_im", "sigma_minus_re", "sigma_minus_im"}, {}};
    for (std::size_t i = 0; i < report.k_grid.size(); ++i)
        curves.rows.push_back({report.k_grid[i], report.sigma_plus_weighted[i].real(), report.sigma_plus_weighted[i].imag(),
                               report.sigma_minus[i].real(), report.sigma_minus[i].imag()});
    o.tables.push_back(std::move(curves));

    CsvTable tracks{"root_tracks.csv", {"lambda", "track", "re", "im"}, {}};
    const auto& cert = pinch.certificate;
    for (std::size_t s = 0; s < cert.homotopy_path.size(); ++s)
        for (std::size_t k = 0; k < cert.root_tracks[s].size(); ++k)
            tracks.rows.push_back({cert.homotopy_path[s], static_cast<double>(k), cert.root_tracks[s][k].real(), cert.root_tracks[s][k].imag()});
    o.tables.push_back(std::move(tracks));

    const std::string family = c.get_string("dispersion", "sweep_family", "");
    if (!family.empty()) {
        const auto deltas = c.get_list("dispersion", "sweep_deltas");
        if (deltas.empty()) throw ConfigError("[dispersion] sweep_family needs sweep_deltas");
        const auto mode = options.jobs > 1 ? SweepMode::parallel_cold_start : SweepMode::sequential_seeded;
        const auto rows = continuation_sweep(family_from_name(family), deltas, mode, options.jobs);
        CsvTable sweep{"sweep.csv", {"delta", "c_star", "eta_star", "alpha", "ok"}, {}};
        for (const auto& r : rows) sweep.rows.push_back({r.delta, r.c_star, r.eta_star, r.alpha, r.ok ? 1.0 : 0.0});
        o.tables.push_back(std::move(sweep));
        o.result["sweep_failures"] = static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok; }));
    }
    return o;
}

Outcome cmd_front(const Config& c, const RunOptions&) {
    Outcome o;
    const ModelSpec spec = model_from_config(c);
    spec.validate();
    const PinchResult pinch = find_double_root(spec);
    o.result["model"] = spec.describe();
    o.result["pinch"] = pinch_json(pinch);

    if (c.get_string("front", "fixture", "") == "constant") {
        const double left = c.get_double("front", "x_left", -40.0), right = c.get_double("front", "x_right", 60.0);
        const int n = c.get_int("front", "n", 4000);
        check_domain("front", left, right, n);
        const UniformGrid grid{left, right, n};
        const std::vector<double> q(static_cast<std::size_t>(n), spec.u_minus);
        const double r = traveling_wave_residual_norm(spec, pinch.c_star, grid, q);
        o.result["fixture"] = "constant";
        o.result["residual_norm"] = r;
        o.checks.emplace_back("residual", r == 0.0);
        return o;
    }

    const FrontProfile front = front_from_config(c, spec, pinch);
    o.result["front"] = json{{"a", front.a_coeff},
                             {"b", front.b_coeff},
                             {"b_raw", front.b_raw},
                             {"shift", front.shift},
                             {"eta_fit", front.eta_fit},
                             {"eta0_fit", front.eta0_fit},
                             {"residual_norm", front.residual_norm},
                             {"tail_reflected", front.tail_reflected},
                             {"newton_iterations", front.newton_iterations}};
    o.checks.emplace_back("residual", front.residual_norm < 1e-8);
    o.checks.emplace_back("eta_fit", std::abs(front.eta_fit - pinch.eta_star) < 1e-3);

    if (c.get_bool("front", "refinement", false)) {
        const auto study = grid_refinement_order(spec, pinch, front.grid.x_left, front.grid.x_right, front.grid.n);
        o.result["refinement"] = json{{"sizes", study.sizes}, {"differences", study.differences}, {"order", study.order}};
        o.checks.emplace_back("refinement_order", study.order >= 3.5);
    }

    CsvTable profile{"front.csv", {"x", "q"}, {}};
    for (int i = 0; i < front.grid.n; ++i) profile.rows.push_back({front.grid.x(i), front.q[static_cast<std::size_t>(i)]});
    o.tables.push_back(std::move(profile));
    return o;
}

Outcome cmd_spectrum(const Config& c, const RunOptions& options) {
    Outcome o;
    const ModelSpec spec = model_from_config(c);
    spec.validate();
    const PinchResult pinch = find_double_root(spec);
    const FrontProfile front = front_from_config(c, spec, pinch);
    const double left = c.get_double("spectrum", "x_left", -40.0), right = c.get_double("spectrum", "x_right", 60.0);
    const int n = c.get_int("spectrum", "n", 800);
    check_domain("spectrum", left, right, n);
    const double margin = c.get_double("spectrum", "margin", 0.05);
    if (margin < 0.0) throw ConfigError("[spectrum] margin must be non-negative");
    ScanOptions so;
    so.dense_limit = c.get_int("spectrum", "dense_limit", so.dense_limit);

    const EigReport report = scan_front_spectrum(spec, pinch, front, UniformGrid{left, right, n}, margin, so);
    json candidates = json::array();
    CsvTable eig{"eigenvalues.csv", {"re", "im", "score", "enlargement_shift", "point_spectrum"}, {}};
    for (const auto& e : report.candidates) {
        const bool point = e.classification == EigClass::point_spectrum;
        candidates.push_back(json{{"lambda", complex_json(e.lambda)}, {"score", e.score}, {"enlargement_shift", e.enlargement_shift}, {"point_spectrum", point}});
        eig.rows.push_back({e.lambda.real(), e.lambda.imag(), e.score, e.enlargement_shift, point ? 1.0 : 0.0});
    }
    o.tables.push_back(std::move(eig));
    o.result["model"] = spec.describe();
    o.result["pinch"] = pinch_json(pinch);
    o.result["scan"] = json{{"method", report.method},
                            {"margin", margin},
                            {"candidates", candidates},
                            {"unstable_point_count", report.unstable_point_count},
                            {"resonance_computed", report.resonance_computed},
                            {"E0", complex_json(report.resonance_value)},
                            {"sigma_min", report.sigma_min},
                            {"sigma_2", report.sigma_2},
                            {"note", report.note},
                            {"verdict", report.verdict}};
    o.checks.emplace_back("hypothesis_4", report.verdict);

    const double k_max = c.get_double("spectrum", "k_max", 5.0);
    const int n_k = c.get_int("spectrum", "n_k", 201);
    std::vector<double> ks;
    for (int i = 0; i < n_k; ++i) ks.push_back(n_k > 1 ? -k_max + 2.0 * k_max * i / (n_k - 1) : 0.0);
    CsvTable curves{"essential_curves.csv", {"k", "sigma_plus_re", "sigma_plus_im", "sigma_minus_re", "sigma_minus_im"}, {}};
    for (const auto& r : essential_spectrum_curves(spec, pinch, ks))
        curves.rows.push_back({r.k, r.sigma_plus.real(), r.sigma_plus.imag(), r.sigma_minus.real(), r.sigma_minus.imag()});
    o.tables.push_back(std::move(curves));

    const std::string family_name = c.get_string("spectrum", "family", "");
    if (c.has("spectrum", "transition_lo") || c.has("spectrum", "transition_hi")) {
        if (family_name.empty()) throw ConfigError("[spectrum] transition bisection needs family");
        const auto res = pushed_pulled_transition(family_from_name(family_name), c.get_double("spectrum", "transition_lo", 0.0),
                                                  c.get_double("spectrum", "transition_hi", 0.0));
        o.result["transition"] = json{{"delta_crit", res.delta_crit}, {"evaluations", res.evaluations.size()}};
        CsvTable ev{"transition.csv", {"delta", "E0"}, {}};
        for (const auto& [d, e] : res.evaluations) ev.rows.push_back({d, e});
        o.tables.push_back(std::move(ev));
    }
    const auto deltas = c.get_list("spectrum", "sweep_deltas");
    if (!deltas.empty()) {
        if (family_name.empty()) throw ConfigError("[spectrum] sweep_deltas needs family");
        const ModelFamily family = family_from_name(family_name);
        std::vector<double> values(deltas.size(), std::nan(""));
        parallel_for(static_cast<int>(deltas.size()), options.jobs, [&](int i) {
            try {
                values[static_cast<std::size_t>(i)] = resonance_at(family, deltas[static_cast<std::size_t>(i)]);
            } catch (const Error&) {
            }
        });
        CsvTable sweep{"resonance_sweep.csv", {"delta", "E0"}, {}};
        for (std::size_t i = 0; i < deltas.size(); ++i) sweep.rows.push_back({deltas[i], values[i]});
        o.tables.push_back(std::move(sweep));
    }
    return o;
}

Outcome cmd_approx(const Config& c, const RunOptions&) {
    Outcome o;
    const ModelSpec spec = model_from_config(c);
    spec.validate();
    const PinchResult pinch = find_double_root(spec);
    const double T = c.get_double("approx", "T", 100.0);
    const double mu = c.get_double("approx", "mu", 0.1);
    if (!(T > 0.0)) throw ConfigError("[approx] T must be positive");
    if (!(mu > 0.0 && mu < 0.125)) throw ConfigError("[approx] mu must lie in (0, 1/8)");
    const double span = c.get_double("approx", "span_factor", 11.0);
    const int count = c.get_int("approx", "samples", 12);
    const auto ts = log_spaced_times(T, span, count);
    o.result["model"] = spec.describe();
    o.result["T"] = T;
    o.result["mu"] = mu;

    auto emit_table = [&](const DecayTable& table) {
        CsvTable csv{"decay.csv", {"t", "norm", "scaled", "l11"}, {}};
        for (const auto& r : table.rows) csv.rows.push_back({r.t, r.norm, r.scaled, r.l11});
        o.tables.push_back(std::move(csv));
        o.result["decay"] = json{{"first_half_max", table.first_half_max}, {"second_half_max", table.second_half_max}, {"bounded", table.bounded}};
        o.checks.emplace_back("scaled_column_bounded", table.bounded);
    };

    if (c.get_string("approx", "fixture", "") == "zero") {
        const FieldSampler zero = [](std::span<const double> xs, double) { return std::vector<double>(xs.size(), 0.0); };
        const Weights w = approx_weights(spec, pinch.eta_star);
        const double r = 2.0 + mu;
        const auto table = decay_table(ts, T, mu, [&](double t) {
            const UniformGrid grid{-20.0, 20.0 + 14.0 * std::sqrt(t + T), 2001};
            const auto R = residual_of(spec, pinch, zero, grid, t, T);
            return std::pair{weighted_sup_norm(R, grid, w, r), l11_norm(R, grid)};
        });
        o.result["fixture"] = "zero";
        emit_table(table);
        return o;
    }

    FrontProfile front = front_from_config(c, spec, pinch);
    const std::string tail = c.get_string("approx", "tail", "solved");
    if (tail == "exact") {
        front = exact_tail_front(front.a_coeff, pinch.eta_star, UniformGrid{-5.0, 60.0, 2601});
    } else if (tail != "solved") {
        throw ConfigError("[approx] tail must be solved or exact");
    }
    ApproxOptions ao;
    ao.T = T;
    ao.mu = mu;
    if (const auto x0 = c.find_double("approx", "x0")) ao.x0 = *x0;
    if (const auto off = c.find_double("approx", "x0_offset")) ao.x0 = front.a_coeff + *off;
    if (const auto b0 = c.find_double("approx", "beta0")) ao.beta0 = *b0;
    const ApproxSolution A(spec, pinch, front, ao);
    o.result["x0"] = A.x0();
    o.result["beta0"] = A.beta0();
    o.result["alpha"] = A.alpha();
    o.result["alpha3"] = A.alpha3();
    o.result["psi1"] = json{{"gaussian_constant", A.profiles().gaussian_constant}, {"discrete_residual", A.profiles().discrete_residual}};

    CsvTable matching{"matching.csv", {"t", "matching_point", "zeta", "value_gap", "derivative_gap"}, {}};
    for (double t : ts) {
        const auto d = matching_diagnostics(A, t);
        matching.rows.push_back({d.t, d.matching_point, d.zeta, d.value_gap, d.derivative_gap});
    }
    o.tables.push_back(std::move(matching));

    CsvTable psi{"psi_t0.csv", {"x", "psi"}, {}};
    const UniformGrid g0 = residual_grid(A, 0.0);
    const auto xs = g0.points();
    const auto values = sample_psi(A, xs, 0.0);
    for (std::size_t i = 0; i < xs.size(); i += 4) psi.rows.push_back({xs[i], values[i]});
    o.tables.push_back(std::move(psi));

    emit_table(residual_decay_check(A, ts));
    return o;
}

Outcome cmd_simulate(const Config& c, const RunOptions& options) {
    Outcome o;
    if (options.model_problem) {
        ModelProblemOptions mp;
        mp.T = c.get_double("simulate", "mp_T", mp.T);
        mp.t_final = c.get_double("simulate", "mp_t_final", 100.0 * mp.T);
        mp.dx = c.get_double("simulate", "mp_dx", mp.dx);
        mp.dt = c.get_double("simulate", "mp_dt", mp.dt);
        mp.drop_nonautonomous = c.get_bool("simulate", "mp_drop_nonautonomous", false);
        if (!(mp.T > 0.0 && mp.t_final > mp.T && mp.dx > 0.0 && mp.dt > 0.0)) throw ConfigError("[simulate] model problem needs 0 < mp_T < mp_t_final, mp_dx, mp_dt > 0");
        const auto res = model_problem_run(mp);
        CsvTable table{"model_problem.csv", {"t", "w_weighted", "z_scaled", "w_sup"}, {}};
        double w0 = 0.0, lo = INFINITY, hi = 0.0;
        for (const auto& r : res.rows) {
            table.rows.push_back({r.t, r.w_weighted, r.z_scaled, r.w_sup});
            if (r.t < mp.T) continue;
            if (w0 == 0.0) w0 = r.w_weighted;
            lo = std::min(lo, r.w_weighted / w0);
            hi = std::max(hi, r.w_weighted / w0);
        }
        o.tables.push_back(std::move(table));
        o.result["model_problem"] = json{{"T", mp.T}, {"t_final", mp.t_final}, {"length", res.length}, {"n", res.n},
                                         {"max_identity_gap", res.max_identity_gap}, {"band_low", lo}, {"band_high", hi},
                                         {"drop_nonautonomous", mp.drop_nonautonomous}};
        if (mp.drop_nonautonomous) {
            const double slope = model_problem_decay_exponent(res, 0.0, mp.T, mp.t_final);
            o.result["model_problem"]["decay_exponent"] = slope;
            o.checks.emplace_back("heat_decay_exponent", std::abs(slope + 1.5) <= 0.1);
        } else {
            o.checks.emplace_back("identity", res.max_identity_gap < 1e-8);
            o.checks.emplace_back("bounded_without_decay", lo >= 0.2 && hi <= 5.0);
        }
        return o;
    }

    const ModelSpec spec = model_from_config(c);
    spec.validate();
    const PinchResult pinch = find_double_root(spec);
    const double t_final = c.get_double("simulate", "t_final", 600.0);
    if (t_final < 0.0) throw ConfigError("[simulate] t_final must be non-negative");
    SimConfig sc;
    sc.x_left = c.get_double("simulate", "x_left", -100.0);
    sc.x_right = c.get_double("simulate", "x_right", sc.x_left + std::max(200.0, 1.3 * pinch.c_star * t_final + 100.0));
    sc.n = c.get_int("simulate", "n", static_cast<int>(std::lround((sc.x_right - sc.x_left) / 0.1)) + 1);
    check_domain("simulate", sc.x_left, sc.x_right, sc.n);
    sc.dt = c.get_double("simulate", "dt", spec.order_half == 1 ? 0.01 : 0.002);
    if (!(sc.dt > 0.0)) throw ConfigError("[simulate] dt must be positive");
    try {
        sc.scheme = parse_scheme(c.get_string("simulate", "scheme", "imex-cn-ab2"));
    } catch (const Error& e) {
        throw ConfigError(std::string("[simulate] ") + e.what());
    }
    const std::string initial = c.get_string("simulate", "initial", "step");
    std::optional<FrontProfile> front;
    if (initial == "front") {
        front = front_from_config(c, spec, pinch);
        sc.initial.kind = InitialKind::front_profile;
        sc.initial.front = front;
    } else if (initial != "step") {
        throw ConfigError("[simulate] initial must be step or front");
    }
    sc.initial.shift = c.get_double("simulate", "shift", 0.0);
    sc.sample_times = uniform_samples(t_final, c.get_double("simulate", "sample_dt", 1.0));
    sc.checkpoint_times = c.get_list("simulate", "checkpoints");
    for (double t : sc.checkpoint_times)
        if (t < 0.0 || t > t_final) throw ConfigError("[simulate] checkpoints must lie in [0, t_final]");

    const InvasionResult run = run_invasion(spec, sc);
    o.result["model"] = spec.describe();
    o.result["pinch"] = pinch_json(pinch);
    o.result["config"] = json{{"x_left", sc.x_left}, {"x_right", sc.x_right}, {"n", sc.n}, {"dt", sc.dt},
                              {"scheme", std::string(to_string(sc.scheme))}, {"initial", initial}, {"t_final", t_final}};
    o.result["samples"] = run.series.size();
    o.result["final_position"] = run.series.empty() ? 0.0 : run.series.back().sigma;
    o.result["monitor"] = json{{"max_stiffness", run.monitor.max_stiffness}, {"bound_warnings", run.monitor.bound_warnings}};
    CsvTable pos{"positions.csv", {"t", "sigma"}, {}};
    for (const auto& s : run.series) pos.rows.push_back({s.t, s.sigma});
    o.tables.push_back(std::move(pos));

    if (initial == "front") {
        double dev = 0.0;
        const double s0 = run.series.front().sigma;
        for (const auto& s : run.series) dev = std::max(dev, std::abs(s.sigma - s0 - pinch.c_star * s.t));
        o.result["rigid_deviation"] = dev;
        o.checks.emplace_back("rigid_propagation", dev < 0.05);
    }

    const double wl = c.get_double("simulate", "window_left", t_final / 3.0);
    const double wr = c.get_double("simulate", "window_right", t_final);
    if (initial == "step" && wl >= 50.0 && wr > wl) {
        const ShiftFit fit = fit_log_shift(run.series, wl, wr);
        const double predicted = -1.5 / pinch.eta_star;
        o.result["fit"] = json{{"c_fit", fit.c_fit}, {"B_fit", fit.B_fit}, {"x_inf", fit.x_inf}, {"B_differentiated", fit.B_differentiated},
                               {"residual_rms", fit.residual_rms}, {"condition", fit.condition}, {"window", {fit.window_left, fit.window_right}},
                               {"B_predicted", predicted}, {"B_ratio", fit.B_fit / predicted}};
        o.checks.emplace_back("speed", std::abs(fit.c_fit - pinch.c_star) < 0.01 * pinch.c_star);
        o.checks.emplace_back("log_shift", std::abs(fit.B_fit / predicted - 1.0) <= 0.15);

        if (!run.checkpoints.empty()) {
            const FrontProfile q = front ? *front : front_from_config(c, spec, pinch);
            const Weights w(pinch.eta_star, spec.order());
            CsvTable norms{"weighted_norms.csv", {"t", "shift", "norm"}, {}};
            for (const auto& cp : run.checkpoints) {
                if (cp.t <= 0.0) continue;
                const double shift = fit.c_fit * cp.t + fit.B_fit * std::log(cp.t) + fit.x_inf;
                if (!run.grid.contains(shift)) continue;
                norms.rows.push_back({cp.t, shift, weighted_perturbation_norm(run.grid, cp.u, q, w, shift)});
            }
            o.tables.push_back(std::move(norms));
        }
    } else {
        o.result["fit"] = nullptr;
    }
    if (!run.checkpoints.empty()) {
        CsvTable prof{"checkpoints.csv", {"t", "x", "u"}, {}};
        for (const auto& cp : run.checkpoints)
            for (int i = 0; i < run.grid.n; i += 4) prof.rows.push_back({cp.t, run.grid.x(i), cp.u[static_cast<std::size_t>(i)]});
        o.tables.push_back(std::move(prof));
    }
    return o;
}

RunReport run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& options) {
    namespace fs = std::filesystem;
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    json manifest;
    manifest["command"] = command;
    manifest["config"] = config_path.string();
    manifest["tool_version"] = FRONTLAB_VERSION;

    std::string digest_source = command + (options.model_problem ? " --model-problem" : "") + "\n";
    Outcome outcome;
    std::string error;
    std::optional<Config> config;
    try {
        config = Config::load(config_path);
        digest_source += config->canonical();
    } catch (const ConfigError& e) {
        report.exit_code = exit_config_error;
        error = e.what();
        std::ifstream raw(config_path);
        digest_source += std::string(std::istreambuf_iterator<char>(raw), {});
    }
    const std::string digest = hex_digest(fnv1a(digest_source));
    report.directory = options.out_root / (command + "-" + digest);
    manifest["config_digest"] = digest;

    if (config) {
        try {
            if (command == "speed") outcome = cmd_speed(*config, options);
            else if (command == "front") outcome = cmd_front(*config, options);
            else if (command == "spectrum") outcome = cmd_spectrum(*config, options);
            else if (command == "approx") outcome = cmd_approx(*config, options);
            else if (command == "simulate") outcome = cmd_simulate(*config, options);
            else throw ConfigError("unknown command '" + command + "'");
            const bool all = std::all_of(outcome.checks.begin(), outcome.checks.end(), [](const auto& c) { return c.second; });
            report.exit_code = all ? exit_pass : exit_check_failed;
        } catch (const ConfigError& e) {
            report.exit_code = exit_config_error;
            error = e.what();
        } catch (const Error& e) {
            report.exit_code = e.is_input_error() ? exit_config_error : exit_numerical_failure;
            error = e.what();
        } catch (const std::exception& e) {
            report.exit_code = exit_numerical_failure;
            error = e.what();
        }
    }

    fs::create_directories(report.directory);
    json outputs = json::array();
    if (report.exit_code == exit_pass || report.exit_code == exit_check_failed) {
        std::ofstream(report.directory / "result.json") << outcome.result.dump(2) << "\n";
        outputs.push_back("result.json");
        for (const auto& t : outcome.tables) {
            write_csv(report.directory / t.name, t);
            outputs.push_back(t.name);
        }
    }
    json checks = json::object();
    for (const auto& [name, ok] : outcome.checks) checks[name] = ok;
    static constexpr const char* status[] = {"pass", "check-failed", "config-error", "numerical-failure"};
    manifest["status"] = status[report.exit_code];
    manifest["exit_code"] = report.exit_code;
    manifest["error"] = error.empty() ? json(nullptr) : json(error);
    manifest["checks"] = checks;
    manifest["outputs"] = outputs;
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream(report.directory / "manifest.json") << manifest.dump(2) << "\n";
    report.manifest = std::move(manifest);
    return report;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Pulled-front invasion laboratory"};
    app.require_subcommand(1);
    RunOptions options;
    std::string out_root = "runs";
    std::string config_path;
    app.add_option("--out", out_root, "Root directory for run outputs");
    app.add_option("--jobs", options.jobs, "Worker threads for parameter sweeps")->check(CLI::PositiveNumber);

    const std::vector<std::pair<std::string, std::string>> commands{
        {"speed", "Linear spreading speed, pinching certificate and spectral hypotheses"},
        {"front", "Critical front profile and tail asymptotics"},
        {"spectrum", "Weighted eigenvalue scan and resonance function"},
        {"approx", "Approximate solution and residual decay table"},
        {"simulate", "Direct simulation and logarithmic shift fit"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "Model configuration file")->required();
        if (name == "simulate") sub->add_flag("--model-problem", options.model_problem, "Run the half-line model problem");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_config_error;
    }
    options.out_root = out_root;
    const std::string command = app.get_subcommands().front()->get_name();
    const RunReport report = run_command(command, config_path, options);
    std::cout << (report.directory / "manifest.json").string() << "\n" << report.manifest["status"].get<std::string>() << "\n";
    if (!report.manifest["error"].is_null()) std::cerr << report.manifest["error"].get<std::string>() << "\n";
    return report.exit_code;
}

}  // namespace frontlab::cli
