#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"

using namespace frontlab;
using namespace frontlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "frontlab_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "model.ini";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

RunReport run(const std::string& command, const std::string& text, const std::string& name, RunOptions options = {}) {
    const fs::path dir = scratch(name);
    options.out_root = dir / "runs";
    return run_command(command, write_config(dir, text), options);
}

void check_outputs_exist(const RunReport& r) {
    CHECK(fs::exists(r.directory / "manifest.json"));
    for (const auto& f : r.manifest["outputs"]) CHECK(fs::exists(r.directory / f.get<std::string>()));
}

const char* kFkpp = "[model]\norder_half = 1\np = [0, 1]\nf = [1, -1]\nu_minus = 1\n";

}  // namespace

TEST_CASE("fnv1a reference values") {
    CHECK(hex_digest(fnv1a("")) == "cbf29ce484222325");
    CHECK(hex_digest(fnv1a("a")) == "af63dc4c8601ec8c");
    CHECK(hex_digest(fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("config parsing and canonical form") {
    const auto a = Config::parse("# comment\n[model]\np = [0, 1]\nf = [1, -1]\n[front]\nn = 100\n");
    const auto b = Config::parse("[front]\nn=100\n\n[model]\n; other comment\nf=[1,-1]\np=[0,1]\n");
    CHECK(a.canonical() == b.canonical());
    CHECK(fnv1a(a.canonical()) == fnv1a(b.canonical()));
    CHECK(a.get_list("model", "p") == std::vector<double>{0.0, 1.0});
    CHECK(a.get_int("front", "n", 0) == 100);
    CHECK(a.get_double("front", "missing", 2.5) == 2.5);
    CHECK_THROWS_AS((void)Config::parse("[front]\nn = abc\n").get_int("front", "n", 0), ConfigError);
    CHECK_THROWS_AS((void)Config::parse("[front]\nn = 1.5\n").get_int("front", "n", 0), ConfigError);
    CHECK_THROWS_AS((void)Config::parse("[front]\nflag = maybe\n").get_bool("front", "flag", false), ConfigError);
}

TEST_CASE("model sections") {
    CHECK(model_from_config(Config::parse(kFkpp)).describe() == models::fkpp().describe());
    CHECK(model_from_config(Config::parse("[model]\npreset = efkpp\ndelta = 0.1\n")).describe() == models::efkpp(0.1).describe());
    CHECK_THROWS_AS((void)model_from_config(Config::parse("[model]\npreset = cubic\n")), ConfigError);
    CHECK_THROWS_AS((void)model_from_config(Config::parse("[model]\np = []\nf = [1, -1]\n")), ConfigError);
    CHECK_THROWS_AS((void)family_from_name("bistable"), ConfigError);
}

TEST_CASE("speed: fkpp record and determinism") {
    const auto r = run("speed", kFkpp, "speed_fkpp");
    CHECK(r.exit_code == exit_pass);
    check_outputs_exist(r);
    const auto res = read_json(r.directory / "result.json");
    CHECK(res["pinch"]["c_star"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res["pinch"]["eta_star"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res["pinch"]["morse_counts"] == nlohmann::json::array({1, 1}));
    CHECK(r.manifest["status"] == "pass");

    // same config, reordered and commented, in another output root
    const auto again = run("speed", "; fkpp\n[model]\nu_minus = 1\nf = [1, -1]\np = [0, 1]\norder_half = 1\n", "speed_fkpp_again");
    CHECK(again.directory.filename() == r.directory.filename());
    CHECK(slurp(again.directory / "result.json") == slurp(r.directory / "result.json"));
    CHECK(slurp(again.directory / "spectrum_curves.csv") == slurp(r.directory / "spectrum_curves.csv"));
}

TEST_CASE("speed: efkpp matches the envelope oracle, parallel sweeps are worker-count independent") {
    const std::string cfg = "[model]\npreset = efkpp\ndelta = 0.1\n[dispersion]\nsweep_family = efkpp\nsweep_deltas = [0.02, 0.05, 0.1, 0.2]\n";
    const auto r = run("speed", cfg, "speed_efkpp");
    CHECK(r.exit_code == exit_pass);
    CHECK(r.manifest["checks"]["oracle_agreement"] == true);
    // jobs > 1 switches to cold starts; within that mode the worker count must not matter
    RunOptions two, three;
    two.jobs = 2;
    three.jobs = 3;
    const auto p2 = run("speed", cfg, "speed_efkpp_jobs2", two);
    const auto p3 = run("speed", cfg, "speed_efkpp_jobs3", three);
    CHECK(slurp(p2.directory / "sweep.csv") == slurp(p3.directory / "sweep.csv"));
}

TEST_CASE("config errors exit with code 2 and still leave a manifest") {
    const auto empty_p = run("speed", "[model]\np = []\nf = [1, -1]\n", "empty_p");
    CHECK(empty_p.exit_code == exit_config_error);
    CHECK(fs::exists(empty_p.directory / "manifest.json"));
    CHECK(read_json(empty_p.directory / "manifest.json")["status"] == "config-error");

    const auto domain = run("front", std::string(kFkpp) + "[front]\nx_left = 5\nx_right = 1\n", "bad_domain");
    CHECK(domain.exit_code == exit_config_error);

    const auto invalid = run("speed", "[model]\np = [0, -1]\nf = [1, -1]\n", "not_elliptic");
    CHECK(invalid.exit_code == exit_config_error);

    const fs::path dir = scratch("missing");
    RunOptions o;
    o.out_root = dir / "runs";
    const auto missing = run_command("speed", dir / "nope.ini", o);
    CHECK(missing.exit_code == exit_config_error);
    CHECK(fs::exists(missing.directory / "manifest.json"));
}

TEST_CASE("front: profile and constant fixture") {
    const auto r = run("front", kFkpp, "front_fkpp");
    CHECK(r.exit_code == exit_pass);
    check_outputs_exist(r);
    const auto res = read_json(r.directory / "result.json");
    CHECK(res["front"]["b"].get<double>() == 1.0);
    CHECK(res["front"]["a"].get<double>() == doctest::Approx(-1.952).epsilon(2e-3));

    const auto fixture = run("front", std::string(kFkpp) + "[front]\nfixture = constant\nn = 200\n", "front_constant");
    CHECK(fixture.exit_code == exit_pass);
    CHECK(read_json(fixture.directory / "result.json")["residual_norm"].get<double>() == 0.0);
}

TEST_CASE("approx: zero fixture gives zeros; infeasible matching is a numerical failure") {
    const auto zero = run("approx", std::string(kFkpp) + "[approx]\nfixture = zero\nsamples = 6\n", "approx_zero");
    CHECK(zero.exit_code == exit_pass);
    const auto csv = slurp(zero.directory / "decay.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.substr(line.find(',')) == ",0,0,0");
    }
    CHECK(rows == 6);

    const auto infeasible = run("approx", std::string(kFkpp) + "[approx]\nT = 100\n", "approx_t100");
    CHECK(infeasible.exit_code == exit_numerical_failure);
    const auto m = read_json(infeasible.directory / "manifest.json");
    CHECK(m["status"] == "numerical-failure");
    CHECK(m["error"].get<std::string>().find("NoContraction") != std::string::npos);

    const auto bad_mu = run("approx", std::string(kFkpp) + "[approx]\nmu = 0.2\n", "approx_mu");
    CHECK(bad_mu.exit_code == exit_config_error);
}

TEST_CASE("approx: feasible build writes the decay and matching tables") {
    const auto r = run("approx", std::string(kFkpp) + "[approx]\nT = 10000\nsamples = 4\n", "approx_fkpp");
    CHECK(r.exit_code == exit_pass);
    check_outputs_exist(r);
    const auto res = read_json(r.directory / "result.json");
    CHECK(res["x0"].get<double>() == doctest::Approx(-1.952).epsilon(2e-3));
    CHECK(res["beta0"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("spectrum: zero margin on fkpp leaves no candidates; cubic 0.2 is flagged") {
    const auto clean = run("spectrum", std::string(kFkpp) + "[spectrum]\nmargin = 0\nn = 400\n", "spectrum_fkpp");
    CHECK(clean.exit_code == exit_pass);
    const auto res = read_json(clean.directory / "result.json");
    CHECK(res["scan"]["candidates"].empty());
    CHECK(res["scan"]["verdict"] == true);

    const auto pushed = run("spectrum", "[model]\npreset = cubic\ndelta = 0.2\n", "spectrum_cubic");
    CHECK(pushed.exit_code == exit_check_failed);
    const auto pr = read_json(pushed.directory / "result.json");
    CHECK(pr["scan"]["unstable_point_count"] == 1);
    CHECK(pushed.manifest["checks"]["hypothesis_4"] == false);
}

TEST_CASE("simulate: t_final = 0 and the model problem") {
    const auto r = run("simulate", std::string(kFkpp) + "[simulate]\nt_final = 0\nx_left = -20\nx_right = 20\nn = 401\n", "simulate_zero");
    CHECK(r.exit_code == exit_pass);
    const auto res = read_json(r.directory / "result.json");
    CHECK(res["samples"] == 1);
    CHECK(res["final_position"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res["fit"].is_null());

    RunOptions mp;
    mp.model_problem = true;
    const auto m = run("simulate", "[simulate]\nmp_T = 2\nmp_t_final = 200\n", "simulate_mp", mp);
    CHECK(m.exit_code == exit_pass);
    CHECK(m.manifest["checks"]["identity"] == true);
    CHECK(m.manifest["checks"]["bounded_without_decay"] == true);

    const auto bad = run("simulate", std::string(kFkpp) + "[simulate]\nscheme = rk4\nt_final = 1\n", "simulate_scheme");
    CHECK(bad.exit_code == exit_config_error);
}

TEST_CASE("command line parsing") {
    const fs::path dir = scratch("argv");
    const auto cfg = write_config(dir, kFkpp);
    const std::string out = (dir / "runs").string();
    std::vector<std::string> args{"frontlab", "--out", out, "speed", cfg.string()};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    CHECK(run_cli(static_cast<int>(argv.size()), argv.data()) == 0);

    std::vector<std::string> bad{"frontlab", "teleport", cfg.string()};
    std::vector<char*> bargv;
    for (auto& a : bad) bargv.push_back(a.data());
    CHECK(run_cli(static_cast<int>(bargv.size()), bargv.data()) == 2);
}
