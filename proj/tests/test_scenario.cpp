#include "chemowave/scenario.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace chemowave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("chemowave_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string body(const fs::path& p)
{
    const auto text = slurp(p);
    return text.substr(text.find('\n') + 1);
}

// small, fast scenario; m_plus = 0 keeps the perturbation proportional to the amplitude
Config small(const fs::path& out, const std::string& family = "constant")
{
    auto cfg = Config::parse(R"(
[model]
phi_plus = 1
[grid]
L = 40
n_cells = 400
[initial]
family = gaussian-bump
amplitude = 0.02
[run]
t_final = 30
snapshot_count = 20
[diagnostics]
fit_t_min = 5
[output]
snapshots = final
)");
    cfg.set("initial.family", family);
    cfg.set("output.dir", out.string());
    return cfg;
}

int cli(const std::string& args)
{
    const char* exe = std::getenv("CHEMOWAVE_CLI");
    REQUIRE_MESSAGE(exe != nullptr, "CHEMOWAVE_CLI not set");
    const std::string cmd = std::string(exe) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parser: sections, comments, errors with line numbers")
{
    const auto c = Config::parse("# head\n[model]\nalpha = 2 # damping\n\n[grid]\nL=50\n");
    CHECK(c.values().at("model.alpha") == "2");
    CHECK(c.values().at("grid.L") == "50");
    CHECK(c.line_of("grid.L") == 6);
    auto message = [](const std::string& text) {
        try {
            Config::parse(text, "cfg");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[model]\nalpha\n") == "cfg:2: expected 'key = value'");
    CHECK(message("[model\n").find("cfg:1:") == 0);
    CHECK(message("a = 1\na = 2\n").find("duplicate key 'a'") != std::string::npos);
    CHECK_THROWS_AS(Config::load("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("scenario defaults and validation")
{
    const auto s = scenario_from_config(Config::parse(""));
    CHECK(s.grid.n_cells == 4800);
    CHECK(s.params.phi_plus == doctest::Approx(1.0));  // auto: (a/b) rho_plus
    CHECK(s.profile_source == ProfileSource::NeumannEvolved);
    CHECK(s.initial.center == doctest::Approx(4.0));
    CHECK(s.snapshot_times().size() >= 60);
    CHECK(s.config.values().size() == default_config().size());

    auto err = [](const std::string& text) {
        try {
            scenario_from_config(Config::parse(text));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(err("[model]\nbogus = 1\n") == "line 2: unknown key 'model.bogus'");
    CHECK(err("[profile]\nsource = self-similar\n").find("profile pairing error") != std::string::npos);
    CHECK(err("[regime]\nkind = B\n[profile]\nsource = neumann-evolved\n").find("profile pairing error") !=
          std::string::npos);
    CHECK(err("[model]\ngamma = 1\nmu = 2\n").find("admissibility condition p'(rho) - (a mu / b) rho > 0 fails") !=
          std::string::npos);
    CHECK(err("[correction]\nepsilon0 = 0.001\n").find("line 2") == 0);
    CHECK(err("[scheme]\nflux = roe\n").find("not one of") != std::string::npos);
    CHECK(err("[grid]\nn_cells = 2.5\n").find("integer") != std::string::npos);
    CHECK_FALSE(err("[regime]\nkind = B\n[initial]\nrho_left = 1.1\n[profile]\nsource = self-similar\n").size());
}

TEST_CASE("equilibrium run writes a complete artifact set")
{
    const auto dir = scratch("equilibrium");
    const auto s = scenario_from_config(small(dir));
    const auto out = run_scenario(s);
    REQUIRE(out.exit_code == 0);
    for (const char* name : {"norms.csv", "decay.csv", "weighted.csv", "mass_identity.csv", "profile.csv",
                             "correction.csv", "correction_norms.csv", "manifest.json"}) {
        CHECK(fs::exists(dir / name));
    }
    CHECK(fs::exists(dir / "snapshots"));
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["status"] == "ok");
    CHECK(m["config"]["grid.n_cells"] == "400");
    CHECK(m["decay"].size() == 11);
    for (const auto& row : m["decay"]) {
        CHECK(row["fitted"].is_null());  // the constant state sits at the floor
        CHECK(row["pass"] == false);
    }
    CHECK(m["weighted_monitor"]["grew"] == false);
    CHECK(slurp(dir / "mass_identity.csv").rfind("t,Phi_at_0,quadrature_tol,tail_mass,min_rho,admissibility_margin\n", 0) == 0);
    CHECK(slurp(dir / "correction_norms.csv").rfind("k,norm,value_t0,fitted_rate\n", 0) == 0);
    CHECK(slurp(dir / "norms.csv").rfind("t,name,value\n", 0) == 0);
}

TEST_CASE("reruns are byte-identical")
{
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    REQUIRE(run_scenario(scenario_from_config(small(a, "gaussian-bump"))).exit_code == 0);
    REQUIRE(run_scenario(scenario_from_config(small(b, "gaussian-bump"))).exit_code == 0);
    for (const char* name : {"norms.csv", "decay.csv", "weighted.csv", "mass_identity.csv"}) {
        CHECK(slurp(a / name) == slurp(b / name));
    }
    const auto snaps = fs::directory_iterator(a / "snapshots");
    for (const auto& e : snaps) {
        CHECK(body(e.path()) == body(b / "snapshots" / e.path().filename()));
    }
}

TEST_CASE("decay csv round-trips through a plain reader")
{
    const auto dir = scratch("schema");
    REQUIRE(run_scenario(scenario_from_config(small(dir, "gaussian-bump"))).exit_code == 0);
    std::ifstream in(dir / "decay.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "series_name,predicted_exponent,fitted_exponent,r2,t_min,t_max");
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        REQUIRE(cells.size() == 6);
        CHECK(std::isfinite(std::stod(cells[1])));
        CHECK(std::stod(cells[4]) == 5.0);
        CHECK(std::stod(cells[5]) == doctest::Approx(24.0));
        ++rows;
    }
    CHECK(rows == 11);
}

TEST_CASE("epsilon0 sweep writes one manifest per value and combined tables")
{
    const auto dir = scratch("sweep_eps");
    auto cfg = small(dir);
    cfg.set("run.t_final", "12");
    cfg.set("run.snapshot_count", "12");
    cfg.set("diagnostics.fit_t_min", "1");
    const auto s = scenario_from_config(cfg);
    const auto res = sweep(s, "correction.epsilon0", {"0.05", "0.1", "0.2"}, 2);
    CHECK(res.exit_code == 0);
    REQUIRE(res.children.size() == 3);
    for (const char* v : {"0.05", "0.1", "0.2"}) {
        CHECK(fs::exists(dir / ("correction.epsilon0=" + std::string(v)) / "manifest.json"));
    }
    const auto combined = slurp(dir / "combined.csv");
    CHECK(combined.rfind("value,series_name,predicted_exponent,fitted_exponent,r2,t_min,t_max,status\n", 0) == 0);
    CHECK(std::count(combined.begin(), combined.end(), '\n') == 1 + 3 * 11);
    const auto corr = slurp(dir / "combined_correction.csv");
    CHECK(corr.rfind("value,k,norm,value_t0,fitted_rate,status\n", 0) == 0);

    CHECK_THROWS_AS(sweep(s, "correction.epsilon0", {}), ConfigError);
    CHECK_THROWS_AS(sweep(s, "model.nonsense", {"1"}), ConfigError);
    CHECK_THROWS_AS(sweep(s, "scheme.flux", {"hll"}), ConfigError);
    CHECK_THROWS_AS(sweep(s, "model.mu", {"abc"}), ConfigError);
}

TEST_CASE("a failing child is reported while the sweep continues")
{
    const auto dir = scratch("sweep_fail");
    auto cfg = small(dir);
    cfg.set("run.t_final", "6");
    cfg.set("run.snapshot_count", "12");
    cfg.set("diagnostics.fit_t_min", "1");
    // epsilon0 = 0.01 puts the correction support outside the domain
    const auto res = sweep(scenario_from_config(cfg), "correction.epsilon0", {"0.01", "0.2"}, 1);
    CHECK(res.exit_code == 2);
    CHECK(res.children[0].second.exit_code == 2);
    CHECK(res.children[1].second.exit_code == 0);
    CHECK(slurp(dir / "combined.csv").find("0.01,,,,,,,exit=2") != std::string::npos);
}

TEST_CASE("fitted exponents do not depend on the perturbation amplitude")
{
    const auto dir = scratch("sweep_amp");
    auto cfg = small(dir, "gaussian-bump");
    cfg.set("grid.L", "60");
    cfg.set("grid.n_cells", "1200");
    cfg.set("run.t_final", "60");
    cfg.set("run.snapshot_count", "40");
    cfg.set("diagnostics.fit_t_min", "10");
    cfg.set("output.snapshots", "none");
    const auto res = sweep(scenario_from_config(cfg), "initial.amplitude", {"0.01", "0.02"}, 2);
    REQUIRE(res.exit_code == 0);
    const auto a = nlohmann::json::parse(slurp(dir / "initial.amplitude=0.01" / "manifest.json"));
    const auto b = nlohmann::json::parse(slurp(dir / "initial.amplitude=0.02" / "manifest.json"));
    for (std::size_t i = 0; i < a["decay"].size(); ++i) {
        const auto& ra = a["decay"][i];
        const auto& rb = b["decay"][i];
        REQUIRE(ra["fitted"].is_number());
        CHECK_MESSAGE(std::abs(ra["fitted"].get<double>() - rb["fitted"].get<double>()) <= 0.05,
                      ra["series"].get<std::string>());
    }
}

TEST_CASE("profile-only artifacts")
{
    const auto dir = scratch("profile_only");
    auto cfg = small(dir);
    cfg.set("regime.kind", "B");
    cfg.set("initial.rho_left", "1.1");
    const auto out = profile_scenario(scenario_from_config(cfg));
    REQUIRE(out.exit_code == 0);
    CHECK(slurp(dir / "profile.csv").rfind("xi,rho_bar\n", 0) == 0);
    CHECK(fs::exists(dir / "correction.csv"));
}

TEST_CASE("command line exit codes")
{
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    {
        std::ofstream bad(dir / "bad.cfg");
        bad << "[model]\nalpha = -1\n";
        std::ofstream ok(dir / "ok.cfg");
        ok << "[grid]\nL = 20\nn_cells = 100\n[initial]\nfamily = constant\n[run]\nt_final = 12\nsnapshot_count = 12\n"
              "[diagnostics]\nfit_t_min = 1\n";
        std::ofstream blocker(dir / "blocker");
        blocker << "x";
    }
    CHECK(cli("check " + (dir / "ok.cfg").string()) == 0);
    CHECK(cli("check " + (dir / "bad.cfg").string()) == 2);
    CHECK(cli("run " + (dir / "bad.cfg").string()) == 2);
    CHECK(cli("run " + (dir / "missing.cfg").string()) == 2);
    CHECK(cli("run " + (dir / "ok.cfg").string() + " --set grid.L=abc") == 2);
    // output directory below a regular file cannot be created
    CHECK(cli("run " + (dir / "ok.cfg").string() + " --out " + (dir / "blocker" / "sub").string()) == 4);
    CHECK(cli("run " + (dir / "ok.cfg").string() + " --out " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    CHECK(cli("sweep " + (dir / "ok.cfg").string() + " --axis model.bogus --values 1,2") == 2);
}
