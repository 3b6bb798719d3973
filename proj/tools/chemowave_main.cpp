// chemowave command line: run / sweep / profile / check

#include "chemowave/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace chemowave;

namespace {

int load(const std::string& path, const std::vector<std::string>& overrides, const std::string& out_dir,
         Scenario& s)
{
    try {
        Config cfg = Config::load(path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("--set expects key=value, got '" + kv + "'");
            }
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!out_dir.empty()) {
            cfg.set("output.dir", out_dir);
        }
        s = scenario_from_config(cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

void announce(const std::filesystem::path& dir)
{
    std::cout << "artifacts in " << dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Damped chemotaxis system on the half-line: diffusion-wave decay runs"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> overrides;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "run a scenario and write all artifacts");
    run->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--set", overrides, "override key=value (repeatable)");
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");

    std::string axis;
    std::vector<std::string> values;
    unsigned workers = 0;
    auto* sw = app.add_subcommand("sweep", "independent runs over one parameter axis");
    sw->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
    sw->add_option("--axis", axis, "dotted key to sweep, e.g. correction.epsilon0")->required();
    sw->add_option("--values", values, "comma separated values")->required()->delimiter(',');
    sw->add_option("--workers", workers, "concurrent runs (default: CHEMOWAVE_WORKERS or cores)");
    sw->add_option("--set", overrides, "override key=value (repeatable)");
    sw->add_option("--out", out_dir, "output directory");

    auto* prof = app.add_subcommand("profile", "build the diffusion wave and corrections only");
    prof->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
    prof->add_option("--set", overrides, "override key=value (repeatable)");
    prof->add_option("--out", out_dir, "output directory");

    auto* check = app.add_subcommand("check", "validate a scenario file");
    check->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
    check->add_option("--set", overrides, "override key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Scenario s;
    if (const int rc = load(config, overrides, out_dir, s); rc != 0) {
        return rc;
    }

    if (*check) {
        std::cout << "ok: regime " << to_string(s.regime.kind) << ", profile " << to_string(s.profile_source)
                  << ", " << s.grid.n_cells << " cells on [0, " << s.grid.L << "], t_final " << s.t_final
                  << ", " << s.snapshot_times().size() << " snapshots\n";
        return 0;
    }
    if (*prof) {
        const auto res = profile_scenario(s);
        if (res.exit_code != 0) {
            std::cerr << "error: " << res.message << '\n';
            return res.exit_code;
        }
        announce(s.output_dir);
        return 0;
    }
    if (*run) {
        const auto res = run_scenario(s);
        if (res.exit_code != 0) {
            std::cerr << "error: " << res.message << '\n';
            return res.exit_code;
        }
        announce(s.output_dir);
        std::ifstream decay(s.output_dir / "decay.csv");
        std::cout << decay.rdbuf();
        return 0;
    }
    if (*sw) {
        try {
            const auto res = sweep(s, axis, values, workers);
            for (const auto& [value, child] : res.children) {
                std::cout << axis << '=' << value << ": "
                          << (child.exit_code == 0 ? std::string("ok") : "exit " + std::to_string(child.exit_code) +
                                                                              " " + child.message)
                          << '\n';
            }
            std::cout << "combined: " << res.combined.string() << '\n';
            return res.exit_code;
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return 2;
        } catch (const IoError& e) {
            std::cerr << "io error: " << e.what() << '\n';
            return 4;
        }
    }
    return 0;
}
