#pragma once

#include "chemowave/correction.hpp"
#include "chemowave/diagnostics.hpp"
#include "chemowave/model.hpp"
#include "chemowave/profile.hpp"
#include "chemowave/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemowave {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key-value config: "key = value" lines, "[section]" headers prefix
/// following keys with "section.", '#' starts a comment.
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<string>");
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value, int line = 0);
    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
    [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }
    [[nodiscard]] int line_of(const std::string& key) const;
    [[nodiscard]] std::string text() const;  // canonical "key = value" dump

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::string origin_;
};

enum class ProfileSource { Auto, NeumannEvolved, SelfSimilar, Constant };
enum class InitialFamily { GaussianBump, TanhFront, Constant };
enum class SnapshotOutput { All, Final, None };

std::string to_string(ProfileSource s);
std::string to_string(InitialFamily f);

struct InitialSpec {
    InitialFamily family = InitialFamily::GaussianBump;
    double amplitude = 0.02;
    double center = 4.0;
    double width = 1.0;
    double rho_left = -1.0;  // rho0(0) for regime B (< 0: rho_plus)
    double front_width = 2.0;
};

struct Scenario {
    ModelParams params;
    Grid grid{120.0, 4800};
    BoundaryRegime regime;
    SchemeConfig scheme;
    InitialSpec initial;
    ProfileSource profile_source = ProfileSource::Auto;  // resolved after load
    double epsilon0 = 0.1;
    double xi_max = 0.0;
    double t_final = 200.0;
    std::size_t snapshot_count = 60;  // geometric between snapshot_first and t_final
    double snapshot_first = 1.0;
    std::vector<double> snapshot_extra;
    double wall_clock_budget = 0.0;
    std::uint64_t seed = 1;
    double fit_t_min = 20.0;
    double fit_t_max = -1.0;
    double monitor_after = 5.0;
    double monitor_factor = 10.0;
    SnapshotOutput snapshot_output = SnapshotOutput::All;
    std::filesystem::path output_dir = "out";
    Config config;  // echo of the effective configuration

    [[nodiscard]] std::vector<double> snapshot_times() const;
    [[nodiscard]] double rho_left() const { return initial.rho_left < 0.0 ? params.rho_plus : initial.rho_left; }
};

/// Builds and validates a scenario. Throws ConfigError naming the violated
/// constraint (with the config line when known).
Scenario scenario_from_config(const Config& config);
Scenario load_scenario(const std::filesystem::path& path);

/// Default keys and values filled in by scenario_from_config.
const std::map<std::string, std::string>& default_config();

/// Everything needed to start a run.
struct Prepared {
    ProfileField profile;
    CorrectionField correction;
    InitialData initial;
    State state0;
    BoundaryRegime regime;
    double delta0 = 0.0;
};

/// Builds initial data, diffusion wave and correction. The snapshot times are
/// stored as exact levels of a case-A wave table.
Prepared prepare(const Scenario& s);

struct MassIdentityRow {
    double t = 0.0;
    double Phi_at_0 = 0.0;
    double quadrature_tol = 0.0;
    double tail_mass = 0.0;
};

struct ScenarioResult {
    Prepared prepared;
    Trajectory trajectory;
    DecayReport report;
    WeightedNormMonitor monitor;
    std::vector<MassIdentityRow> mass_identity;
    std::vector<AdmissibilityReport> admissibility;
};

/// In-process run without writing artifacts.
ScenarioResult execute(const Scenario& s);

struct RunOutcome {
    int exit_code = 0;  // 0 ok, 2 config, 3 numerical, 4 I/O
    std::string message;
    std::vector<std::filesystem::path> artifacts;
};

/// Runs and writes snapshots, norms.csv, decay.csv, weighted.csv,
/// mass_identity.csv, profile.csv, correction.csv and manifest.json into
/// s.output_dir. Never throws.
RunOutcome run_scenario(const Scenario& s);

/// Profile-only artifacts (profile.csv, correction.csv).
RunOutcome profile_scenario(const Scenario& s);

struct SweepOutcome {
    int exit_code = 0;
    std::vector<std::pair<std::string, RunOutcome>> children;
    std::filesystem::path combined;
};

/// Independent runs with `axis` overridden by each value, one directory per
/// value, combined.csv keyed by the swept value. Children run concurrently on
/// up to `workers` threads (0: CHEMOWAVE_WORKERS or hardware concurrency).
SweepOutcome sweep(const Scenario& base, const std::string& axis, const std::vector<std::string>& values,
                   unsigned workers = 0);

unsigned default_workers();

std::string version_string();

}  // namespace chemowave
