#pragma once

#include "chemowave/model.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace chemowave {

enum class BoundaryKind {
    A,  // m(0,t) = 0, phi_x(0,t) = 0
    B,  // m_x(0,t) = 0, phi(0,t) = (a/b) rho0(0)
};

struct BoundaryRegime {
    BoundaryKind kind = BoundaryKind::A;
    double rho0_at_0 = 0.0;  // recorded at initialisation, used by case B
    double m0_at_0 = 0.0;

    [[nodiscard]] double phi_dirichlet(const ModelParams& params) const { return params.a / params.b * rho0_at_0; }
};

enum class FluxKind { Rusanov, HLL };
enum class Reconstruction { FirstOrder, MusclMinmod };
enum class Splitting { Lie, Strang };

struct SchemeConfig {
    double cfl = 0.45;
    FluxKind flux = FluxKind::Rusanov;
    Reconstruction reconstruction = Reconstruction::MusclMinmod;
    Splitting splitting = Splitting::Strang;

    void validate() const;
};

std::string to_string(FluxKind k);
std::string to_string(Reconstruction r);
std::string to_string(Splitting s);
std::string to_string(BoundaryKind k);

/// Far-field limit (rho_plus, m_plus e^{-alpha t}, d_plus e^{-b t} + (a/b) rho_plus):
/// the exact solution of the spatially homogeneous system.
struct FarFieldState {
    double rho_plus = 1.0;
    double m_plus = 0.0;
    double d_plus = 0.0;
    double alpha = 1.0;
    double a = 1.0;
    double b = 1.0;

    static FarFieldState from(const ModelParams& params);
    [[nodiscard]] double rho(double) const { return rho_plus; }
    [[nodiscard]] double m(double t) const;
    [[nodiscard]] double phi(double t) const;
};

/// Initial data (rho0, m0, phi0) as functions of x.
struct InitialData {
    std::function<double(double)> rho;
    std::function<double(double)> m;
    std::function<double(double)> phi;
};

/// Cell values by midpoint sampling. Validates positivity, the far-field tail at
/// x = L (within tail_tol) and, for regime A, m0(0) = 0. Records rho0(0), m0(0)
/// into `regime`.
State init_state(const ModelParams& params, const Grid& grid, const InitialData& ic, BoundaryRegime& regime,
                 double tail_tol = 1e-6);

struct StepResult {
    State state;
    double mass_flux_left = 0.0;   // time-integrated rho-flux through x = 0 (into the domain positive)
    double mass_flux_right = 0.0;  // time-integrated rho-flux through x = L (out of the domain positive)
    int rejections = 0;
};

/// Largest stable step for the hyperbolic part: cfl * dx / max(|m/rho| + sqrt(p'(rho))).
double stable_dt(const State& state, const ModelParams& params, const Grid& grid, const SchemeConfig& cfg);

/// One full step of the split scheme. Hyperbolic part: (rho, m) finite volume
/// with the configured flux/reconstruction and SSP-RK2, chemotactic force
/// mu rho phi_x as a centred source; damping by the exact factor e^{-alpha dt};
/// phi by Crank-Nicolson. Throws NumericalError on positivity loss after one
/// dt halving.
StepResult step(const State& state, const ModelParams& params, const Grid& grid, const SchemeConfig& cfg,
                const BoundaryRegime& bc, const FarFieldState& far, double dt);

struct RunStats {
    std::size_t steps = 0;
    std::size_t rejections = 0;
    double dt_min = 0.0;
    double dt_max = 0.0;
    double initial_mass = 0.0;
    double net_boundary_inflow = 0.0;  // time-integrated (left inflow - right outflow)
    double wall_seconds = 0.0;
};

struct Trajectory {
    std::vector<State> snapshots;
    RunStats stats;
};

struct RunOptions {
    double wall_clock_budget = 0.0;  // seconds, <= 0 disables
    /// Called after each snapshot is recorded.
    std::function<void(const State&)> on_snapshot;
};

/// Integrates to t_final with CFL-adaptive steps, clipped to hit every requested
/// snapshot time exactly. The initial state is always the first snapshot.
Trajectory run(const State& state0, const ModelParams& params, const Grid& grid, const SchemeConfig& cfg,
               const BoundaryRegime& bc, double t_final, const std::vector<double>& snapshot_times,
               const RunOptions& options = {});

struct AdmissibilityReport {
    double min_margin = 0.0;  // min over cells of p'(rho) - (a mu / b) rho
    double min_rho = 0.0;
    bool admissible = false;
};

AdmissibilityReport stability_guard(const State& state, const ModelParams& params);

/// Total mass sum(rho) dx.
double total_mass(const State& state, const Grid& grid);

/// Snapshot CSV: "# t=..., params=<hash>, scheme=..." header then "x,rho,m,phi".
void write_snapshot_csv(std::ostream& os, const State& state, const Grid& grid, const ModelParams& params,
                        const SchemeConfig& cfg, const BoundaryRegime& bc);

/// Stable 64-bit FNV-1a hash of the parameter values (for snapshot metadata).
std::string params_hash(const ModelParams& params);

}  // namespace chemowave
