#pragma once

#include "chemowave/model.hpp"
#include "chemowave/numerics.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace chemowave {

/// Step-size and storage controls for the implicit diffusion-wave evolution.
struct NeumannWaveOptions {
    double dt_rel = 2e-3;         // dt = dt_rel * (1 + t)
    double dt_max = 0.25;
    double storage_ratio = 1.25;  // geometric spacing of stored levels
    double first_level = 0.05;
    std::vector<double> extra_levels;  // always stored exactly (e.g. snapshot times)
    double newton_tol = 1e-13;
    int max_newton = 40;
};

/// Tabulated solution rho(xi) of the similarity ODE
///   -(xi/2) rho' = (1/alpha) (q(rho))''   on 0 < xi < xi_max,
/// with rho(0) = rho_left and rho(xi_max) = rho_right.
struct SelfSimilarProfile {
    numerics::HermiteTable table;  // xi -> rho, slopes rho'(xi)
    std::vector<double> flux;      // q'(rho) rho' at the nodes
    numerics::HermiteTable flux_table;  // same, slopes -(alpha/2) xi rho' from the ODE
    double rho_left = 1.0;
    double rho_right = 1.0;
    double xi_max = 0.0;
    double initial_flux = 0.0;     // shooting parameter q'(rho) rho' at xi = 0
    int shooting_iterations = 0;

    [[nodiscard]] bool is_constant() const { return table.empty(); }
    [[nodiscard]] double value(double xi) const;
    [[nodiscard]] double derivative(double xi) const;
    /// q'(rho) rho'(xi), interpolated on its own so m_bar stays C^1.
    [[nodiscard]] double flux_at(double xi) const;
    /// rho'' from the ODE itself (needs q'' hence the parameters).
    [[nodiscard]] double second_derivative(const ModelParams& params, double xi) const;
    [[nodiscard]] const std::vector<double>& xi_grid() const { return table.nodes(); }
};

/// Nonlinear diffusion wave (rho_bar) evaluable at any (x, t).
class ProfileField {
public:
    enum class Kind { NeumannEvolved, SelfSimilar, Constant };

    static ProfileField constant(double rho_plus);
    static ProfileField self_similar(SelfSimilarProfile profile);
    static ProfileField neumann(Grid grid, double rho_plus, std::vector<double> times,
                                std::vector<std::vector<double>> levels, double delta0);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double rho_plus() const { return rho_plus_; }
    [[nodiscard]] double delta0() const { return delta0_; }

    /// Point evaluation. Throws DomainError for x < 0, t < 0 or (neumann kind) t beyond the table.
    [[nodiscard]] double rho(double x, double t) const;

    /// rho_bar sampled at the centres of `grid` at time t. Exact (no
    /// interpolation) when the grid matches the stored one and t is a stored level.
    [[nodiscard]] std::vector<double> rho_on(const Grid& grid, double t) const;

    [[nodiscard]] const SelfSimilarProfile* similarity() const { return similarity_.get(); }
    [[nodiscard]] const Grid& table_grid() const { return grid_; }
    [[nodiscard]] const std::vector<double>& times() const { return times_; }
    [[nodiscard]] const std::vector<std::vector<double>>& levels() const { return levels_; }
    [[nodiscard]] double t_max() const;

private:
    Kind kind_ = Kind::Constant;
    double rho_plus_ = 1.0;
    double delta0_ = 0.0;
    std::shared_ptr<const SelfSimilarProfile> similarity_;
    Grid grid_;
    std::vector<double> times_;
    std::vector<std::vector<double>> levels_;
};

/// Diffusion wave triple (rho_bar, m_bar, phi_bar).
struct WaveTriple {
    double rho = 0.0;
    double m = 0.0;
    double phi = 0.0;
};

/// Grid samples of the wave and the derived fields used by the diagnostics.
struct WaveOnGrid {
    std::vector<double> rho;
    std::vector<double> m;
    std::vector<double> phi;
    std::vector<double> rho_t;
};

/// Evolves rho_t = (1/alpha) q(rho)_xx from rho_plus + delta0 * w0 with a
/// zero-flux condition at x = 0 and rho = rho_plus at x = L, by backward Euler
/// with Newton iteration on the tridiagonal Jacobian.
ProfileField build_neumann_wave(const ModelParams& params, const std::function<double(double)>& w0,
                                double delta0, const Grid& grid, double t_final,
                                const NeumannWaveOptions& options = {});

/// Shooting on q'(rho) rho' at xi = 0 with bisection and RK4 integration.
/// xi_max <= 0 selects the default cutoff.
SelfSimilarProfile build_selfsimilar_wave(const ModelParams& params, double rho_left, double xi_max = 0.0,
                                          double tol = 1e-12, std::size_t n_steps = 4000);

/// Default similarity cutoff: 12 * sqrt(max(1, max q') / alpha).
double default_xi_max(const ModelParams& params, double rho_left);

WaveTriple eval_wave_triple(const ProfileField& profile, const ModelParams& params, double x, double t);

/// Wave fields on the cell centres of `grid`; m_bar and rho_bar_t from
/// 4th-order differences of q(rho_bar) with boundary-consistent ghost values
/// (neumann kind) or exact chain rule (self-similar kind).
WaveOnGrid wave_on_grid(const ProfileField& profile, const ModelParams& params, const Grid& grid, double t);

/// CSV: "x,rho_bar,t" rows for every stored level (neumann), "xi,rho_bar" otherwise.
void write_profile_csv(std::ostream& os, const ProfileField& profile);

}  // namespace chemowave
