#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemowave {

/// Raised when a function is evaluated outside its mathematical domain
/// (non-positive density, bad interval, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised for inconsistent configuration (bad parameters, incompatible data).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (positivity loss, Newton divergence,
/// bracket failure, singular tridiagonal system).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Power-law pressure p(rho) = K * rho^gamma.
struct PressureLaw {
    double K = 1.0;
    double gamma = 2.0;

    void validate() const;
};

double pressure(const PressureLaw& law, double rho);
double pressure_d1(const PressureLaw& law, double rho);
double pressure_d2(const PressureLaw& law, double rho);

/// Physical constants of the damped chemotaxis system plus the far-field state.
struct ModelParams {
    double alpha = 1.0;  // damping rate
    double mu = 1.0;     // chemotactic sensitivity
    double D = 1.0;      // chemoattractant diffusivity
    double a = 1.0;      // secretion rate
    double b = 1.0;      // death rate
    PressureLaw pressure{};
    double rho_plus = 1.0;
    double m_plus = 0.0;
    double phi_plus = 1.0;

    /// phi_plus - (a/b) rho_plus: far-field chemoattractant excess.
    [[nodiscard]] double d_plus() const { return phi_plus - a / b * rho_plus; }

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;
};

/// q(rho) = p(rho) - a mu / (2 b) rho^2, the effective potential of the
/// reduced (Darcy) equation.
double q_potential(const ModelParams& params, double rho);
double q_potential_d1(const ModelParams& params, double rho);
double q_potential_d2(const ModelParams& params, double rho);

/// Below this margin the reduced diffusion equation is treated as degenerate.
inline constexpr double kNearDegenerateMargin = 1e-5;

struct ValidityVerdict {
    bool valid = false;
    bool near_degenerate = false;
    double min_margin = 0.0;   // min of q'(rho) over the sampled interval
    double argmin_rho = 0.0;
};

/// Samples q'(rho) = p'(rho) - (a mu / b) rho on [rho_min, rho_max].
/// The system is only well posed (parabolic reduced equation, positive
/// definite coupling matrix) where this margin is positive.
ValidityVerdict validate_params(const ModelParams& params, double rho_min, double rho_max,
                                std::size_t samples = 2001);

/// Uniform cell-centred discretisation of [0, L].
struct Grid {
    double L = 1.0;
    std::size_t n_cells = 1;
    std::size_t n_ghost = 2;

    Grid() = default;
    Grid(double length, std::size_t cells, std::size_t ghosts = 2);

    [[nodiscard]] double dx() const { return L / static_cast<double>(n_cells); }
    [[nodiscard]] double x(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }
    [[nodiscard]] std::vector<double> centers() const;
};

/// Cell values of (rho, m, phi) at one time level.
struct State {
    std::vector<double> rho;
    std::vector<double> m;
    std::vector<double> phi;
    double t = 0.0;

    State() = default;
    explicit State(std::size_t n, double time = 0.0)
        : rho(n, 0.0), m(n, 0.0), phi(n, 0.0), t(time) {}

    [[nodiscard]] std::size_t size() const { return rho.size(); }

    /// Throws NumericalError on non-positive density or non-finite fields.
    void check() const;
};

}  // namespace chemowave
