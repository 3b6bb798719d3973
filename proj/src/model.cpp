#include "chemowave/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace chemowave {

void PressureLaw::validate() const
{
    if (!(K > 0.0) || !std::isfinite(K)) {
        throw ConfigError("pressure.K must be positive");
    }
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
        throw ConfigError("pressure.gamma must be >= 1");
    }
}

namespace {

void require_positive_density(double rho)
{
    if (!(rho > 0.0)) {
        std::ostringstream msg;
        msg << "density must be positive, got " << rho;
        throw DomainError(msg.str());
    }
}

}  // namespace

double pressure(const PressureLaw& law, double rho)
{
    require_positive_density(rho);
    return law.K * std::pow(rho, law.gamma);
}

double pressure_d1(const PressureLaw& law, double rho)
{
    require_positive_density(rho);
    return law.K * law.gamma * std::pow(rho, law.gamma - 1.0);
}

double pressure_d2(const PressureLaw& law, double rho)
{
    require_positive_density(rho);
    return law.K * law.gamma * (law.gamma - 1.0) * std::pow(rho, law.gamma - 2.0);
}

void ModelParams::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be positive and finite");
        }
    };
    positive(alpha, "alpha");
    positive(mu, "mu");
    positive(D, "D");
    positive(a, "a");
    positive(b, "b");
    positive(rho_plus, "rho_plus");
    pressure.validate();
    if (!std::isfinite(m_plus)) {
        throw ConfigError("m_plus must be finite");
    }
    if (!(phi_plus >= 0.0) || !std::isfinite(phi_plus)) {
        throw ConfigError("phi_plus must be non-negative and finite");
    }
    if (!std::isfinite(d_plus())) {
        throw ConfigError("d_plus = phi_plus - (a/b) rho_plus is not finite");
    }
}

double q_potential(const ModelParams& params, double rho)
{
    return pressure(params.pressure, rho) - params.a * params.mu / (2.0 * params.b) * rho * rho;
}

double q_potential_d1(const ModelParams& params, double rho)
{
    return pressure_d1(params.pressure, rho) - params.a * params.mu / params.b * rho;
}

double q_potential_d2(const ModelParams& params, double rho)
{
    return pressure_d2(params.pressure, rho) - params.a * params.mu / params.b;
}

ValidityVerdict validate_params(const ModelParams& params, double rho_min, double rho_max,
                                std::size_t samples)
{
    if (!(rho_min > 0.0) || !(rho_max >= rho_min) || !std::isfinite(rho_max)) {
        std::ostringstream msg;
        msg << "invalid density interval [" << rho_min << ", " << rho_max << "]";
        throw std::invalid_argument(msg.str());
    }
    if (samples < 2) {
        samples = 2;
    }
    ValidityVerdict verdict;
    verdict.min_margin = std::numeric_limits<double>::infinity();
    const double span = rho_max - rho_min;
    for (std::size_t i = 0; i < samples; ++i) {
        const double rho = rho_min + span * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double margin = q_potential_d1(params, rho);
        if (margin < verdict.min_margin) {
            verdict.min_margin = margin;
            verdict.argmin_rho = rho;
        }
    }
    verdict.valid = verdict.min_margin > 0.0;
    verdict.near_degenerate = verdict.valid && verdict.min_margin < kNearDegenerateMargin;
    return verdict;
}

Grid::Grid(double length, std::size_t cells, std::size_t ghosts) : L(length), n_cells(cells), n_ghost(ghosts)
{
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw ConfigError("grid.L must be positive");
    }
    if (cells < 4) {
        throw ConfigError("grid.n_cells must be at least 4");
    }
    if (ghosts < 2) {
        throw ConfigError("grid.n_ghost must be at least 2");
    }
}

std::vector<double> Grid::centers() const
{
    std::vector<double> xs(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
        xs[i] = x(i);
    }
    return xs;
}

void State::check() const
{
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!std::isfinite(rho[i]) || !std::isfinite(m[i]) || !std::isfinite(phi[i])) {
            std::ostringstream msg;
            msg << "non-finite state in cell " << i << " at t=" << t;
            throw NumericalError(msg.str());
        }
        if (!(rho[i] > 0.0)) {
            std::ostringstream msg;
            msg << "non-positive density " << rho[i] << " in cell " << i << " at t=" << t;
            throw NumericalError(msg.str());
        }
    }
}

}  // namespace chemowave
