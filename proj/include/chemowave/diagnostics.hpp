#pragma once

#include "chemowave/correction.hpp"
#include "chemowave/model.hpp"
#include "chemowave/profile.hpp"
#include "chemowave/solver.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace chemowave {

/// Perturbation of a state from wave + correction:
///   Phi = -int_x^L (rho - rho_bar - rho_hat), psi = m - m_bar - m_hat, zeta = phi - phi_bar - phi_hat.
struct PerturbationTriple {
    double t = 0.0;
    std::vector<double> Phi;      // at cell centres
    std::vector<double> Phi_x;    // rho - rho_bar - rho_hat
    std::vector<double> Phi_t;    // = -psi
    std::vector<double> psi;
    std::vector<double> zeta;
    std::vector<double> zeta_t;   // from the phi equation
    std::vector<double> rho_gap;  // rho - rho_bar (no correction)
    std::vector<double> m_gap;
    std::vector<double> phi_gap;
    double Phi_at_0 = 0.0;        // Phi extrapolated to the face x = 0
    double tail_mass = 0.0;       // int |rho - rho_bar - rho_hat| over the last 10% of the domain
    double quadrature_tol = 0.0;  // spatial quadrature estimate (time part is added by the caller)
};

PerturbationTriple perturbation(const State& state, const Grid& grid, const ProfileField& profile,
                                const CorrectionField& corr, const ModelParams& params);

/// Composite-trapezoid norms of cell-centred samples. H1/H2 use the 4th-order
/// difference stencils for the derivatives.
double norm(std::span<const double> f, double dx, NormKind which);

/// ||d^k f / dx^k||_{L2}.
double derivative_norm(std::span<const double> f, double dx, int k);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
    double t_min = 0.0;
    double t_max = 0.0;
    bool super_algebraic = false;  // log-linear fit in t beats the log-log fit
};

/// Least-squares slope of log(value) against log(1 + t) over [t_min, t_max].
/// Needs at least 10 samples; throws DomainError on non-positive values.
DecayFit fit_decay(std::span<const double> times, std::span<const double> values, double t_min, double t_max);

struct NormSeries {
    std::string name;
    double predicted = 0.0;  // theoretical exponent
    std::vector<double> times;
    std::vector<double> values;
};

struct DecayRow {
    std::string series;
    double predicted = 0.0;
    double fitted = 0.0;  // NaN when the fit is degenerate (series at floor or too short)
    double r2 = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    bool degenerate = false;

    [[nodiscard]] bool pass(double tol = 0.2, double r2_min = 0.98) const;
};

struct DecayReport {
    std::vector<NormSeries> series;
    std::vector<DecayRow> rows;

    [[nodiscard]] const DecayRow* find(const std::string& name) const;
    [[nodiscard]] const NormSeries* find_series(const std::string& name) const;
};

struct SuiteOptions {
    double t_min = 20.0;
    double t_max = -1.0;        // <= 0 selects 0.8 * last snapshot time
    double floor = 1e-13;       // series whose window maximum is below this are degenerate
    unsigned workers = 0;       // 0 = hardware concurrency
};

/// Norm series and fits: ||d^k Phi|| (k=0,1,2) vs -(k+1)/2, ||d^k psi|| (k=0,1,2)
/// vs -(k+2)/2, ||d^k zeta|| (k=0,1) vs -(k+1)/2, sup |rho - rho_bar| (-3/4),
/// sup |m - m_bar| (-5/4), sup |phi - phi_bar| (-3/4).
DecayReport theorem_suite(const std::vector<State>& snapshots, const Grid& grid, const ProfileField& profile,
                          const CorrectionField& corr, const ModelParams& params, const SuiteOptions& options = {});

struct WeightedQuantity {
    std::string name;
    std::vector<double> times;
    std::vector<double> values;
    double running_max = 0.0;
    double growth = 0.0;  // max after t_after / value at the first snapshot >= t_after
};

struct WeightedNormMonitor {
    std::vector<WeightedQuantity> quantities;
    double t_after = 5.0;
    double factor = 10.0;
    bool grew = false;  // any quantity with growth > factor

    [[nodiscard]] const WeightedQuantity* find(const std::string& name) const;
};

/// Weighted a-priori quantities (1+t)^k ||d^k Phi||^2, (1+t)^(k+2) ||d^k Phi_t||^2,
/// (1+t)^(k+1) ||d^k [zeta, zeta_x]||^2, (1+t)^(k+3) ||d^k [zeta_t, zeta_xt]||^2,
/// (1+t)^2 ||(d^3 Phi, d^3 zeta)||^2 at every snapshot.
WeightedNormMonitor weighted_monitor(const std::vector<State>& snapshots, const Grid& grid,
                                     const ProfileField& profile, const CorrectionField& corr,
                                     const ModelParams& params, double t_after = 5.0, double factor = 10.0);

/// "series_name,predicted_exponent,fitted_exponent,r2,t_min,t_max"
void write_decay_csv(std::ostream& os, const DecayReport& report);
/// "t,name,value"
void write_norm_csv(std::ostream& os, const DecayReport& report);
void write_weighted_csv(std::ostream& os, const WeightedNormMonitor& monitor);

}  // namespace chemowave
