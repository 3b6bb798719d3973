#pragma once

#include "chemowave/model.hpp"
#include "chemowave/numerics.hpp"

#include <cmath>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace chemowave {

/// Normalised smooth bump q0(x) = C exp(-1/(x(1-x))) on (0, 1), zero elsewhere,
/// with unit integral, and its primitive Q0(x) = int_0^x q0.
class Mollifier {
public:
    explicit Mollifier(std::size_t table_points = 10001);

    /// k-th derivative of q0, k in [0, 3].
    [[nodiscard]] double q0(double x, int k = 0) const;
    /// Q0(x); 0 for x <= 0 and 1 for x >= 1.
    [[nodiscard]] double primitive(double x) const;
    /// 1 - Q0(x) = int_x^inf q0, evaluated without cancellation near x = 1.
    [[nodiscard]] double tail(double x) const;
    [[nodiscard]] double normalization() const { return norm_; }
    [[nodiscard]] const numerics::HermiteTable& primitive_table() const { return table_; }

private:
    double norm_ = 1.0;
    numerics::HermiteTable table_;
};

/// Process-wide default mollifier (built once, immutable).
const Mollifier& default_mollifier();

enum class CorrectionCase { A, B };

/// Closed-form correction (rho_hat, m_hat, phi_hat). Case A absorbs the far-field
/// gaps m_plus e^{-alpha t}, d_plus e^{-b t} and vanishes at x = 0 with all
/// derivatives; case B additionally carries m0(0) e^{-alpha t} at the boundary.
struct CorrectionField {
    CorrectionCase kind = CorrectionCase::A;
    double epsilon0 = 0.1;
    ModelParams params{};
    double m0_at_0 = 0.0;  // case B only
    const Mollifier* mollifier = &default_mollifier();

    /// |b - alpha| below this uses the b = alpha closed form.
    static constexpr double kEqualRatesThreshold = 1e-8;

    [[nodiscard]] bool equal_rates() const { return std::abs(params.b - params.alpha) < kEqualRatesThreshold; }
    /// Coefficient A in rho_hat = A eps0 q0(eps0 x) e^{-alpha t}.
    [[nodiscard]] double rho_amplitude() const;
};

CorrectionField make_correction_A(const ModelParams& params, double epsilon0);
CorrectionField make_correction_B(const ModelParams& params, double epsilon0, double m0_at_0);

struct CorrectionValues {
    double rho = 0.0;
    double m = 0.0;
    double phi = 0.0;
};

CorrectionValues eval_correction_A(const CorrectionField& c, double x, double t);
CorrectionValues eval_correction_B(const CorrectionField& c, double x, double t);
CorrectionValues eval_correction(const CorrectionField& c, double x, double t);

/// Analytic x-derivatives of order k (0..3) of (rho_hat, m_hat, phi_hat).
CorrectionValues eval_correction_dx(const CorrectionField& c, double x, double t, int k);

/// Analytic time derivatives (rho_hat_t, m_hat_t, phi_hat_t).
CorrectionValues eval_correction_dt(const CorrectionField& c, double x, double t);

/// delta0 = (int (rho0 - rho_plus) - m_plus / alpha) / int w0, midpoint rule on the grid.
double compute_delta0(const ModelParams& params, std::span<const double> rho0, std::span<const double> w0,
                      const Grid& grid);
double compute_delta0(const ModelParams& params, const std::function<double(double)>& rho0,
                      const std::function<double(double)>& w0, const Grid& grid);

enum class NormKind { L1, L2, Linf, H1, H2 };

struct CorrectionDecayRow {
    double t = 0.0;
    double value = 0.0;
};

struct CorrectionDecayTable {
    int k = 0;
    NormKind norm = NormKind::L2;
    std::vector<CorrectionDecayRow> rows;
    double fitted_rate = 0.0;        // from log(value) vs t
    double epsilon_ratio = 0.0;      // ||.||(2 eps0) / ||.||(eps0) at t = 0
    double predicted_ratio = 0.0;    // 2^(k + 1 - 1/p)
};

/// ||d_x^k rho_hat(t)||_{L^p} on a time grid, the fitted exponential rate and
/// the eps0-doubling ratio. Norm must be L1, L2 or Linf; k in [0, 3].
CorrectionDecayTable correction_decay_scan(const CorrectionField& c, NormKind norm, int k,
                                           std::span<const double> times);

/// L^p norm of d_x^k rho_hat(., t) by fine quadrature over the scaled support.
double correction_rho_norm(const CorrectionField& c, NormKind norm, int k, double t);

/// CSV "x,rho_hat,m_hat,phi_hat" at time t on the given positions.
void write_correction_csv(std::ostream& os, const CorrectionField& c, std::span<const double> xs, double t);

}  // namespace chemowave
