#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chemowave::numerics {

/// Solves a tridiagonal system in place (Thomas algorithm).
/// lower[0] and upper[n-1] are ignored. Throws NumericalError on a zero pivot.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

/// First derivative of uniformly spaced samples: 4th-order central stencil in
/// the interior, 3rd-order one-sided stencils on the two points at each end.
std::vector<double> diff1(std::span<const double> f, double h);

/// Second derivative: 4th-order central interior, 3rd-order one-sided ends.
std::vector<double> diff2(std::span<const double> f, double h);

/// k-th derivative by repeated application (k = 0 returns a copy).
std::vector<double> diffk(std::span<const double> f, double h, int k);

/// Cubic Hermite interpolant through (x_i, y_i) with prescribed slopes.
/// Nodes must be strictly increasing; evaluation clamps to the end values.
class HermiteTable {
public:
    HermiteTable() = default;
    HermiteTable(std::vector<double> x, std::vector<double> y, std::vector<double> slope);

    [[nodiscard]] double value(double x) const;
    [[nodiscard]] double derivative(double x) const;
    [[nodiscard]] double x_min() const { return x_.front(); }
    [[nodiscard]] double x_max() const { return x_.back(); }
    [[nodiscard]] bool empty() const { return x_.empty(); }
    [[nodiscard]] const std::vector<double>& nodes() const { return x_; }
    [[nodiscard]] const std::vector<double>& values() const { return y_; }
    [[nodiscard]] const std::vector<double>& slopes() const { return s_; }

private:
    [[nodiscard]] std::size_t locate(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> s_;
    bool uniform_ = false;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace chemowave::numerics
