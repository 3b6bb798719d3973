#include "chemowave/numerics.hpp"

#include "chemowave/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemowave::numerics {

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs)
{
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) {
        throw std::invalid_argument("solve_tridiagonal: size mismatch");
    }
    if (n == 0) {
        return;
    }
    std::vector<double> c(n);
    double pivot = diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
        throw NumericalError("tridiagonal solve: zero pivot in row 0");
    }
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw NumericalError("tridiagonal solve: zero pivot in row " + std::to_string(i));
        }
        c[i] = (i + 1 < n) ? upper[i] / pivot : 0.0;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

std::vector<double> diff1(std::span<const double> f, double h)
{
    const std::size_t n = f.size();
    if (n < 5) {
        throw std::invalid_argument("diff1 needs at least 5 samples");
    }
    std::vector<double> d(n);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    d[0] = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h);
    d[1] = (-2.0 * f[0] - 3.0 * f[1] + 6.0 * f[2] - f[3]) / (6.0 * h);
    const std::size_t e = n - 1;
    d[e] = (11.0 * f[e] - 18.0 * f[e - 1] + 9.0 * f[e - 2] - 2.0 * f[e - 3]) / (6.0 * h);
    d[e - 1] = (2.0 * f[e] + 3.0 * f[e - 1] - 6.0 * f[e - 2] + f[e - 3]) / (6.0 * h);
    return d;
}

std::vector<double> diff2(std::span<const double> f, double h)
{
    const std::size_t n = f.size();
    if (n < 5) {
        throw std::invalid_argument("diff2 needs at least 5 samples");
    }
    const double h2 = 12.0 * h * h;
    std::vector<double> d(n);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / h2;
    }
    d[0] = (35.0 * f[0] - 104.0 * f[1] + 114.0 * f[2] - 56.0 * f[3] + 11.0 * f[4]) / h2;
    d[1] = (11.0 * f[0] - 20.0 * f[1] + 6.0 * f[2] + 4.0 * f[3] - f[4]) / h2;
    const std::size_t e = n - 1;
    d[e] = (35.0 * f[e] - 104.0 * f[e - 1] + 114.0 * f[e - 2] - 56.0 * f[e - 3] + 11.0 * f[e - 4]) / h2;
    d[e - 1] = (11.0 * f[e] - 20.0 * f[e - 1] + 6.0 * f[e - 2] + 4.0 * f[e - 3] - f[e - 4]) / h2;
    return d;
}

std::vector<double> diffk(std::span<const double> f, double h, int k)
{
    std::vector<double> out(f.begin(), f.end());
    while (k >= 2) {
        out = diff2(out, h);
        k -= 2;
    }
    if (k == 1) {
        out = diff1(out, h);
    }
    return out;
}

HermiteTable::HermiteTable(std::vector<double> x, std::vector<double> y, std::vector<double> slope)
    : x_(std::move(x)), y_(std::move(y)), s_(std::move(slope))
{
    if (x_.size() < 2 || y_.size() != x_.size() || s_.size() != x_.size()) {
        throw std::invalid_argument("HermiteTable: need >= 2 nodes with matching values and slopes");
    }
    for (std::size_t i = 1; i < x_.size(); ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw std::invalid_argument("HermiteTable: nodes must be strictly increasing");
        }
    }
    const double h0 = x_[1] - x_[0];
    uniform_ = true;
    for (std::size_t i = 1; i < x_.size() && uniform_; ++i) {
        uniform_ = std::abs((x_[i] - x_[i - 1]) - h0) <= 1e-9 * h0;
    }
}

std::size_t HermiteTable::locate(double x) const
{
    const std::size_t last = x_.size() - 2;
    if (uniform_) {
        const double h = (x_.back() - x_.front()) / static_cast<double>(x_.size() - 1);
        const auto i = static_cast<std::size_t>(std::max(0.0, std::floor((x - x_.front()) / h)));
        return std::min(i, last);
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - x_.begin() - 1));
    return std::min(i, last);
}

double HermiteTable::value(double x) const
{
    if (x <= x_.front()) {
        return y_.front();
    }
    if (x >= x_.back()) {
        return y_.back();
    }
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * s_[i] + h01 * y_[i + 1] + h11 * h * s_[i + 1];
}

double HermiteTable::derivative(double x) const
{
    if (x < x_.front() || x > x_.back()) {
        return 0.0;
    }
    if (x == x_.back()) {
        return s_.back();
    }
    const std::size_t i = locate(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s;
    const double d00 = (6.0 * s2 - 6.0 * s) / h;
    const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
    const double d01 = (-6.0 * s2 + 6.0 * s) / h;
    const double d11 = 3.0 * s2 - 2.0 * s;
    return d00 * y_[i] + d10 * s_[i] + d01 * y_[i + 1] + d11 * s_[i + 1];
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("least_squares: need >= 2 paired samples");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("least_squares: abscissae are all equal");
    }
    LinearFit fit;
    fit.n = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

}  // namespace chemowave::numerics
