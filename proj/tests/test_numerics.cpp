#include "chemowave/model.hpp"
#include "chemowave/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace chemowave;
using namespace chemowave::numerics;

TEST_CASE("thomas solve matches dense elimination")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 30;
    std::vector<double> lo(n), di(n), up(n), x(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = u(rng);
        up[i] = u(rng);
        di[i] = 4.0 + u(rng);
        x[i] = u(rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = di[i] * x[i] + (i > 0 ? lo[i] * x[i - 1] : 0.0) + (i + 1 < n ? up[i] * x[i + 1] : 0.0);
    }
    solve_tridiagonal(lo, di, up, rhs);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }
    std::vector<double> zero(3, 0.0), r(3, 1.0);
    CHECK_THROWS_AS(solve_tridiagonal(zero, zero, zero, r), NumericalError);
}

TEST_CASE("difference stencils converge at the advertised orders")
{
    auto err = [](int n, int which) {
        const double h = 2.0 * std::numbers::pi / n;
        std::vector<double> f(n);
        for (int i = 0; i < n; ++i) {
            f[i] = std::sin((i + 0.5) * h);
        }
        const auto d = which == 1 ? diff1(f, h) : diff2(f, h);
        double interior = 0.0, edge = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) * h;
            const double exact = which == 1 ? std::cos(x) : -std::sin(x);
            const double e = std::abs(d[i] - exact);
            (i < 2 || i >= n - 2 ? edge : interior) = std::max(i < 2 || i >= n - 2 ? edge : interior, e);
        }
        return std::pair{interior, edge};
    };
    for (int which : {1, 2}) {
        const auto [i1, e1] = err(100, which);
        const auto [i2, e2] = err(200, which);
        CHECK(std::log2(i1 / i2) > 3.8);
        CHECK(std::log2(e1 / e2) > (which == 1 ? 2.8 : 1.8));
    }
    std::vector<double> small(4, 1.0);
    CHECK_THROWS(diff1(small, 0.1));
}

TEST_CASE("diffk composes derivatives")
{
    const int n = 400;
    const double h = 0.01;
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) {
        const double x = i * h;
        f[i] = std::exp(x);
    }
    const auto d3 = diffk(f, h, 3);
    CHECK(d3[200] == doctest::Approx(std::exp(2.0)).epsilon(1e-6));
    CHECK(diffk(f, h, 0) == f);
}

TEST_CASE("hermite table reproduces cubics")
{
    std::vector<double> x, y, s;
    auto f = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t * t; };
    auto df = [](double t) { return -2.0 + 1.5 * t * t; };
    for (int i = 0; i <= 10; ++i) {
        const double t = 0.3 * i;
        x.push_back(t);
        y.push_back(f(t));
        s.push_back(df(t));
    }
    const HermiteTable tab(x, y, s);
    for (double t : {0.0, 0.11, 1.234, 2.99, 3.0}) {
        CHECK(tab.value(t) == doctest::Approx(f(t)).epsilon(1e-13));
        CHECK(tab.derivative(t) == doctest::Approx(df(t)).epsilon(1e-12));
    }
    CHECK(tab.value(-1.0) == doctest::Approx(f(0.0)));
    CHECK(tab.value(5.0) == doctest::Approx(f(3.0)));
}

TEST_CASE("least squares on an exact line")
{
    std::vector<double> x{0, 1, 2, 3, 4}, y;
    for (double v : x) {
        y.push_back(2.5 - 0.75 * v);
    }
    const auto fit = least_squares(x, y);
    CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(fit.intercept == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.n == 5);
}
