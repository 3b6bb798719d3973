#include "chemowave/diagnostics.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

using namespace chemowave;

namespace {

ModelParams params()
{
    ModelParams p;
    p.pressure = {1.0, 2.0};
    p.alpha = 1.0;
    p.mu = 0.5;
    p.a = 1.0;
    p.b = 2.0;
    p.rho_plus = 1.0;
    p.m_plus = 0.05;
    p.phi_plus = 0.54;
    return p;
}

// wave (constant) + correction, plus an optional density excess f
State exact_state(const ModelParams& p, const CorrectionField& c, const Grid& g, double t,
                  const std::function<double(double)>& f = {})
{
    State s(g.n_cells, t);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const auto v = eval_correction(c, g.x(i), t);
        s.rho[i] = p.rho_plus + v.rho + (f ? f(g.x(i)) : 0.0);
        s.m[i] = v.m;
        s.phi[i] = p.a / p.b * p.rho_plus + v.phi;
    }
    return s;
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

}  // namespace

TEST_CASE("wave plus correction has a vanishing perturbation")
{
    const auto p = params();
    const auto c = make_correction_A(p, 0.1);
    const Grid g(40.0, 800);
    const auto prof = ProfileField::constant(p.rho_plus);
    for (double t : {0.0, 2.0}) {
        const auto tri = perturbation(exact_state(p, c, g, t), g, prof, c, p);
        CHECK(max_abs(tri.Phi) <= 1e-14);
        CHECK(max_abs(tri.Phi_x) <= 1e-14);
        CHECK(max_abs(tri.psi) <= 1e-14);
        CHECK(max_abs(tri.zeta) <= 1e-14);
        CHECK(std::abs(tri.Phi_at_0) <= 1e-14);
        CHECK(tri.tail_mass <= 1e-14);
    }
}

TEST_CASE("Phi integrates the density perturbation from the far end")
{
    const auto p = params();
    const auto c = make_correction_A(p, 0.1);
    auto F = [](double x) { return -std::exp(-(x - 8.0) * (x - 8.0)); };
    auto f = [](double x) { return 2.0 * (x - 8.0) * std::exp(-(x - 8.0) * (x - 8.0)); };
    std::vector<double> errs;
    for (std::size_t n : {800, 1600}) {
        const Grid g(40.0, n);
        const auto tri = perturbation(exact_state(p, c, g, 1.0, f), g, ProfileField::constant(1.0), c, p);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            worst = std::max(worst, std::abs(tri.Phi[i] - F(g.x(i))));
            CHECK(tri.Phi_x[i] == doctest::Approx(f(g.x(i))).epsilon(1e-12));
        }
        errs.push_back(worst);
        // total excess integrates to zero: Phi(0) = F(0)
        CHECK(std::abs(tri.Phi_at_0 - F(0.0)) <= 1e-4);
        // Phi_x recovered by differencing Phi
        const auto d = numerics::diff1(tri.Phi, g.dx());
        CHECK(std::abs(d[n / 2] - f(g.x(n / 2))) <= 1e-3);
    }
    CHECK(errs[0] <= 1e-3);
    CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
}

TEST_CASE("norms of simple profiles")
{
    std::vector<double> zero(100, 0.0);
    for (auto k : {NormKind::L1, NormKind::L2, NormKind::Linf, NormKind::H1, NormKind::H2}) {
        CHECK(norm(zero, 0.1, k) == 0.0);
    }
    const double dx = 0.1;
    std::vector<double> bump(200);
    for (std::size_t i = 0; i < bump.size(); ++i) {
        const double x = (i + 0.5) * dx;
        bump[i] = std::exp(-(x - 5.05) * (x - 5.05));
    }
    CHECK(norm(bump, dx, NormKind::Linf) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(norm(bump, dx, NormKind::L1) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-6));
    const std::size_t n = 1000;
    const double h = 2.0 * std::numbers::pi / n;
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = std::sin((i + 0.5) * h);
    }
    CHECK(std::abs(norm(s, h, NormKind::L2) - std::sqrt(std::numbers::pi)) <= 1e-4);
    CHECK(std::abs(derivative_norm(s, h, 1) - std::sqrt(std::numbers::pi)) <= 1e-4);
    CHECK(std::abs(norm(s, h, NormKind::H1) - std::sqrt(2.0 * std::numbers::pi)) <= 1e-4);
}

TEST_CASE("fit_decay on exact power laws and exponentials")
{
    std::vector<double> t, v, e;
    for (int i = 0; i < 15; ++i) {
        const double ti = 20.0 + 6.0 * i;
        t.push_back(ti);
        v.push_back(3.0 * std::pow(1.0 + ti, -0.75));
        e.push_back(std::exp(-0.3 * ti));
    }
    const auto fit = fit_decay(t, v, 20.0, 200.0);
    CHECK(std::abs(fit.slope + 0.75) <= 1e-12);
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.n == 15);
    CHECK_FALSE(fit.super_algebraic);
    CHECK(fit_decay(t, e, 20.0, 200.0).super_algebraic);
    CHECK_THROWS_AS(fit_decay(t, v, 20.0, 40.0), std::invalid_argument);
    v[3] = 0.0;
    CHECK_THROWS_AS(fit_decay(t, v, 20.0, 200.0), DomainError);
    CHECK_THROWS_AS(fit_decay(t, std::vector<double>(3, 1.0), 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("decay row pass rule")
{
    DecayRow r{"x", -0.75, -0.8, 0.99, 20, 100, false};
    CHECK(r.pass());
    r.fitted = -1.0;
    CHECK_FALSE(r.pass());
    r.fitted = -0.75;
    r.r2 = 0.9;
    CHECK_FALSE(r.pass());
    r.r2 = 0.99;
    r.degenerate = true;
    CHECK_FALSE(r.pass());
}

TEST_CASE("equilibrium snapshots give degenerate fits and a flat monitor")
{
    auto p = params();
    p.m_plus = 0.0;
    p.phi_plus = 0.5;
    const auto c = make_correction_A(p, 0.1);
    const Grid g(20.0, 200);
    std::vector<State> snaps;
    for (int i = 0; i < 14; ++i) {
        snaps.push_back(exact_state(p, c, g, 1.0 + 10.0 * i));
    }
    SuiteOptions opt;
    opt.t_min = 0.0;
    opt.t_max = 200.0;
    const auto rep = theorem_suite(snaps, g, ProfileField::constant(1.0), c, p, opt);
    CHECK(rep.rows.size() == 11);
    for (const auto& row : rep.rows) {
        CHECK(row.degenerate);
        CHECK(std::isnan(row.fitted));
    }
    const auto mon = weighted_monitor(snaps, g, ProfileField::constant(1.0), c, p);
    CHECK_FALSE(mon.grew);
    for (const auto& q : mon.quantities) {
        CHECK(q.growth == 0.0);
    }
    std::ostringstream os;
    write_decay_csv(os, rep);
    CHECK(os.str().rfind("series_name,predicted_exponent,fitted_exponent,r2,t_min,t_max\n", 0) == 0);
    CHECK(os.str().find("Phi_L2,-0.5,nan,nan") != std::string::npos);
}

TEST_CASE("weighted quantities are quadratic in the perturbation")
{
    auto p = params();
    p.m_plus = 0.0;
    p.phi_plus = 0.5;
    const auto c = make_correction_A(p, 0.1);
    const Grid g(20.0, 200);
    auto snaps = [&](double amp) {
        std::vector<State> out;
        for (double t : {1.0, 6.0, 9.0}) {
            out.push_back(exact_state(p, c, g, t, [=](double x) { return amp * std::exp(-(x - 5.0) * (x - 5.0) / (1 + t)); }));
        }
        return out;
    };
    const auto prof = ProfileField::constant(1.0);
    const auto a = weighted_monitor(snaps(1e-3), g, prof, c, p);
    const auto b = weighted_monitor(snaps(2e-3), g, prof, c, p);
    REQUIRE(a.quantities.size() == b.quantities.size());
    for (std::size_t k = 0; k < a.quantities.size(); ++k) {
        for (std::size_t i = 0; i < 3; ++i) {
            const double va = a.quantities[k].values[i];
            const double vb = b.quantities[k].values[i];
            if (va > 1e-20) {
                CHECK(vb / va == doctest::Approx(4.0).epsilon(1e-6));
            }
        }
    }
    REQUIRE(a.find("Phi_k1") != nullptr);
    CHECK(a.find("nope") == nullptr);
}

TEST_CASE("monitor flags growth beyond the factor")
{
    auto p = params();
    p.m_plus = 0.0;
    p.phi_plus = 0.5;
    const auto c = make_correction_A(p, 0.1);
    const Grid g(20.0, 200);
    std::vector<State> snaps;
    for (double t : {1.0, 5.0, 8.0}) {
        const double amp = t < 6.0 ? 1e-3 : 1e-2;
        snaps.push_back(exact_state(p, c, g, t, [=](double x) { return amp * std::exp(-(x - 5.0) * (x - 5.0)); }));
    }
    const auto mon = weighted_monitor(snaps, g, ProfileField::constant(1.0), c, p, 5.0, 10.0);
    CHECK(mon.grew);
    CHECK(mon.find("Phi_k1")->growth > 90.0);
}

TEST_CASE("Phi_t is consistent with -psi along a computed trajectory")
{
    auto p = params();
    p.m_plus = 0.0;
    p.phi_plus = 0.5;
    const auto c = make_correction_A(p, 0.1);
    const Grid g(30.0, 600);
    BoundaryRegime bc{BoundaryKind::A};
    InitialData ic;
    auto w = [](double x) { return std::exp(-0.5 * (x - 6.0) * (x - 6.0)) + std::exp(-0.5 * (x + 6.0) * (x + 6.0)); };
    ic.rho = [=](double x) { return 1.0 + 0.05 * w(x); };
    ic.m = [](double) { return 0.0; };
    ic.phi = [=](double x) { return 0.5 * (1.0 + 0.05 * w(x)); };
    const State s0 = init_state(p, g, ic, bc);
    const double h = 0.01;
    const auto traj = run(s0, p, g, SchemeConfig{}, bc, 1.0 + h, {1.0 - h, 1.0, 1.0 + h});
    REQUIRE(traj.snapshots.size() == 4);
    const auto prof = ProfileField::constant(1.0);
    const auto lo = perturbation(traj.snapshots[1], g, prof, c, p);
    const auto mid = perturbation(traj.snapshots[2], g, prof, c, p);
    const auto hi = perturbation(traj.snapshots[3], g, prof, c, p);
    std::vector<double> diff(g.n_cells);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        diff[i] = (hi.Phi[i] - lo.Phi[i]) / (2.0 * h) - mid.Phi_t[i];
    }
    CHECK(norm(diff, g.dx(), NormKind::L2) <= 0.05 * norm(mid.psi, g.dx(), NormKind::L2));
}
