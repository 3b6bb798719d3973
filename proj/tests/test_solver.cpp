#include "chemowave/solver.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace chemowave;

namespace {

ModelParams base_params()
{
    ModelParams p;
    p.pressure = {1.0, 2.0};
    p.alpha = 1.0;
    p.mu = 0.5;
    p.a = 1.0;
    p.b = 2.0;
    p.rho_plus = 1.0;
    p.m_plus = 0.0;
    p.phi_plus = 0.5;
    return p;
}

InitialData bump_data(const ModelParams& p, double amp, double centre = 5.0)
{
    auto w = [=](double x) {
        return std::exp(-0.5 * (x - centre) * (x - centre)) + std::exp(-0.5 * (x + centre) * (x + centre));
    };
    InitialData ic;
    ic.rho = [=](double x) { return p.rho_plus + amp * w(x); };
    ic.m = [](double) { return 0.0; };
    ic.phi = [=](double x) { return p.a / p.b * (p.rho_plus + amp * w(x)); };
    return ic;
}

double l1_diff(const std::vector<double>& a, const std::vector<double>& b, double dx)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::abs(a[i] - b[i]) * dx;
    }
    return s;
}

// average pairs of fine cells onto the coarse grid
std::vector<double> coarsen(const std::vector<double>& f)
{
    std::vector<double> c(f.size() / 2);
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = 0.5 * (f[2 * i] + f[2 * i + 1]);
    }
    return c;
}

}  // namespace

TEST_CASE("constant equilibrium is preserved to round-off")
{
    const auto p = base_params();
    const Grid g(20.0, 200);
    for (auto kind : {BoundaryKind::A, BoundaryKind::B}) {
        BoundaryRegime bc{kind};
        const State s0 = init_state(p, g, bump_data(p, 0.0), bc);
        const auto far = FarFieldState::from(p);
        State s = s0;
        const double dt = stable_dt(s, p, g, SchemeConfig{});
        for (int k = 0; k < 10000; ++k) {
            s = step(s, p, g, SchemeConfig{}, bc, far, dt).state;
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            worst = std::max({worst, std::abs(s.rho[i] - 1.0), std::abs(s.m[i]), std::abs(s.phi[i] - 0.5)});
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("init_state validation")
{
    const auto p = base_params();
    const Grid g(20.0, 100);
    BoundaryRegime bc{BoundaryKind::A};
    auto ic = bump_data(p, 0.1);
    auto bad = ic;
    bad.rho = [](double x) { return x < 3.0 ? 0.0 : 1.0; };
    CHECK_THROWS_AS(init_state(p, g, bad, bc), ConfigError);
    bad = ic;
    bad.rho = [](double x) { return 1.0 + 0.01 * x; };  // never reaches rho_plus
    CHECK_THROWS_AS(init_state(p, g, bad, bc), ConfigError);
    bad = ic;
    bad.m = [](double) { return 0.01; };
    CHECK_THROWS_AS(init_state(p, g, bad, bc), ConfigError);
    BoundaryRegime b{BoundaryKind::B};
    auto pb = p;
    pb.m_plus = 0.01;
    bad.rho = ic.rho;
    bad.phi = ic.phi;
    CHECK_NOTHROW(init_state(pb, g, bad, b));
    CHECK(b.m0_at_0 == doctest::Approx(0.01));
    CHECK(b.rho0_at_0 == doctest::Approx(ic.rho(0.0)));
}

TEST_CASE("mass balance: interior change equals boundary fluxes")
{
    auto p = base_params();
    p.m_plus = 0.05;
    const Grid g(30.0, 300);
    for (auto kind : {BoundaryKind::A, BoundaryKind::B}) {
        BoundaryRegime bc{kind};
        auto ic = bump_data(p, 0.1);
        ic.m = [=](double x) { return p.m_plus * std::tanh(x) * std::tanh(x); };
        const State s0 = init_state(p, g, ic, bc, 1e-4);
        const auto traj = run(s0, p, g, SchemeConfig{}, bc, 3.0, {});
        const double change = total_mass(traj.snapshots.back(), g) - traj.stats.initial_mass;
        CHECK(std::abs(change - traj.stats.net_boundary_inflow) <= 1e-8);
    }
}

TEST_CASE("case A wall carries no mass")
{
    const auto p = base_params();
    const Grid g(20.0, 200);
    BoundaryRegime bc{BoundaryKind::A};
    const State s0 = init_state(p, g, bump_data(p, 0.2, 2.0), bc);
    const auto far = FarFieldState::from(p);
    const auto r = step(s0, p, g, SchemeConfig{}, bc, far, stable_dt(s0, p, g, SchemeConfig{}));
    CHECK(std::abs(r.mass_flux_left) <= 1e-15);
}

TEST_CASE("spatially uniform far-field state is tracked")
{
    auto p = base_params();
    p.m_plus = 0.2;
    const Grid g(10.0, 100);
    BoundaryRegime bc{BoundaryKind::B};
    InitialData ic;
    ic.rho = [](double) { return 1.0; };
    ic.m = [=](double) { return p.m_plus; };
    ic.phi = [](double) { return 0.5; };
    const State s0 = init_state(p, g, ic, bc);
    const auto traj = run(s0, p, g, SchemeConfig{}, bc, 4.0, {1.0, 4.0});
    const auto far = FarFieldState::from(p);
    REQUIRE(traj.snapshots.size() == 3);
    for (const auto& s : traj.snapshots) {
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            CHECK(std::abs(s.rho[i] - 1.0) <= 1e-6);
            CHECK(std::abs(s.m[i] - far.m(s.t)) <= 1e-6);
            CHECK(std::abs(s.phi[i] - far.phi(s.t)) <= 1e-6);
        }
    }
}

TEST_CASE("run: snapshot bookkeeping")
{
    const auto p = base_params();
    const Grid g(20.0, 100);
    BoundaryRegime bc{BoundaryKind::A};
    const State s0 = init_state(p, g, bump_data(p, 0.1), bc);
    const auto none = run(s0, p, g, SchemeConfig{}, bc, 0.0, {});
    REQUIRE(none.snapshots.size() == 1);
    CHECK(none.stats.steps == 0);

    const auto traj = run(s0, p, g, SchemeConfig{}, bc, 2.0, {0.1, 0.5, 1.7});
    REQUIRE(traj.snapshots.size() == 4);
    CHECK(traj.snapshots[1].t == 0.1);
    CHECK(traj.snapshots[2].t == 0.5);
    CHECK(traj.snapshots[3].t == 1.7);

    const auto with_final = run(s0, p, g, SchemeConfig{}, bc, 1.0, {0.5, 1.0});
    CHECK(with_final.snapshots.back().t == 1.0);
    CHECK(with_final.snapshots.size() == 3);

    CHECK_THROWS_AS(run(s0, p, g, SchemeConfig{}, bc, 2.0, {1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(run(s0, p, g, SchemeConfig{}, bc, 2.0, {3.0}), std::invalid_argument);
    SchemeConfig bad;
    bad.cfl = 1.5;
    CHECK_THROWS_AS(run(s0, p, g, bad, bc, 1.0, {}), ConfigError);
}

TEST_CASE("runs are deterministic")
{
    const auto p = base_params();
    const Grid g(20.0, 120);
    BoundaryRegime bc{BoundaryKind::A};
    const State s0 = init_state(p, g, bump_data(p, 0.1), bc);
    const auto a = run(s0, p, g, SchemeConfig{}, bc, 1.0, {});
    const auto b = run(s0, p, g, SchemeConfig{}, bc, 1.0, {});
    CHECK(a.snapshots.back().rho == b.snapshots.back().rho);
    CHECK(a.snapshots.back().phi == b.snapshots.back().phi);
}

TEST_CASE("muscl scheme converges at second order on smooth data")
{
    const auto p = base_params();
    auto solve = [&](std::size_t n) {
        const Grid g(20.0, n);
        BoundaryRegime bc{BoundaryKind::A};
        SchemeConfig cfg;
        cfg.cfl = 0.3;
        const State s0 = init_state(p, g, bump_data(p, 0.05, 8.0), bc);
        return run(s0, p, g, cfg, bc, 1.0, {}).snapshots.back().rho;
    };
    const auto r1 = solve(200), r2 = solve(400), r3 = solve(800);
    const double e1 = l1_diff(r1, coarsen(r2), 0.1);
    const double e2 = l1_diff(r2, coarsen(r3), 0.05);
    CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("first-order reconstruction still converges")
{
    const auto p = base_params();
    auto solve = [&](std::size_t n) {
        const Grid g(20.0, n);
        BoundaryRegime bc{BoundaryKind::A};
        SchemeConfig cfg;
        cfg.reconstruction = Reconstruction::FirstOrder;
        cfg.flux = FluxKind::HLL;
        cfg.splitting = Splitting::Lie;
        const State s0 = init_state(p, g, bump_data(p, 0.05, 8.0), bc);
        return run(s0, p, g, cfg, bc, 1.0, {}).snapshots.back().rho;
    };
    const auto r1 = solve(200), r2 = solve(400), r3 = solve(800);
    const double e1 = l1_diff(r1, coarsen(r2), 0.1);
    const double e2 = l1_diff(r2, coarsen(r3), 0.05);
    CHECK(e2 < e1);
    CHECK(std::log2(e1 / e2) >= 0.7);
}

TEST_CASE("stability guard")
{
    auto p = base_params();
    State s(3);
    s.rho = {0.5, 1.0, 2.0};
    auto r = stability_guard(s, p);
    CHECK(r.admissible);
    CHECK(r.min_rho == 0.5);
    CHECK(r.min_margin == doctest::Approx(q_potential_d1(p, 0.5)));
    p.pressure = {1.0, 1.0};
    p.mu = 4.0;
    CHECK_FALSE(stability_guard(s, p).admissible);
}

TEST_CASE("positivity loss is reported")
{
    const auto p = base_params();
    const Grid g(10.0, 50);
    BoundaryRegime bc{BoundaryKind::A};
    State s = init_state(p, g, bump_data(p, 0.0), bc);
    // strong collision in the middle drains the cells beyond recovery
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        s.m[i] = g.x(i) < 5.0 ? -30.0 : 30.0;
    }
    CHECK_THROWS_AS(step(s, p, g, SchemeConfig{}, bc, FarFieldState::from(p), 0.2), NumericalError);
    CHECK_THROWS_AS(step(s, p, g, SchemeConfig{}, bc, FarFieldState::from(p), 0.0), std::invalid_argument);
}

TEST_CASE("snapshot csv header and hash")
{
    const auto p = base_params();
    const Grid g(4.0, 4);
    BoundaryRegime bc{BoundaryKind::B};
    State s(4, 2.5);
    s.rho.assign(4, 1.0);
    std::ostringstream os;
    write_snapshot_csv(os, s, g, p, SchemeConfig{}, bc);
    const auto text = os.str();
    CHECK(text.rfind("# t=2.5, params=" + params_hash(p) + ", scheme=rusanov/muscl-minmod/strang/cfl=0.45, regime=B\n", 0) == 0);
    CHECK(text.find("x,rho,m,phi\n") != std::string::npos);
    CHECK(params_hash(p).size() == 16);
    auto q = p;
    q.mu = 0.5000001;
    CHECK(params_hash(q) != params_hash(p));
}
