#include "chemowave/solver.hpp"

#include "chemowave/numerics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace chemowave {

void SchemeConfig::validate() const
{
    if (!(cfl > 0.0 && cfl <= 0.9)) {
        throw ConfigError("scheme.cfl must lie in (0, 0.9]");
    }
}

std::string to_string(FluxKind k)
{
    return k == FluxKind::Rusanov ? "rusanov" : "hll";
}

std::string to_string(Reconstruction r)
{
    return r == Reconstruction::FirstOrder ? "first-order" : "muscl-minmod";
}

std::string to_string(Splitting s)
{
    return s == Splitting::Lie ? "lie" : "strang";
}

std::string to_string(BoundaryKind k)
{
    return k == BoundaryKind::A ? "A" : "B";
}

FarFieldState FarFieldState::from(const ModelParams& params)
{
    FarFieldState f;
    f.rho_plus = params.rho_plus;
    f.m_plus = params.m_plus;
    f.d_plus = params.d_plus();
    f.alpha = params.alpha;
    f.a = params.a;
    f.b = params.b;
    return f;
}

double FarFieldState::m(double t) const
{
    return m_plus * std::exp(-alpha * t);
}

double FarFieldState::phi(double t) const
{
    return d_plus * std::exp(-b * t) + a / b * rho_plus;
}

State init_state(const ModelParams& params, const Grid& grid, const InitialData& ic, BoundaryRegime& regime,
                 double tail_tol)
{
    params.validate();
    if (!ic.rho || !ic.m || !ic.phi) {
        throw ConfigError("initial data must define rho, m and phi");
    }
    State s(grid.n_cells, 0.0);
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
        const double x = grid.x(i);
        s.rho[i] = ic.rho(x);
        s.m[i] = ic.m(x);
        s.phi[i] = ic.phi(x);
        if (!(s.rho[i] > 0.0) || !std::isfinite(s.rho[i])) {
            std::ostringstream msg;
            msg << "initial density must be positive (vacuum at x=" << x << ")";
            throw ConfigError(msg.str());
        }
        if (!std::isfinite(s.m[i]) || !std::isfinite(s.phi[i])) {
            throw ConfigError("initial data is not finite");
        }
    }
    const double L = grid.L;
    const double scale = std::max(1.0, std::abs(params.rho_plus));
    if (std::abs(ic.rho(L) - params.rho_plus) > tail_tol * scale ||
        std::abs(ic.m(L) - params.m_plus) > tail_tol * std::max(1.0, std::abs(params.m_plus)) ||
        std::abs(ic.phi(L) - params.phi_plus) > tail_tol * std::max(1.0, std::abs(params.phi_plus))) {
        throw ConfigError("initial data does not reach the far-field state at x = L (non-decaying tail)");
    }
    regime.rho0_at_0 = ic.rho(0.0);
    regime.m0_at_0 = ic.m(0.0);
    if (regime.kind == BoundaryKind::A && std::abs(regime.m0_at_0) > 1e-10) {
        std::ostringstream msg;
        msg << "boundary regime A requires m0(0) = 0, got " << regime.m0_at_0;
        throw ConfigError(msg.str());
    }
    return s;
}

namespace {

constexpr std::size_t kGhost = 2;
constexpr double kPositivityFloor = 1e-10;

double minmod(double a, double b)
{
    if (a * b <= 0.0) {
        return 0.0;
    }
    return std::abs(a) < std::abs(b) ? a : b;
}

struct Workspace {
    std::vector<double> rho;  // with ghosts
    std::vector<double> m;
    std::vector<double> phi;
    std::vector<double> frho;  // face fluxes, n + 1
    std::vector<double> fm;
};

class HyperbolicOperator {
public:
    HyperbolicOperator(const ModelParams& params, const Grid& grid, const SchemeConfig& cfg,
                       const BoundaryRegime& bc, double far_m, double far_phi)
        : p_(params), g_(grid), cfg_(cfg), bc_(bc), far_m_(far_m), far_phi_(far_phi)
    {
        const std::size_t n = grid.n_cells;
        ws_.rho.assign(n + 2 * kGhost, 0.0);
        ws_.m.assign(n + 2 * kGhost, 0.0);
        ws_.phi.assign(n + 2 * kGhost, 0.0);
        ws_.frho.assign(n + 1, 0.0);
        ws_.fm.assign(n + 1, 0.0);
    }

    // Evaluates d(rho, m)/dt into drho, dm; returns the mass fluxes at x = 0 and x = L.
    std::pair<double, double> rhs(const std::vector<double>& rho, const std::vector<double>& m,
                                  const std::vector<double>& phi, std::vector<double>& drho, std::vector<double>& dm)
    {
        const std::size_t n = g_.n_cells;
        load(rho, m, phi);
        const double dx = g_.dx();
        const bool muscl = cfg_.reconstruction == Reconstruction::MusclMinmod;
        auto slope = [&](const std::vector<double>& u, std::size_t k) {
            return muscl ? minmod(u[k] - u[k - 1], u[k + 1] - u[k]) : 0.0;
        };
        for (std::size_t f = 0; f <= n; ++f) {
            const std::size_t kl = f + kGhost - 1;  // padded index of the cell left of face f
            const std::size_t kr = kl + 1;
            const double rl = ws_.rho[kl] + 0.5 * slope(ws_.rho, kl);
            const double ml = ws_.m[kl] + 0.5 * slope(ws_.m, kl);
            const double rr = ws_.rho[kr] - 0.5 * slope(ws_.rho, kr);
            const double mr = ws_.m[kr] - 0.5 * slope(ws_.m, kr);
            numerical_flux(rl, ml, rr, mr, ws_.frho[f], ws_.fm[f]);
        }
        drho.resize(n);
        dm.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = i + kGhost;
            const double phix = (ws_.phi[k + 1] - ws_.phi[k - 1]) / (2.0 * dx);
            drho[i] = -(ws_.frho[i + 1] - ws_.frho[i]) / dx;
            dm[i] = -(ws_.fm[i + 1] - ws_.fm[i]) / dx + p_.mu * rho[i] * phix;
        }
        return {ws_.frho[0], ws_.frho[n]};
    }

private:
    void load(const std::vector<double>& rho, const std::vector<double>& m, const std::vector<double>& phi)
    {
        const std::size_t n = g_.n_cells;
        std::copy(rho.begin(), rho.end(), ws_.rho.begin() + kGhost);
        std::copy(m.begin(), m.end(), ws_.m.begin() + kGhost);
        std::copy(phi.begin(), phi.end(), ws_.phi.begin() + kGhost);
        const double phi_d = bc_.phi_dirichlet(p_);
        for (std::size_t j = 0; j < kGhost; ++j) {
            const std::size_t ghost = kGhost - 1 - j;
            const std::size_t mirror = kGhost + j;
            if (bc_.kind == BoundaryKind::A) {
                ws_.rho[ghost] = ws_.rho[mirror];
                ws_.m[ghost] = -ws_.m[mirror];
                ws_.phi[ghost] = ws_.phi[mirror];
            } else {
                // m_x = 0 means rho_t = 0 at the wall: rho is pinned to its initial trace
                ws_.rho[ghost] = std::max(2.0 * bc_.rho0_at_0 - ws_.rho[mirror], kPositivityFloor);
                ws_.m[ghost] = ws_.m[mirror];
                ws_.phi[ghost] = 2.0 * phi_d - ws_.phi[mirror];
            }
            const std::size_t right = kGhost + n + j;
            ws_.rho[right] = p_.rho_plus;
            ws_.m[right] = far_m_;
            ws_.phi[right] = far_phi_;
        }
    }

    void numerical_flux(double rl, double ml, double rr, double mr, double& frho, double& fm) const
    {
        const double ul = ml / rl;
        const double ur = mr / rr;
        const double cl = std::sqrt(pressure_d1(p_.pressure, rl));
        const double cr = std::sqrt(pressure_d1(p_.pressure, rr));
        const double fl_rho = ml;
        const double fr_rho = mr;
        const double fl_m = ml * ul + pressure(p_.pressure, rl);
        const double fr_m = mr * ur + pressure(p_.pressure, rr);
        if (cfg_.flux == FluxKind::Rusanov) {
            const double s = std::max(std::abs(ul) + cl, std::abs(ur) + cr);
            frho = 0.5 * (fl_rho + fr_rho) - 0.5 * s * (rr - rl);
            fm = 0.5 * (fl_m + fr_m) - 0.5 * s * (mr - ml);
            return;
        }
        const double sl = std::min(ul - cl, ur - cr);
        const double sr = std::max(ul + cl, ur + cr);
        if (sl >= 0.0) {
            frho = fl_rho;
            fm = fl_m;
        } else if (sr <= 0.0) {
            frho = fr_rho;
            fm = fr_m;
        } else {
            const double inv = 1.0 / (sr - sl);
            frho = (sr * fl_rho - sl * fr_rho + sl * sr * (rr - rl)) * inv;
            fm = (sr * fl_m - sl * fr_m + sl * sr * (mr - ml)) * inv;
        }
    }

    const ModelParams& p_;
    const Grid& g_;
    const SchemeConfig& cfg_;
    const BoundaryRegime& bc_;
    double far_m_;
    double far_phi_;
    Workspace ws_;
};

struct HyperbolicResult {
    double flux_left = 0.0;
    double flux_right = 0.0;
};

// SSP-RK2 for (rho, m) with phi frozen; far-field ghosts frozen at the given values.
HyperbolicResult hyperbolic_step(State& s, const ModelParams& params, const Grid& grid, const SchemeConfig& cfg,
                                 const BoundaryRegime& bc, double far_m, double far_phi, double dt)
{
    HyperbolicOperator op(params, grid, cfg, bc, far_m, far_phi);
    const std::size_t n = grid.n_cells;
    std::vector<double> k_rho, k_m;
    const auto [l0, r0] = op.rhs(s.rho, s.m, s.phi, k_rho, k_m);
    std::vector<double> rho1(n), m1(n);
    for (std::size_t i = 0; i < n; ++i) {
        rho1[i] = s.rho[i] + dt * k_rho[i];
        m1[i] = s.m[i] + dt * k_m[i];
        if (!(rho1[i] > kPositivityFloor)) {
            throw NumericalError("positivity lost in hyperbolic stage");
        }
    }
    const auto [l1, r1] = op.rhs(rho1, m1, s.phi, k_rho, k_m);
    for (std::size_t i = 0; i < n; ++i) {
        s.rho[i] = 0.5 * s.rho[i] + 0.5 * (rho1[i] + dt * k_rho[i]);
        s.m[i] = 0.5 * s.m[i] + 0.5 * (m1[i] + dt * k_m[i]);
    }
    return {0.5 * dt * (l0 + l1), 0.5 * dt * (r0 + r1)};
}

void damping_step(State& s, double alpha, double dt)
{
    const double factor = std::exp(-alpha * dt);
    for (double& v : s.m) {
        v *= factor;
    }
}

// Crank-Nicolson for phi_t = D phi_xx + a rho - b phi with rho frozen, from t0 to t0 + dt.
void chemo_step(State& s, const std::vector<double>& rho_src, const ModelParams& params, const Grid& grid,
                const BoundaryRegime& bc, const FarFieldState& far, double t0, double dt)
{
    const std::size_t n = grid.n_cells;
    const double dx = grid.dx();
    const double r = params.D * dt / (dx * dx);
    const double far_old = far.phi(t0);
    const double far_new = far.phi(t0 + dt);
    const double phi_d = bc.phi_dirichlet(params);
    std::vector<double> lower(n, -0.5 * r), diag(n, 1.0 + r + 0.5 * dt * params.b), upper(n, -0.5 * r), rhs(n);
    const auto& phi = s.phi;
    for (std::size_t i = 0; i < n; ++i) {
        double left = 0.0;
        if (i > 0) {
            left = phi[i - 1];
        } else if (bc.kind == BoundaryKind::A) {
            left = phi[0];
        } else {
            left = 2.0 * phi_d - phi[0];
        }
        const double right = (i + 1 < n) ? phi[i + 1] : far_old;
        const double lap = left - 2.0 * phi[i] + right;
        rhs[i] = phi[i] + 0.5 * r * lap - 0.5 * dt * params.b * phi[i] + dt * params.a * rho_src[i];
    }
    if (bc.kind == BoundaryKind::A) {
        diag[0] -= 0.5 * r;  // mirror ghost
    } else {
        diag[0] += 0.5 * r;  // odd reflection about the Dirichlet face value
        rhs[0] += r * phi_d;
    }
    rhs[n - 1] += 0.5 * r * far_new;
    numerics::solve_tridiagonal(lower, diag, upper, rhs);
    s.phi = std::move(rhs);
}

StepResult attempt_step(const State& state, const ModelParams& params, const Grid& grid, const SchemeConfig& cfg,
                        const BoundaryRegime& bc, const FarFieldState& far, double dt)
{
    StepResult out;
    State s = state;
    const double t0 = state.t;
    HyperbolicResult hyp;
    if (cfg.splitting == Splitting::Strang) {
        const double half = 0.5 * dt;
        chemo_step(s, state.rho, params, grid, bc, far, t0, half);
        damping_step(s, params.alpha, half);
        hyp = hyperbolic_step(s, params, grid, cfg, bc, far.m(t0 + half), far.phi(t0 + half), dt);
        damping_step(s, params.alpha, half);
        const std::vector<double> rho_new = s.rho;
        chemo_step(s, rho_new, params, grid, bc, far, t0 + half, half);
    } else {
        hyp = hyperbolic_step(s, params, grid, cfg, bc, far.m(t0), far.phi(t0), dt);
        damping_step(s, params.alpha, dt);
        const std::vector<double> rho_new = s.rho;
        chemo_step(s, rho_new, params, grid, bc, far, t0, dt);
    }
    s.t = t0 + dt;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s.rho[i] > kPositivityFloor) || !std::isfinite(s.m[i]) || !std::isfinite(s.phi[i])) {
            std::ostringstream msg;
            msg << "positivity/finiteness lost in cell " << i << " (rho=" << s.rho[i] << ") at t=" << s.t;
            throw NumericalError(msg.str());
        }
    }
    out.state = std::move(s);
    out.mass_flux_left = hyp.flux_left;
    out.mass_flux_right = hyp.flux_right;
    return out;
}

}  // namespace

double stable_dt(const State& state, const ModelParams& params, const Grid& grid, const SchemeConfig& cfg)
{
    double smax = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double c = std::sqrt(pressure_d1(params.pressure, state.rho[i]));
        smax = std::max(smax, std::abs(state.m[i] / state.rho[i]) + c);
    }
    const double c_far = std::sqrt(pressure_d1(params.pressure, params.rho_plus));
    smax = std::max(smax, std::abs(params.m_plus / params.rho_plus) + c_far);
    return cfg.cfl * grid.dx() / smax;
}

StepResult step(const State& state, const ModelParams& params, const Grid& grid, const SchemeConfig& cfg,
                const BoundaryRegime& bc, const FarFieldState& far, double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step: dt must be positive");
    }
    if (state.size() != grid.n_cells) {
        throw std::invalid_argument("step: state does not match grid");
    }
    try {
        return attempt_step(state, params, grid, cfg, bc, far, dt);
    } catch (const NumericalError&) {
        // Reject and retry once with two half steps.
        StepResult first = attempt_step(state, params, grid, cfg, bc, far, 0.5 * dt);
        StepResult second = attempt_step(first.state, params, grid, cfg, bc, far, 0.5 * dt);
        second.mass_flux_left += first.mass_flux_left;
        second.mass_flux_right += first.mass_flux_right;
        second.rejections = 1;
        return second;
    }
}

double total_mass(const State& state, const Grid& grid)
{
    double acc = 0.0;
    for (double r : state.rho) {
        acc += r;
    }
    return acc * grid.dx();
}

Trajectory run(const State& state0, const ModelParams& params, const Grid& grid, const SchemeConfig& cfg,
               const BoundaryRegime& bc, double t_final, const std::vector<double>& snapshot_times,
               const RunOptions& options)
{
    cfg.validate();
    if (!(t_final >= state0.t)) {
        throw std::invalid_argument("run: t_final precedes the initial time");
    }
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
        throw std::invalid_argument("run: snapshot times must be sorted");
    }
    if (!snapshot_times.empty() && snapshot_times.back() > t_final) {
        throw std::invalid_argument("run: snapshot time beyond t_final");
    }
    const auto start = std::chrono::steady_clock::now();
    const FarFieldState far = FarFieldState::from(params);

    std::vector<double> targets;
    for (double t : snapshot_times) {
        if (t > state0.t && (targets.empty() || t > targets.back())) {
            targets.push_back(t);
        }
    }
    if (targets.empty() || targets.back() < t_final) {
        if (t_final > state0.t) {
            targets.push_back(t_final);
        }
    }
    const bool final_requested =
        !snapshot_times.empty() && std::find(snapshot_times.begin(), snapshot_times.end(), t_final) != snapshot_times.end();

    Trajectory traj;
    traj.snapshots.push_back(state0);
    if (options.on_snapshot) {
        options.on_snapshot(state0);
    }
    traj.stats.initial_mass = total_mass(state0, grid);
    traj.stats.dt_min = std::numeric_limits<double>::infinity();

    State s = state0;
    std::size_t next = 0;
    while (next < targets.size()) {
        const double target = targets[next];
        double dt = stable_dt(s, params, grid, cfg);
        bool lands = false;
        if (s.t + dt >= target - 1e-12 * std::max(1.0, target)) {
            dt = target - s.t;
            lands = true;
        }
        StepResult r = step(s, params, grid, cfg, bc, far, dt);
        s = std::move(r.state);
        if (lands) {
            s.t = target;
        }
        ++traj.stats.steps;
        traj.stats.rejections += static_cast<std::size_t>(r.rejections);
        traj.stats.dt_min = std::min(traj.stats.dt_min, dt);
        traj.stats.dt_max = std::max(traj.stats.dt_max, dt);
        traj.stats.net_boundary_inflow += r.mass_flux_left - r.mass_flux_right;
        if (lands) {
            const bool is_snapshot = target < t_final || final_requested || snapshot_times.empty();
            if (is_snapshot) {
                traj.snapshots.push_back(s);
                if (options.on_snapshot) {
                    options.on_snapshot(s);
                }
            }
            ++next;
        }
        if (options.wall_clock_budget > 0.0) {
            const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
            if (el.count() > options.wall_clock_budget) {
                throw NumericalError("run: wall-clock budget exceeded");
            }
        }
    }
    if (traj.stats.steps == 0) {
        traj.stats.dt_min = 0.0;
    }
    const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
    traj.stats.wall_seconds = el.count();
    return traj;
}

AdmissibilityReport stability_guard(const State& state, const ModelParams& params)
{
    AdmissibilityReport r;
    r.min_margin = std::numeric_limits<double>::infinity();
    r.min_rho = std::numeric_limits<double>::infinity();
    for (double rho : state.rho) {
        r.min_rho = std::min(r.min_rho, rho);
        if (rho > 0.0) {
            r.min_margin = std::min(r.min_margin, q_potential_d1(params, rho));
        }
    }
    r.admissible = r.min_rho > 0.0 && r.min_margin > 0.0;
    return r;
}

std::string params_hash(const ModelParams& p)
{
    const double values[] = {p.alpha, p.mu, p.D, p.a, p.b, p.pressure.K, p.pressure.gamma,
                             p.rho_plus, p.m_plus, p.phi_plus};
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : values) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void write_snapshot_csv(std::ostream& os, const State& state, const Grid& grid, const ModelParams& params,
                        const SchemeConfig& cfg, const BoundaryRegime& bc)
{
    os << "# t=" << state.t << ", params=" << params_hash(params) << ", scheme=" << to_string(cfg.flux) << '/'
       << to_string(cfg.reconstruction) << '/' << to_string(cfg.splitting) << "/cfl=" << cfg.cfl
       << ", regime=" << to_string(bc.kind) << '\n';
    os << "x,rho,m,phi\n" << std::setprecision(17);
    for (std::size_t i = 0; i < state.size(); ++i) {
        os << grid.x(i) << ',' << state.rho[i] << ',' << state.m[i] << ',' << state.phi[i] << '\n';
    }
}

}  // namespace chemowave
