#include "chemowave/profile.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace chemowave {

// ---------------------------------------------------------------------------
// Self-similar profile
// ---------------------------------------------------------------------------

double SelfSimilarProfile::value(double xi) const
{
    if (is_constant()) {
        return rho_right;
    }
    if (xi >= table.x_max()) {
        return rho_right;
    }
    return table.value(std::max(xi, 0.0));
}

double SelfSimilarProfile::derivative(double xi) const
{
    if (is_constant() || xi >= table.x_max()) {
        return 0.0;
    }
    if (xi <= 0.0) {
        return table.slopes().front();
    }
    return table.derivative(xi);
}

double SelfSimilarProfile::flux_at(double xi) const
{
    if (is_constant() || xi >= flux_table.x_max()) {
        return 0.0;
    }
    return flux_table.value(std::max(xi, 0.0));
}

double SelfSimilarProfile::second_derivative(const ModelParams& params, double xi) const
{
    if (is_constant() || xi >= table.x_max()) {
        return 0.0;
    }
    const double r = value(xi);
    const double r1 = derivative(xi);
    const double q1 = q_potential_d1(params, r);
    const double q2 = q_potential_d2(params, r);
    return (-0.5 * params.alpha * std::max(xi, 0.0) * r1 - q2 * r1 * r1) / q1;
}

double default_xi_max(const ModelParams& params, double rho_left)
{
    const double lo = std::min(rho_left, params.rho_plus);
    const double hi = std::max(rho_left, params.rho_plus);
    double qmax = 1.0;
    for (int i = 0; i <= 64; ++i) {
        const double r = lo + (hi - lo) * i / 64.0;
        qmax = std::max(qmax, q_potential_d1(params, r));
    }
    return 12.0 * std::sqrt(qmax / params.alpha);
}

namespace {

struct ShotResult {
    double end_value = 0.0;
    bool left_admissible_range = false;
};

// Integrates (rho, F) with F = q'(rho) rho' from xi = 0.
//   rho' = F / q'(rho),   F' = -(alpha xi / 2) F / q'(rho)
// When `out` is given, the trajectory is recorded.
ShotResult shoot(const ModelParams& params, double rho_left, double flux0, double xi_max, std::size_t n_steps,
                 double rho_lo, double rho_hi, std::vector<double>* rho_out = nullptr,
                 std::vector<double>* flux_out = nullptr)
{
    const double h = xi_max / static_cast<double>(n_steps);
    const double half_alpha = 0.5 * params.alpha;
    // Admissible band: a little beyond the endpoint range so overshoot is still measurable.
    const double pad = 0.5 * (rho_hi - rho_lo) + 1e-12;
    const double band_lo = std::max(rho_lo - pad, 0.5 * rho_lo);
    const double band_hi = rho_hi + pad;

    auto rhs = [&](double xi, double r, double f, double& dr, double& df) -> bool {
        if (!(r > band_lo) || !(r < band_hi)) {
            return false;
        }
        const double qp = q_potential_d1(params, r);
        if (!(qp > 0.0)) {
            return false;
        }
        dr = f / qp;
        df = -half_alpha * xi * dr;
        return true;
    };

    double r = rho_left;
    double f = flux0;
    if (rho_out != nullptr) {
        rho_out->assign(1, r);
        flux_out->assign(1, f);
    }
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double xi = h * static_cast<double>(k);
        double k1r = 0, k1f = 0, k2r = 0, k2f = 0, k3r = 0, k3f = 0, k4r = 0, k4f = 0;
        const bool ok = rhs(xi, r, f, k1r, k1f) &&
                        rhs(xi + 0.5 * h, r + 0.5 * h * k1r, f + 0.5 * h * k1f, k2r, k2f) &&
                        rhs(xi + 0.5 * h, r + 0.5 * h * k2r, f + 0.5 * h * k2f, k3r, k3f) &&
                        rhs(xi + h, r + h * k3r, f + h * k3f, k4r, k4f);
        if (!ok) {
            ShotResult res;
            res.left_admissible_range = true;
            res.end_value = (flux0 > 0.0) ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
            return res;
        }
        r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        if (rho_out != nullptr) {
            rho_out->push_back(r);
            flux_out->push_back(f);
        }
    }
    return {r, false};
}

}  // namespace

SelfSimilarProfile build_selfsimilar_wave(const ModelParams& params, double rho_left, double xi_max, double tol,
                                          std::size_t n_steps)
{
    params.validate();
    if (!(rho_left > 0.0)) {
        throw DomainError("build_selfsimilar_wave: rho_left must be positive");
    }
    const double rho_right = params.rho_plus;
    const double lo = std::min(rho_left, rho_right);
    const double hi = std::max(rho_left, rho_right);
    const auto verdict = validate_params(params, lo, hi);
    if (!verdict.valid) {
        std::ostringstream msg;
        msg << "build_selfsimilar_wave: q'(rho) <= 0 at rho=" << verdict.argmin_rho
            << " (p'(rho) - a mu rho / b must be positive between the end states)";
        throw ConfigError(msg.str());
    }

    SelfSimilarProfile prof;
    prof.rho_left = rho_left;
    prof.rho_right = rho_right;
    prof.xi_max = (xi_max > 0.0) ? xi_max : default_xi_max(params, rho_left);
    if (rho_left == rho_right) {
        return prof;
    }
    if (n_steps < 16) {
        throw std::invalid_argument("build_selfsimilar_wave: n_steps too small");
    }

    // rho(xi_max) is increasing in the initial flux; bracket the root.
    const double sign = (rho_right > rho_left) ? 1.0 : -1.0;
    auto miss = [&](double flux0) {
        return shoot(params, rho_left, flux0, prof.xi_max, n_steps, lo, hi).end_value - rho_right;
    };
    double s_lo = 0.0;  // miss(0) has the sign of -(rho_right - rho_left)
    double s_hi = sign * std::abs(rho_right - rho_left) * q_potential_d1(params, rho_left) *
                  std::sqrt(params.alpha / q_potential_d1(params, 0.5 * (lo + hi)));
    int expansions = 0;
    while (sign * miss(s_hi) < 0.0) {
        s_lo = s_hi;
        s_hi *= 2.0;
        if (++expansions > 60) {
            throw NumericalError("build_selfsimilar_wave: could not bracket the shooting parameter");
        }
    }

    int iterations = 0;
    double s_mid = 0.5 * (s_lo + s_hi);
    for (; iterations < 200; ++iterations) {
        s_mid = 0.5 * (s_lo + s_hi);
        const double m = miss(s_mid);
        if (std::abs(m) <= tol) {
            break;
        }
        if (sign * m < 0.0) {
            s_lo = s_mid;
        } else {
            s_hi = s_mid;
        }
        if (std::abs(s_hi - s_lo) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s_mid)) {
            break;
        }
    }

    std::vector<double> rho;
    std::vector<double> flux;
    const auto res = shoot(params, rho_left, s_mid, prof.xi_max, n_steps, lo, hi, &rho, &flux);
    if (res.left_admissible_range) {
        throw NumericalError("build_selfsimilar_wave: final trajectory left the admissible range");
    }
    if (std::abs(res.end_value - rho_right) > std::max(tol, 1e-9)) {
        std::ostringstream msg;
        msg << "build_selfsimilar_wave: shooting did not converge, miss=" << res.end_value - rho_right;
        throw NumericalError(msg.str());
    }

    const std::size_t n = rho.size();
    std::vector<double> xi(n);
    std::vector<double> slope(n);
    const double h = prof.xi_max / static_cast<double>(n_steps);
    for (std::size_t i = 0; i < n; ++i) {
        xi[i] = h * static_cast<double>(i);
        slope[i] = flux[i] / q_potential_d1(params, rho[i]);
        if (i > 0 && sign * (rho[i] - rho[i - 1]) < -1e-14) {
            throw NumericalError("build_selfsimilar_wave: non-monotone profile (admissibility breach)");
        }
    }
    // Pin the far end to the target state; the residual is below tol.
    rho.back() = rho_right;
    std::vector<double> flux_slope(n);
    for (std::size_t i = 0; i < n; ++i) {
        flux_slope[i] = -0.5 * params.alpha * xi[i] * slope[i];
    }
    prof.flux_table = numerics::HermiteTable(xi, flux, std::move(flux_slope));
    prof.flux = std::move(flux);
    prof.initial_flux = s_mid;
    prof.shooting_iterations = iterations;
    prof.table = numerics::HermiteTable(std::move(xi), std::move(rho), std::move(slope));
    return prof;
}

// ---------------------------------------------------------------------------
// ProfileField
// ---------------------------------------------------------------------------

ProfileField ProfileField::constant(double rho_plus)
{
    ProfileField p;
    p.kind_ = Kind::Constant;
    p.rho_plus_ = rho_plus;
    return p;
}

ProfileField ProfileField::self_similar(SelfSimilarProfile profile)
{
    if (profile.is_constant()) {
        return constant(profile.rho_right);
    }
    ProfileField p;
    p.kind_ = Kind::SelfSimilar;
    p.rho_plus_ = profile.rho_right;
    p.similarity_ = std::make_shared<const SelfSimilarProfile>(std::move(profile));
    return p;
}

ProfileField ProfileField::neumann(Grid grid, double rho_plus, std::vector<double> times,
                                   std::vector<std::vector<double>> levels, double delta0)
{
    if (times.empty() || times.size() != levels.size()) {
        throw std::invalid_argument("ProfileField::neumann: times/levels mismatch");
    }
    for (const auto& lv : levels) {
        if (lv.size() != grid.n_cells) {
            throw std::invalid_argument("ProfileField::neumann: level size does not match grid");
        }
    }
    ProfileField p;
    p.kind_ = Kind::NeumannEvolved;
    p.rho_plus_ = rho_plus;
    p.delta0_ = delta0;
    p.grid_ = grid;
    p.times_ = std::move(times);
    p.levels_ = std::move(levels);
    return p;
}

double ProfileField::t_max() const
{
    if (kind_ == Kind::NeumannEvolved) {
        return times_.back();
    }
    return std::numeric_limits<double>::infinity();
}

namespace {

// Linear interpolation of one stored level in x, with the zero-flux mirror at
// x = 0 and the far-field value at the face x = L.
double interp_level(const std::vector<double>& v, const Grid& g, double rho_plus, double x)
{
    const double dx = g.dx();
    const double s = x / dx - 0.5;
    if (s <= 0.0) {
        return v.front();
    }
    const auto n = static_cast<double>(g.n_cells);
    if (s >= n - 1.0) {
        if (x >= g.L) {
            return rho_plus;
        }
        const double w = (x - g.x(g.n_cells - 1)) / (0.5 * dx);
        return (1.0 - w) * v.back() + w * rho_plus;
    }
    const auto i = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

std::pair<std::size_t, double> bracket_time(const std::vector<double>& times, double t)
{
    if (t < 0.0 || t > times.back() * (1.0 + 1e-12) + 1e-12) {
        std::ostringstream msg;
        msg << "profile queried at t=" << t << " outside stored range [0, " << times.back() << "]";
        throw DomainError(msg.str());
    }
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) {
        return {times.size() - 1, 0.0};
    }
    const auto j = static_cast<std::size_t>(it - times.begin());
    if (*it == t || j == 0) {
        return {j, 0.0};
    }
    const double w = (times[j] - t) / (times[j] - times[j - 1]);
    return {j, w};  // value = (1-w) level[j] + w level[j-1]
}

}  // namespace

double ProfileField::rho(double x, double t) const
{
    if (x < 0.0 || t < 0.0) {
        throw DomainError("profile queried at negative x or t");
    }
    switch (kind_) {
    case Kind::Constant:
        return rho_plus_;
    case Kind::SelfSimilar:
        return similarity_->value(x / std::sqrt(1.0 + t));
    case Kind::NeumannEvolved: {
        const auto [j, w] = bracket_time(times_, t);
        const double hi = interp_level(levels_[j], grid_, rho_plus_, x);
        if (w == 0.0) {
            return hi;
        }
        return (1.0 - w) * hi + w * interp_level(levels_[j - 1], grid_, rho_plus_, x);
    }
    }
    return rho_plus_;
}

std::vector<double> ProfileField::rho_on(const Grid& grid, double t) const
{
    std::vector<double> out(grid.n_cells);
    if (kind_ == Kind::NeumannEvolved && grid.n_cells == grid_.n_cells && grid.L == grid_.L) {
        const auto [j, w] = bracket_time(times_, t);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = (w == 0.0) ? levels_[j][i] : (1.0 - w) * levels_[j][i] + w * levels_[j - 1][i];
        }
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = rho(grid.x(i), t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Neumann-evolved wave
// ---------------------------------------------------------------------------

ProfileField build_neumann_wave(const ModelParams& params, const std::function<double(double)>& w0, double delta0,
                                const Grid& grid, double t_final, const NeumannWaveOptions& options)
{
    params.validate();
    if (!(t_final >= 0.0)) {
        throw std::invalid_argument("build_neumann_wave: t_final must be non-negative");
    }
    const std::size_t n = grid.n_cells;
    const double dx = grid.dx();
    const double rho_plus = params.rho_plus;

    std::vector<double> rho(n);
    double wmax = 0.0;
    double wint = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = w0(grid.x(i));
        wmax = std::max(wmax, std::abs(w));
        wint += w * dx;
        rho[i] = rho_plus + delta0 * w;
    }
    if (std::abs(wint) < 1e-14) {
        throw ConfigError("build_neumann_wave: integral of w0 vanishes");
    }
    const double band = std::abs(delta0) * wmax;
    if (!(rho_plus - band > 0.0)) {
        throw ConfigError("build_neumann_wave: initial wave reaches vacuum");
    }
    const auto verdict = validate_params(params, rho_plus - band, rho_plus + band);
    if (!verdict.valid) {
        std::ostringstream msg;
        msg << "build_neumann_wave: q'(rho) <= 0 at rho=" << verdict.argmin_rho;
        throw ConfigError(msg.str());
    }

    // Stored time levels: 0, the geometric ladder and any requested extras.
    std::vector<double> targets{0.0};
    for (double t = options.first_level; t < t_final; t *= options.storage_ratio) {
        targets.push_back(t);
    }
    for (double t : options.extra_levels) {
        if (t >= 0.0 && t <= t_final) {
            targets.push_back(t);
        }
    }
    targets.push_back(t_final);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    std::vector<double> times{0.0};
    std::vector<std::vector<double>> levels{rho};

    const double q_far = q_potential(params, rho_plus);
    const double inv_alpha_dx2 = 1.0 / (params.alpha * dx * dx);
    std::vector<double> lower(n), diag(n), upper(n), res(n), qv(n), qd(n);
    std::vector<double> old(n);

    double t = 0.0;
    std::size_t next = 1;
    while (next < targets.size()) {
        const double target = targets[next];
        double dt = std::min(options.dt_max, options.dt_rel * (1.0 + t));
        bool lands = false;
        if (t + dt >= target - 1e-12 * (1.0 + target)) {
            dt = target - t;
            lands = true;
        }
        old = rho;
        const double c = dt * inv_alpha_dx2;
        int it = 0;
        for (; it < options.max_newton; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!(rho[i] > 0.0)) {
                    throw NumericalError("build_neumann_wave: density lost positivity");
                }
                qv[i] = q_potential(params, rho[i]);
                qd[i] = q_potential_d1(params, rho[i]);
                if (!(qd[i] > 0.0)) {
                    std::ostringstream msg;
                    msg << "build_neumann_wave: q'(rho) <= 0 encountered at rho=" << rho[i];
                    throw NumericalError(msg.str());
                }
            }
            double rnorm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double ql = (i == 0) ? qv[0] : qv[i - 1];
                const double qr = (i + 1 == n) ? 2.0 * q_far - qv[i] : qv[i + 1];
                res[i] = -(rho[i] - old[i] - c * (ql - 2.0 * qv[i] + qr));
                rnorm = std::max(rnorm, std::abs(res[i]));
                lower[i] = (i == 0) ? 0.0 : -c * qd[i - 1];
                upper[i] = (i + 1 == n) ? 0.0 : -c * qd[i + 1];
                double dcoef = 2.0;
                if (i == 0) {
                    dcoef -= 1.0;
                }
                if (i + 1 == n) {
                    dcoef += 1.0;
                }
                diag[i] = 1.0 + c * dcoef * qd[i];
            }
            if (rnorm <= options.newton_tol) {
                break;
            }
            numerics::solve_tridiagonal(lower, diag, upper, res);
            double dmax = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                rho[i] += res[i];
                dmax = std::max(dmax, std::abs(res[i]));
            }
            if (dmax <= options.newton_tol) {
                break;
            }
        }
        if (it == options.max_newton) {
            throw NumericalError("build_neumann_wave: Newton iteration did not converge");
        }
        t = lands ? target : t + dt;
        if (lands) {
            times.push_back(t);
            levels.push_back(rho);
            ++next;
        }
    }
    return ProfileField::neumann(grid, rho_plus, std::move(times), std::move(levels), delta0);
}

// ---------------------------------------------------------------------------
// Wave triple
// ---------------------------------------------------------------------------

WaveTriple eval_wave_triple(const ProfileField& profile, const ModelParams& params, double x, double t)
{
    WaveTriple w;
    const double ab = params.a / params.b;
    switch (profile.kind()) {
    case ProfileField::Kind::Constant:
        w.rho = profile.rho_plus();
        w.m = 0.0;
        break;
    case ProfileField::Kind::SelfSimilar: {
        if (x < 0.0 || t < 0.0) {
            throw DomainError("eval_wave_triple: negative x or t");
        }
        const auto& s = *profile.similarity();
        const double root = std::sqrt(1.0 + t);
        const double xi = x / root;
        w.rho = s.value(xi);
        w.m = -s.flux_at(xi) / (root * params.alpha);
        break;
    }
    case ProfileField::Kind::NeumannEvolved: {
        w.rho = profile.rho(x, t);
        const double h = profile.table_grid().dx();
        const double qp = q_potential(params, profile.rho(x + h, t));
        const double qm = q_potential(params, profile.rho(std::abs(x - h), t));
        w.m = -(qp - qm) / (2.0 * h * params.alpha);
        break;
    }
    }
    w.phi = ab * w.rho;
    return w;
}

WaveOnGrid wave_on_grid(const ProfileField& profile, const ModelParams& params, const Grid& grid, double t)
{
    const std::size_t n = grid.n_cells;
    WaveOnGrid out;
    out.rho.assign(n, profile.rho_plus());
    out.m.assign(n, 0.0);
    out.rho_t.assign(n, 0.0);
    const double ab = params.a / params.b;

    if (profile.kind() == ProfileField::Kind::SelfSimilar) {
        const auto& s = *profile.similarity();
        const double root = std::sqrt(1.0 + t);
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = grid.x(i) / root;
            const double r = s.value(xi);
            const double r1 = s.derivative(xi);
            out.rho[i] = r;
            out.m[i] = -s.flux_at(xi) / (root * params.alpha);
            out.rho_t[i] = -0.5 * xi * r1 / (1.0 + t);
        }
    } else if (profile.kind() == ProfileField::Kind::NeumannEvolved) {
        out.rho = profile.rho_on(grid, t);
        // q with two ghost cells per side: mirror at x = 0, odd reflection about q(rho_plus) at x = L.
        const double q_far = q_potential(params, profile.rho_plus());
        std::vector<double> q(n + 4);
        for (std::size_t i = 0; i < n; ++i) {
            q[i + 2] = q_potential(params, out.rho[i]);
        }
        q[1] = q[2];
        q[0] = q[3];
        q[n + 2] = 2.0 * q_far - q[n + 1];
        q[n + 3] = 2.0 * q_far - q[n];
        const double dx = grid.dx();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = i + 2;
            const double d1 = (q[k - 2] - 8.0 * q[k - 1] + 8.0 * q[k + 1] - q[k + 2]) / (12.0 * dx);
            const double d2 = (-q[k - 2] + 16.0 * q[k - 1] - 30.0 * q[k] + 16.0 * q[k + 1] - q[k + 2]) /
                              (12.0 * dx * dx);
            out.m[i] = -d1 / params.alpha;
            out.rho_t[i] = d2 / params.alpha;
        }
    }
    out.phi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.phi[i] = ab * out.rho[i];
    }
    return out;
}

void write_profile_csv(std::ostream& os, const ProfileField& profile)
{
    os << std::setprecision(17);
    switch (profile.kind()) {
    case ProfileField::Kind::Constant:
        os << "xi,rho_bar\n";
        os << 0.0 << ',' << profile.rho_plus() << '\n';
        break;
    case ProfileField::Kind::SelfSimilar: {
        os << "xi,rho_bar\n";
        const auto& tab = profile.similarity()->table;
        for (std::size_t i = 0; i < tab.nodes().size(); ++i) {
            os << tab.nodes()[i] << ',' << tab.values()[i] << '\n';
        }
        break;
    }
    case ProfileField::Kind::NeumannEvolved: {
        os << "x,rho_bar,t\n";
        const auto& g = profile.table_grid();
        for (std::size_t k = 0; k < profile.times().size(); ++k) {
            for (std::size_t i = 0; i < g.n_cells; ++i) {
                os << g.x(i) << ',' << profile.levels()[k][i] << ',' << profile.times()[k] << '\n';
            }
        }
        break;
    }
    }
}

}  // namespace chemowave
