#include "chemowave/diagnostics.hpp"

#include "chemowave/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace chemowave {

PerturbationTriple perturbation(const State& state, const Grid& grid, const ProfileField& profile,
                                const CorrectionField& corr, const ModelParams& params)
{
    const std::size_t n = grid.n_cells;
    if (state.size() != n) {
        throw std::invalid_argument("perturbation: state does not match grid");
    }
    const double t = state.t;
    const double dx = grid.dx();
    const WaveOnGrid wave = wave_on_grid(profile, params, grid, t);

    PerturbationTriple p;
    p.t = t;
    p.Phi.resize(n);
    p.Phi_x.resize(n);
    p.Phi_t.resize(n);
    p.psi.resize(n);
    p.zeta.resize(n);
    p.zeta_t.resize(n);
    p.rho_gap.resize(n);
    p.m_gap.resize(n);
    p.phi_gap.resize(n);

    const std::vector<double> phi_xx = numerics::diff2(state.phi, dx);
    const double ab = params.a / params.b;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x(i);
        const CorrectionValues c = eval_correction(corr, x, t);
        const CorrectionValues ct = eval_correction_dt(corr, x, t);
        p.rho_gap[i] = state.rho[i] - wave.rho[i];
        p.m_gap[i] = state.m[i] - wave.m[i];
        p.phi_gap[i] = state.phi[i] - wave.phi[i];
        p.Phi_x[i] = p.rho_gap[i] - c.rho;
        p.psi[i] = p.m_gap[i] - c.m;
        p.Phi_t[i] = -p.psi[i];
        p.zeta[i] = p.phi_gap[i] - c.phi;
        const double phi_t = params.D * phi_xx[i] + params.a * state.rho[i] - params.b * state.phi[i];
        p.zeta_t[i] = phi_t - ab * wave.rho_t[i] - ct.phi;
    }

    // right-to-left trapezoid; the last half cell uses the end value
    double acc = -0.5 * dx * p.Phi_x[n - 1];
    p.Phi[n - 1] = acc;
    for (std::size_t i = n - 1; i-- > 0;) {
        acc -= 0.5 * dx * (p.Phi_x[i] + p.Phi_x[i + 1]);
        p.Phi[i] = acc;
    }
    p.Phi_at_0 = p.Phi[0] - 0.5 * dx * p.Phi_x[0];

    const std::size_t tail_start = n - std::max<std::size_t>(1, n / 10);
    for (std::size_t i = tail_start; i < n; ++i) {
        p.tail_mass += std::abs(p.Phi_x[i]) * dx;
    }
    // midpoint-rule error term h^2/24 [f'(L) - f'(0)]
    const std::vector<double> d1 = numerics::diff1(p.Phi_x, dx);
    p.quadrature_tol = dx * dx / 24.0 * std::abs(d1[n - 1] - d1[0]);
    return p;
}

namespace {

// cell averages: the midpoint sum is the natural quadrature
double midpoint_sq(std::span<const double> f, double dx)
{
    double acc = 0.0;
    for (double v : f) {
        acc += v * v;
    }
    return acc * dx;
}

}  // namespace

double norm(std::span<const double> f, double dx, NormKind which)
{
    switch (which) {
    case NormKind::Linf: {
        double m = 0.0;
        for (double v : f) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }
    case NormKind::L1: {
        double acc = 0.0;
        for (double v : f) {
            acc += std::abs(v);
        }
        return acc * dx;
    }
    case NormKind::L2:
        return std::sqrt(midpoint_sq(f, dx));
    case NormKind::H1: {
        const auto d1 = numerics::diff1(f, dx);
        return std::sqrt(midpoint_sq(f, dx) + midpoint_sq(d1, dx));
    }
    case NormKind::H2: {
        const auto d1 = numerics::diff1(f, dx);
        const auto d2 = numerics::diff2(f, dx);
        return std::sqrt(midpoint_sq(f, dx) + midpoint_sq(d1, dx) + midpoint_sq(d2, dx));
    }
    }
    return 0.0;
}

double derivative_norm(std::span<const double> f, double dx, int k)
{
    if (k == 0) {
        return norm(f, dx, NormKind::L2);
    }
    const auto d = numerics::diffk(f, dx, k);
    return norm(d, dx, NormKind::L2);
}

DecayFit fit_decay(std::span<const double> times, std::span<const double> values, double t_min, double t_max)
{
    if (times.size() != values.size()) {
        throw std::invalid_argument("fit_decay: times and values differ in length");
    }
    std::vector<double> lt, lv, tt;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_min || times[i] > t_max) {
            continue;
        }
        if (!(values[i] > 0.0)) {
            throw DomainError("fit_decay: non-positive value in window at t=" + std::to_string(times[i]));
        }
        lt.push_back(std::log1p(times[i]));
        tt.push_back(times[i]);
        lv.push_back(std::log(values[i]));
    }
    if (lt.size() < 10) {
        throw std::invalid_argument("fit_decay: fewer than 10 samples in window");
    }
    const auto alg = numerics::least_squares(lt, lv);
    const auto ex = numerics::least_squares(tt, lv);
    DecayFit f;
    f.slope = alg.slope;
    f.intercept = alg.intercept;
    f.r_squared = alg.r_squared;
    f.n = alg.n;
    f.t_min = tt.front();
    f.t_max = tt.back();
    f.super_algebraic = ex.r_squared > alg.r_squared && ex.slope < 0.0;
    return f;
}

bool DecayRow::pass(double tol, double r2_min) const
{
    return !degenerate && std::abs(fitted - predicted) <= tol && r2 >= r2_min;
}

const DecayRow* DecayReport::find(const std::string& name) const
{
    for (const auto& r : rows) {
        if (r.series == name) {
            return &r;
        }
    }
    return nullptr;
}

const NormSeries* DecayReport::find_series(const std::string& name) const
{
    for (const auto& s : series) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

namespace {

struct SeriesDef {
    const char* name;
    double predicted;
};

constexpr SeriesDef kSuite[] = {
    {"Phi_L2", -0.5},      {"Phi_x_L2", -1.0},  {"Phi_xx_L2", -1.5},  {"psi_L2", -1.0},
    {"psi_x_L2", -1.5},    {"psi_xx_L2", -2.0}, {"zeta_L2", -0.5},    {"zeta_x_L2", -1.0},
    {"rho_gap_sup", -0.75}, {"m_gap_sup", -1.25}, {"phi_gap_sup", -0.75},
};
constexpr std::size_t kSuiteSize = sizeof(kSuite) / sizeof(kSuite[0]);

std::array<double, kSuiteSize> suite_values(const PerturbationTriple& p, double dx)
{
    return {
        norm(p.Phi, dx, NormKind::L2),
        norm(p.Phi_x, dx, NormKind::L2),
        derivative_norm(p.Phi_x, dx, 1),
        norm(p.psi, dx, NormKind::L2),
        derivative_norm(p.psi, dx, 1),
        derivative_norm(p.psi, dx, 2),
        norm(p.zeta, dx, NormKind::L2),
        derivative_norm(p.zeta, dx, 1),
        norm(p.rho_gap, dx, NormKind::Linf),
        norm(p.m_gap, dx, NormKind::Linf),
        norm(p.phi_gap, dx, NormKind::Linf),
    };
}

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn)
{
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::future<void>> jobs;
    const std::size_t w = std::min<std::size_t>(workers, count);
    for (std::size_t j = 0; j < w; ++j) {
        jobs.push_back(std::async(std::launch::async, [&, j] {
            for (std::size_t i = j; i < count; i += w) {
                fn(i);
            }
        }));
    }
    for (auto& f : jobs) {
        f.get();
    }
}

}  // namespace

DecayReport theorem_suite(const std::vector<State>& snapshots, const Grid& grid, const ProfileField& profile,
                          const CorrectionField& corr, const ModelParams& params, const SuiteOptions& options)
{
    const std::size_t ns = snapshots.size();
    std::vector<std::array<double, kSuiteSize>> table(ns);
    parallel_for(ns, options.workers, [&](std::size_t i) {
        const auto p = perturbation(snapshots[i], grid, profile, corr, params);
        table[i] = suite_values(p, grid.dx());
    });

    DecayReport report;
    const double t_last = ns ? snapshots.back().t : 0.0;
    const double t_min = options.t_min;
    const double t_max = options.t_max > 0.0 ? options.t_max : 0.8 * t_last;
    for (std::size_t k = 0; k < kSuiteSize; ++k) {
        NormSeries s;
        s.name = kSuite[k].name;
        s.predicted = kSuite[k].predicted;
        for (std::size_t i = 0; i < ns; ++i) {
            s.times.push_back(snapshots[i].t);
            s.values.push_back(table[i][k]);
        }
        DecayRow row;
        row.series = s.name;
        row.predicted = s.predicted;
        row.t_min = t_min;
        row.t_max = t_max;
        double window_max = 0.0;
        std::size_t in_window = 0;
        for (std::size_t i = 0; i < ns; ++i) {
            if (s.times[i] >= t_min && s.times[i] <= t_max) {
                window_max = std::max(window_max, s.values[i]);
                ++in_window;
            }
        }
        if (in_window < 10 || window_max < options.floor) {
            row.degenerate = true;
            row.fitted = std::numeric_limits<double>::quiet_NaN();
            row.r2 = std::numeric_limits<double>::quiet_NaN();
        } else {
            try {
                const auto fit = fit_decay(s.times, s.values, t_min, t_max);
                row.fitted = fit.slope;
                row.r2 = fit.r_squared;
            } catch (const DomainError&) {
                row.degenerate = true;
                row.fitted = std::numeric_limits<double>::quiet_NaN();
                row.r2 = std::numeric_limits<double>::quiet_NaN();
            }
        }
        report.series.push_back(std::move(s));
        report.rows.push_back(row);
    }
    return report;
}

const WeightedQuantity* WeightedNormMonitor::find(const std::string& name) const
{
    for (const auto& q : quantities) {
        if (q.name == name) {
            return &q;
        }
    }
    return nullptr;
}

namespace {

constexpr const char* kWeighted[] = {
    "Phi_k0", "Phi_k1", "Phi_k2", "Phi_t_k0", "Phi_t_k1", "Phi_t_k2",
    "zeta_k0", "zeta_k1", "zeta_t_k0", "zeta_t_k1", "third_derivatives",
};
constexpr std::size_t kWeightedSize = sizeof(kWeighted) / sizeof(kWeighted[0]);
// time weight exponent and the number of x-derivatives taken of a state field
constexpr int kWeightPower[kWeightedSize] = {0, 1, 2, 2, 3, 4, 1, 2, 3, 4, 2};
constexpr int kDerivOrder[kWeightedSize] = {0, 0, 1, 0, 1, 2, 1, 2, 3, 4, 3};

// what round-off alone produces: 1e-13 per cell, amplified by each difference
double noise_floor(std::size_t k, double t, const Grid& grid)
{
    return 1e-26 * grid.L * std::pow(1.0 + t, kWeightPower[k]) * std::pow(grid.dx(), -2 * kDerivOrder[k]);
}

std::array<double, kWeightedSize> weighted_values(const PerturbationTriple& p, double dx)
{
    const double s = 1.0 + p.t;
    auto sq = [dx](std::span<const double> f, int k) {
        const double v = derivative_norm(f, dx, k);
        return v * v;
    };
    const double phi3 = sq(p.Phi_x, 2);
    const double zeta3 = sq(p.zeta, 3);
    return {
        sq(p.Phi, 0),
        s * sq(p.Phi_x, 0),
        s * s * sq(p.Phi_x, 1),
        s * s * sq(p.Phi_t, 0),
        std::pow(s, 3) * sq(p.Phi_t, 1),
        std::pow(s, 4) * sq(p.Phi_t, 2),
        s * (sq(p.zeta, 0) + sq(p.zeta, 1)),
        s * s * (sq(p.zeta, 1) + sq(p.zeta, 2)),
        std::pow(s, 3) * (sq(p.zeta_t, 0) + sq(p.zeta_t, 1)),
        std::pow(s, 4) * (sq(p.zeta_t, 1) + sq(p.zeta_t, 2)),
        s * s * (phi3 + zeta3),
    };
}

}  // namespace

WeightedNormMonitor weighted_monitor(const std::vector<State>& snapshots, const Grid& grid,
                                     const ProfileField& profile, const CorrectionField& corr,
                                     const ModelParams& params, double t_after, double factor)
{
    const std::size_t ns = snapshots.size();
    std::vector<std::array<double, kWeightedSize>> table(ns);
    parallel_for(ns, 0, [&](std::size_t i) {
        const auto p = perturbation(snapshots[i], grid, profile, corr, params);
        table[i] = weighted_values(p, grid.dx());
    });

    WeightedNormMonitor mon;
    mon.t_after = t_after;
    mon.factor = factor;
    for (std::size_t k = 0; k < kWeightedSize; ++k) {
        WeightedQuantity q;
        q.name = kWeighted[k];
        double ref = -1.0;
        double after_max = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            const double v = table[i][k];
            const double vf = v < noise_floor(k, snapshots[i].t, grid) ? 0.0 : v;
            q.times.push_back(snapshots[i].t);
            q.values.push_back(v);
            q.running_max = std::max(q.running_max, v);
            if (snapshots[i].t >= t_after) {
                if (ref < 0.0) {
                    ref = vf;
                }
                after_max = std::max(after_max, vf);
            }
        }
        if (ref > 0.0) {
            q.growth = after_max / ref;
        } else {
            q.growth = after_max > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        }
        mon.grew = mon.grew || q.growth > factor;
        mon.quantities.push_back(std::move(q));
    }
    return mon;
}

void write_decay_csv(std::ostream& os, const DecayReport& report)
{
    os << std::setprecision(17);
    os << "series_name,predicted_exponent,fitted_exponent,r2,t_min,t_max\n";
    for (const auto& r : report.rows) {
        os << r.series << ',' << r.predicted << ',';
        if (r.degenerate) {
            os << "nan,nan,";
        } else {
            os << r.fitted << ',' << r.r2 << ',';
        }
        os << r.t_min << ',' << r.t_max << '\n';
    }
}

void write_norm_csv(std::ostream& os, const DecayReport& report)
{
    os << std::setprecision(17);
    os << "t,name,value\n";
    for (const auto& s : report.series) {
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            os << s.times[i] << ',' << s.name << ',' << s.values[i] << '\n';
        }
    }
}

void write_weighted_csv(std::ostream& os, const WeightedNormMonitor& monitor)
{
    os << std::setprecision(17);
    os << "t,name,value\n";
    for (const auto& q : monitor.quantities) {
        for (std::size_t i = 0; i < q.times.size(); ++i) {
            os << q.times[i] << ',' << q.name << ',' << q.values[i] << '\n';
        }
    }
}

}  // namespace chemowave
