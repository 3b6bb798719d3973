#include "chemowave/correction.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace chemowave {

namespace {

// exp(-1/u) underflows to exactly zero once 1/u exceeds this.
constexpr double kUnderflowExponent = 745.0;

double raw_bump(double x)
{
    if (x <= 0.0 || x >= 1.0) {
        return 0.0;
    }
    const double u = x * (1.0 - x);
    const double e = 1.0 / u;
    return e > kUnderflowExponent ? 0.0 : std::exp(-e);
}

}  // namespace

Mollifier::Mollifier(std::size_t table_points)
{
    if (table_points < 3) {
        throw std::invalid_argument("Mollifier: need at least 3 table points");
    }
    using Quad = boost::math::quadrature::gauss<double, 15>;
    const std::size_t cells = table_points - 1;
    const double h = 1.0 / static_cast<double>(cells);
    std::vector<double> xs(table_points);
    std::vector<double> cum(table_points, 0.0);
    for (std::size_t i = 0; i < table_points; ++i) {
        xs[i] = h * static_cast<double>(i);
    }
    xs.back() = 1.0;
    for (std::size_t i = 0; i < cells; ++i) {
        cum[i + 1] = cum[i] + Quad::integrate(raw_bump, xs[i], xs[i + 1]);
    }
    norm_ = 1.0 / cum.back();
    std::vector<double> slopes(table_points);
    for (std::size_t i = 0; i < table_points; ++i) {
        cum[i] *= norm_;
        slopes[i] = norm_ * raw_bump(xs[i]);
    }
    cum.front() = 0.0;
    cum.back() = 1.0;
    table_ = numerics::HermiteTable(std::move(xs), std::move(cum), std::move(slopes));
}

double Mollifier::q0(double x, int k) const
{
    if (k < 0 || k > 3) {
        throw std::invalid_argument("Mollifier::q0: derivative order must be in [0, 3]");
    }
    if (x <= 0.0 || x >= 1.0) {
        return 0.0;
    }
    const double u = x * (1.0 - x);
    if (1.0 / u > kUnderflowExponent) {
        return 0.0;
    }
    const double base = norm_ * std::exp(-1.0 / u);
    if (k == 0) {
        return base;
    }
    // g = -1/u with u = x(1-x), u' = 1 - 2x, u'' = -2.
    const double u1 = 1.0 - 2.0 * x;
    const double u2 = -2.0;
    const double iu = 1.0 / u;
    const double g1 = u1 * iu * iu;
    const double g2 = u2 * iu * iu - 2.0 * u1 * u1 * iu * iu * iu;
    if (k == 1) {
        return base * g1;
    }
    if (k == 2) {
        return base * (g2 + g1 * g1);
    }
    const double g3 = -6.0 * u1 * u2 * iu * iu * iu + 6.0 * u1 * u1 * u1 * iu * iu * iu * iu;
    return base * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1);
}

double Mollifier::primitive(double x) const
{
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    // q0 is symmetric about 1/2, so the upper half is read from the lower half.
    return x <= 0.5 ? table_.value(x) : 1.0 - table_.value(1.0 - x);
}

double Mollifier::tail(double x) const
{
    if (x <= 0.0) {
        return 1.0;
    }
    if (x >= 1.0) {
        return 0.0;
    }
    return x >= 0.5 ? table_.value(1.0 - x) : 1.0 - table_.value(x);
}

const Mollifier& default_mollifier()
{
    static const Mollifier instance;
    return instance;
}

double CorrectionField::rho_amplitude() const
{
    if (kind == CorrectionCase::A) {
        return params.m_plus / params.alpha;
    }
    return -(m0_at_0 - params.m_plus) / params.alpha;
}

CorrectionField make_correction_A(const ModelParams& params, double epsilon0)
{
    params.validate();
    if (!(epsilon0 > 0.0)) {
        throw ConfigError("epsilon0 must be positive");
    }
    CorrectionField c;
    c.kind = CorrectionCase::A;
    c.epsilon0 = epsilon0;
    c.params = params;
    return c;
}

CorrectionField make_correction_B(const ModelParams& params, double epsilon0, double m0_at_0)
{
    CorrectionField c = make_correction_A(params, epsilon0);
    c.kind = CorrectionCase::B;
    c.m0_at_0 = m0_at_0;
    return c;
}

namespace {

// Time factor multiplying a R eps0 q0(eps0 x) in phi_hat: int_0^t e^{-b(t-s)} e^{-alpha s} ds.
double coupling_factor(const CorrectionField& c, double t)
{
    const double alpha = c.params.alpha;
    const double b = c.params.b;
    if (c.equal_rates()) {
        return t * std::exp(-b * t);
    }
    return (std::exp(-alpha * t) - std::exp(-b * t)) / (b - alpha);
}

double coupling_factor_dt(const CorrectionField& c, double t)
{
    const double alpha = c.params.alpha;
    const double b = c.params.b;
    if (c.equal_rates()) {
        return std::exp(-b * t) * (1.0 - b * t);
    }
    return (-alpha * std::exp(-alpha * t) + b * std::exp(-b * t)) / (b - alpha);
}

CorrectionValues eval_closed_form(const CorrectionField& c, double x, double t)
{
    const auto& p = c.params;
    const auto& mol = *c.mollifier;
    const double s = c.epsilon0 * x;
    const double ea = std::exp(-p.alpha * t);
    const double eb = std::exp(-p.b * t);
    const double r = c.rho_amplitude();
    const double bump = c.epsilon0 * mol.q0(s);
    CorrectionValues v;
    v.rho = r * bump * ea;
    if (c.kind == CorrectionCase::A) {
        v.m = p.m_plus * ea * mol.primitive(s);
    } else {
        v.m = ea * (p.m_plus + (c.m0_at_0 - p.m_plus) * mol.tail(s));
    }
    v.phi = p.d_plus() * eb * mol.primitive(s) + p.a * r * bump * coupling_factor(c, t);
    return v;
}

}  // namespace

CorrectionValues eval_correction_A(const CorrectionField& c, double x, double t)
{
    if (c.kind != CorrectionCase::A) {
        throw std::invalid_argument("eval_correction_A called on a case-B correction");
    }
    return eval_closed_form(c, x, t);
}

CorrectionValues eval_correction_B(const CorrectionField& c, double x, double t)
{
    if (c.kind != CorrectionCase::B) {
        throw std::invalid_argument("eval_correction_B called on a case-A correction");
    }
    return eval_closed_form(c, x, t);
}

CorrectionValues eval_correction(const CorrectionField& c, double x, double t)
{
    return eval_closed_form(c, x, t);
}

CorrectionValues eval_correction_dx(const CorrectionField& c, double x, double t, int k)
{
    if (k == 0) {
        return eval_closed_form(c, x, t);
    }
    if (k < 0 || k > 3) {
        throw std::invalid_argument("eval_correction_dx: order must be in [0, 3]");
    }
    const auto& p = c.params;
    const auto& mol = *c.mollifier;
    const double e = c.epsilon0;
    const double s = e * x;
    const double ea = std::exp(-p.alpha * t);
    const double eb = std::exp(-p.b * t);
    const double r = c.rho_amplitude();
    const double ek = std::pow(e, k);
    CorrectionValues v;
    v.rho = r * ek * e * mol.q0(s, k) * ea;
    // Both cases: m_hat_x = alpha R eps0 q0(eps0 x) e^{-alpha t}.
    v.m = p.alpha * r * ek * mol.q0(s, k - 1) * ea;
    v.phi = p.d_plus() * eb * ek * mol.q0(s, k - 1) + p.a * r * ek * e * mol.q0(s, k) * coupling_factor(c, t);
    return v;
}

CorrectionValues eval_correction_dt(const CorrectionField& c, double x, double t)
{
    const auto& p = c.params;
    const auto& mol = *c.mollifier;
    const double s = c.epsilon0 * x;
    const double ea = std::exp(-p.alpha * t);
    const double eb = std::exp(-p.b * t);
    const double r = c.rho_amplitude();
    const double bump = c.epsilon0 * mol.q0(s);
    CorrectionValues v;
    v.rho = -p.alpha * r * bump * ea;
    if (c.kind == CorrectionCase::A) {
        v.m = -p.alpha * p.m_plus * ea * mol.primitive(s);
    } else {
        v.m = -p.alpha * ea * (p.m_plus + (c.m0_at_0 - p.m_plus) * mol.tail(s));
    }
    v.phi = -p.b * p.d_plus() * eb * mol.primitive(s) + p.a * r * bump * coupling_factor_dt(c, t);
    return v;
}

double compute_delta0(const ModelParams& params, std::span<const double> rho0, std::span<const double> w0,
                      const Grid& grid)
{
    if (rho0.size() != grid.n_cells || w0.size() != grid.n_cells) {
        throw std::invalid_argument("compute_delta0: samples do not match the grid");
    }
    const double dx = grid.dx();
    double excess = 0.0;
    double wmass = 0.0;
    double wabs = 0.0;
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
        excess += (rho0[i] - params.rho_plus) * dx;
        wmass += w0[i] * dx;
        wabs += std::abs(w0[i]) * dx;
    }
    if (!(std::abs(wmass) > 1e-12 * std::max(wabs, 1.0))) {
        throw ConfigError("compute_delta0: integral of w0 vanishes (degenerate normalization)");
    }
    return (excess - params.m_plus / params.alpha) / wmass;
}

double compute_delta0(const ModelParams& params, const std::function<double(double)>& rho0,
                      const std::function<double(double)>& w0, const Grid& grid)
{
    std::vector<double> r(grid.n_cells);
    std::vector<double> w(grid.n_cells);
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
        r[i] = rho0(grid.x(i));
        w[i] = w0(grid.x(i));
    }
    return compute_delta0(params, r, w, grid);
}

double correction_rho_norm(const CorrectionField& c, NormKind norm, int k, double t)
{
    if (k < 0 || k > 3) {
        throw std::invalid_argument("correction_rho_norm: k must be in [0, 3]");
    }
    const double support = 1.0 / c.epsilon0;
    auto f = [&](double x) { return eval_correction_dx(c, x, t, k).rho; };
    switch (norm) {
    case NormKind::L1:
    case NormKind::L2: {
        using Quad = boost::math::quadrature::gauss<double, 20>;
        const int panels = 400;
        const double h = support / panels;
        double acc = 0.0;
        for (int i = 0; i < panels; ++i) {
            acc += Quad::integrate(
                [&](double x) {
                    const double v = std::abs(f(x));
                    return norm == NormKind::L1 ? v : v * v;
                },
                h * i, h * (i + 1));
        }
        return norm == NormKind::L1 ? acc : std::sqrt(acc);
    }
    case NormKind::Linf: {
        // Sample in the mollifier's own coordinate so the resolution is eps0-independent.
        const int samples = 200000;
        double best = 0.0;
        for (int i = 1; i < samples; ++i) {
            best = std::max(best, std::abs(f(support * i / samples)));
        }
        return best;
    }
    default:
        throw std::invalid_argument("correction_rho_norm: only L1, L2 and Linf are supported");
    }
}

CorrectionDecayTable correction_decay_scan(const CorrectionField& c, NormKind norm, int k,
                                           std::span<const double> times)
{
    if (norm != NormKind::L1 && norm != NormKind::L2 && norm != NormKind::Linf) {
        throw std::invalid_argument("correction_decay_scan: norm must be L1, L2 or Linf");
    }
    if (k < 0 || k > 3) {
        throw std::invalid_argument("correction_decay_scan: k must be in [0, 3]");
    }
    CorrectionDecayTable table;
    table.k = k;
    table.norm = norm;
    std::vector<double> ts;
    std::vector<double> logs;
    for (double t : times) {
        const double v = correction_rho_norm(c, norm, k, t);
        table.rows.push_back({t, v});
        if (v > 0.0) {
            ts.push_back(t);
            logs.push_back(std::log(v));
        }
    }
    if (ts.size() >= 2) {
        table.fitted_rate = numerics::least_squares(ts, logs).slope;
    }
    CorrectionField doubled = c;
    doubled.epsilon0 = 2.0 * c.epsilon0;
    const double base = correction_rho_norm(c, norm, k, 0.0);
    table.epsilon_ratio = base > 0.0 ? correction_rho_norm(doubled, norm, k, 0.0) / base : 0.0;
    const double inv_p = norm == NormKind::L1 ? 1.0 : (norm == NormKind::L2 ? 0.5 : 0.0);
    table.predicted_ratio = std::pow(2.0, k + 1.0 - inv_p);
    return table;
}

void write_correction_csv(std::ostream& os, const CorrectionField& c, std::span<const double> xs, double t)
{
    os << std::setprecision(17) << "x,rho_hat,m_hat,phi_hat\n";
    for (double x : xs) {
        const auto v = eval_correction(c, x, t);
        os << x << ',' << v.rho << ',' << v.m << ',' << v.phi << '\n';
    }
}

}  // namespace chemowave
