#include "chemowave/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef CHEMOWAVE_VERSION
#define CHEMOWAVE_VERSION "0.1.0"
#endif
#ifndef CHEMOWAVE_GIT
#define CHEMOWAVE_GIT "unknown"
#endif

namespace chemowave {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

bool parse_double(const std::string& s, double& out)
{
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin)
{
    Config c;
    c.origin_ = origin;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int line = 0;
    auto fail = [&](const std::string& what) {
        std::ostringstream msg;
        msg << origin << ':' << line << ": " << what;
        throw ConfigError(msg.str());
    };
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') {
                fail("unterminated section header");
            }
            section = trim(s.substr(1, s.size() - 2));
            if (section.find_first_of(" \t=") != std::string::npos) {
                fail("invalid section name '" + section + "'");
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            fail("expected 'key = value'");
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty() || key.find_first_of(" \t") != std::string::npos) {
            fail("invalid key '" + key + "'");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (c.has(full)) {
            fail("duplicate key '" + full + "' (first set on line " + std::to_string(c.line_of(full)) + ")");
        }
        c.set(full, value, line);
    }
    return c;
}

Config Config::load(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value, int line)
{
    values_[key] = value;
    lines_[key] = line;
}

int Config::line_of(const std::string& key) const
{
    const auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
}

std::string Config::text() const
{
    std::ostringstream os;
    for (const auto& [k, v] : values_) {
        os << k << " = " << v << '\n';
    }
    return os.str();
}

std::string to_string(ProfileSource s)
{
    switch (s) {
    case ProfileSource::Auto:
        return "auto";
    case ProfileSource::NeumannEvolved:
        return "neumann-evolved";
    case ProfileSource::SelfSimilar:
        return "self-similar";
    case ProfileSource::Constant:
        return "constant";
    }
    return "auto";
}

std::string to_string(InitialFamily f)
{
    switch (f) {
    case InitialFamily::GaussianBump:
        return "gaussian-bump";
    case InitialFamily::TanhFront:
        return "tanh-front";
    case InitialFamily::Constant:
        return "constant";
    }
    return "gaussian-bump";
}

const std::map<std::string, std::string>& default_config()
{
    static const std::map<std::string, std::string> d = {
        {"model.alpha", "1"},
        {"model.mu", "1"},
        {"model.D", "1"},
        {"model.a", "1"},
        {"model.b", "1"},
        {"model.K", "1"},
        {"model.gamma", "2"},
        {"model.rho_plus", "1"},
        {"model.m_plus", "0"},
        {"model.phi_plus", "auto"},
        {"grid.L", "120"},
        {"grid.n_cells", "4800"},
        {"regime.kind", "A"},
        {"scheme.cfl", "0.45"},
        {"scheme.flux", "rusanov"},
        {"scheme.reconstruction", "muscl-minmod"},
        {"scheme.splitting", "strang"},
        {"initial.family", "gaussian-bump"},
        {"initial.amplitude", "0.02"},
        {"initial.center", "auto"},
        {"initial.width", "1"},
        {"initial.rho_left", "auto"},
        {"initial.front_width", "2"},
        {"profile.source", "auto"},
        {"profile.xi_max", "auto"},
        {"correction.epsilon0", "0.1"},
        {"run.t_final", "200"},
        {"run.snapshot_count", "60"},
        {"run.snapshot_first", "1"},
        {"run.snapshot_times", ""},
        {"run.wall_clock_budget", "0"},
        {"run.seed", "1"},
        {"diagnostics.fit_t_min", "20"},
        {"diagnostics.fit_t_max", "auto"},
        {"diagnostics.monitor_after", "5"},
        {"diagnostics.monitor_factor", "10"},
        {"output.dir", "out"},
        {"output.snapshots", "all"},
    };
    return d;
}

namespace {

class Reader {
public:
    explicit Reader(const Config& user) : user_(user)
    {
        for (const auto& [k, v] : user.values()) {
            if (!default_config().count(k)) {
                fail(k, "unknown key '" + k + "'");
            }
        }
        for (const auto& [k, v] : default_config()) {
            effective_.set(k, user.has(k) ? user.values().at(k) : v, user.line_of(k));
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        std::ostringstream msg;
        const int line = user_.line_of(key);
        if (line > 0) {
            msg << "line " << line << ": ";
        }
        msg << what;
        throw ConfigError(msg.str());
    }

    [[nodiscard]] const std::string& raw(const std::string& key) const { return effective_.values().at(key); }
    [[nodiscard]] bool is_auto(const std::string& key) const { return raw(key) == "auto"; }

    double number(const std::string& key) const
    {
        double v = 0.0;
        if (!parse_double(raw(key), v) || !std::isfinite(v)) {
            fail(key, key + ": expected a number, got '" + raw(key) + "'");
        }
        return v;
    }

    std::size_t count(const std::string& key) const
    {
        const double v = number(key);
        if (v < 0.0 || v != std::floor(v) || v > 1e9) {
            fail(key, key + ": expected a non-negative integer, got '" + raw(key) + "'");
        }
        return static_cast<std::size_t>(v);
    }

    template <class E>
    E choice(const std::string& key, const std::vector<std::pair<std::string, E>>& options) const
    {
        for (const auto& [name, value] : options) {
            if (raw(key) == name) {
                return value;
            }
        }
        std::string allowed;
        for (const auto& o : options) {
            allowed += (allowed.empty() ? "" : ", ") + o.first;
        }
        fail(key, key + ": '" + raw(key) + "' is not one of {" + allowed + "}");
    }

    [[nodiscard]] const Config& effective() const { return effective_; }

private:
    const Config& user_;
    Config effective_;
};

double bump_shape(double x, double c, double w)
{
    const double u = (x - c) / w;
    return std::exp(-0.5 * u * u);
}

}  // namespace

std::vector<double> Scenario::snapshot_times() const
{
    std::set<double> ts;
    if (snapshot_count > 0 && t_final > 0.0) {
        if (snapshot_first >= t_final || snapshot_count == 1) {
            ts.insert(t_final);
        } else {
            const double r = std::log(t_final / snapshot_first) / static_cast<double>(snapshot_count - 1);
            for (std::size_t i = 0; i < snapshot_count; ++i) {
                const double t = i + 1 == snapshot_count ? t_final : snapshot_first * std::exp(r * i);
                ts.insert(t);
            }
        }
    }
    for (double t : snapshot_extra) {
        if (t > 0.0 && t <= t_final) {
            ts.insert(t);
        }
    }
    return {ts.begin(), ts.end()};
}

Scenario scenario_from_config(const Config& config)
{
    Reader r(config);
    Scenario s;
    s.config = r.effective();

    auto& p = s.params;
    p.alpha = r.number("model.alpha");
    p.mu = r.number("model.mu");
    p.D = r.number("model.D");
    p.a = r.number("model.a");
    p.b = r.number("model.b");
    p.pressure.K = r.number("model.K");
    p.pressure.gamma = r.number("model.gamma");
    p.rho_plus = r.number("model.rho_plus");
    p.m_plus = r.number("model.m_plus");
    p.phi_plus = r.is_auto("model.phi_plus") ? p.a / p.b * p.rho_plus : r.number("model.phi_plus");
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }

    const double L = r.number("grid.L");
    const std::size_t n = r.count("grid.n_cells");
    s.grid = Grid(L, n);

    s.regime.kind = r.choice<BoundaryKind>("regime.kind", {{"A", BoundaryKind::A}, {"B", BoundaryKind::B}});

    s.scheme.cfl = r.number("scheme.cfl");
    s.scheme.flux = r.choice<FluxKind>("scheme.flux", {{"rusanov", FluxKind::Rusanov}, {"hll", FluxKind::HLL}});
    s.scheme.reconstruction = r.choice<Reconstruction>(
        "scheme.reconstruction",
        {{"first-order", Reconstruction::FirstOrder}, {"muscl-minmod", Reconstruction::MusclMinmod}});
    s.scheme.splitting =
        r.choice<Splitting>("scheme.splitting", {{"lie", Splitting::Lie}, {"strang", Splitting::Strang}});
    try {
        s.scheme.validate();
    } catch (const ConfigError& e) {
        r.fail("scheme.cfl", e.what());
    }

    const bool case_a = s.regime.kind == BoundaryKind::A;
    s.initial.family = r.choice<InitialFamily>("initial.family", {{"gaussian-bump", InitialFamily::GaussianBump},
                                                                  {"tanh-front", InitialFamily::TanhFront},
                                                                  {"constant", InitialFamily::Constant}});
    s.initial.amplitude = r.number("initial.amplitude");
    s.initial.center = r.is_auto("initial.center") ? 4.0 : r.number("initial.center");
    s.initial.width = r.number("initial.width");
    s.initial.front_width = r.number("initial.front_width");
    if (!(s.initial.width > 0.0) || !(s.initial.front_width > 0.0)) {
        r.fail("initial.width", "initial.width and initial.front_width must be positive");
    }
    if (!r.is_auto("initial.rho_left")) {
        if (case_a) {
            r.fail("initial.rho_left", "initial.rho_left only applies to regime B");
        }
        s.initial.rho_left = r.number("initial.rho_left");
        if (!(s.initial.rho_left > 0.0)) {
            r.fail("initial.rho_left", "initial.rho_left must be positive");
        }
    }

    // pairing of regime and diffusion-wave source
    const ProfileSource requested = r.choice<ProfileSource>(
        "profile.source", {{"auto", ProfileSource::Auto},
                           {"neumann-evolved", ProfileSource::NeumannEvolved},
                           {"self-similar", ProfileSource::SelfSimilar},
                           {"constant", ProfileSource::Constant}});
    const bool equal_ends = std::abs(s.rho_left() - p.rho_plus) <= 1e-12 * std::max(1.0, p.rho_plus);
    ProfileSource expected = ProfileSource::NeumannEvolved;
    if (!case_a) {
        expected = equal_ends ? ProfileSource::Constant : ProfileSource::SelfSimilar;
    }
    if (requested != ProfileSource::Auto && requested != expected) {
        std::string why;
        if (case_a) {
            why = "regime A pairs with the neumann-evolved profile";
        } else if (equal_ends) {
            why = "regime B with rho0(0) = rho_plus pairs with the constant profile";
        } else {
            why = "regime B with rho0(0) != rho_plus pairs with the self-similar profile";
        }
        r.fail("profile.source",
               "profile pairing error: profile.source = " + to_string(requested) + " but " + why);
    }
    s.profile_source = expected;
    s.xi_max = r.is_auto("profile.xi_max") ? 0.0 : r.number("profile.xi_max");

    s.epsilon0 = r.number("correction.epsilon0");
    if (!(s.epsilon0 > 0.0)) {
        r.fail("correction.epsilon0", "correction.epsilon0 must be positive");
    }
    if (1.0 / s.epsilon0 >= L) {
        r.fail("correction.epsilon0", "correction support (0, 1/epsilon0) must fit inside the domain (0, L)");
    }

    s.t_final = r.number("run.t_final");
    if (s.t_final < 0.0) {
        r.fail("run.t_final", "run.t_final must be non-negative");
    }
    s.snapshot_count = r.count("run.snapshot_count");
    s.snapshot_first = r.number("run.snapshot_first");
    if (!(s.snapshot_first > 0.0)) {
        r.fail("run.snapshot_first", "run.snapshot_first must be positive");
    }
    for (const auto& item : split_list(r.raw("run.snapshot_times"))) {
        double t = 0.0;
        if (!parse_double(item, t) || t < 0.0) {
            r.fail("run.snapshot_times", "run.snapshot_times: invalid time '" + item + "'");
        }
        if (t > s.t_final) {
            r.fail("run.snapshot_times", "run.snapshot_times: " + item + " exceeds run.t_final");
        }
        s.snapshot_extra.push_back(t);
    }
    s.wall_clock_budget = r.number("run.wall_clock_budget");
    s.seed = r.count("run.seed");

    s.fit_t_min = r.number("diagnostics.fit_t_min");
    s.fit_t_max = r.is_auto("diagnostics.fit_t_max") ? 0.8 * s.t_final : r.number("diagnostics.fit_t_max");
    if (s.fit_t_max < s.fit_t_min) {
        r.fail("diagnostics.fit_t_max", "fit window is empty (diagnostics.fit_t_max < diagnostics.fit_t_min)");
    }
    s.monitor_after = r.number("diagnostics.monitor_after");
    s.monitor_factor = r.number("diagnostics.monitor_factor");
    if (!(s.monitor_factor > 1.0)) {
        r.fail("diagnostics.monitor_factor", "diagnostics.monitor_factor must exceed 1");
    }

    s.output_dir = r.raw("output.dir");
    s.snapshot_output = r.choice<SnapshotOutput>(
        "output.snapshots", {{"all", SnapshotOutput::All}, {"final", SnapshotOutput::Final}, {"none", SnapshotOutput::None}});

    // admissibility on the density range the run is expected to visit
    const double lo_end = std::min(s.rho_left(), p.rho_plus);
    const double hi_end = std::max(s.rho_left(), p.rho_plus);
    const double amp = s.initial.family == InitialFamily::Constant ? 0.0 : std::abs(s.initial.amplitude);
    const double rho_min = lo_end - 2.0 * amp;
    const double rho_max = hi_end + 2.0 * amp;
    if (!(rho_min > 0.0)) {
        r.fail("initial.amplitude", "initial data would reach vacuum (rho <= 0)");
    }
    const auto verdict = validate_params(p, rho_min, rho_max);
    if (!verdict.valid) {
        std::ostringstream msg;
        msg << "admissibility condition p'(rho) - (a mu / b) rho > 0 fails on [" << rho_min << ", " << rho_max
            << "]: minimum " << verdict.min_margin << " at rho = " << verdict.argmin_rho;
        throw ConfigError(msg.str());
    }
    if (verdict.near_degenerate) {
        std::cerr << "warning: admissibility margin " << verdict.min_margin << " is near degenerate\n";
    }
    return s;
}

Scenario load_scenario(const fs::path& path)
{
    return scenario_from_config(Config::load(path));
}

Prepared prepare(const Scenario& s)
{
    const ModelParams& p = s.params;
    const Grid& grid = s.grid;
    const bool case_a = s.regime.kind == BoundaryKind::A;
    const double ab = p.a / p.b;
    const double c = s.initial.center;
    const double w = s.initial.width;
    const double amp = s.initial.family == InitialFamily::Constant ? 0.0 : s.initial.amplitude;
    const double fw = s.initial.front_width;
    const Mollifier& mol = default_mollifier();
    const double eps = s.epsilon0;
    const double d_plus = p.d_plus();
    const double m_plus = p.m_plus;

    Prepared out;
    out.regime = s.regime;

    if (case_a) {
        // even in x so that rho0, phi0 are flat and m0 vanishes at the wall
        auto even_bump = [c, w](double x) { return bump_shape(x, c, w) + bump_shape(-x, c, w); };
        auto even_bump_dx = [c, w](double x) {
            const double u1 = (x - c) / w;
            const double u2 = (x + c) / w;
            return -(u1 * std::exp(-0.5 * u1 * u1) + u2 * std::exp(-0.5 * u2 * u2)) / w;
        };
        std::function<double(double)> rho0;
        if (s.initial.family == InitialFamily::TanhFront) {
            rho0 = [=](double x) {
                return p.rho_plus + amp * 0.5 * (std::tanh((x + c) / fw) - std::tanh((x - c) / fw));
            };
        } else {
            rho0 = [=](double x) { return p.rho_plus + amp * even_bump(x); };
        }
        out.delta0 = compute_delta0(p, rho0, even_bump, grid);
        NeumannWaveOptions opts;
        opts.extra_levels = s.snapshot_times();
        out.profile = build_neumann_wave(p, even_bump, out.delta0, grid, s.t_final, opts);
        const double d0 = out.delta0;
        out.initial.rho = rho0;
        out.initial.m = [=](double x) {
            const double rb = p.rho_plus + d0 * even_bump(x);
            const double m_bar = -q_potential_d1(p, rb) * d0 * even_bump_dx(x) / p.alpha;
            return m_bar + m_plus * mol.primitive(eps * x);
        };
        out.initial.phi = [=](double x) { return ab * rho0(x) + d_plus * mol.primitive(eps * x); };
    } else {
        const double rl = s.rho_left();
        if (s.profile_source == ProfileSource::Constant) {
            out.profile = ProfileField::constant(p.rho_plus);
        } else {
            out.profile = ProfileField::self_similar(build_selfsimilar_wave(p, rl, s.xi_max));
        }
        const ProfileField prof = out.profile;
        // odd about x = 0 so that rho0(0) is exactly the left state
        auto odd_bump = [c, w](double x) { return bump_shape(x, c, w) - bump_shape(-x, c, w); };
        std::function<double(double)> rho0;
        if (s.initial.family == InitialFamily::TanhFront) {
            rho0 = [=](double x) { return p.rho_plus + (rl - p.rho_plus) * (1.0 - std::tanh(x / fw)) + amp * odd_bump(x); };
        } else {
            rho0 = [=](double x) { return prof.rho(x, 0.0) + amp * odd_bump(x); };
        }
        out.initial.rho = rho0;
        out.initial.m = [=](double x) {
            return eval_wave_triple(prof, p, x, 0.0).m + m_plus * mol.primitive(eps * x);
        };
        out.initial.phi = [=](double x) { return ab * rho0(x) + d_plus * mol.primitive(eps * x); };
    }

    out.state0 = init_state(p, grid, out.initial, out.regime);
    if (case_a) {
        out.correction = make_correction_A(p, eps);
    } else {
        out.correction = make_correction_B(p, eps, out.regime.m0_at_0);
    }
    return out;
}

ScenarioResult execute(const Scenario& s)
{
    ScenarioResult res;
    res.prepared = prepare(s);
    const auto& prep = res.prepared;
    RunOptions opts;
    opts.wall_clock_budget = s.wall_clock_budget;
    res.trajectory = run(prep.state0, s.params, s.grid, s.scheme, prep.regime, s.t_final, s.snapshot_times(), opts);

    SuiteOptions so;
    so.t_min = s.fit_t_min;
    so.t_max = s.fit_t_max;
    so.workers = default_workers();
    res.report = theorem_suite(res.trajectory.snapshots, s.grid, prep.profile, prep.correction, s.params, so);
    res.monitor = weighted_monitor(res.trajectory.snapshots, s.grid, prep.profile, prep.correction, s.params,
                                   s.monitor_after, s.monitor_factor);

    // time quadrature of the far-field boundary flux m_plus e^{-alpha t} by the step midpoints
    const double dt_max = res.trajectory.stats.dt_max;
    const double time_tol = dt_max * dt_max * s.params.alpha * std::abs(s.params.m_plus) / 24.0;
    for (const auto& st : res.trajectory.snapshots) {
        const auto pt = perturbation(st, s.grid, prep.profile, prep.correction, s.params);
        res.mass_identity.push_back({st.t, pt.Phi_at_0, pt.quadrature_tol + time_tol, pt.tail_mass});
        res.admissibility.push_back(stability_guard(st, s.params));
    }
    return res;
}

namespace {

std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path);
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    f << std::setprecision(17);
    return f;
}

void close_out(std::ofstream& f, const fs::path& path)
{
    f.close();
    if (!f) {
        throw IoError("write failed for " + path.string());
    }
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_profile_artifacts(const Scenario& s, const Prepared& prep, std::vector<fs::path>& artifacts)
{
    const fs::path prof = s.output_dir / "profile.csv";
    auto f = open_out(prof);
    write_profile_csv(f, prep.profile);
    close_out(f, prof);
    artifacts.push_back(prof);

    const fs::path corr = s.output_dir / "correction.csv";
    auto g = open_out(corr);
    std::vector<double> xs(s.grid.n_cells);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = s.grid.x(i);
    }
    write_correction_csv(g, prep.correction, xs, 0.0);
    close_out(g, corr);
    artifacts.push_back(corr);

    const fs::path cn = s.output_dir / "correction_norms.csv";
    auto h = open_out(cn);
    h << "k,norm,value_t0,fitted_rate\n";
    const std::vector<double> times = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    for (int k = 0; k <= 1; ++k) {
        for (NormKind nk : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
            const auto tab = correction_decay_scan(prep.correction, nk, k, times);
            const char* name = nk == NormKind::L1 ? "L1" : nk == NormKind::L2 ? "L2" : "Linf";
            h << k << ',' << name << ',' << tab.rows.front().value << ',' << tab.fitted_rate << '\n';
        }
    }
    close_out(h, cn);
    artifacts.push_back(cn);
}

template <class Fn>
RunOutcome guarded(Fn&& fn)
{
    RunOutcome out;
    try {
        fn(out);
    } catch (const IoError& e) {
        out.exit_code = 4;
        out.message = e.what();
    } catch (const fs::filesystem_error& e) {
        out.exit_code = 4;
        out.message = e.what();
    } catch (const std::logic_error& e) {
        // ConfigError, DomainError and argument errors
        out.exit_code = 2;
        out.message = e.what();
    } catch (const std::exception& e) {
        out.exit_code = 3;
        out.message = e.what();
    }
    return out;
}

}  // namespace

RunOutcome run_scenario(const Scenario& s)
{
    return guarded([&](RunOutcome& out) {
        ensure_dir(s.output_dir);
        ScenarioResult res = execute(s);
        const auto& prep = res.prepared;
        auto& artifacts = out.artifacts;

        if (s.snapshot_output != SnapshotOutput::None) {
            const fs::path dir = s.output_dir / "snapshots";
            ensure_dir(dir);
            const auto& snaps = res.trajectory.snapshots;
            for (std::size_t i = 0; i < snaps.size(); ++i) {
                if (s.snapshot_output == SnapshotOutput::Final && i + 1 != snaps.size()) {
                    continue;
                }
                std::ostringstream name;
                name << "snapshot_" << std::setw(4) << std::setfill('0') << i << ".csv";
                const fs::path path = dir / name.str();
                auto f = open_out(path);
                write_snapshot_csv(f, snaps[i], s.grid, s.params, s.scheme, prep.regime);
                close_out(f, path);
                artifacts.push_back(path);
            }
        }

        const fs::path norms = s.output_dir / "norms.csv";
        auto f = open_out(norms);
        write_norm_csv(f, res.report);
        close_out(f, norms);
        artifacts.push_back(norms);

        const fs::path decay = s.output_dir / "decay.csv";
        auto g = open_out(decay);
        write_decay_csv(g, res.report);
        close_out(g, decay);
        artifacts.push_back(decay);

        const fs::path weighted = s.output_dir / "weighted.csv";
        auto h = open_out(weighted);
        write_weighted_csv(h, res.monitor);
        close_out(h, weighted);
        artifacts.push_back(weighted);

        const fs::path mass = s.output_dir / "mass_identity.csv";
        auto k = open_out(mass);
        k << "t,Phi_at_0,quadrature_tol,tail_mass,min_rho,admissibility_margin\n";
        for (std::size_t i = 0; i < res.mass_identity.size(); ++i) {
            const auto& row = res.mass_identity[i];
            k << row.t << ',' << row.Phi_at_0 << ',' << row.quadrature_tol << ',' << row.tail_mass << ','
              << res.admissibility[i].min_rho << ',' << res.admissibility[i].min_margin << '\n';
        }
        close_out(k, mass);
        artifacts.push_back(mass);

        write_profile_artifacts(s, prep, artifacts);

        nlohmann::ordered_json m;
        m["tool"] = "chemowave";
        m["version"] = version_string();
        m["created"] = timestamp();
        m["status"] = "ok";
        m["params_hash"] = params_hash(s.params);
        nlohmann::ordered_json cfg;
        for (const auto& [key, value] : s.config.values()) {
            cfg[key] = value;
        }
        m["config"] = cfg;
        m["profile_kind"] = to_string(s.profile_source);
        m["delta0"] = prep.delta0;
        m["rho0_at_0"] = prep.regime.rho0_at_0;
        m["m0_at_0"] = prep.regime.m0_at_0;
        const auto& st = res.trajectory.stats;
        const double final_mass = total_mass(res.trajectory.snapshots.back(), s.grid);
        m["stats"] = {{"steps", st.steps},
                      {"rejections", st.rejections},
                      {"dt_min", st.dt_min},
                      {"dt_max", st.dt_max},
                      {"initial_mass", st.initial_mass},
                      {"final_mass", final_mass},
                      {"net_boundary_inflow", st.net_boundary_inflow},
                      {"wall_seconds", st.wall_seconds}};
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : res.report.rows) {
            nlohmann::ordered_json row;
            row["series"] = r.series;
            row["predicted"] = r.predicted;
            row["fitted"] = r.degenerate ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.fitted);
            row["r2"] = r.degenerate ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.r2);
            row["pass"] = r.pass();
            rows.push_back(row);
        }
        m["decay"] = rows;
        m["weighted_monitor"] = {{"t_after", res.monitor.t_after},
                                 {"factor", res.monitor.factor},
                                 {"grew", res.monitor.grew}};
        nlohmann::ordered_json files = nlohmann::ordered_json::array();
        for (const auto& a : artifacts) {
            files.push_back(fs::relative(a, s.output_dir).generic_string());
        }
        m["artifacts"] = files;

        const fs::path manifest = s.output_dir / "manifest.json";
        auto mf = open_out(manifest);
        mf << m.dump(2) << '\n';
        close_out(mf, manifest);
        artifacts.push_back(manifest);
        out.message = "ok";
    });
}

RunOutcome profile_scenario(const Scenario& s)
{
    return guarded([&](RunOutcome& out) {
        ensure_dir(s.output_dir);
        Scenario copy = s;
        const Prepared prep = prepare(copy);
        write_profile_artifacts(s, prep, out.artifacts);
        out.message = "ok";
    });
}

unsigned default_workers()
{
    if (const char* env = std::getenv("CHEMOWAVE_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string version_string()
{
    return std::string(CHEMOWAVE_VERSION) + " (git " + CHEMOWAVE_GIT + ")";
}

namespace {

void append_child_csv(std::ostream& os, const fs::path& path, const std::string& value, bool& header_done,
                      const std::string& status)
{
    std::ifstream in(path);
    if (!in) {
        return;
    }
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (!header_done) {
                os << "value," << line << ",status\n";
                header_done = true;
            }
            continue;
        }
        os << value << ',' << line << ',' << status << '\n';
    }
}

}  // namespace

SweepOutcome sweep(const Scenario& base, const std::string& axis, const std::vector<std::string>& values,
                   unsigned workers)
{
    if (values.empty()) {
        throw ConfigError("sweep: empty value list");
    }
    const auto& defaults = default_config();
    const auto it = defaults.find(axis);
    if (it == defaults.end()) {
        throw ConfigError("sweep: unknown axis '" + axis + "'");
    }
    static const std::set<std::string> non_numeric = {"regime.kind",  "scheme.flux",     "scheme.reconstruction",
                                                      "scheme.splitting", "initial.family", "profile.source",
                                                      "output.dir",   "output.snapshots", "run.snapshot_times"};
    if (non_numeric.count(axis)) {
        throw ConfigError("sweep: axis '" + axis + "' is not a sweepable scalar");
    }
    for (const auto& v : values) {
        double x = 0.0;
        if (!parse_double(v, x)) {
            throw ConfigError("sweep: value '" + v + "' is not a number");
        }
    }

    SweepOutcome out;
    out.children.resize(values.size());
    if (workers == 0) {
        workers = default_workers();
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            Config cfg = base.config;
            cfg.set(axis, values[i]);
            cfg.set("output.dir", (base.output_dir / (axis + "=" + values[i])).string());
            RunOutcome child;
            try {
                child = run_scenario(scenario_from_config(cfg));
            } catch (const std::exception& e) {
                child.exit_code = 2;
                child.message = e.what();
            }
            out.children[i] = {values[i], std::move(child)};
        }
    };
    const unsigned nthreads = std::min<unsigned>(workers, static_cast<unsigned>(values.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nthreads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    ensure_dir(base.output_dir);
    out.combined = base.output_dir / "combined.csv";
    auto f = open_out(out.combined);
    bool header = false;
    for (const auto& [value, child] : out.children) {
        const fs::path dir = base.output_dir / (axis + "=" + value);
        if (child.exit_code == 0) {
            append_child_csv(f, dir / "decay.csv", value, header, "ok");
        }
    }
    if (!header) {
        f << "value,series_name,predicted_exponent,fitted_exponent,r2,t_min,t_max,status\n";
    }
    for (const auto& [value, child] : out.children) {
        if (child.exit_code != 0) {
            f << value << ",,,,,,,exit=" << child.exit_code << '\n';
        }
    }
    close_out(f, out.combined);

    const fs::path corr = base.output_dir / "combined_correction.csv";
    auto g = open_out(corr);
    bool gheader = false;
    for (const auto& [value, child] : out.children) {
        if (child.exit_code == 0) {
            append_child_csv(g, base.output_dir / (axis + "=" + value) / "correction_norms.csv", value, gheader, "ok");
        }
    }
    if (!gheader) {
        g << "value,k,norm,value_t0,fitted_rate,status\n";
    }
    close_out(g, corr);

    for (const auto& [value, child] : out.children) {
        out.exit_code = std::max(out.exit_code, child.exit_code);
    }
    return out;
}

}  // namespace chemowave
