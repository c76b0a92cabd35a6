#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "analysis.hpp"
#include "coefficients.hpp"
#include "homogenization.hpp"
#include "integrators.hpp"
#include "svg.hpp"

namespace lhomog {

enum class ExperimentKind {
    fig1_fixed_realization,
    fig2_boxplots,
    fig3_periodic,
    fig4_sqrt_growth,
    fig5_sigma_sweep,
    verify_suite
};

inline const char* to_string(ExperimentKind k) noexcept
{
    switch (k) {
    case ExperimentKind::fig1_fixed_realization: return "fig1_fixed_realization";
    case ExperimentKind::fig2_boxplots: return "fig2_boxplots";
    case ExperimentKind::fig3_periodic: return "fig3_periodic";
    case ExperimentKind::fig4_sqrt_growth: return "fig4_sqrt_growth";
    case ExperimentKind::fig5_sigma_sweep: return "fig5_sigma_sweep";
    default: return "verify_suite";
    }
}

inline ExperimentKind experiment_from_string(const std::string& s)
{
    for (auto k : {ExperimentKind::fig1_fixed_realization, ExperimentKind::fig2_boxplots, ExperimentKind::fig3_periodic,
                   ExperimentKind::fig4_sqrt_growth, ExperimentKind::fig5_sigma_sweep, ExperimentKind::verify_suite})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown experiment: " + s);
}

/// `count` log-spaced points from lo to hi inclusive.
inline std::vector<double> log_spaced(double lo, double hi, int count)
{
    std::vector<double> v;
    for (int i = 0; i < count; ++i)
        v.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return v;
}

struct IntegratorConfig {
    std::string method = "yoshida6";
    double dt = 0.0;               // 0: automatic
    std::string yoshida = "A";
    std::int64_t min_samples = 2000;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::fig1_fixed_realization;
    std::vector<double> epsilons = log_spaced(0.0125, 0.1, 10);
    std::int64_t trials = 1;
    double T0 = 1.0;
    std::uint64_t seed = 20240601;
    IntegratorConfig integrator;
    DistributionSpec masses = DistributionSpec::uniform(0.5, 1.5);
    DistributionSpec springs = DistributionSpec::constant(1.0);
    std::vector<double> periodic_masses{0.5, 1.5};
    double sqrt_m1 = 0.5;
    double sqrt_m2 = 1.5;
    std::vector<double> sigma_half_widths{0.1, 0.2, 0.3, 0.4, 0.5};
    bool snapshots = false;
    std::string output_dir = "out";
    int workers = 0;

    /// Experiment-specific defaults applied before explicit keys.
    static ExperimentConfig defaults_for(ExperimentKind k)
    {
        ExperimentConfig c;
        c.experiment = k;
        if (k == ExperimentKind::fig2_boxplots || k == ExperimentKind::fig5_sigma_sweep) c.trials = 40;
        if (k == ExperimentKind::fig5_sigma_sweep) c.epsilons = {0.05};
        return c;
    }

    void validate() const
    {
        if (epsilons.empty()) throw std::invalid_argument("config: epsilons must not be empty");
        for (double e : epsilons)
            if (!(e > 0 && e < 0.5)) throw std::invalid_argument("config: every epsilon must lie in (0, 1/2)");
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (!(T0 > 0)) throw std::invalid_argument("config: T0 must be positive");
        method_from_string(integrator.method);
        YoshidaCoefficients::from_name(integrator.yoshida);
        if (integrator.dt < 0) throw std::invalid_argument("config: integrator.dt must be >= 0");
        if (integrator.min_samples < 2) throw std::invalid_argument("config: integrator.min_samples must be >= 2");
        masses.validate();
        springs.validate();
        if (periodic_masses.empty()) throw std::invalid_argument("config: periodic_masses must not be empty");
        for (double h : sigma_half_widths)
            if (!(h >= 0 && h < 1)) throw std::invalid_argument("config: sigma half-widths must lie in [0, 1)");
        if (workers < 0) throw std::invalid_argument("config: workers must be >= 0");
    }
};

inline nlohmann::json distribution_to_json(const DistributionSpec& d)
{
    switch (d.kind) {
    case DistributionSpec::Kind::uniform: return {{"kind", "uniform"}, {"a", d.a}, {"b", d.b}};
    case DistributionSpec::Kind::two_point: return {{"kind", "two_point"}, {"a", d.a}, {"b", d.b}, {"prob", d.prob}};
    default: return {{"kind", "constant"}, {"a", d.a}};
    }
}

inline DistributionSpec distribution_from_json(const nlohmann::json& j)
{
    for (const auto& [k, v] : j.items())
        if (k != "kind" && k != "a" && k != "b" && k != "prob") throw std::invalid_argument("config: unknown distribution key " + k);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") return DistributionSpec::uniform(j.at("a").get<double>(), j.at("b").get<double>());
    if (kind == "two_point")
        return DistributionSpec::two_point(j.at("a").get<double>(), j.at("b").get<double>(), j.value("prob", 0.5));
    if (kind == "constant") return DistributionSpec::constant(j.at("a").get<double>());
    throw std::invalid_argument("config: unknown distribution kind " + kind);
}

inline nlohmann::json config_to_json(const ExperimentConfig& c)
{
    return {{"experiment", to_string(c.experiment)},
            {"epsilons", c.epsilons},
            {"trials", c.trials},
            {"T0", c.T0},
            {"seed", c.seed},
            {"integrator",
             {{"method", c.integrator.method},
              {"dt", c.integrator.dt},
              {"yoshida", c.integrator.yoshida},
              {"min_samples", c.integrator.min_samples}}},
            {"masses", distribution_to_json(c.masses)},
            {"springs", distribution_to_json(c.springs)},
            {"periodic_masses", c.periodic_masses},
            {"sqrt_masses", {{"m1", c.sqrt_m1}, {"m2", c.sqrt_m2}}},
            {"sigma_half_widths", c.sigma_half_widths},
            {"snapshots", c.snapshots},
            {"output_dir", c.output_dir},
            {"workers", c.workers}};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    static const std::set<std::string> known{"experiment", "epsilons", "trials", "T0", "seed", "integrator",
                                             "masses", "springs", "periodic_masses", "sqrt_masses",
                                             "sigma_half_widths", "snapshots", "output_dir", "workers"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw std::invalid_argument("config: unknown key " + k);
    ExperimentConfig c = ExperimentConfig::defaults_for(experiment_from_string(j.at("experiment").get<std::string>()));
    if (j.contains("epsilons")) c.epsilons = j["epsilons"].get<std::vector<double>>();
    if (j.contains("trials")) c.trials = j["trials"].get<std::int64_t>();
    if (j.contains("T0")) c.T0 = j["T0"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("integrator")) {
        const auto& i = j["integrator"];
        for (const auto& [k, v] : i.items())
            if (k != "method" && k != "dt" && k != "yoshida" && k != "min_samples")
                throw std::invalid_argument("config: unknown integrator key " + k);
        c.integrator.method = i.value("method", c.integrator.method);
        c.integrator.dt = i.value("dt", c.integrator.dt);
        c.integrator.yoshida = i.value("yoshida", c.integrator.yoshida);
        c.integrator.min_samples = i.value("min_samples", c.integrator.min_samples);
    }
    if (j.contains("masses")) c.masses = distribution_from_json(j["masses"]);
    if (j.contains("springs")) c.springs = distribution_from_json(j["springs"]);
    if (j.contains("periodic_masses")) c.periodic_masses = j["periodic_masses"].get<std::vector<double>>();
    if (j.contains("sqrt_masses")) {
        c.sqrt_m1 = j["sqrt_masses"].value("m1", c.sqrt_m1);
        c.sqrt_m2 = j["sqrt_masses"].value("m2", c.sqrt_m2);
    }
    if (j.contains("sigma_half_widths")) c.sigma_half_widths = j["sigma_half_widths"].get<std::vector<double>>();
    if (j.contains("snapshots")) c.snapshots = j["snapshots"].get<bool>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return config_from_json(j);
}

/// FNV-1a of the canonical JSON of the fields that determine results.
inline std::string config_hash(const ExperimentConfig& c)
{
    nlohmann::json j = config_to_json(c);
    j.erase("output_dir");
    j.erase("workers");
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

struct ExperimentRecord {
    std::string experiment;
    std::string variant;
    double epsilon = 0.0;
    std::int64_t trial = 0;
    std::uint64_t seed = 0;
    double sigma_m = 0.0;
    double mbar = 1.0;
    double ktilde = 1.0;
    ErrorReport report;
    double gronwall_bound = 0.0;
    bool gronwall_pass = false;
    std::int64_t J = 0;
    double dt = 0.0;
    double wall_seconds = 0.0;   // kept out of records.csv

    std::tuple<std::string, std::string, double, std::int64_t> key() const { return {experiment, variant, epsilon, trial}; }
};

/// One unit of work: a coefficient model at one ε.
struct Job {
    std::string variant;
    double epsilon;
    std::int64_t trial;
    std::uint64_t seed;
    std::function<CoefficientField(std::int64_t J)> build;
};

struct RunOptions {
    IntegratorConfig integrator;
    double T0 = 1.0;
    std::string snapshot_path;   // empty: none
};

/// Integrates Gaussian data Φ = e^{−X²}, Ψ = −Φ on one coefficient model and
/// measures it against the ansatz at every observed time.
inline ExperimentRecord run_single(const std::string& experiment, const Job& job, const RunOptions& opt)
{
    const auto start = std::chrono::steady_clock::now();
    const double eps = job.epsilon;
    const InitialData data = InitialData::gaussian_pulse(eps);
    data.validate();

    // the window depends on c, which depends only on the limiting statistics
    const CoefficientField probe = job.build(8);
    const WaveProfiles probe_w = profiles_from_initial_data(data, probe);
    const Interval sa = probe_w.A.support(), sb = probe_w.B.support();
    const double reach = std::max({std::abs(sa.lo), std::abs(sa.hi), std::abs(sb.lo), std::abs(sb.hi)});
    const std::int64_t J = window_half_width(eps, reach, probe_w.c, opt.T0);

    const CoefficientField coeffs = job.build(J);
    coeffs.validate();
    const WaveProfiles w = profiles_from_initial_data(data, coeffs);
    const CorrectorWalk walks = corrector_walks(coeffs);

    IntegratorSpec spec;
    spec.method = method_from_string(opt.integrator.method);
    spec.yoshida = YoshidaCoefficients::from_name(opt.integrator.yoshida);
    spec.t_end = opt.T0 / eps;
    const double guard = stable_dt(spec.method, coeffs, spec.yoshida);
    const auto samples_wanted = static_cast<double>(opt.integrator.min_samples);
    spec.dt = opt.integrator.dt > 0 ? opt.integrator.dt : std::min(0.1 * guard, spec.t_end / samples_wanted);
    const std::int64_t steps = step_count(spec.t_end, spec.dt);
    spec.observe_every = std::max<std::int64_t>(1, steps / opt.integrator.min_samples);

    AnsatzFrame frame(w, walks, coeffs, eps);
    LatticeState last;
    const auto samples = integrate(initial_state(data, coeffs), coeffs, spec, [&](const LatticeState& s) {
        if (!opt.snapshot_path.empty()) last = s;
        return sample_errors(s, frame, coeffs);
    });

    ExperimentRecord rec;
    rec.experiment = experiment;
    rec.variant = job.variant;
    rec.epsilon = eps;
    rec.trial = job.trial;
    rec.seed = job.seed;
    rec.sigma_m = coeffs.sigma_m;
    rec.mbar = coeffs.mbar;
    rec.ktilde = coeffs.ktilde;
    rec.report = error_metrics(samples, eps, opt.T0);
    const GronwallResult g = gronwall_bound_check(rec.report, coeffs);
    rec.gronwall_bound = g.bound;
    rec.gronwall_pass = g.pass;
    rec.J = J;
    rec.dt = spec.t_end / static_cast<double>(steps);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!opt.snapshot_path.empty()) {
        std::ofstream out(opt.snapshot_path);
        if (!out) throw std::runtime_error("cannot write snapshot: " + opt.snapshot_path);
        out.precision(17);
        out << "j,m,k,r,p\n";
        for (std::int64_t j = -J; j <= J; ++j)
            out << j << ',' << coeffs.m[j] << ',' << coeffs.k[j] << ',' << last.r[j] << ',' << last.p[j] << '\n';
    }
    return rec;
}

inline std::string format_variant_h(double h)
{
    std::ostringstream s;
    s << "h=" << h;
    return s.str();
}

/// Work items of an experiment in deterministic order.
inline std::vector<Job> plan_jobs(const ExperimentConfig& c)
{
    std::vector<Job> jobs;
    const DistributionSpec springs = c.springs;
    switch (c.experiment) {
    case ExperimentKind::fig1_fixed_realization:
    case ExperimentKind::fig2_boxplots:
        for (std::int64_t t = 0; t < c.trials; ++t) {
            const std::uint64_t s = derive_seed(c.seed, static_cast<std::uint64_t>(t));
            for (double e : c.epsilons) {
                jobs.push_back({"iid", e, t, s, [m = c.masses, springs, s](std::int64_t J) {
                                    DistributionSpec mm = m, kk = springs;
                                    mm.seed = s;
                                    kk.seed = s ^ 0x9e3779b97f4a7c15ULL;
                                    return sample_iid(mm, kk, J);
                                }});
            }
        }
        break;
    case ExperimentKind::fig3_periodic:
        for (double e : c.epsilons)
            jobs.push_back({"periodic", e, 0, c.seed,
                            [m = c.periodic_masses](std::int64_t J) { return pattern_periodic(m, J); }});
        break;
    case ExperimentKind::fig4_sqrt_growth:
        for (double e : c.epsilons)
            jobs.push_back({"sqrt", e, 0, c.seed,
                            [m1 = c.sqrt_m1, m2 = c.sqrt_m2](std::int64_t J) { return pattern_sqrt_growth(m1, m2, J); }});
        break;
    case ExperimentKind::fig5_sigma_sweep:
        for (double e : c.epsilons) {
            jobs.push_back({"h=0", e, 0, c.seed, [](std::int64_t J) { return constant_field(1.0, 1.0, J); }});
            for (double h : c.sigma_half_widths) {
                if (h == 0.0) continue;
                for (std::int64_t t = 0; t < c.trials; ++t) {
                    const std::uint64_t s = derive_seed(c.seed, static_cast<std::uint64_t>(t));
                    jobs.push_back({format_variant_h(h), e, t, s, [h, s](std::int64_t J) {
                                        return sample_iid(DistributionSpec::uniform(1.0 - h, 1.0 + h, s),
                                                          DistributionSpec::constant(1.0), J);
                                    }});
                }
            }
        }
        break;
    case ExperimentKind::verify_suite:
        throw std::invalid_argument("verify_suite has no lattice runs; use the verify command");
    }
    return jobs;
}

// ---------------------------------------------------------------- records I/O

inline const char* record_csv_header()
{
    return "experiment,variant,epsilon,trial,seed,sigma_m,mbar,ktilde,sup_abs_error_r,sup_abs_error_p,rho,gamma_eps,"
           "C_omega_estimate,epsilon_report,T0,times_sampled,eta_xi_initial,eta_xi_sup,gronwall_bound,gronwall_pass,J,dt";
}

inline std::string record_csv_row(const ExperimentRecord& r)
{
    std::ostringstream o;
    o.precision(17);
    o << r.experiment << ',' << r.variant << ',' << r.epsilon << ',' << r.trial << ',' << r.seed << ',' << r.sigma_m
      << ',' << r.mbar << ',' << r.ktilde << ',';
    write_csv_fields(o, r.report);
    o << ',' << r.gronwall_bound << ',' << (r.gronwall_pass ? 1 : 0) << ',' << r.J << ',' << r.dt;
    return o.str();
}

namespace detail {
inline double parse_double(const std::string& s)
{
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    return std::stod(s);
}
} // namespace detail

inline ExperimentRecord record_from_csv_row(const std::string& line)
{
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 22) throw std::runtime_error("records: malformed row '" + line + "'");
    ExperimentRecord r;
    std::size_t i = 0;
    r.experiment = f[i++];
    r.variant = f[i++];
    r.epsilon = detail::parse_double(f[i++]);
    r.trial = std::stoll(f[i++]);
    r.seed = std::stoull(f[i++]);
    r.sigma_m = detail::parse_double(f[i++]);
    r.mbar = detail::parse_double(f[i++]);
    r.ktilde = detail::parse_double(f[i++]);
    r.report.sup_abs_error_r = detail::parse_double(f[i++]);
    r.report.sup_abs_error_p = detail::parse_double(f[i++]);
    r.report.rho = detail::parse_double(f[i++]);
    r.report.gamma_eps = detail::parse_double(f[i++]);
    r.report.C_omega_estimate = detail::parse_double(f[i++]);
    r.report.epsilon = detail::parse_double(f[i++]);
    r.report.T0 = detail::parse_double(f[i++]);
    r.report.times_sampled = std::stoll(f[i++]);
    r.report.eta_xi_initial = detail::parse_double(f[i++]);
    r.report.eta_xi_sup = detail::parse_double(f[i++]);
    r.gronwall_bound = detail::parse_double(f[i++]);
    r.gronwall_pass = f[i++] == "1";
    r.J = std::stoll(f[i++]);
    r.dt = detail::parse_double(f[i++]);
    return r;
}

/// Reads a records file; a missing file yields no records.
inline std::vector<ExperimentRecord> read_records(const std::filesystem::path& path)
{
    std::vector<ExperimentRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    if (!std::getline(in, line)) return out;
    if (line != record_csv_header()) throw std::runtime_error(path.string() + ": unexpected header");
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(record_from_csv_row(line));
    return out;
}

inline void sort_records(std::vector<ExperimentRecord>& v)
{
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
}

inline void write_records(const std::filesystem::path& path, std::vector<ExperimentRecord> v)
{
    sort_records(v);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << record_csv_header() << '\n';
        for (const auto& r : v) out << record_csv_row(r) << '\n';
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------- summaries

struct Quartiles {
    double q1 = 0, median = 0, q3 = 0, min = 0, max = 0;
};

/// Linear-interpolation quantiles of a nonempty sample.
inline Quartiles quartiles(std::vector<double> v)
{
    if (v.empty()) throw std::invalid_argument("quartiles: empty sample");
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(v.size() - 1);
        const auto i = static_cast<std::size_t>(std::floor(pos));
        const double f = pos - static_cast<double>(i);
        return i + 1 < v.size() ? v[i] + f * (v[i + 1] - v[i]) : v[i];
    };
    return {q(0.25), q(0.5), q(0.75), v.front(), v.back()};
}

inline nlohmann::json quartiles_json(const Quartiles& q)
{
    return {{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"min", q.min}, {"max", q.max}};
}

struct GroupStats {
    std::string variant;
    double epsilon;
    double sigma_m;
    std::size_t n;
    Quartiles rho, rho_loglog, abs_error, gamma;
};

inline std::vector<GroupStats> group_records(const std::vector<ExperimentRecord>& records)
{
    std::map<std::pair<std::string, double>, std::vector<const ExperimentRecord*>> groups;
    for (const auto& r : records) groups[{r.variant, r.epsilon}].push_back(&r);
    std::vector<GroupStats> out;
    for (const auto& [key, rs] : groups) {
        std::vector<double> rho, rl, ab, ga;
        double sig = 0;
        for (const auto* r : rs) {
            rho.push_back(r->report.rho);
            rl.push_back(r->report.rho / loglog_factor(r->epsilon));
            ab.push_back(r->report.sup_abs_error_r);
            ga.push_back(r->report.gamma_eps);
            sig += r->sigma_m;
        }
        out.push_back({key.first, key.second, sig / static_cast<double>(rs.size()), rs.size(), quartiles(rho),
                       quartiles(rl), quartiles(ab), quartiles(ga)});
    }
    return out;
}

inline nlohmann::json fit_json(const SlopeFit& f)
{
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

/// Per-(variant, ε) quartiles plus log-log fits of medians against ε.
inline nlohmann::json summarize(const std::vector<ExperimentRecord>& records, const std::string& hash)
{
    nlohmann::json j;
    j["config_hash"] = hash;
    j["records"] = records.size();
    bool gron = true;
    for (const auto& r : records) gron = gron && r.gronwall_pass;
    j["gronwall_all_pass"] = gron;
    if (!records.empty()) j["experiment"] = records.front().experiment;

    const auto groups = group_records(records);
    j["groups"] = nlohmann::json::array();
    std::map<std::string, std::vector<const GroupStats*>> by_variant;
    for (const auto& g : groups) {
        j["groups"].push_back({{"variant", g.variant},
                               {"epsilon", g.epsilon},
                               {"sigma_m", g.sigma_m},
                               {"n", g.n},
                               {"rho", quartiles_json(g.rho)},
                               {"rho_over_sqrt_loglog", quartiles_json(g.rho_loglog)},
                               {"abs_error", quartiles_json(g.abs_error)},
                               {"gamma_eps", quartiles_json(g.gamma)}});
        by_variant[g.variant].push_back(&g);
    }
    j["fits"] = nlohmann::json::object();
    for (const auto& [variant, gs] : by_variant) {
        if (gs.size() < 3) continue;
        std::vector<double> e, rho, rl, ab, ga, iqr;
        for (const auto* g : gs) {
            e.push_back(g->epsilon);
            rho.push_back(g->rho.median);
            rl.push_back(g->rho_loglog.median);
            ab.push_back(g->abs_error.median);
            ga.push_back(g->gamma.median);
            iqr.push_back(g->rho.q3 - g->rho.q1);
        }
        nlohmann::json f;
        f["rho"] = fit_json(slope_fit(e, rho));
        f["rho_over_sqrt_loglog"] = fit_json(slope_fit(e, rl));
        f["abs_error"] = fit_json(slope_fit(e, ab));
        f["gamma_eps"] = fit_json(slope_fit(e, ga));
        if (std::all_of(iqr.begin(), iqr.end(), [](double v) { return v > 0; }))
            f["rho_iqr"] = fit_json(slope_fit(e, iqr));
        j["fits"][variant] = f;
    }

    // σ sweep: medians ordered by σ_m within each ε
    std::map<double, std::vector<const GroupStats*>> by_eps;
    for (const auto& g : groups)
        if (g.variant.rfind("h=", 0) == 0) by_eps[g.epsilon].push_back(&g);
    if (!by_eps.empty()) {
        j["sigma_sweep"] = nlohmann::json::array();
        for (auto& [eps, gs] : by_eps) {
            std::sort(gs.begin(), gs.end(), [](auto* a, auto* b) { return a->sigma_m < b->sigma_m; });
            const GroupStats* base = nullptr;
            std::vector<const GroupStats*> random;
            for (const auto* g : gs) {
                if (g->variant == "h=0")
                    base = g;
                else
                    random.push_back(g);
            }
            bool monotone = true;
            for (std::size_t i = 1; i < random.size(); ++i)
                monotone = monotone && random[i]->abs_error.median > random[i - 1]->abs_error.median;
            nlohmann::json s{{"epsilon", eps}, {"medians_increase_with_sigma", monotone}};
            if (base) s["constant_coefficient_abs_error"] = base->abs_error.median;
            if (!random.empty()) s["smallest_sigma_median"] = random.front()->abs_error.median;
            j["sigma_sweep"].push_back(s);
        }
    }
    return j;
}

// ---------------------------------------------------------------- plots

/// Writes SVG figures for the records into `dir`; returns the paths.
inline std::vector<std::string> emit_plots(const std::vector<ExperimentRecord>& records, const std::string& dir,
                                           const std::string& hash)
{
    if (records.empty()) throw std::invalid_argument("emit_plots: no records");
    std::filesystem::create_directories(dir);
    const auto groups = group_records(records);
    std::vector<std::string> files;
    const std::string tag = "config " + hash;
    auto fmt = [](double v) {
        std::ostringstream s;
        s.precision(4);
        s << v;
        return s.str();
    };

    std::map<std::string, std::vector<const GroupStats*>> by_variant;
    for (const auto& g : groups) by_variant[g.variant].push_back(&g);

    bool sweep = false;
    for (const auto& [variant, gs] : by_variant) {
        if (variant.rfind("h=", 0) == 0) {
            sweep = true;
            continue;
        }
        const bool boxes = std::any_of(gs.begin(), gs.end(), [](auto* g) { return g->n > 1; });
        const bool iid = variant == "iid";
        const std::string ylabel = iid ? "rho / sqrt(log log(1/eps))" : "relative error rho";
        svg::Chart chart(records.front().experiment + " (" + variant + ")", "epsilon", ylabel, true, true);
        std::vector<double> e, y;
        for (const auto* g : gs) {
            const Quartiles& q = iid ? g->rho_loglog : g->rho;
            e.push_back(g->epsilon);
            y.push_back(q.median);
            if (boxes) chart.box({g->epsilon, q.q1, q.median, q.q3, q.min, q.max}, 0.025);
        }
        if (!boxes) {
            std::vector<double> allx, ally;
            for (const auto& r : records)
                if (r.variant == variant) {
                    allx.push_back(r.epsilon);
                    ally.push_back(iid ? r.report.rho / loglog_factor(r.epsilon) : r.report.rho);
                }
            chart.points(allx, ally);
        }
        if (e.size() >= 3) {
            const SlopeFit f = slope_fit(e, y);
            std::vector<double> fy;
            for (double x : e) fy.push_back(std::exp(f.intercept) * std::pow(x, f.slope));
            chart.line(e, fy);
            chart.note("fitted slope " + fmt(f.slope) + " (r^2 " + fmt(f.r_squared) + ")");
        }
        chart.note(tag);
        const std::string path = (std::filesystem::path(dir) / (records.front().experiment + "_" + variant + ".svg")).string();
        chart.write(path);
        files.push_back(path);
    }

    if (sweep) {
        std::map<double, std::vector<const GroupStats*>> by_eps;
        for (const auto& g : groups)
            if (g.variant.rfind("h=", 0) == 0) by_eps[g.epsilon].push_back(&g);
        for (const auto& [eps, gs] : by_eps) {
            svg::Chart chart("absolute error against sigma_m at eps = " + fmt(eps), "sigma_m", "sup_t ||r - (A+B)/k||",
                             false, false);
            double smax = 0;
            for (const auto* g : gs) smax = std::max(smax, g->sigma_m);
            const double hw = std::max(0.004, 0.02 * smax);
            for (const auto* g : gs) {
                const Quartiles& q = g->abs_error;
                if (g->variant == "h=0")
                    chart.hline(q.median, "constant coefficients " + fmt(q.median));
                else
                    chart.box({g->sigma_m, q.q1, q.median, q.q3, q.min, q.max}, hw);
            }
            chart.note(tag);
            std::ostringstream name;
            name << records.front().experiment << "_eps" << eps << ".svg";
            const std::string path = (std::filesystem::path(dir) / name.str()).string();
            chart.write(path);
            files.push_back(path);
        }
    }
    return files;
}

// ---------------------------------------------------------------- driver

struct RunSummary {
    std::vector<ExperimentRecord> records;
    std::vector<std::string> failures;
    std::size_t skipped = 0;
    std::vector<std::string> plots;
};

/// Runs every (variant, ε, trial) job not already present in the output
/// directory. Completed records are appended to records.partial.csv as they
/// finish; at the end records.csv is rewritten sorted, followed by
/// timings.csv, summary.json, config.json and the plots.
inline RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr)
{
    cfg.validate();
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const fs::path final_path = dir / "records.csv", partial_path = dir / "records.partial.csv";
    const std::string experiment = to_string(cfg.experiment);
    const std::string hash = config_hash(cfg);

    // a different configuration in the same directory would mix results
    const fs::path cfg_path = dir / "config.json";
    if (fs::exists(cfg_path)) {
        std::ifstream in(cfg_path);
        nlohmann::json old;
        in >> old;
        if (old.value("config_hash", std::string()) != hash)
            throw std::runtime_error(cfg_path.string() + " belongs to a different configuration (hash " +
                                     old.value("config_hash", std::string("?")) + ", now " + hash + ")");
    }
    {
        nlohmann::json c = config_to_json(cfg);
        c["config_hash"] = hash;
        std::ofstream out(cfg_path);
        out << c.dump(2) << '\n';
    }

    std::vector<ExperimentRecord> existing = read_records(final_path);
    for (auto& r : read_records(partial_path)) existing.push_back(std::move(r));
    std::set<std::tuple<std::string, std::string, double, std::int64_t>> done;
    std::vector<ExperimentRecord> kept;
    for (auto& r : existing)
        if (r.experiment == experiment && done.insert(r.key()).second) kept.push_back(std::move(r));

    std::vector<Job> todo;
    RunSummary summary;
    for (auto& j : plan_jobs(cfg)) {
        if (done.count({experiment, j.variant, j.epsilon, j.trial}))
            ++summary.skipped;
        else
            todo.push_back(std::move(j));
    }

    const bool fresh_partial = !fs::exists(partial_path);
    std::ofstream partial(partial_path, std::ios::app);
    if (!partial) throw std::runtime_error("cannot write " + partial_path.string());
    if (fresh_partial) partial << record_csv_header() << '\n' << std::flush;

    std::mutex mu;
    std::vector<ExperimentRecord> fresh;
    std::atomic<std::size_t> next{0};
    if (cfg.snapshots) fs::create_directories(dir / "snapshots");
    RunOptions opt{cfg.integrator, cfg.T0, {}};

    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < todo.size();) {
            const Job& job = todo[i];
            RunOptions o = opt;
            if (cfg.snapshots) {
                std::ostringstream name;
                name << job.variant << "_eps" << job.epsilon << "_trial" << job.trial << ".csv";
                o.snapshot_path = (dir / "snapshots" / name.str()).string();
            }
            try {
                ExperimentRecord rec = run_single(experiment, job, o);
                std::lock_guard lock(mu);
                partial << record_csv_row(rec) << '\n' << std::flush;
                if (log)
                    *log << experiment << ' ' << rec.variant << " eps=" << rec.epsilon << " trial=" << rec.trial
                         << " rho=" << rec.report.rho << " (" << rec.wall_seconds << " s)\n";
                fresh.push_back(std::move(rec));
            } catch (const std::exception& e) {
                std::ostringstream m;
                m << job.variant << ",eps=" << job.epsilon << ",trial=" << job.trial << ": " << e.what();
                std::lock_guard lock(mu);
                if (log) *log << "FAILED " << m.str() << '\n';
                summary.failures.push_back(m.str());
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto nworkers = static_cast<std::size_t>(cfg.workers > 0 ? cfg.workers : static_cast<int>(hw));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(nworkers, std::max<std::size_t>(1, todo.size())); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    partial.close();

    // timings of this invocation, merged with earlier ones
    {
        std::map<std::tuple<std::string, double, std::int64_t>, double> times;
        std::ifstream in(dir / "timings.csv");
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string v, e, t, s;
            std::getline(ss, v, ',');
            std::getline(ss, v, ',');
            std::getline(ss, e, ',');
            std::getline(ss, t, ',');
            std::getline(ss, s, ',');
            if (!s.empty()) times[{v, std::stod(e), std::stoll(t)}] = std::stod(s);
        }
        for (const auto& r : fresh) times[{r.variant, r.epsilon, r.trial}] = r.wall_seconds;
        std::ofstream out(dir / "timings.csv");
        out.precision(17);
        out << "experiment,variant,epsilon,trial,wall_seconds\n";
        for (const auto& [k, s] : times)
            out << experiment << ',' << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k) << ',' << s << '\n';
    }

    for (auto& r : fresh) kept.push_back(r);
    sort_records(kept);
    write_records(final_path, kept);
    fs::remove(partial_path);
    summary.records = kept;

    nlohmann::json s = summarize(kept, hash);
    s["failures"] = summary.failures;
    {
        std::ofstream out(dir / "summary.json");
        out << s.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write summary.json in " + dir.string());
    }
    if (!kept.empty()) summary.plots = emit_plots(kept, dir.string(), hash);
    return summary;
}

} // namespace lhomog
