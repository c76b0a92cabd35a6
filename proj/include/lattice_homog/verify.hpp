#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "coarse_grain.hpp"
#include "coefficients.hpp"
#include "experiments.hpp"
#include "homogenization.hpp"
#include "integrators.hpp"

namespace lhomog {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_pass() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Exact plane wave u = cos(κj − ωt), ω = 2 sin(κ/2), of the unit lattice:
/// r = δ⁺u, p = ∂ₜu.
inline LatticeState plane_wave_state(std::int64_t J, double kappa, double t)
{
    const double omega = 2.0 * std::abs(std::sin(0.5 * kappa));
    LatticeState s = LatticeState::zero(J, t);
    for (std::int64_t j = -J; j <= J; ++j) {
        const double ph = kappa * static_cast<double>(j) - omega * t;
        s.r[j] = std::cos(ph + kappa) - std::cos(ph);
        s.p[j] = omega * std::sin(ph);
    }
    return s;
}

/// Max error against the plane wave after time T over |j| ≤ interior.
inline double plane_wave_error(Method m, double dt, double T, const YoshidaCoefficients& y = YoshidaCoefficients::solution_a(),
                               std::int64_t J = 200, double kappa = std::numbers::pi / 2)
{
    const CoefficientField c = constant_field(1.0, 1.0, J);
    LatticeState s = plane_wave_state(J, kappa, 0.0);
    evolve_to(s, c, m, dt, T, y);
    const LatticeState ref = plane_wave_state(J, kappa, T);
    // boundary effects travel at most at unit speed
    const auto interior = J - static_cast<std::int64_t>(std::ceil(T)) - 20;
    double err = 0;
    for (std::int64_t j = -interior; j <= interior; ++j)
        err = std::max({err, std::abs(s.r[j] - ref.r[j]), std::abs(s.p[j] - ref.p[j])});
    return err;
}

/// max_n |H(n) − H(0)| / H(0) over `steps` Yoshida steps of Gaussian long-wave
/// data on an i.i.d. lattice.
inline double yoshida_energy_drift(const YoshidaCoefficients& y, std::int64_t steps, double dt, std::uint64_t seed)
{
    const double eps = 0.1;
    const CoefficientField c = sample_iid(DistributionSpec::uniform(0.5, 1.5, seed), DistributionSpec::uniform(0.8, 1.2, seed + 1), 300);
    LatticeState s = initial_state(InitialData::gaussian_pulse(eps), c);
    const double h0 = lattice_energy(s, c);
    Stepper st(c, Method::yoshida6, y);
    double drift = 0;
    for (std::int64_t n = 0; n < steps; ++n) {
        st.step(s, dt);
        drift = std::max(drift, std::abs(lattice_energy(s, c) - h0) / h0);
    }
    return drift;
}

inline VerifyReport verify_suite(std::uint64_t seed, std::ostream* log = nullptr)
{
    VerifyReport rep;
    auto add = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& f) {
        CheckResult c{name, false, {}};
        try {
            std::tie(c.pass, c.detail) = f();
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        if (log) *log << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n' << std::flush;
        rep.checks.push_back(std::move(c));
    };
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(4);
        s << v;
        return s.str();
    };

    add("summation_by_parts", [&] {
        const auto c = sample_iid(DistributionSpec::uniform(0.5, 1.5, seed), DistributionSpec::uniform(0.5, 2, seed), 500);
        LatticeState s = LatticeState::zero(500);
        for (std::int64_t j = -500; j <= 500; ++j) {
            s.r[j] = uniform01(seed, 1, site_counter(j)) - 0.5;
            s.p[j] = uniform01(seed, 2, site_counter(j)) - 0.5;
        }
        const Rates d = rhs(s, c);
        KahanSum dh, scale;
        for (std::int64_t j = -500; j <= 500; ++j) {
            dh.add(c.k[j] * s.r[j] * d.dr[j] + c.m[j] * s.p[j] * d.dp[j]);
            scale.add(std::abs(c.k[j] * s.r[j] * d.dr[j]));
        }
        const double rel = std::abs(dh.value()) / scale.value();
        return std::pair{rel < 1e-13, "dH/dt relative " + num(rel)};
    });

    add("residual_cross_check", [&] {
        double worst = 0;
        for (std::uint64_t t = 0; t < 10; ++t) {
            const std::uint64_t s = derive_seed(seed, t);
            const auto c = sample_iid(DistributionSpec::uniform(0.5, 1.5, s), DistributionSpec::uniform(0.6, 1.4, s ^ 1), 300);
            const double eps = 0.05 + 0.04 * uniform01(s, 3, 0);
            const double time = 5.0 * uniform01(s, 3, 1);
            const InitialData d{Profile::gaussian(1.0, 0.3), Profile::gaussian(-0.7, -0.2, 1.3), eps};
            const auto w = profiles_from_initial_data(d, c);
            const auto walks = corrector_walks(c);
            const auto a = residual_closed_form(w, walks, c, eps, time);
            const auto b = residual_definitional(w, walks, c, eps, time);
            const double sc = std::max(max_abs(b.res1), max_abs(b.res2));
            for (std::int64_t j = -299; j <= 299; ++j)
                worst = std::max({worst, std::abs(a.res1[j] - b.res1[j]) / sc, std::abs(a.res2[j] - b.res2[j]) / sc});
        }
        return std::pair{worst <= 1e-10, "max relative difference " + num(worst)};
    });

    add("rk4_order", [&] {
        const std::vector<double> dts{0.4, 0.2, 0.1, 0.05};
        std::vector<double> errs;
        for (double dt : dts) errs.push_back(plane_wave_error(Method::rk4, dt, 20.0));
        const double s = slope_fit(dts, errs).slope;
        return std::pair{std::abs(s - 4.0) <= 0.2, "slope " + num(s)};
    });

    add("yoshida6_order", [&] {
        const std::vector<double> dts{0.4, 0.3, 0.2, 0.15};
        std::vector<double> errs;
        for (double dt : dts) errs.push_back(plane_wave_error(Method::yoshida6, dt, 20.0));
        const double s = slope_fit(dts, errs).slope;
        return std::pair{std::abs(s - 6.0) <= 0.4, "slope " + num(s)};
    });

    add("yoshida6_energy_drift", [&] {
        const double d = yoshida_energy_drift(YoshidaCoefficients::solution_a(), 10000, 0.1, seed);
        return std::pair{d <= 1e-8, "relative drift " + num(d)};
    });

    // Mutation test: a perturbed w1 still defines a symplectic scheme, but only
    // of order two, so its energy error must exceed the drift tolerance.
    add("yoshida6_mutation_detected", [&] {
        YoshidaCoefficients bad = YoshidaCoefficients::solution_a();
        bad.w1 += 0.05;
        const double d = yoshida_energy_drift(bad, 10000, 0.1, seed);
        return std::pair{d > 1e-8, "corrupted scheme drift " + num(d) + " (must exceed 1e-8)"};
    });

    add("martingale_maximal_inequality", [&] {
        const auto spec = DistributionSpec::uniform(0.5, 1.5);
        const std::int64_t trials = 10000;
        std::string detail;
        bool ok = true;
        for (auto kind : {WalkKind::mass, WalkKind::spring}) {
            const auto r = martingale_maximal_mean(spec, kind, 1000, trials, seed);
            const double ratio = r.mean_max_square / r.doob_bound;
            ok = ok && ratio <= 1.0 + 3.0 / std::sqrt(static_cast<double>(trials));
            detail += (kind == WalkKind::mass ? "mass " : "spring ") + num(ratio) + " ";
        }
        return std::pair{ok, "E[max W^2]/(4N sigma^2): " + detail};
    });

    add("lil_envelope", [&] {
        const auto c = sample_iid(DistributionSpec::uniform(0.5, 1.5, seed), DistributionSpec::constant(1.0), 10000);
        const auto w = corrector_walks(c);
        const auto r = lil_envelope_stats(w.chi_m, c.walk_sigma_m());
        const double frac = static_cast<double>(r.exceed_count_2sigma) / static_cast<double>(r.indices_checked);
        return std::pair{frac < 0.01, "C_omega " + num(r.C_omega) + ", exceed fraction " + num(frac)};
    });

    add("sampling_inverts_interpolation", [&] {
        Sequence f = Sequence::centered(2000);
        for (std::int64_t j = -2000; j <= 2000; ++j) f[j] = uniform01(seed, 4, site_counter(j)) - 0.5;
        const InterpolatedField L(f, 0.0);
        double worst = 0;
        for (std::int64_t j = -2000; j <= 2000; j += 37) worst = std::max(worst, std::abs(L(static_cast<double>(j)) - f[j]));
        return std::pair{worst <= 1e-15, "max |S L f - f| " + num(worst)};
    });

    add("lowpass_norm_identity", [&] {
        double worst = 0;
        for (std::uint64_t t = 0; t < 5; ++t) {
            Sequence f = Sequence::centered(60);
            for (std::int64_t j = -60; j <= 60; ++j)
                f[j] = (uniform01(seed + t, 5, site_counter(j)) - 0.5) * std::exp(-0.01 * static_cast<double>(j * j));
            worst = std::max(worst, std::abs(lowpass_l2_norm(f) / l2_norm(f) - 1.0));
        }
        return std::pair{worst <= 1e-6, "max |‖Lf‖/‖f‖ - 1| " + num(worst)};
    });

    add("averaging_operator_bound", [&] {
        double worst = 0;
        for (double e : {0.01, 0.1, 0.5, 0.99}) worst = std::max(worst, averaging_operator_bound(Weight::sr, e));
        return std::pair{worst <= 1.5, "max b_eps " + num(worst)};
    });

    add("constant_coefficient_residual_order", [&] {
        std::vector<double> es{0.05, 0.0707, 0.1}, g;
        for (double e : es) {
            const auto J = window_half_width(e, 6.3, 1.0, 1.0);
            const auto c = constant_field(1.0, 1.0, J);
            const auto w = profiles_from_initial_data(InitialData::gaussian_pulse(e), c);
            const auto walks = corrector_walks(c);
            AnsatzFrame frame(w, walks, c, e);
            double sup = 0;
            for (int i = 0; i <= 50; ++i) {
                frame.evaluate(static_cast<double>(i) / (50.0 * e));
                const auto r = frame.residuals();
                sup = std::max(sup, l2_norm(r.res1, r.res2));
            }
            g.push_back(sup);
        }
        const double s = slope_fit(es, g).slope;
        return std::pair{std::abs(s - 1.5) <= 0.15, "slope " + num(s)};
    });

    add("gronwall_and_determinism", [&] {
        ExperimentConfig cfg;
        RunOptions opt{cfg.integrator, 1.0, {}};
        const std::uint64_t s = derive_seed(seed, 0);
        Job job{"iid", 0.1, 0, s, [s](std::int64_t J) {
                    return sample_iid(DistributionSpec::uniform(0.5, 1.5, s), DistributionSpec::constant(1.0), J);
                }};
        const auto a = run_single("verify", job, opt);
        const auto b = run_single("verify", job, opt);
        const bool same = record_csv_row(a) == record_csv_row(b);
        return std::pair{a.gronwall_pass && same,
                         "bound/measured " + num(a.gronwall_bound / a.report.eta_xi_sup) + (same ? ", deterministic" : ", NOT deterministic")};
    });

    return rep;
}

} // namespace lhomog
