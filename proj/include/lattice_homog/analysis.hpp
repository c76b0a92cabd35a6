#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homogenization.hpp"
#include "lattice.hpp"
#include "profile.hpp"
#include "quadrature.hpp"

namespace lhomog {

enum class Weight { none, sr, lil };

inline const char* to_string(Weight w) noexcept
{
    switch (w) {
    case Weight::none: return "none";
    case Weight::sr: return "sr";
    default: return "lil";
    }
}

/// w(X)² for the three weights 1, 1 + |X|, 1 + |X| log log(|X| + e).
inline double weight_squared(Weight w, double x) noexcept
{
    const double a = std::abs(x);
    switch (w) {
    case Weight::none: return 1.0;
    case Weight::sr: return 1.0 + a;
    default: return 1.0 + a * std::log(std::log(a + std::numbers::e));
    }
}

/// Σ_{i≤s} ‖w F⁽ⁱ⁾‖_{L²}, composite Simpson on the profile's support.
inline double weighted_norm(const Profile& F, int s, Weight w, std::int64_t panels = 20000)
{
    if (s < 0 || s > Profile::max_order) throw std::invalid_argument("weighted_norm: s must lie in 0..4");
    if (F.is_zero()) return 0.0;
    const Interval I = F.support();
    double total = 0.0;
    for (int i = 0; i <= s; ++i) {
        const double sq = simpson(
            [&](double x) {
                const double d = F.derivative(x, i);
                return weight_squared(w, x) * d * d;
            },
            I.lo, I.hi, panels);
        if (!std::isfinite(sq)) throw std::invalid_argument("weighted_norm: profile lacks derivative " + std::to_string(i));
        total += std::sqrt(sq);
    }
    return total;
}

/// max_s b_ε(s), b_ε(s) = (1/(ε w(s)²)) ∫_{s−ε}^{s} w², over a dense grid of
/// s in [−half_range, half_range] that contains s = 0.
inline double averaging_operator_bound(Weight w, double epsilon, double half_range = 20.0)
{
    if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("averaging_operator_bound: epsilon must lie in (0, 1)");
    const double h = std::min(epsilon / 50.0, 0.01);
    const auto n = static_cast<std::int64_t>(std::ceil(half_range / h));
    auto w2 = [w](double x) { return weight_squared(w, x); };
    double best = 0.0;
    for (std::int64_t i = -n; i <= n; ++i) {
        const double s = h * static_cast<double>(i);
        const double a = s - epsilon;
        // split at the kink of the weight at 0
        double integral;
        if (a < 0.0 && s > 0.0)
            integral = gauss_composite(w2, a, 0.0, 1) + gauss_composite(w2, 0.0, s, 1);
        else
            integral = gauss_composite(w2, a, s, 1);
        best = std::max(best, integral / (epsilon * w2(s)));
    }
    return best;
}

/// Per-time measurements of one run.
struct TimeSample {
    double t = 0.0;
    double abs_error_r = 0.0;    // ‖r − (A + B)/k‖
    double abs_error_p = 0.0;    // ‖p − (−A + B)/√(k̃m̄)‖
    double norm_r = 0.0;         // ‖r‖
    double residual_norm = 0.0;  // ‖(Res₁, Res₂)‖ of the ansatz
    double eta_xi_norm = 0.0;    // ‖(k(r − r̃), p − p̃)‖
};

/// Measures `state` against the ansatz; `frame` is re-evaluated at state.t.
inline TimeSample sample_errors(const LatticeState& state, AnsatzFrame& frame, const CoefficientField& coeffs)
{
    frame.evaluate(state.t);
    TimeSample out;
    out.t = state.t;
    KahanSum er, ep, nr, ex;
    for (std::int64_t j = state.r.lo(); j <= state.r.hi(); ++j) {
        const double r = state.r[j], p = state.p[j];
        const double dr = r - frame.leading_r(j), dp = p - frame.leading_p(j);
        const double eta = coeffs.k[j] * (r - frame.ansatz_r(j)), xi = p - frame.ansatz_p(j);
        er.add(dr * dr);
        ep.add(dp * dp);
        nr.add(r * r);
        ex.add(eta * eta + xi * xi);
    }
    out.abs_error_r = std::sqrt(er.value());
    out.abs_error_p = std::sqrt(ep.value());
    out.norm_r = std::sqrt(nr.value());
    out.eta_xi_norm = std::sqrt(ex.value());
    const ResidualPair res = frame.residuals();
    out.residual_norm = l2_norm(res.res1, res.res2);
    return out;
}

struct ErrorReport {
    double sup_abs_error_r = 0.0;
    double sup_abs_error_p = 0.0;
    double rho = 0.0;
    double gamma_eps = 0.0;
    double C_omega_estimate = 0.0;
    double epsilon = 0.0;
    double T0 = 0.0;
    std::int64_t times_sampled = 0;
    double eta_xi_initial = 0.0;
    double eta_xi_sup = 0.0;
};

/// √(log log(1/ε)), defined for ε < 1/e.
inline double loglog_factor(double epsilon)
{
    const double ll = std::log(std::log(1.0 / epsilon));
    return ll > 0 ? std::sqrt(ll) : std::numeric_limits<double>::quiet_NaN();
}

/// Sup-in-time reductions. C_omega_estimate is Γ_ε / (ε √(log log(1/ε))),
/// the realization constant implied by the residual bound.
inline ErrorReport error_metrics(const std::vector<TimeSample>& samples, double epsilon, double T0)
{
    if (samples.empty()) throw std::invalid_argument("error_metrics: empty record list");
    ErrorReport rep;
    rep.epsilon = epsilon;
    rep.T0 = T0;
    rep.times_sampled = static_cast<std::int64_t>(samples.size());
    rep.eta_xi_initial = samples.front().eta_xi_norm;
    for (const auto& s : samples) {
        rep.sup_abs_error_r = std::max(rep.sup_abs_error_r, s.abs_error_r);
        rep.sup_abs_error_p = std::max(rep.sup_abs_error_p, s.abs_error_p);
        if (s.norm_r > 0) rep.rho = std::max(rep.rho, s.abs_error_r / s.norm_r);
        rep.gamma_eps = std::max(rep.gamma_eps, s.residual_norm);
        rep.eta_xi_sup = std::max(rep.eta_xi_sup, s.eta_xi_norm);
    }
    rep.C_omega_estimate = rep.gamma_eps / (epsilon * loglog_factor(epsilon));
    return rep;
}

/// Same reductions from stored lattice states.
inline ErrorReport error_metrics(const std::vector<LatticeState>& run, const WaveProfiles& profiles,
                                 const CorrectorWalk& walks, const CoefficientField& coeffs, double epsilon, double T0)
{
    if (run.empty()) throw std::invalid_argument("error_metrics: empty record list");
    AnsatzFrame frame(profiles, walks, coeffs, epsilon);
    std::vector<TimeSample> samples;
    samples.reserve(run.size());
    for (const auto& s : run) samples.push_back(sample_errors(s, frame, coeffs));
    return error_metrics(samples, epsilon, T0);
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least squares of log y against log x.
inline SlopeFit slope_fit(const std::vector<double>& xs, const std::vector<double>& ys)
{
    if (xs.size() != ys.size()) throw std::invalid_argument("slope_fit: size mismatch");
    if (xs.size() < 3) throw std::invalid_argument("slope_fit: need at least 3 points");
    const auto n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0) || !(ys[i] > 0)) throw std::invalid_argument("slope_fit: data must be positive");
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = std::log(xs[i]) - mx, dy = std::log(ys[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0) throw std::invalid_argument("slope_fit: x values must not all coincide");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0 ? 1.0 : sxy * sxy / (sxx * syy);
    return f;
}

struct GronwallResult {
    bool pass = false;
    double bound = 0.0;
    double measured = 0.0;
    double margin = 0.0;   // bound / measured
};

/// Energy estimate for the error (η, ξ) = (k(r − r̃), p − p̃). With
/// α‖·‖² ≤ H ≤ β‖·‖² and dH/dt ≤ max(1, m_hi)‖(η,ξ)‖Γ_ε,
///   ‖(η,ξ)(t)‖ ≤ √(β/α)‖(η,ξ)(0)‖ + max(1, m_hi) Γ_ε T₀ / (2αε)   for |t| ≤ T₀/ε.
inline GronwallResult gronwall_bound_check(double eta0_xi0_norm, double gamma_eps, double epsilon,
                                           double measured_sup_error, EnergyEquivalence eq, double T0 = 1.0,
                                           double mass_hi = 1.0)
{
    GronwallResult g;
    g.bound = std::sqrt(eq.upper / eq.lower) * eta0_xi0_norm +
              std::max(1.0, mass_hi) * gamma_eps * T0 / (2.0 * eq.lower * epsilon);
    g.measured = measured_sup_error;
    // rounding slack for runs whose exact bound is zero
    const double slack = 1e-12 * std::max(1.0, g.bound);
    g.pass = measured_sup_error <= g.bound + slack;
    g.margin = measured_sup_error > 0 ? g.bound / measured_sup_error : std::numeric_limits<double>::infinity();
    return g;
}

inline GronwallResult gronwall_bound_check(const ErrorReport& rep, const CoefficientField& coeffs)
{
    return gronwall_bound_check(rep.eta_xi_initial, rep.gamma_eps, rep.epsilon, rep.eta_xi_sup,
                                energy_equivalence(coeffs), rep.T0, coeffs.mass_bounds.hi);
}

inline void to_json(nlohmann::json& j, const ErrorReport& r)
{
    j = nlohmann::json{{"sup_abs_error_r", r.sup_abs_error_r},
                       {"sup_abs_error_p", r.sup_abs_error_p},
                       {"rho", r.rho},
                       {"gamma_eps", r.gamma_eps},
                       {"C_omega_estimate", r.C_omega_estimate},
                       {"epsilon", r.epsilon},
                       {"T0", r.T0},
                       {"times_sampled", r.times_sampled},
                       {"eta_xi_initial", r.eta_xi_initial},
                       {"eta_xi_sup", r.eta_xi_sup}};
}

inline void from_json(const nlohmann::json& j, ErrorReport& r)
{
    j.at("sup_abs_error_r").get_to(r.sup_abs_error_r);
    j.at("sup_abs_error_p").get_to(r.sup_abs_error_p);
    j.at("rho").get_to(r.rho);
    j.at("gamma_eps").get_to(r.gamma_eps);
    r.C_omega_estimate = j.at("C_omega_estimate").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                            : j.at("C_omega_estimate").get<double>();
    j.at("epsilon").get_to(r.epsilon);
    j.at("T0").get_to(r.T0);
    j.at("times_sampled").get_to(r.times_sampled);
    r.eta_xi_initial = j.value("eta_xi_initial", 0.0);
    r.eta_xi_sup = j.value("eta_xi_sup", 0.0);
}

inline const char* error_report_csv_header()
{
    return "sup_abs_error_r,sup_abs_error_p,rho,gamma_eps,C_omega_estimate,epsilon,T0,times_sampled,eta_xi_initial,"
           "eta_xi_sup";
}

/// Writes the fields in header order, full precision, no trailing newline.
inline void write_csv_fields(std::ostream& out, const ErrorReport& r)
{
    const auto old = out.precision(17);
    out << r.sup_abs_error_r << ',' << r.sup_abs_error_p << ',' << r.rho << ',' << r.gamma_eps << ','
        << r.C_omega_estimate << ',' << r.epsilon << ',' << r.T0 << ',' << r.times_sampled << ',' << r.eta_xi_initial
        << ',' << r.eta_xi_sup;
    out.precision(old);
}

} // namespace lhomog
