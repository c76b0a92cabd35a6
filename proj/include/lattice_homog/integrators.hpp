#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "lattice.hpp"

namespace lhomog {

enum class Method { rk4, yoshida6 };

inline const char* to_string(Method m) noexcept { return m == Method::rk4 ? "rk4" : "yoshida6"; }

inline Method method_from_string(const std::string& s)
{
    if (s == "rk4") return Method::rk4;
    if (s == "yoshida6") return Method::yoshida6;
    throw std::invalid_argument("unknown integrator method: " + s);
}

/// Sixth-order symmetric composition of the second-order leapfrog map S₂:
///   S₆(h) = S₂(w₃h) S₂(w₂h) S₂(w₁h) S₂(w₀h) S₂(w₁h) S₂(w₂h) S₂(w₃h),
/// w₀ = 1 − 2(w₁ + w₂ + w₃). The three solution sets are real roots of the
/// sixth-order conditions w₀ + 2Σwᵢ = 1, w₀³ + 2Σwᵢ³ = 0, w₀⁵ + 2Σwᵢ⁵ = 0 plus
/// the commutator condition. A is given to 20 digits (the odd-moment
/// conditions hold to 1e-33 in extended precision); B and C carry the 15
/// published digits.
struct YoshidaCoefficients {
    double w1;
    double w2;
    double w3;

    double w0() const noexcept { return 1.0 - 2.0 * (w1 + w2 + w3); }
    double max_abs() const noexcept
    {
        return std::max({std::abs(w0()), std::abs(w1), std::abs(w2), std::abs(w3)});
    }

    static constexpr YoshidaCoefficients solution_a() { return {-1.1776799841788710069, 0.23557321335935813368, 0.78451361047755726382}; }
    static constexpr YoshidaCoefficients solution_b() { return {-2.13228522200144, 0.00426068187079180, 1.43984816797678}; }
    static constexpr YoshidaCoefficients solution_c() { return {0.00152886228424922, -2.14403531630539, 1.44778256239930}; }

    static YoshidaCoefficients from_name(const std::string& name)
    {
        if (name == "A" || name == "a") return solution_a();
        if (name == "B" || name == "b") return solution_b();
        if (name == "C" || name == "c") return solution_c();
        throw std::invalid_argument("unknown Yoshida solution: " + name);
    }
};

struct IntegratorSpec {
    Method method = Method::rk4;
    double dt = 0.0;          // signed; its sign must agree with t_end
    double t_end = 0.0;
    std::int64_t observe_every = 1;
    YoshidaCoefficients yoshida = YoshidaCoefficients::solution_a();
};

/// Upper estimate 2√(max k / min m) of the lattice operator's frequencies.
inline double max_frequency(const CoefficientField& c) noexcept
{
    return 2.0 * std::sqrt(c.spring_bounds.hi / c.mass_bounds.lo);
}

/// Largest |dt|·ω for which the method is stable on the imaginary axis.
inline double stability_limit(Method m, const YoshidaCoefficients& y = YoshidaCoefficients::solution_a()) noexcept
{
    return m == Method::rk4 ? 2.0 * std::sqrt(2.0) : 2.0 / y.max_abs();
}

/// |dt| bound from the stability guard.
inline double stable_dt(Method m, const CoefficientField& c,
                        const YoshidaCoefficients& y = YoshidaCoefficients::solution_a()) noexcept
{
    return stability_limit(m, y) / max_frequency(c);
}

inline void check_stability(Method m, double dt, const CoefficientField& c,
                            const YoshidaCoefficients& y = YoshidaCoefficients::solution_a())
{
    if (!(std::abs(dt) * max_frequency(c) <= stability_limit(m, y)))
        throw std::invalid_argument("time step " + std::to_string(dt) + " violates the stability guard |dt| <= " +
                                    std::to_string(stable_dt(m, c, y)));
}

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t) : std::runtime_error(what + " at t=" + std::to_string(t)), t_(t) {}
    double time() const noexcept { return t_; }

private:
    double t_;
};

/// Reusable stepping engine; owns the stage buffers so that long runs do not
/// allocate per step.
class Stepper {
public:
    Stepper(const CoefficientField& coeffs, Method method,
            YoshidaCoefficients yoshida = YoshidaCoefficients::solution_a())
        : coeffs_(&coeffs), method_(method), yoshida_(yoshida)
    {
        const std::size_t n = coeffs.m.size();
        for (auto* v : {&k1r_, &k1p_, &k2r_, &k2p_, &k3r_, &k3p_, &k4r_, &k4p_, &tr_, &tp_}) v->assign(n, 0.0);
    }

    void step(LatticeState& s, double dt)
    {
        if (method_ == Method::rk4)
            step_rk4(s, dt);
        else
            step_yoshida(s, dt);
        s.t += dt;
    }

private:
    void eval(std::span<const double> r, std::span<const double> p, std::vector<double>& dr, std::vector<double>& dp)
    {
        detail::lattice_rhs(r, p, coeffs_->m.values(), coeffs_->k.values(), dr, dp);
    }

    void step_rk4(LatticeState& s, double dt)
    {
        auto r = s.r.values();
        auto p = s.p.values();
        const std::size_t n = r.size();
        eval(r, p, k1r_, k1p_);
        for (std::size_t i = 0; i < n; ++i) tr_[i] = r[i] + 0.5 * dt * k1r_[i], tp_[i] = p[i] + 0.5 * dt * k1p_[i];
        eval(tr_, tp_, k2r_, k2p_);
        for (std::size_t i = 0; i < n; ++i) tr_[i] = r[i] + 0.5 * dt * k2r_[i], tp_[i] = p[i] + 0.5 * dt * k2p_[i];
        eval(tr_, tp_, k3r_, k3p_);
        for (std::size_t i = 0; i < n; ++i) tr_[i] = r[i] + dt * k3r_[i], tp_[i] = p[i] + dt * k3p_[i];
        eval(tr_, tp_, k4r_, k4p_);
        const double h6 = dt / 6.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] += h6 * (k1r_[i] + 2.0 * (k2r_[i] + k3r_[i]) + k4r_[i]);
            p[i] += h6 * (k1p_[i] + 2.0 * (k2p_[i] + k3p_[i]) + k4p_[i]);
        }
    }

    // p += h·(1/m)δ⁻(k r), the exact flow of the r-driven part.
    void kick(std::span<const double> r, std::span<double> p, double h)
    {
        const auto m = coeffs_->m.values();
        const auto k = coeffs_->k.values();
        double prev = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double kr = k[i] * r[i];
            p[i] += h * (kr - prev) / m[i];
            prev = kr;
        }
    }

    // r += h·δ⁺p, the exact flow of the p-driven part.
    static void drift(std::span<double> r, std::span<const double> p, double h)
    {
        const std::size_t n = r.size();
        for (std::size_t i = 0; i + 1 < n; ++i) r[i] += h * (p[i + 1] - p[i]);
        r[n - 1] -= h * p[n - 1];
    }

    void leapfrog(std::span<double> r, std::span<double> p, double h)
    {
        kick(r, p, 0.5 * h);
        drift(r, p, h);
        kick(r, p, 0.5 * h);
    }

    void step_yoshida(LatticeState& s, double dt)
    {
        auto r = s.r.values();
        auto p = s.p.values();
        const double w[7] = {yoshida_.w3, yoshida_.w2, yoshida_.w1, yoshida_.w0(), yoshida_.w1, yoshida_.w2, yoshida_.w3};
        for (double wi : w) leapfrog(r, p, wi * dt);
    }

    const CoefficientField* coeffs_;
    Method method_;
    YoshidaCoefficients yoshida_;
    std::vector<double> k1r_, k1p_, k2r_, k2p_, k3r_, k3p_, k4r_, k4p_, tr_, tp_;
};

namespace detail {
inline LatticeState checked_step(const LatticeState& state, const CoefficientField& coeffs, double dt, Method m,
                                 const YoshidaCoefficients& y)
{
    detail::require_matching(state, coeffs);
    check_stability(m, dt, coeffs, y);
    LatticeState out = state;
    Stepper(coeffs, m, y).step(out, dt);
    if (!out.all_finite()) throw IntegrationError("non-finite state after step", out.t);
    return out;
}
} // namespace detail

/// One classical Runge–Kutta step of the lattice system.
inline LatticeState step_rk4(const LatticeState& state, const CoefficientField& coeffs, double dt)
{
    return detail::checked_step(state, coeffs, dt, Method::rk4, YoshidaCoefficients::solution_a());
}

/// One sixth-order Yoshida step (symmetric composition of seven leapfrogs).
inline LatticeState step_yoshida6(const LatticeState& state, const CoefficientField& coeffs, double dt,
                                  const YoshidaCoefficients& y = YoshidaCoefficients::solution_a())
{
    return detail::checked_step(state, coeffs, dt, Method::yoshida6, y);
}

/// Number of steps used to reach t_end: |t_end|/|dt| rounded up, so the last
/// step lands exactly on t_end with a slightly reduced |dt|.
inline std::int64_t step_count(double t_end, double dt)
{
    if (t_end == 0.0) return 0;
    if (dt == 0.0 || (t_end > 0) != (dt > 0)) throw std::invalid_argument("dt must be nonzero and share the sign of t_end");
    return static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9));
}

/// Advances `initial` to initial.t + spec.t_end, calling `observer(state)` at
/// step 0, every observe_every steps, and at the final step. Returns the
/// observer's results in time order.
template <class Observer>
auto integrate(const LatticeState& initial, const CoefficientField& coeffs, const IntegratorSpec& spec,
               Observer&& observer) -> std::vector<std::invoke_result_t<Observer&, const LatticeState&>>
{
    using Record = std::invoke_result_t<Observer&, const LatticeState&>;
    detail::require_matching(initial, coeffs);
    if (spec.observe_every < 1) throw std::invalid_argument("observe_every must be positive");
    const std::int64_t steps = step_count(spec.t_end, spec.dt);
    const double dt = steps > 0 ? spec.t_end / static_cast<double>(steps) : 0.0;
    if (steps > 0) check_stability(spec.method, dt, coeffs, spec.yoshida);

    std::vector<Record> records;
    LatticeState s = initial;
    const double t0 = initial.t;
    records.push_back(observer(s));
    Stepper stepper(coeffs, spec.method, spec.yoshida);
    for (std::int64_t n = 1; n <= steps; ++n) {
        stepper.step(s, dt);
        s.t = t0 + dt * static_cast<double>(n);
        const bool observe = n % spec.observe_every == 0 || n == steps;
        if (observe || n % 64 == 0) {
            if (!s.all_finite()) throw IntegrationError("non-finite state", s.t);
        }
        if (observe) records.push_back(observer(s));
    }
    return records;
}

/// Evolves a state to an absolute time with steps of magnitude at most |dt|.
inline void evolve_to(LatticeState& s, const CoefficientField& coeffs, Method method, double dt, double t_target,
                      const YoshidaCoefficients& y = YoshidaCoefficients::solution_a())
{
    const double span = t_target - s.t;
    if (span == 0.0) return;
    const std::int64_t steps = step_count(span, std::copysign(std::abs(dt), span));
    const double h = span / static_cast<double>(steps);
    check_stability(method, h, coeffs, y);
    const double t0 = s.t;
    Stepper stepper(coeffs, method, y);
    for (std::int64_t n = 1; n <= steps; ++n) {
        stepper.step(s, h);
        s.t = t0 + h * static_cast<double>(n);
    }
    s.t = t_target;
    if (!s.all_finite()) throw IntegrationError("non-finite state", s.t);
}

} // namespace lhomog
