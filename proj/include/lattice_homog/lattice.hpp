#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "sequence.hpp"

namespace lhomog {

struct Bounds {
    double lo = 1.0;
    double hi = 1.0;
    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// Masses m(j) and spring constants k(j) on [-J, J] together with the
/// statistics the homogenized limit is built from.
///
/// mbar and ktilde are limiting values (E[m] and 1/E[1/k] for i.i.d. fields,
/// period averages for deterministic patterns), not window averages; the
/// window averages are kept separately as diagnostics.
struct CoefficientField {
    Sequence m;
    Sequence k;
    Bounds mass_bounds;
    Bounds spring_bounds;
    double mbar = 1.0;
    double ktilde = 1.0;
    double sigma_m = 0.0;   // standard deviation of m
    double sigma_k = 0.0;   // standard deviation of 1/k
    double empirical_mbar = 1.0;
    double empirical_ktilde = 1.0;

    std::int64_t half_width() const noexcept { return m.hi(); }

    /// Standard deviation of the χ_m increments m/mbar − 1.
    double walk_sigma_m() const noexcept { return sigma_m / mbar; }
    /// Standard deviation of the χ_k increments ktilde/k − 1.
    double walk_sigma_k() const noexcept { return ktilde * sigma_k; }
    /// σ_m/√mbar, the mass scaling used by the mean-value bounds.
    double sigma_m_composite() const noexcept { return sigma_m / std::sqrt(mbar); }
    /// σ_k√ktilde, the spring scaling used by the mean-value bounds.
    double sigma_k_composite() const noexcept { return sigma_k * std::sqrt(ktilde); }

    void validate() const
    {
        if (m.empty() || !m.same_window(k)) throw std::invalid_argument("CoefficientField: m and k windows differ");
        if (m.lo() != -m.hi()) throw std::invalid_argument("CoefficientField: window must be symmetric [-J, J]");
        if (!(mass_bounds.lo > 0) || !(spring_bounds.lo > 0))
            throw std::invalid_argument("CoefficientField: bounds must be positive");
        for (std::int64_t j = m.lo(); j <= m.hi(); ++j) {
            if (!mass_bounds.contains(m[j]) || !spring_bounds.contains(k[j]))
                throw std::invalid_argument("CoefficientField: coefficient outside bounds at j=" + std::to_string(j));
        }
        if (!mass_bounds.contains(mbar) || !spring_bounds.contains(ktilde))
            throw std::invalid_argument("CoefficientField: mbar/ktilde outside bounds");
    }
};

/// (r, p) at lattice time t; r = δ⁺u is the relative displacement, p = u̇.
struct LatticeState {
    Sequence r;
    Sequence p;
    double t = 0.0;

    static LatticeState zero(std::int64_t half_width, double t = 0.0)
    {
        return {Sequence::centered(half_width), Sequence::centered(half_width), t};
    }
    bool all_finite() const noexcept { return r.all_finite() && p.all_finite() && std::isfinite(t); }
};

struct Rates {
    Sequence dr;
    Sequence dp;
};

namespace detail {

inline void require_matching(const LatticeState& s, const CoefficientField& c)
{
    if (!s.r.same_window(s.p)) throw std::invalid_argument("LatticeState: r and p windows differ");
    if (!s.r.same_window(c.m) || !s.r.same_window(c.k))
        throw std::invalid_argument("LatticeState and CoefficientField windows differ");
}

/// dr = δ⁺p, dp = (1/m) δ⁻(k r) on raw arrays with zero-fill at both ends.
inline void lattice_rhs(std::span<const double> r, std::span<const double> p, std::span<const double> m,
                        std::span<const double> k, std::span<double> dr, std::span<double> dp) noexcept
{
    const std::size_t n = r.size();
    for (std::size_t i = 0; i + 1 < n; ++i) dr[i] = p[i + 1] - p[i];
    dr[n - 1] = -p[n - 1];
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double kr = k[i] * r[i];
        dp[i] = (kr - prev) / m[i];
        prev = kr;
    }
}

} // namespace detail

/// Right-hand side of ṙ = δ⁺p, ṗ = (1/m) δ⁻(k r).
inline Rates rhs(const LatticeState& state, const CoefficientField& coeffs)
{
    detail::require_matching(state, coeffs);
    Rates out{Sequence(state.r.lo(), state.r.hi()), Sequence(state.r.lo(), state.r.hi())};
    detail::lattice_rhs(state.r.values(), state.p.values(), coeffs.m.values(), coeffs.k.values(), out.dr.values(),
                        out.dp.values());
    return out;
}

/// H = ½ Σ [η²/k + m ξ²], the weighted energy of the error variables.
inline double energy(const Sequence& eta, const Sequence& xi, const CoefficientField& coeffs)
{
    Sequence::require_same_window(eta, xi, "energy");
    Sequence::require_same_window(eta, coeffs.k, "energy");
    KahanSum s;
    for (std::int64_t j = eta.lo(); j <= eta.hi(); ++j)
        s.add(eta[j] * eta[j] / coeffs.k[j] + coeffs.m[j] * xi[j] * xi[j]);
    return 0.5 * s.value();
}

/// Conserved quadratic invariant ½ Σ [k r² + m p²] of the lattice itself.
inline double lattice_energy(const LatticeState& s, const CoefficientField& coeffs)
{
    detail::require_matching(s, coeffs);
    KahanSum sum;
    for (std::int64_t j = s.r.lo(); j <= s.r.hi(); ++j)
        sum.add(coeffs.k[j] * s.r[j] * s.r[j] + coeffs.m[j] * s.p[j] * s.p[j]);
    return 0.5 * sum.value();
}

/// lower·‖η,ξ‖² ≤ H ≤ upper·‖η,ξ‖², with constants depending only on the bounds.
struct EnergyEquivalence {
    double lower;
    double upper;
};

inline EnergyEquivalence energy_equivalence(const CoefficientField& coeffs) noexcept
{
    return {0.5 * std::min(1.0 / coeffs.spring_bounds.hi, coeffs.mass_bounds.lo),
            0.5 * std::max(1.0 / coeffs.spring_bounds.lo, coeffs.mass_bounds.hi)};
}

/// Candidate solution evaluated at (j, t).
using LatticeFunction = std::function<double(std::int64_t, double)>;

struct ResidualPair {
    Sequence res1;
    Sequence res2;
};

/// Res₁ = δ⁺p̃ − ∂ₜr̃ and Res₂ = (1/m) δ⁻(k r̃) − ∂ₜp̃ from a candidate and its
/// exact time derivatives. p̃ is evaluated directly at j + 1; k r̃ is
/// zero-filled left of the window.
inline ResidualPair residuals(const LatticeFunction& r, const LatticeFunction& p, const LatticeFunction& dr_dt,
                              const LatticeFunction& dp_dt, const CoefficientField& coeffs, double t)
{
    const std::int64_t lo = coeffs.m.lo(), hi = coeffs.m.hi();
    ResidualPair out{Sequence(lo, hi), Sequence(lo, hi)};
    double p_here = p(lo, t);
    double kr_prev = 0.0;
    for (std::int64_t j = lo; j <= hi; ++j) {
        const double p_next = p(j + 1, t);
        const double kr = coeffs.k[j] * r(j, t);
        out.res1[j] = (p_next - p_here) - dr_dt(j, t);
        out.res2[j] = (kr - kr_prev) / coeffs.m[j] - dp_dt(j, t);
        p_here = p_next;
        kr_prev = kr;
    }
    return out;
}

} // namespace lhomog
