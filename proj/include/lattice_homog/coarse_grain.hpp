#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "homogenization.hpp"
#include "integrators.hpp"
#include "lattice.hpp"
#include "profile.hpp"
#include "quadrature.hpp"
#include "sequence.hpp"

namespace lhomog {

/// F[f](κ) = (1/2π) Σ_j e^{−ijκ} f(j).
inline std::complex<double> sequence_fourier(const Sequence& f, double kappa)
{
    std::complex<double> s = 0.0;
    for (std::int64_t j = f.lo(); j <= f.hi(); ++j)
        s += f[j] * std::polar(1.0, -kappa * static_cast<double>(j));
    return s / (2.0 * std::numbers::pi);
}

/// Normalized sinc, sin(πx)/(πx).
inline double sinc(double x) noexcept
{
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

/// Cardinal series x ↦ Σ_j f(j) sinc(x − j) of a finitely supported sequence.
/// Entries below 1e-14·max|f| are dropped.
class InterpolatedField {
public:
    explicit InterpolatedField(const Sequence& f, double relative_cutoff = 1e-14)
    {
        const double cut = relative_cutoff * max_abs(f);
        for (std::int64_t j = f.lo(); j <= f.hi(); ++j) {
            if (f[j] != 0.0 && std::abs(f[j]) >= cut) {
                js_.push_back(j);
                vs_.push_back(f[j]);
            }
        }
    }

    bool empty() const noexcept { return js_.empty(); }
    std::int64_t first() const { return js_.front(); }
    std::int64_t last() const { return js_.back(); }

    /// Uses sin(π(x − j)) = (−1)^{n−j} sin(πd), x = n + d, so x = j returns f(j)
    /// exactly and every other term vanishes there.
    double operator()(double x) const
    {
        if (js_.empty()) return 0.0;
        const double n = std::nearbyint(x);
        const double d = x - n;
        const auto ni = static_cast<std::int64_t>(n);
        const double s = std::sin(std::numbers::pi * d) / std::numbers::pi;
        KahanSum acc;
        for (std::size_t i = 0; i < js_.size(); ++i) {
            const std::int64_t j = js_[i];
            if (j == ni) {
                acc.add(vs_[i] * sinc(d));
            } else if (s != 0.0) {
                const double sign = ((ni - j) & 1) ? -1.0 : 1.0;
                acc.add(sign * vs_[i] * s / (d + static_cast<double>(ni - j)));
            }
        }
        return acc.value();
    }

    /// g(x) = Σ (−1)^j f(j)/(x − j), so that L[f](x) = sin(πx) g(x)/π.
    double envelope(double x) const
    {
        KahanSum acc;
        for (std::size_t i = 0; i < js_.size(); ++i)
            acc.add(((js_[i] & 1) ? -vs_[i] : vs_[i]) / (x - static_cast<double>(js_[i])));
        return acc.value();
    }

    /// ∫ over |x| beyond the integer cut point X (to the right if X > last,
    /// to the left if X < first) of L[f]², with sin² replaced by its mean ½.
    double tail_squared(double X) const
    {
        if (js_.empty()) return 0.0;
        const double a = std::abs(X);
        const double sgn = X < 0 ? -1.0 : 1.0;
        auto integrand = [&](double u) {
            const double x = sgn * a / u;
            const double g = envelope(x);
            return g * g * a / (u * u);
        };
        return gauss_composite(integrand, 0.0, 1.0, 20) / (2.0 * std::numbers::pi * std::numbers::pi);
    }

private:
    std::vector<std::int64_t> js_;
    std::vector<double> vs_;
};

inline double lowpass_interpolate(const Sequence& f, double x) { return InterpolatedField(f, 0.0)(x); }

namespace detail {
/// ∫_ℝ (L[f](x) − h(x))² dx for h supported in `extra`, ten Gauss nodes per unit
/// cell over the union of both supports widened by `margin`, plus the
/// analytic-mean tails of L[f].
template <class H>
double lowpass_distance_squared(const InterpolatedField& field, H&& h, Interval extra, double margin)
{
    double lo = extra.lo, hi = extra.hi;
    if (!field.empty()) {
        lo = std::min(lo, static_cast<double>(field.first()));
        hi = std::max(hi, static_cast<double>(field.last()));
    }
    const double a = std::floor(lo - margin), b = std::ceil(hi + margin);
    const double inner = gauss_composite(
        [&](double x) {
            const double d = field(x) - h(x);
            return d * d;
        },
        a, b, static_cast<std::int64_t>(b - a));
    return inner + field.tail_squared(a) + field.tail_squared(b);
}
} // namespace detail

/// ‖L[f]‖_{L²(ℝ)} by quadrature.
inline double lowpass_l2_norm(const Sequence& f, double margin = 100.0)
{
    const InterpolatedField field(f);
    if (field.empty()) return 0.0;
    const double c = 0.5 * static_cast<double>(field.first() + field.last());
    return std::sqrt(detail::lowpass_distance_squared(field, [](double) { return 0.0; }, {c, c}, margin));
}

/// ‖L S[F(ε·)](·/ε) − F‖_{L²}: sample F on εℤ, interpolate, compare.
inline double interp_convergence_error(const Profile& F, double epsilon, double margin = 100.0)
{
    if (!(epsilon > 0 && epsilon <= 0.5)) throw std::invalid_argument("interp_convergence_error: epsilon must lie in (0, 1/2]");
    if (F.is_zero()) return 0.0;
    const Interval I = F.support();
    const auto lo = static_cast<std::int64_t>(std::floor(I.lo / epsilon)) - 1;
    const auto hi = static_cast<std::int64_t>(std::ceil(I.hi / epsilon)) + 1;
    const Sequence samples = Sequence::generate(lo, hi, [&](std::int64_t j) { return F(epsilon * static_cast<double>(j)); });
    const InterpolatedField field(samples);
    // X = εx turns ∫dX into ε∫dx
    const double sq = detail::lowpass_distance_squared(
        field, [&](double x) { return F(epsilon * x); }, {I.lo / epsilon, I.hi / epsilon}, margin);
    return std::sqrt(epsilon * std::max(sq, 0.0));
}

/// Q_ε(X, τ) = L[k r(·, τ/ε)](X/ε) and P_ε(X, τ) = L[p(·, τ/ε)](X/ε) from
/// snapshots of a lattice run.
class CoarseGrainedFields {
public:
    CoarseGrainedFields(std::vector<LatticeState> snapshots, const CoefficientField& coeffs, double epsilon)
        : eps_(epsilon)
    {
        if (snapshots.empty()) throw std::invalid_argument("CoarseGrainedFields: no snapshots");
        std::sort(snapshots.begin(), snapshots.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
        for (const auto& s : snapshots) {
            detail::require_matching(s, coeffs);
            Sequence kr = s.r;
            for (std::int64_t j = kr.lo(); j <= kr.hi(); ++j) kr[j] *= coeffs.k[j];
            taus_.push_back(epsilon * s.t);
            kr_.push_back(std::move(kr));
            p_.push_back(s.p);
        }
    }

    double epsilon() const noexcept { return eps_; }
    double tau_min() const noexcept { return taus_.front(); }
    double tau_max() const noexcept { return taus_.back(); }
    const std::vector<double>& taus() const noexcept { return taus_; }

    /// (k r, p) at lattice time τ/ε; linear in t between snapshots.
    std::pair<Sequence, Sequence> lattice_at(double tau) const
    {
        const double tol = 1e-12 * std::max(1.0, std::abs(tau));
        if (tau < tau_min() - tol || tau > tau_max() + tol)
            throw std::out_of_range("CoarseGrainedFields: tau outside run coverage");
        auto it = std::lower_bound(taus_.begin(), taus_.end(), tau - tol);
        auto i = static_cast<std::size_t>(it - taus_.begin());
        if (i < taus_.size() && std::abs(taus_[i] - tau) <= tol) return {kr_[i], p_[i]};
        const std::size_t i0 = i - 1;
        const double w = (tau - taus_[i0]) / (taus_[i] - taus_[i0]);
        Sequence kr = kr_[i0], p = p_[i0];
        for (std::int64_t j = kr.lo(); j <= kr.hi(); ++j) {
            kr[j] += w * (kr_[i][j] - kr[j]);
            p[j] += w * (p_[i][j] - p[j]);
        }
        return {std::move(kr), std::move(p)};
    }

    double Q(double X, double tau) const { return InterpolatedField(lattice_at(tau).first)(X / eps_); }
    double P(double X, double tau) const { return InterpolatedField(lattice_at(tau).second)(X / eps_); }

    struct Distance {
        double Q;
        double P;
    };

    /// ‖Q_ε(·,τ) − Q̄₀(·,τ)‖_{L²} and ‖P_ε(·,τ) − P̄₀(·,τ)‖_{L²}.
    Distance distance_to_effective(const WaveProfiles& w, double tau, double margin = 100.0) const
    {
        const auto [kr, p] = lattice_at(tau);
        const Interval sa = w.A.support(), sb = w.B.support();
        Interval X{std::min(sa.lo + w.c * tau, sb.lo - w.c * tau), std::max(sa.hi + w.c * tau, sb.hi - w.c * tau)};
        if (w.B.is_zero()) X = {sa.lo + w.c * tau, sa.hi + w.c * tau};
        const Interval x{X.lo / eps_, X.hi / eps_};
        const double dq = detail::lowpass_distance_squared(
            InterpolatedField(kr), [&](double xx) { return effective_solution(w, eps_ * xx, tau).Q0; }, x, margin);
        const double dp = detail::lowpass_distance_squared(
            InterpolatedField(p), [&](double xx) { return effective_solution(w, eps_ * xx, tau).P0; }, x, margin);
        return {std::sqrt(eps_ * std::max(dq, 0.0)), std::sqrt(eps_ * std::max(dp, 0.0))};
    }

    /// Both sides of ‖P_ε(·,τ) − LS[P̄₀(ε·,τ)](·/ε)‖_{L²} = √ε ‖p(·,τ/ε) − S[P̄₀(ε·,τ)]‖_{ℓ²}.
    /// The left side is a quadrature of the difference of two interpolants, the
    /// right side a lattice sum.
    std::pair<double, double> sampled_distance_identity(const WaveProfiles& w, double tau, double margin = 100.0) const
    {
        const Sequence p = lattice_at(tau).second;
        const Sequence sampled = Sequence::generate(
            p.lo(), p.hi(), [&](std::int64_t j) { return effective_solution(w, eps_ * static_cast<double>(j), tau).P0; });
        const InterpolatedField fp(p), fs(sampled);
        const double lo = static_cast<double>(p.lo()), hi = static_cast<double>(p.hi());
        Sequence diff = p;
        diff -= sampled;
        const InterpolatedField fd(diff);
        // ∫ (L[p] − L[s])² dx; the tails of the difference are those of L[p − s]
        const double a = std::floor(lo - margin), b = std::ceil(hi + margin);
        const double inner = gauss_composite(
            [&](double x) {
                const double d = fp(x) - fs(x);
                return d * d;
            },
            a, b, static_cast<std::int64_t>(b - a));
        const double lhs = std::sqrt(eps_ * (inner + fd.tail_squared(a) + fd.tail_squared(b)));
        const double rhs = std::sqrt(eps_) * l2_norm(diff);
        return {lhs, rhs};
    }

private:
    double eps_;
    std::vector<double> taus_;
    std::vector<Sequence> kr_;
    std::vector<Sequence> p_;
};

/// Runs the lattice from the data of `data` forward and backward to
/// |t| = T₀/ε and keeps snapshots at τ = εt on a uniform grid of 2·n_tau + 1
/// points in [−T₀, T₀].
inline CoarseGrainedFields coarse_grained_run(const InitialData& data, const CoefficientField& coeffs, double T0,
                                              int n_tau, Method method = Method::yoshida6)
{
    if (n_tau < 1) throw std::invalid_argument("coarse_grained_run: n_tau must be positive");
    const double eps = data.epsilon;
    const double dt = std::min(0.1 * stable_dt(method, coeffs), T0 / eps / 2000.0);
    std::vector<LatticeState> snaps;
    const LatticeState s0 = initial_state(data, coeffs);
    snaps.push_back(s0);
    for (double dir : {1.0, -1.0}) {
        LatticeState s = s0;
        for (int i = 1; i <= n_tau; ++i) {
            evolve_to(s, coeffs, method, dt, dir * T0 * i / (n_tau * eps));
            snaps.push_back(s);
        }
    }
    return CoarseGrainedFields(std::move(snaps), coeffs, eps);
}

/// sup over the snapshot grid of the distances to the effective solution.
inline CoarseGrainedFields::Distance sup_distance_to_effective(const CoarseGrainedFields& f, const WaveProfiles& w)
{
    CoarseGrainedFields::Distance sup{0.0, 0.0};
    for (double tau : f.taus()) {
        const auto d = f.distance_to_effective(w, tau);
        sup.Q = std::max(sup.Q, d.Q);
        sup.P = std::max(sup.P, d.P);
    }
    return sup;
}

} // namespace lhomog
