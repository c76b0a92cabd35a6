#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coefficients.hpp"
#include "lattice.hpp"
#include "profile.hpp"

namespace lhomog {

/// Long-wave initial data r(j,0) = Φ(εj)/k(j), p(j,0) = Ψ(εj).
struct InitialData {
    Profile phi;
    Profile psi;
    double epsilon = 0.1;

    void validate() const
    {
        if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("InitialData: epsilon must lie in (0, 1/2)");
    }

    /// Φ(X) = e^{−X²}, Ψ = −Φ: a single right-moving pulse when k̃ = m̄ = 1.
    static InitialData gaussian_pulse(double epsilon)
    {
        return {Profile::gaussian(), Profile::gaussian(-1.0), epsilon};
    }
};

/// d'Alembert data of the effective wave equation ∂²_τQ = c²∂²_XQ.
struct WaveProfiles {
    Profile A;
    Profile B;
    double c = 1.0;
    double ktilde = 1.0;
    double mbar = 1.0;

    /// √(k̃ m̄), the factor between the Q and P components.
    double impedance() const noexcept { return std::sqrt(ktilde * mbar); }
};

/// c = √(k̃/m̄).
inline double wave_speed(const CoefficientField& coeffs)
{
    if (!(coeffs.ktilde > 0) || !(coeffs.mbar > 0)) throw std::invalid_argument("wave_speed: statistics must be positive");
    return std::sqrt(coeffs.ktilde / coeffs.mbar);
}

/// A = ½Φ − ½√(k̃m̄)Ψ, B = ½Φ + ½√(k̃m̄)Ψ.
inline WaveProfiles profiles_from_initial_data(const Profile& phi, const Profile& psi, double ktilde, double mbar)
{
    WaveProfiles w;
    w.ktilde = ktilde;
    w.mbar = mbar;
    w.c = std::sqrt(ktilde / mbar);
    const double z = w.impedance();
    w.A = 0.5 * phi - (0.5 * z) * psi;
    w.B = 0.5 * phi + (0.5 * z) * psi;
    return w;
}

inline WaveProfiles profiles_from_initial_data(const InitialData& data, const CoefficientField& coeffs)
{
    data.validate();
    return profiles_from_initial_data(data.phi, data.psi, coeffs.ktilde, coeffs.mbar);
}

struct EffectiveValue {
    double Q0;
    double P0;
};

/// Q̄₀ = A(X − cτ) + B(X + cτ), P̄₀ = (−A(X − cτ) + B(X + cτ)) / √(k̃m̄).
inline EffectiveValue effective_solution(const WaveProfiles& w, double X, double tau)
{
    const double a = w.A(X - w.c * tau);
    const double b = w.B(X + w.c * tau);
    return {a + b, (-a + b) / w.impedance()};
}

/// Lattice initial state r(j,0) = Φ(εj)/k(j), p(j,0) = Ψ(εj).
inline LatticeState initial_state(const InitialData& data, const CoefficientField& coeffs)
{
    data.validate();
    const std::int64_t J = coeffs.half_width();
    LatticeState s = LatticeState::zero(J);
    for (std::int64_t j = -J; j <= J; ++j) {
        const double x = data.epsilon * static_cast<double>(j);
        s.r[j] = data.phi(x) / coeffs.k[j];
        s.p[j] = data.psi(x);
    }
    return s;
}

struct AnsatzValue {
    double r;
    double p;
};

namespace detail {
struct ProfilePoint {
    Profile::Jet a;   // A and derivatives at ε(j − ct)
    Profile::Jet b;   // B and derivatives at ε(j + ct)
};

inline ProfilePoint profile_point(const WaveProfiles& w, double epsilon, std::int64_t j, double t)
{
    const double jd = static_cast<double>(j);
    return {w.A.jet(epsilon * (jd - w.c * t)), w.B.jet(epsilon * (jd + w.c * t))};
}
} // namespace detail

/// First-order long-wave approximation
///   r̃ = [A + B]/k + ε χ_m/k [A′ + B′],
///   p̃ = [−A + B]/√(k̃m̄) + ε χ_k/√(k̃m̄) [−A′ + B′],
/// with A evaluated at ε(j − ct) and B at ε(j + ct).
inline AnsatzValue ansatz(const WaveProfiles& w, const CorrectorWalk& walks, const CoefficientField& coeffs,
                          double epsilon, std::int64_t j, double t)
{
    const auto pt = detail::profile_point(w, epsilon, j, t);
    const double z = w.impedance();
    const double k = coeffs.k(j);
    const double r = (pt.a[0] + pt.b[0] + epsilon * walks.chi_m(j) * (pt.a[1] + pt.b[1])) / k;
    const double p = (-pt.a[0] + pt.b[0] + epsilon * walks.chi_k(j) * (-pt.a[1] + pt.b[1])) / z;
    return {r, p};
}

/// Exact ∂ₜ of the ansatz (chain rule; each derivative of A or B carries ∓εc).
inline AnsatzValue ansatz_time_derivatives(const WaveProfiles& w, const CorrectorWalk& walks,
                                           const CoefficientField& coeffs, double epsilon, std::int64_t j, double t)
{
    const auto pt = detail::profile_point(w, epsilon, j, t);
    const double z = w.impedance();
    const double ec = epsilon * w.c;
    const double k = coeffs.k(j);
    const double dr = ec * ((-pt.a[1] + pt.b[1]) + epsilon * walks.chi_m(j) * (-pt.a[2] + pt.b[2])) / k;
    const double dp = ec * ((pt.a[1] + pt.b[1]) + epsilon * walks.chi_k(j) * (pt.a[2] + pt.b[2])) / z;
    return {dr, dp};
}

/// Residuals of the ansatz through the defining formulas applied to the
/// pointwise ansatz and its exact time derivatives.
inline ResidualPair residual_definitional(const WaveProfiles& w, const CorrectorWalk& walks,
                                          const CoefficientField& coeffs, double epsilon, double t)
{
    return residuals([&](std::int64_t j, double s) { return ansatz(w, walks, coeffs, epsilon, j, s).r; },
                     [&](std::int64_t j, double s) { return ansatz(w, walks, coeffs, epsilon, j, s).p; },
                     [&](std::int64_t j, double s) { return ansatz_time_derivatives(w, walks, coeffs, epsilon, j, s).r; },
                     [&](std::int64_t j, double s) { return ansatz_time_derivatives(w, walks, coeffs, epsilon, j, s).p; },
                     coeffs, t);
}

/// Profile jets sampled on the whole window (plus one ghost cell on each
/// side) at a fixed time, from which the leading-order profile, the ansatz
/// and the closed-form residuals are assembled without re-evaluating A, B.
class AnsatzFrame {
public:
    AnsatzFrame(const WaveProfiles& w, const CorrectorWalk& walks, const CoefficientField& coeffs, double epsilon)
        : w_(&w), walks_(&walks), coeffs_(&coeffs), eps_(epsilon), lo_(coeffs.m.lo()), hi_(coeffs.m.hi()),
          a_(static_cast<std::size_t>(hi_ - lo_ + 3)), b_(a_.size())
    {
    }

    void evaluate(double t)
    {
        t_ = t;
        const bool has_b = !w_->B.is_zero();
        for (std::int64_t j = lo_ - 1; j <= hi_ + 1; ++j) {
            const double jd = static_cast<double>(j);
            const std::size_t i = idx(j);
            a_[i] = w_->A.jet(eps_ * (jd - w_->c * t));
            b_[i] = has_b ? w_->B.jet(eps_ * (jd + w_->c * t)) : Profile::Jet{};
        }
    }

    double time() const noexcept { return t_; }

    /// (A + B)/k, the homogenized profile without corrector.
    double leading_r(std::int64_t j) const { return (a(j)[0] + b(j)[0]) / coeffs_->k[j]; }
    /// (−A + B)/√(k̃m̄).
    double leading_p(std::int64_t j) const { return (-a(j)[0] + b(j)[0]) / w_->impedance(); }

    double ansatz_r(std::int64_t j) const
    {
        return leading_r(j) + eps_ * walks_->chi_m[j] * (a(j)[1] + b(j)[1]) / coeffs_->k[j];
    }
    double ansatz_p(std::int64_t j) const
    {
        return leading_p(j) + eps_ * walks_->chi_k[j] * (-a(j)[1] + b(j)[1]) / w_->impedance();
    }

    /// Closed-form expansion of the ansatz residuals. With A, B at ε(j∓ct),
    /// s = √(k̃m̄):
    ///   Res₁ = (1/s)(−δ⁺A + εA′) + (1/s)(δ⁺B − εB′)
    ///        + ε²c χ_m(j)/k(j) (A″ − B″)
    ///        − (ε/s) χ_k(j+1) δ⁺A′ + (ε/s) χ_k(j+1) δ⁺B′,
    ///   Res₂ = (1/m)(δ⁻A − εA′) + (1/m)(δ⁻B − εB′)
    ///        + (ε/m) χ_m(j−1) δ⁻(A′ + B′)
    ///        − ε²c χ_k(j)/s (A″ + B″).
    /// Entries at the two window edges use zero-filled correctors beyond the
    /// window.
    ResidualPair residuals() const
    {
        ResidualPair out{Sequence(lo_, hi_), Sequence(lo_, hi_)};
        const double s = w_->impedance(), eps = eps_, c = w_->c;
        const auto& chi_k = walks_->chi_k;
        const auto& chi_m = walks_->chi_m;
        for (std::int64_t j = lo_; j <= hi_; ++j) {
            const auto &A = a(j), &An = a(j + 1), &Ap = a(j - 1);
            const auto &B = b(j), &Bn = b(j + 1), &Bp = b(j - 1);
            const double k = coeffs_->k[j], m = coeffs_->m[j];

            out.res1[j] = (-(An[0] - A[0]) + eps * A[1]) / s + ((Bn[0] - B[0]) - eps * B[1]) / s +
                          eps * eps * c * chi_m[j] / k * (A[2] - B[2]) -
                          eps / s * chi_k(j + 1) * (An[1] - A[1]) + eps / s * chi_k(j + 1) * (Bn[1] - B[1]);

            out.res2[j] = ((A[0] - Ap[0]) - eps * A[1]) / m + ((B[0] - Bp[0]) - eps * B[1]) / m +
                          eps / m * chi_m(j - 1) * ((A[1] - Ap[1]) + (B[1] - Bp[1])) -
                          eps * eps * c * chi_k[j] / s * (A[2] + B[2]);
        }
        return out;
    }

private:
    std::size_t idx(std::int64_t j) const noexcept { return static_cast<std::size_t>(j - lo_ + 1); }
    const Profile::Jet& a(std::int64_t j) const noexcept { return a_[idx(j)]; }
    const Profile::Jet& b(std::int64_t j) const noexcept { return b_[idx(j)]; }

    const WaveProfiles* w_;
    const CorrectorWalk* walks_;
    const CoefficientField* coeffs_;
    double eps_;
    std::int64_t lo_, hi_;
    double t_ = 0.0;
    std::vector<Profile::Jet> a_, b_;
};

/// Closed-form residuals of the ansatz at time t.
inline ResidualPair residual_closed_form(const WaveProfiles& w, const CorrectorWalk& walks,
                                         const CoefficientField& coeffs, double epsilon, double t)
{
    AnsatzFrame frame(w, walks, coeffs, epsilon);
    frame.evaluate(t);
    return frame.residuals();
}

/// Half-width J with J·ε ≥ x_support + c·T₀ + margin.
inline std::int64_t window_half_width(double epsilon, double x_support, double c, double T0, double margin = 10.0)
{
    if (!(epsilon > 0)) throw std::invalid_argument("window_half_width: epsilon must be positive");
    return static_cast<std::int64_t>(std::ceil((x_support + c * T0 + margin) / epsilon));
}

} // namespace lhomog
