#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lhomog {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const noexcept { return hi - lo; }
};

/// Smooth function ℝ → ℝ with exact derivatives up to `max_order`.
///
/// A profile is a linear combination of Gaussian terms a·exp(−((x−x₀)/w)²),
/// whose derivatives come from Hermite polynomials, and of user supplied
/// terms that evaluate their own derivative jets. Linear combinations stay
/// closed form, which the splitting A = ½Φ − ½√(k̃m̄)Ψ relies on.
class Profile {
public:
    static constexpr int max_order = 4;
    using Jet = std::array<double, max_order + 1>;

    Profile() = default;

    static Profile gaussian(double amplitude = 1.0, double center = 0.0, double width = 1.0)
    {
        if (!(width > 0)) throw std::invalid_argument("Profile::gaussian: width must be positive");
        Profile p;
        if (amplitude != 0.0) p.gaussians_.push_back({amplitude, center, width});
        return p;
    }

    /// Custom term; `jet(x)` returns f, f', …, f⁽⁴⁾ at x and `support` bounds
    /// where the function is non-negligible.
    static Profile custom(std::function<Jet(double)> jet, Interval support)
    {
        Profile p;
        p.custom_.push_back({1.0, std::move(jet), support});
        return p;
    }

    /// sinc(x)^power with the normalized sinc; only the value (order 0) is
    /// supplied. Band-limited to |ξ| ≤ power·π.
    static Profile sinc_power(int power, double support_half_width = 200.0)
    {
        return custom(
            [power](double x) {
                Jet j{};
                const double s = std::abs(x) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
                j[0] = std::pow(s, power);
                for (int i = 1; i <= max_order; ++i) j[i] = std::numeric_limits<double>::quiet_NaN();
                return j;
            },
            {-support_half_width, support_half_width});
    }

    Jet jet(double x) const
    {
        Jet out{};
        for (const auto& g : gaussians_) {
            const double u = (x - g.center) / g.width;
            const double e = g.amplitude * std::exp(-u * u);
            // d^n/dx^n e^{−u²} = (−1)^n H_n(u) e^{−u²} / w^n
            double hm1 = 1.0, h = 2.0 * u, scale = 1.0 / g.width;
            out[0] += e;
            out[1] -= h * e * scale;
            for (int n = 1; n < max_order; ++n) {
                const double hn = 2.0 * u * h - 2.0 * n * hm1;
                hm1 = h;
                h = hn;
                scale /= g.width;
                out[n + 1] += ((n + 1) % 2 == 0 ? 1.0 : -1.0) * h * e * scale;
            }
        }
        for (const auto& c : custom_) {
            const Jet v = c.jet(x);
            for (int i = 0; i <= max_order; ++i) out[i] += c.coef * v[i];
        }
        return out;
    }

    double operator()(double x) const { return derivative(x, 0); }

    double derivative(double x, int order) const
    {
        if (order < 0 || order > max_order) throw std::invalid_argument("Profile: derivative order out of range");
        return jet(x)[static_cast<std::size_t>(order)];
    }

    bool is_zero() const noexcept { return gaussians_.empty() && custom_.empty(); }

    /// Interval outside which every term is below ~1e-17 of its amplitude.
    Interval support() const
    {
        if (is_zero()) return {0.0, 0.0};
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& g : gaussians_) {
            const double reach = g.width * std::sqrt(std::log(1e17));
            lo = std::min(lo, g.center - reach);
            hi = std::max(hi, g.center + reach);
        }
        for (const auto& c : custom_) lo = std::min(lo, c.support.lo), hi = std::max(hi, c.support.hi);
        return {lo, hi};
    }

    Profile& operator+=(const Profile& o)
    {
        gaussians_.insert(gaussians_.end(), o.gaussians_.begin(), o.gaussians_.end());
        custom_.insert(custom_.end(), o.custom_.begin(), o.custom_.end());
        return *this;
    }
    Profile& operator*=(double a)
    {
        if (a == 0.0) return *this = Profile{};
        for (auto& g : gaussians_) g.amplitude *= a;
        for (auto& c : custom_) c.coef *= a;
        return *this;
    }
    friend Profile operator+(Profile a, const Profile& b) { return a += b; }
    friend Profile operator-(Profile a, Profile b) { return a += (b *= -1.0); }
    friend Profile operator*(double a, Profile p) { return p *= a; }

private:
    struct GaussianTerm {
        double amplitude;
        double center;
        double width;
    };
    struct CustomTerm {
        double coef;
        std::function<Jet(double)> jet;
        Interval support;
    };
    std::vector<GaussianTerm> gaussians_;
    std::vector<CustomTerm> custom_;
};

} // namespace lhomog
