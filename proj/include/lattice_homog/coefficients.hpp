#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lattice.hpp"
#include "rng.hpp"

namespace lhomog {

/// Law of a single coefficient. uniform: U[a, b]; two_point: a with
/// probability `prob`, otherwise b; constant: a.
struct DistributionSpec {
    enum class Kind { uniform, two_point, constant };

    Kind kind = Kind::constant;
    double a = 1.0;
    double b = 1.0;
    double prob = 0.5;
    std::uint64_t seed = 0;

    static DistributionSpec uniform(double a, double b, std::uint64_t seed = 0) { return {Kind::uniform, a, b, 0.5, seed}; }
    static DistributionSpec two_point(double a, double b, double prob = 0.5, std::uint64_t seed = 0)
    {
        return {Kind::two_point, a, b, prob, seed};
    }
    static DistributionSpec constant(double v) { return {Kind::constant, v, v, 1.0, 0}; }

    void validate() const
    {
        if (!(a > 0) || !(b > 0)) throw std::invalid_argument("DistributionSpec: support must lie in (0, inf)");
        if (kind == Kind::uniform && !(b >= a)) throw std::invalid_argument("DistributionSpec: uniform needs a <= b");
        if (kind == Kind::two_point && !(prob >= 0 && prob <= 1))
            throw std::invalid_argument("DistributionSpec: probability outside [0, 1]");
    }

    Bounds support() const
    {
        switch (kind) {
        case Kind::uniform: return {a, b};
        case Kind::two_point: return {std::min(a, b), std::max(a, b)};
        case Kind::constant: break;
        }
        return {a, a};
    }

    double sample(double u) const noexcept
    {
        switch (kind) {
        case Kind::uniform: return a + (b - a) * u;
        case Kind::two_point: return u < prob ? a : b;
        case Kind::constant: break;
        }
        return a;
    }

    double mean() const noexcept
    {
        switch (kind) {
        case Kind::uniform: return 0.5 * (a + b);
        case Kind::two_point: return prob * a + (1 - prob) * b;
        case Kind::constant: break;
        }
        return a;
    }
    double stddev() const noexcept
    {
        switch (kind) {
        case Kind::uniform: return (b - a) / std::sqrt(12.0);
        case Kind::two_point: return std::sqrt(prob * (1 - prob)) * std::abs(a - b);
        case Kind::constant: break;
        }
        return 0.0;
    }
    /// E[1/X].
    double mean_reciprocal() const noexcept
    {
        switch (kind) {
        case Kind::uniform: return b > a ? std::log(b / a) / (b - a) : 1.0 / a;
        case Kind::two_point: return prob / a + (1 - prob) / b;
        case Kind::constant: break;
        }
        return 1.0 / a;
    }
    /// Standard deviation of 1/X.
    double stddev_reciprocal() const noexcept
    {
        const double mu = mean_reciprocal();
        switch (kind) {
        case Kind::uniform: return b > a ? std::sqrt(std::max(0.0, 1.0 / (a * b) - mu * mu)) : 0.0;
        case Kind::two_point: return std::sqrt(prob * (1 - prob)) * std::abs(1.0 / a - 1.0 / b);
        case Kind::constant: break;
        }
        return 0.0;
    }
};

namespace detail {
inline constexpr std::uint64_t mass_stream = 0x6d617373ULL;
inline constexpr std::uint64_t spring_stream = 0x737072696e67ULL;

inline void fill_empirical(CoefficientField& f)
{
    KahanSum msum, kinv;
    for (double v : f.m.values()) msum.add(v);
    for (double v : f.k.values()) kinv.add(1.0 / v);
    const double n = static_cast<double>(f.m.size());
    f.empirical_mbar = msum.value() / n;
    f.empirical_ktilde = n / kinv.value();
}

inline Bounds value_bounds(const Sequence& s)
{
    const auto [lo, hi] = std::minmax_element(s.values().begin(), s.values().end());
    return {*lo, *hi};
}
} // namespace detail

/// i.i.d. masses and springs on [-J, J]. Site j of a field with seed s always
/// receives the same draw, whatever J is.
inline CoefficientField sample_iid(const DistributionSpec& spec_m, const DistributionSpec& spec_k, std::int64_t J)
{
    if (J < 1) throw std::invalid_argument("sample_iid: J must be positive");
    spec_m.validate();
    spec_k.validate();
    CoefficientField f;
    f.m = Sequence::generate(-J, J, [&](std::int64_t j) {
        return spec_m.sample(uniform01(spec_m.seed, detail::mass_stream, site_counter(j)));
    });
    f.k = Sequence::generate(-J, J, [&](std::int64_t j) {
        return spec_k.sample(uniform01(spec_k.seed, detail::spring_stream, site_counter(j)));
    });
    f.mass_bounds = spec_m.support();
    f.spring_bounds = spec_k.support();
    f.mbar = spec_m.mean();
    f.ktilde = 1.0 / spec_k.mean_reciprocal();
    f.sigma_m = spec_m.stddev();
    f.sigma_k = spec_k.stddev_reciprocal();
    detail::fill_empirical(f);
    return f;
}

/// Constant coefficients m ≡ mass, k ≡ spring.
inline CoefficientField constant_field(double mass, double spring, std::int64_t J)
{
    return sample_iid(DistributionSpec::constant(mass), DistributionSpec::constant(spring), J);
}

inline std::int64_t positive_mod(std::int64_t j, std::int64_t n) noexcept
{
    const std::int64_t r = j % n;
    return r < 0 ? r + n : r;
}

/// m(j) = masses[j mod len], k(j) = springs[j mod len']. mbar is the period's
/// arithmetic mean, ktilde its harmonic mean.
inline CoefficientField pattern_periodic(const std::vector<double>& masses, std::int64_t J,
                                         const std::vector<double>& springs = {1.0})
{
    if (masses.empty() || springs.empty()) throw std::invalid_argument("pattern_periodic: empty period");
    for (double v : masses)
        if (!(v > 0)) throw std::invalid_argument("pattern_periodic: nonpositive mass");
    for (double v : springs)
        if (!(v > 0)) throw std::invalid_argument("pattern_periodic: nonpositive spring");
    if (J < 1) throw std::invalid_argument("pattern_periodic: J must be positive");

    const auto nm = static_cast<std::int64_t>(masses.size());
    const auto nk = static_cast<std::int64_t>(springs.size());
    CoefficientField f;
    f.m = Sequence::generate(-J, J, [&](std::int64_t j) { return masses[static_cast<std::size_t>(positive_mod(j, nm))]; });
    f.k = Sequence::generate(-J, J, [&](std::int64_t j) { return springs[static_cast<std::size_t>(positive_mod(j, nk))]; });

    const auto mm = std::minmax_element(masses.begin(), masses.end());
    const auto km = std::minmax_element(springs.begin(), springs.end());
    f.mass_bounds = {*mm.first, *mm.second};
    f.spring_bounds = {*km.first, *km.second};

    double msum = 0, m2 = 0, kinv = 0, kinv2 = 0;
    for (double v : masses) msum += v, m2 += v * v;
    for (double v : springs) kinv += 1.0 / v, kinv2 += 1.0 / (v * v);
    f.mbar = msum / static_cast<double>(nm);
    f.ktilde = static_cast<double>(nk) / kinv;
    f.sigma_m = std::sqrt(std::max(0.0, m2 / static_cast<double>(nm) - f.mbar * f.mbar));
    const double kinv_mean = kinv / static_cast<double>(nk);
    f.sigma_k = std::sqrt(std::max(0.0, kinv2 / static_cast<double>(nk) - kinv_mean * kinv_mean));
    detail::fill_empirical(f);
    return f;
}

/// n-th entry (n ≥ 0) of m1, m2, m1,m1, m2,m2, m1,m1,m1, m2,m2,m2, ...:
/// blocks of length L = 1, 2, 3, ... alternating between the two values.
inline bool sqrt_pattern_is_first(std::int64_t n) noexcept
{
    // The block pair of length L starts at L(L−1).
    auto L = static_cast<std::int64_t>(std::floor(0.5 + std::sqrt(0.25 + static_cast<double>(n))));
    while (L * (L - 1) > n) --L;
    while ((L + 1) * L <= n) ++L;
    return n - L * (L - 1) < L;
}

/// Deterministic masses whose corrector χ_m grows like √|j|; mirrored about
/// j = 0 (m(−j) = m(j)). Springs are constant.
inline CoefficientField pattern_sqrt_growth(double m1, double m2, std::int64_t J, double spring = 1.0)
{
    if (!(m1 > 0) || !(m2 > 0) || !(spring > 0)) throw std::invalid_argument("pattern_sqrt_growth: nonpositive value");
    if (J < 1) throw std::invalid_argument("pattern_sqrt_growth: J must be positive");
    CoefficientField f;
    f.m = Sequence::generate(-J, J, [&](std::int64_t j) { return sqrt_pattern_is_first(j < 0 ? -j : j) ? m1 : m2; });
    f.k = Sequence::centered(J, spring);
    f.mass_bounds = {std::min(m1, m2), std::max(m1, m2)};
    f.spring_bounds = {spring, spring};
    f.mbar = 0.5 * (m1 + m2);
    f.ktilde = spring;
    f.sigma_m = 0.5 * std::abs(m1 - m2);
    f.sigma_k = 0.0;
    detail::fill_empirical(f);
    return f;
}

/// Two-sided random walks χ_k, χ_m with χ(0) = 0,
///   δ⁺χ_k = ktilde/k − 1,   δ⁻χ_m = m/mbar − 1.
struct CorrectorWalk {
    Sequence chi_k;
    Sequence chi_m;
};

inline CorrectorWalk corrector_walks(const CoefficientField& coeffs)
{
    const std::int64_t J = coeffs.half_width();
    CorrectorWalk w{Sequence::centered(J), Sequence::centered(J)};
    auto step_k = [&](std::int64_t i) { return coeffs.ktilde / coeffs.k[i] - 1.0; };
    auto step_m = [&](std::int64_t i) { return coeffs.m[i] / coeffs.mbar - 1.0; };
    // χ_k(j) = Σ_{i=0}^{j−1} step_k(i),   χ_k(−j) = −Σ_{i=1}^{j} step_k(−i)
    // χ_m(j) = Σ_{i=1}^{j} step_m(i),     χ_m(−j) = −Σ_{i=0}^{j−1} step_m(−i)
    for (std::int64_t j = 1; j <= J; ++j) {
        w.chi_k[j] = w.chi_k[j - 1] + step_k(j - 1);
        w.chi_k[-j] = w.chi_k[-j + 1] - step_k(-j);
        w.chi_m[j] = w.chi_m[j - 1] + step_m(j);
        w.chi_m[-j] = w.chi_m[-j + 1] - step_m(-j + 1);
    }
    return w;
}

/// sup_j (|χ_k(j)| + |χ_m(j)|) / √(|j| log log(|j| + e)), the realization
/// constant of the almost-sure corrector envelope, over the window.
inline double corrector_envelope_constant(const CorrectorWalk& w)
{
    double c = 0.0;
    for (std::int64_t j = w.chi_k.lo(); j <= w.chi_k.hi(); ++j) {
        if (j == 0) continue;
        const double aj = static_cast<double>(j < 0 ? -j : j);
        const double env = std::sqrt(aj * std::log(std::log(aj + std::numbers::e)));
        c = std::max(c, (std::abs(w.chi_k[j]) + std::abs(w.chi_m[j])) / env);
    }
    return c;
}

struct LilReport {
    double C_omega = 0.0;
    std::int64_t exceed_count_2sigma = 0;
    std::int64_t indices_checked = 0;
    /// Max of |χ(j)| / √(|j| log log(|j|+e)) over each dyadic shell 2^n ≤ |j| < 2^{n+1}.
    std::vector<double> ratio_curve;
};

/// Finite-sample view of the law of the iterated logarithm for one walk.
inline LilReport lil_envelope_stats(const Sequence& walk, double sigma)
{
    if (walk.size() < 100) throw std::invalid_argument("lil_envelope_stats: walk needs at least 100 entries");
    if (!(sigma > 0)) throw std::invalid_argument("lil_envelope_stats: sigma must be positive");
    LilReport rep;
    for (std::int64_t j = walk.lo(); j <= walk.hi(); ++j) {
        if (j == 0) continue;
        const double aj = static_cast<double>(j < 0 ? -j : j);
        const double v = std::abs(walk[j]);
        const double ratio = v / std::sqrt(aj * std::log(std::log(aj + std::numbers::e)));
        rep.C_omega = std::max(rep.C_omega, ratio);

        const auto shell = static_cast<std::size_t>(std::floor(std::log2(aj)));
        if (rep.ratio_curve.size() <= shell) rep.ratio_curve.resize(shell + 1, 0.0);
        rep.ratio_curve[shell] = std::max(rep.ratio_curve[shell], ratio);

        // log log |j| is positive only from |j| = 3 on.
        if (aj >= 3) {
            ++rep.indices_checked;
            if (v > 2.0 * sigma * std::sqrt(2.0 * aj * std::log(std::log(aj)))) ++rep.exceed_count_2sigma;
        }
    }
    return rep;
}

/// Which corrector increments a martingale experiment draws.
enum class WalkKind { mass, spring };

struct MaximalInequalityReport {
    double mean_max_square = 0.0;   // empirical E[max_{0≤n≤N} W(n)²]
    double step_variance = 0.0;     // σ² of one increment
    double doob_bound = 0.0;        // 4Nσ²
    std::int64_t steps = 0;
    std::int64_t trials = 0;
};

/// Monte Carlo estimate of E[max_{0≤n≤N} (χ(j+n) − χ(j))²] over independent
/// walks whose increments are m/mbar − 1 (mass) or ktilde/k − 1 (spring).
inline MaximalInequalityReport martingale_maximal_mean(const DistributionSpec& spec, WalkKind kind, std::int64_t N,
                                                       std::int64_t trials, std::uint64_t seed)
{
    spec.validate();
    if (N < 1 || trials < 1) throw std::invalid_argument("martingale_maximal_mean: N and trials must be positive");
    const double mbar = spec.mean();
    const double ktilde = 1.0 / spec.mean_reciprocal();
    auto increment = [&](double x) { return kind == WalkKind::mass ? x / mbar - 1.0 : ktilde / x - 1.0; };

    KahanSum acc;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(trial));
        double w = 0.0, best = 0.0;
        for (std::int64_t n = 0; n < N; ++n) {
            w += increment(spec.sample(uniform01(s, 0, static_cast<std::uint64_t>(n))));
            best = std::max(best, w * w);
        }
        acc.add(best);
    }
    MaximalInequalityReport rep;
    rep.mean_max_square = acc.value() / static_cast<double>(trials);
    rep.step_variance = kind == WalkKind::mass ? std::pow(spec.stddev() / mbar, 2)
                                               : std::pow(ktilde * spec.stddev_reciprocal(), 2);
    rep.doob_bound = 4.0 * static_cast<double>(N) * rep.step_variance;
    rep.steps = N;
    rep.trials = trials;
    return rep;
}

/// CSV with header "j,m,k".
inline void write_coefficients_csv(const CoefficientField& f, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write coefficient file: " + path);
    out.precision(17);
    out << "j,m,k\n";
    for (std::int64_t j = f.m.lo(); j <= f.m.hi(); ++j) out << j << ',' << f.m[j] << ',' << f.k[j] << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Loads a "j,m,k" file covering a symmetric contiguous window. Statistics
/// are the window averages, since no law is known.
inline CoefficientField read_coefficients_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read coefficient file: " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("j,m,k", 0) != 0) throw std::runtime_error(path + ": expected header j,m,k");
    std::vector<std::int64_t> js;
    std::vector<double> ms, ks;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
            throw std::runtime_error(path + ": malformed row '" + line + "'");
        js.push_back(std::stoll(a));
        ms.push_back(std::stod(b));
        ks.push_back(std::stod(c));
    }
    if (js.empty()) throw std::runtime_error(path + ": no rows");
    const std::int64_t J = -js.front();
    if (J < 1 || js.back() != J || static_cast<std::int64_t>(js.size()) != 2 * J + 1)
        throw std::runtime_error(path + ": rows must cover a symmetric window [-J, J] in order");
    for (std::size_t i = 0; i < js.size(); ++i)
        if (js[i] != -J + static_cast<std::int64_t>(i)) throw std::runtime_error(path + ": indices not contiguous");

    CoefficientField f;
    f.m = Sequence::centered(J);
    f.k = Sequence::centered(J);
    for (std::size_t i = 0; i < js.size(); ++i) {
        if (!(ms[i] > 0) || !(ks[i] > 0)) throw std::runtime_error(path + ": nonpositive coefficient");
        f.m[js[i]] = ms[i];
        f.k[js[i]] = ks[i];
    }
    f.mass_bounds = detail::value_bounds(f.m);
    f.spring_bounds = detail::value_bounds(f.k);
    detail::fill_empirical(f);
    f.mbar = f.empirical_mbar;
    f.ktilde = f.empirical_ktilde;
    double m2 = 0, kinv = 0, kinv2 = 0;
    for (double v : f.m.values()) m2 += (v - f.mbar) * (v - f.mbar);
    for (double v : f.k.values()) kinv += 1.0 / v;
    kinv /= static_cast<double>(f.k.size());
    for (double v : f.k.values()) kinv2 += (1.0 / v - kinv) * (1.0 / v - kinv);
    f.sigma_m = std::sqrt(m2 / static_cast<double>(f.m.size()));
    f.sigma_k = std::sqrt(kinv2 / static_cast<double>(f.k.size()));
    return f;
}

} // namespace lhomog
