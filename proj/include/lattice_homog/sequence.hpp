#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lhomog {

/// Real sequence on a contiguous index window [lo, hi] of the integer lattice.
/// Reads outside the window return zero: the infinite lattice is truncated by
/// zero-fill.
class Sequence {
public:
    Sequence() = default;

    Sequence(std::int64_t lo, std::int64_t hi, double fill = 0.0)
        : lo_(lo), values_(hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0, fill)
    {
        if (hi < lo) throw std::invalid_argument("Sequence: empty index window");
    }

    /// Window [-J, J].
    static Sequence centered(std::int64_t half_width, double fill = 0.0)
    {
        return Sequence(-half_width, half_width, fill);
    }

    template <class F>
    static Sequence generate(std::int64_t lo, std::int64_t hi, F&& f)
    {
        Sequence s(lo, hi);
        for (std::int64_t j = lo; j <= hi; ++j) s[j] = f(j);
        return s;
    }

    std::int64_t lo() const noexcept { return lo_; }
    std::int64_t hi() const noexcept { return lo_ + static_cast<std::int64_t>(values_.size()) - 1; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    bool contains(std::int64_t j) const noexcept { return j >= lo_ && j <= hi(); }

    /// Zero-filled read.
    double operator()(std::int64_t j) const noexcept
    {
        return contains(j) ? values_[static_cast<std::size_t>(j - lo_)] : 0.0;
    }

    /// Unchecked access; j must lie in the window.
    double& operator[](std::int64_t j) noexcept { return values_[static_cast<std::size_t>(j - lo_)]; }
    double operator[](std::int64_t j) const noexcept { return values_[static_cast<std::size_t>(j - lo_)]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool same_window(const Sequence& other) const noexcept
    {
        return lo_ == other.lo_ && values_.size() == other.values_.size();
    }

    bool all_finite() const noexcept
    {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Sequence& operator+=(const Sequence& o)
    {
        require_same_window(*this, o, "operator+=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Sequence& operator-=(const Sequence& o)
    {
        require_same_window(*this, o, "operator-=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Sequence& operator*=(double a) noexcept
    {
        for (double& v : values_) v *= a;
        return *this;
    }
    friend Sequence operator+(Sequence a, const Sequence& b) { return a += b; }
    friend Sequence operator-(Sequence a, const Sequence& b) { return a -= b; }
    friend Sequence operator*(double a, Sequence b) { return b *= a; }

    static void require_same_window(const Sequence& a, const Sequence& b, const char* where)
    {
        if (!a.same_window(b))
            throw std::invalid_argument(std::string(where) + ": mismatched index windows");
    }

private:
    std::int64_t lo_ = 0;
    std::vector<double> values_;
};

/// (S^± f)(j) = f(j ± 1), zero-filled at the window edge.
inline Sequence shift(const Sequence& f, int direction)
{
    if (direction != 1 && direction != -1) throw std::invalid_argument("shift: direction must be +1 or -1");
    return Sequence::generate(f.lo(), f.hi(), [&](std::int64_t j) { return f(j + direction); });
}

/// δ⁺f(j) = f(j+1) − f(j);  δ⁻f(j) = f(j) − f(j−1).
inline Sequence difference(const Sequence& f, int direction)
{
    if (direction == 1)
        return Sequence::generate(f.lo(), f.hi(), [&](std::int64_t j) { return f(j + 1) - f(j); });
    if (direction == -1)
        return Sequence::generate(f.lo(), f.hi(), [&](std::int64_t j) { return f(j) - f(j - 1); });
    throw std::invalid_argument("difference: direction must be +1 or -1");
}

enum class Summation { naive, compensated };

/// Neumaier-compensated accumulator.
class KahanSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double sum_of_squares(std::span<const double> v, Summation mode = Summation::compensated)
{
    if (mode == Summation::naive) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    }
    KahanSum s;
    for (double x : v) s.add(x * x);
    return s.value();
}

inline double l2_norm(std::span<const double> v, Summation mode = Summation::compensated)
{
    return std::sqrt(sum_of_squares(v, mode));
}

/// Euclidean norm over the window.
inline double l2_norm(const Sequence& f, Summation mode = Summation::compensated)
{
    return l2_norm(f.values(), mode);
}

/// ‖(a, b)‖ on ℓ² × ℓ².
inline double l2_norm(const Sequence& a, const Sequence& b, Summation mode = Summation::compensated)
{
    return std::sqrt(sum_of_squares(a.values(), mode) + sum_of_squares(b.values(), mode));
}

inline double max_abs(const Sequence& f) noexcept
{
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

} // namespace lhomog
