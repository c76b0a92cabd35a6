#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "sequence.hpp"

namespace lhomog {

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
template <class F>
double simpson(F&& f, double a, double b, std::int64_t panels)
{
    if (panels < 2) panels = 2;
    if (panels % 2) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    KahanSum s;
    s.add(f(a));
    s.add(f(b));
    for (std::int64_t i = 1; i < panels; ++i) s.add((i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i)));
    return s.value() * h / 3.0;
}

/// Ten-point Gauss–Legendre on each of `cells` equal cells of [a, b].
template <class F>
double gauss_composite(F&& f, double a, double b, std::int64_t cells)
{
    if (cells < 1) throw std::invalid_argument("gauss_composite: need at least one cell");
    const double h = (b - a) / static_cast<double>(cells);
    KahanSum s;
    for (std::int64_t i = 0; i < cells; ++i) {
        const double lo = a + h * static_cast<double>(i);
        s.add(boost::math::quadrature::gauss<double, 10>::integrate(f, lo, lo + h));
    }
    return s.value();
}

} // namespace lhomog
