#include <gtest/gtest.h>

#include <cmath>

#include "lattice_homog/analysis.hpp"
#include "lattice_homog/homogenization.hpp"

using namespace lhomog;

namespace {

struct Setup {
    CoefficientField coeffs;
    CorrectorWalk walks;
    WaveProfiles w;
    double eps;
};

Setup make_setup(CoefficientField c, const InitialData& d)
{
    Setup s{std::move(c), {}, {}, d.epsilon};
    s.walks = corrector_walks(s.coeffs);
    s.w = profiles_from_initial_data(d, s.coeffs);
    return s;
}

InitialData mixed_data(double eps)
{
    return {Profile::gaussian(1.0, 0.3) + Profile::gaussian(0.4, -1.0, 0.7), Profile::gaussian(-0.7, -0.2, 1.3), eps};
}

} // namespace

TEST(Profile, GaussianDerivativesMatchFiniteDifferences)
{
    const Profile f = Profile::gaussian(1.3, 0.2, 0.8) - Profile::gaussian(0.5, -0.4, 1.5);
    const double h = 1e-4;
    for (double x : {-1.7, -0.3, 0.0, 0.9, 2.2}) {
        for (int n = 0; n < Profile::max_order; ++n) {
            const double fd = (f.derivative(x + h, n) - f.derivative(x - h, n)) / (2 * h);
            const double exact = f.derivative(x, n + 1);
            EXPECT_NEAR(exact, fd, 1e-6 * std::max(1.0, std::abs(exact))) << "x=" << x << " n=" << n;
        }
    }
    EXPECT_NEAR(Profile::gaussian()(1.0), std::exp(-1.0), 1e-16);
    EXPECT_THROW(Profile::gaussian(1.0, 0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(f.derivative(0.0, 5), std::invalid_argument);
}

TEST(Profile, LinearCombinationAndSupport)
{
    const Profile a = Profile::gaussian(2.0, 1.0), b = Profile::gaussian(1.0, -3.0, 0.5);
    const Profile c = 0.5 * a - 3.0 * b;
    for (double x : {-3.0, 0.0, 1.0})
        EXPECT_NEAR(c(x), 0.5 * a(x) - 3.0 * b(x), 1e-15);
    const auto s = c.support();
    EXPECT_LE(std::abs(c(s.lo)), 1e-16);
    EXPECT_LE(std::abs(c(s.hi)), 1e-16);
    EXPECT_TRUE((0.0 * a).is_zero());
}

TEST(InitialData, RejectsEpsilonOutsideRange)
{
    EXPECT_THROW(InitialData::gaussian_pulse(0.5).validate(), std::invalid_argument);
    EXPECT_THROW(InitialData::gaussian_pulse(0.0).validate(), std::invalid_argument);
    EXPECT_NO_THROW(InitialData::gaussian_pulse(0.49).validate());
}

TEST(WaveProfiles, SpeedAndSplitting)
{
    const auto c = pattern_periodic({1.0, 3.0}, 10, {1.0, 2.0});
    EXPECT_DOUBLE_EQ(wave_speed(c), std::sqrt((4.0 / 3.0) / 2.0));
    const auto d = mixed_data(0.1);
    const auto w = profiles_from_initial_data(d, c);
    for (double X : {-2.0, -0.5, 0.0, 0.4, 1.8}) {
        const auto e = effective_solution(w, X, 0.0);
        EXPECT_NEAR(e.Q0, d.phi(X), 1e-15);
        EXPECT_NEAR(e.P0, d.psi(X), 1e-15);
    }
}

TEST(WaveProfiles, PulseMovesRightOnUnitLattice)
{
    const auto w = profiles_from_initial_data(InitialData::gaussian_pulse(0.1), constant_field(1, 1, 5));
    for (double x : {-1.0, 0.0, 0.5}) EXPECT_EQ(w.B(x), 0.0);
    const auto e = effective_solution(w, 3.0, 3.0);
    EXPECT_NEAR(e.Q0, 1.0, 1e-15);
    EXPECT_NEAR(e.P0, -1.0, 1e-15);
}

TEST(EffectiveSolution, SolvesTheWaveSystem)
{
    const auto c = sample_iid(DistributionSpec::uniform(0.5, 1.5), DistributionSpec::uniform(0.5, 2.0), 5);
    const auto w = profiles_from_initial_data(mixed_data(0.1), c);
    const double h = 1e-4, s = w.impedance();
    for (double X : {-1.0, 0.2, 1.1}) {
        for (double tau : {0.0, 0.7, 2.0}) {
            auto Q = [&](double x, double t) { return effective_solution(w, x, t).Q0; };
            auto P = [&](double x, double t) { return effective_solution(w, x, t).P0; };
            const double Qt = (Q(X, tau + h) - Q(X, tau - h)) / (2 * h);
            const double Px = (P(X + h, tau) - P(X - h, tau)) / (2 * h);
            const double Pt = (P(X, tau + h) - P(X, tau - h)) / (2 * h);
            const double Qx = (Q(X + h, tau) - Q(X - h, tau)) / (2 * h);
            EXPECT_NEAR(Qt, w.c * s * Px, 1e-7);
            EXPECT_NEAR(Pt, w.c / s * Qx, 1e-7);
            const double Qtt = (Q(X, tau + h) - 2 * Q(X, tau) + Q(X, tau - h)) / (h * h);
            const double Qxx = (Q(X + h, tau) - 2 * Q(X, tau) + Q(X - h, tau)) / (h * h);
            EXPECT_NEAR(Qtt, w.c * w.c * Qxx, 2e-4);
        }
    }
}

TEST(InitialState, MatchesDefinitionAndLeadingAnsatz)
{
    const auto d = mixed_data(0.05);
    auto S = make_setup(sample_iid(DistributionSpec::uniform(0.5, 1.5, 4), DistributionSpec::uniform(0.5, 2.0, 5), 100), d);
    const LatticeState s = initial_state(d, S.coeffs);
    AnsatzFrame frame(S.w, S.walks, S.coeffs, S.eps);
    frame.evaluate(0.0);
    for (std::int64_t j = -100; j <= 100; ++j) {
        const double x = 0.05 * static_cast<double>(j);
        EXPECT_DOUBLE_EQ(s.r[j], d.phi(x) / S.coeffs.k[j]);
        EXPECT_DOUBLE_EQ(s.p[j], d.psi(x));
        EXPECT_NEAR(frame.leading_r(j), s.r[j], 1e-15);
        EXPECT_NEAR(frame.leading_p(j), s.p[j], 1e-15);
    }
}

TEST(Ansatz, FrameAgreesWithPointwiseEvaluation)
{
    auto S = make_setup(sample_iid(DistributionSpec::uniform(0.5, 1.5, 6), DistributionSpec::uniform(0.5, 2.0, 7), 80),
                        mixed_data(0.08));
    AnsatzFrame frame(S.w, S.walks, S.coeffs, S.eps);
    frame.evaluate(2.5);
    EXPECT_EQ(frame.time(), 2.5);
    for (std::int64_t j = -80; j <= 80; ++j) {
        const auto v = ansatz(S.w, S.walks, S.coeffs, S.eps, j, 2.5);
        EXPECT_NEAR(frame.ansatz_r(j), v.r, 1e-15);
        EXPECT_NEAR(frame.ansatz_p(j), v.p, 1e-15);
    }
}

TEST(Ansatz, TimeDerivativesMatchFiniteDifferences)
{
    auto S = make_setup(sample_iid(DistributionSpec::uniform(0.5, 1.5, 8), DistributionSpec::uniform(0.5, 2.0, 9), 60),
                        mixed_data(0.1));
    const double h = 1e-3;
    for (std::int64_t j : {-40, -7, 0, 3, 25}) {
        for (double t : {0.0, 1.3, 4.0}) {
            const auto d = ansatz_time_derivatives(S.w, S.walks, S.coeffs, S.eps, j, t);
            const auto up = ansatz(S.w, S.walks, S.coeffs, S.eps, j, t + h);
            const auto dn = ansatz(S.w, S.walks, S.coeffs, S.eps, j, t - h);
            EXPECT_NEAR(d.r, (up.r - dn.r) / (2 * h), 1e-8);
            EXPECT_NEAR(d.p, (up.p - dn.p) / (2 * h), 1e-8);
        }
    }
}

TEST(Ansatz, ConstantCoefficientsHaveNoCorrector)
{
    auto S = make_setup(constant_field(1.0, 1.0, 50), InitialData::gaussian_pulse(0.1));
    AnsatzFrame frame(S.w, S.walks, S.coeffs, S.eps);
    frame.evaluate(1.0);
    for (std::int64_t j = -50; j <= 50; ++j) {
        EXPECT_EQ(frame.ansatz_r(j), frame.leading_r(j));
        EXPECT_EQ(frame.ansatz_p(j), frame.leading_p(j));
    }
}

class ResidualCrossCheck : public ::testing::TestWithParam<int> {};

TEST_P(ResidualCrossCheck, ClosedFormMatchesDefinition)
{
    const auto i = static_cast<std::uint64_t>(GetParam());
    const std::uint64_t seed = derive_seed(17, i);
    CoefficientField c;
    switch (i % 4) {
    case 0: c = sample_iid(DistributionSpec::uniform(0.5, 1.5, seed), DistributionSpec::uniform(0.6, 1.4, seed ^ 1), 250); break;
    case 1: c = sample_iid(DistributionSpec::two_point(1, 3, 0.5, seed), DistributionSpec::two_point(1, 2, 0.4, seed ^ 1), 250); break;
    case 2: c = pattern_periodic({0.5, 1.5, 1.0}, 250, {1.0, 2.0}); break;
    default: c = pattern_sqrt_growth(0.5, 1.5, 250); break;
    }
    const double eps = 0.05 + 0.1 * uniform01(seed, 1, 0);
    const double t = 4.0 * uniform01(seed, 1, 1);
    auto S = make_setup(std::move(c), mixed_data(eps));
    const auto a = residual_closed_form(S.w, S.walks, S.coeffs, eps, t);
    const auto b = residual_definitional(S.w, S.walks, S.coeffs, eps, t);
    const double scale = std::max(max_abs(b.res1), max_abs(b.res2));
    ASSERT_GT(scale, 0.0);
    for (std::int64_t j = -250; j <= 250; ++j) {
        EXPECT_LE(std::abs(a.res1[j] - b.res1[j]), 1e-10 * scale) << "j=" << j;
        EXPECT_LE(std::abs(a.res2[j] - b.res2[j]), 1e-10 * scale) << "j=" << j;
    }
}

INSTANTIATE_TEST_SUITE_P(Configurations, ResidualCrossCheck, ::testing::Range(0, 8));

TEST(Residual, ConstantCoefficientOrder)
{
    std::vector<double> es{0.025, 0.05, 0.1}, g;
    for (double e : es) {
        auto S = make_setup(constant_field(1.0, 1.0, window_half_width(e, 6.3, 1.0, 1.0)), InitialData::gaussian_pulse(e));
        const auto r = residual_closed_form(S.w, S.walks, S.coeffs, e, 0.5 / e);
        g.push_back(l2_norm(r.res1, r.res2));
    }
    EXPECT_NEAR(slope_fit(es, g).slope, 1.5, 0.05);
}

TEST(Window, HalfWidthCoversSupportAndTravel)
{
    EXPECT_EQ(window_half_width(0.1, 6.0, 1.0, 1.0), 170);
    EXPECT_EQ(window_half_width(0.3, 0.0, 0.0, 0.0, 1.0), 4);
    EXPECT_THROW(window_half_width(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
}
