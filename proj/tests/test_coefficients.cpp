#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lattice_homog/coefficients.hpp"

using namespace lhomog;

TEST(Distribution, ClosedFormMoments)
{
    const auto u = DistributionSpec::uniform(0.5, 1.5);
    EXPECT_DOUBLE_EQ(u.mean(), 1.0);
    EXPECT_NEAR(u.stddev(), 1.0 / std::sqrt(12.0), 1e-15);
    EXPECT_NEAR(u.mean_reciprocal(), std::log(3.0), 1e-15);

    const auto t = DistributionSpec::two_point(1.0, 2.0);
    EXPECT_DOUBLE_EQ(t.mean(), 1.5);
    EXPECT_DOUBLE_EQ(1.0 / t.mean_reciprocal(), 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(t.stddev_reciprocal(), 0.25);

    const auto c = DistributionSpec::constant(2.0);
    EXPECT_EQ(c.stddev(), 0.0);
    EXPECT_EQ(c.stddev_reciprocal(), 0.0);
}

TEST(Distribution, MonteCarloMatchesMoments)
{
    const auto spec = DistributionSpec::uniform(0.4, 2.2, 77);
    const auto f = sample_iid(spec, spec, 500000);
    KahanSum m, m2, inv, inv2;
    for (double v : f.m.values()) {
        m.add(v);
        m2.add(v * v);
    }
    for (double v : f.k.values()) {
        inv.add(1 / v);
        inv2.add(1 / (v * v));
    }
    const double n = static_cast<double>(f.m.size());
    EXPECT_NEAR(m.value() / n, spec.mean(), 1e-2);
    EXPECT_NEAR(std::sqrt(m2.value() / n - std::pow(m.value() / n, 2)), spec.stddev(), 1e-2);
    EXPECT_NEAR(inv.value() / n, spec.mean_reciprocal(), 1e-2);
    EXPECT_NEAR(std::sqrt(inv2.value() / n - std::pow(inv.value() / n, 2)), spec.stddev_reciprocal(), 1e-2);
    EXPECT_NEAR(f.empirical_mbar, spec.mean(), 1e-2);
}

TEST(Distribution, RejectsInvalid)
{
    EXPECT_THROW(DistributionSpec::uniform(0.0, 1.0).validate(), std::invalid_argument);
    EXPECT_THROW(DistributionSpec::uniform(2.0, 1.0).validate(), std::invalid_argument);
    EXPECT_THROW(DistributionSpec::two_point(1.0, 2.0, 1.5).validate(), std::invalid_argument);
    EXPECT_THROW(sample_iid(DistributionSpec::constant(1), DistributionSpec::constant(1), 0), std::invalid_argument);
}

TEST(SampleIid, StaysWithinSupportAndValidates)
{
    const auto f = sample_iid(DistributionSpec::uniform(0.5, 1.5, 1), DistributionSpec::two_point(1, 2, 0.3, 2), 1000);
    EXPECT_NO_THROW(f.validate());
    for (std::int64_t j = -1000; j <= 1000; ++j) {
        EXPECT_GE(f.m[j], 0.5);
        EXPECT_LE(f.m[j], 1.5);
        EXPECT_TRUE(f.k[j] == 1.0 || f.k[j] == 2.0);
    }
}

TEST(SampleIid, ReproducibleAndWindowIndependent)
{
    const auto spec_m = DistributionSpec::uniform(0.5, 1.5, 9);
    const auto spec_k = DistributionSpec::uniform(0.5, 1.5, 10);
    const auto a = sample_iid(spec_m, spec_k, 50), b = sample_iid(spec_m, spec_k, 50), c = sample_iid(spec_m, spec_k, 200);
    for (std::int64_t j = -50; j <= 50; ++j) {
        EXPECT_EQ(a.m[j], b.m[j]);
        EXPECT_EQ(a.k[j], b.k[j]);
        EXPECT_EQ(a.m[j], c.m[j]);
        EXPECT_EQ(a.k[j], c.k[j]);
    }
    const auto d = sample_iid(DistributionSpec::uniform(0.5, 1.5, 11), spec_k, 50);
    int same = 0;
    for (std::int64_t j = -50; j <= 50; ++j) same += a.m[j] == d.m[j];
    EXPECT_EQ(same, 0);
}

TEST(SampleIid, MassesAndSpringsAreDistinctStreams)
{
    const auto spec = DistributionSpec::uniform(0.5, 1.5, 5);
    const auto f = sample_iid(spec, spec, 100);
    int same = 0;
    for (std::int64_t j = -100; j <= 100; ++j) same += f.m[j] == f.k[j];
    EXPECT_EQ(same, 0);
}

TEST(Correctors, TwoPointSpringsExample)
{
    const auto f = pattern_periodic({1.0}, 10, {1.0, 2.0});
    EXPECT_DOUBLE_EQ(f.ktilde, 4.0 / 3.0);
    const auto w = corrector_walks(f);
    EXPECT_EQ(w.chi_k[0], 0.0);
    EXPECT_NEAR(w.chi_k[1], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(w.chi_k[2], 0.0, 1e-15);
    EXPECT_EQ(max_abs(w.chi_m), 0.0);
}

TEST(Correctors, DefiningDifferences)
{
    const auto f = sample_iid(DistributionSpec::uniform(0.5, 1.5, 3), DistributionSpec::uniform(0.7, 1.9, 4), 300);
    const auto w = corrector_walks(f);
    EXPECT_EQ(w.chi_k[0], 0.0);
    EXPECT_EQ(w.chi_m[0], 0.0);
    for (std::int64_t j = -300; j < 300; ++j) {
        EXPECT_NEAR(w.chi_k[j + 1] - w.chi_k[j], f.ktilde / f.k[j] - 1, 1e-12);
        EXPECT_NEAR(w.chi_m[j + 1] - w.chi_m[j], f.m[j + 1] / f.mbar - 1, 1e-12);
    }
}

TEST(Correctors, ConstantCoefficientsGiveZero)
{
    const auto w = corrector_walks(constant_field(2.0, 3.0, 40));
    EXPECT_EQ(max_abs(w.chi_k), 0.0);
    EXPECT_EQ(max_abs(w.chi_m), 0.0);
}

TEST(Correctors, PeriodicPatternStaysBounded)
{
    const auto f = pattern_periodic({1.0, 3.0}, 5000);
    EXPECT_DOUBLE_EQ(f.mbar, 2.0);
    EXPECT_DOUBLE_EQ(f.sigma_m, 1.0);
    const auto w = corrector_walks(f);
    EXPECT_LE(max_abs(w.chi_m), 0.5 + 1e-12);
}

TEST(Correctors, SqrtPatternPrefix)
{
    const std::vector<double> expected{1, 2, 1, 1, 2, 2, 1, 1, 1, 2, 2, 2};
    const auto f = pattern_sqrt_growth(1.0, 2.0, 20);
    for (std::size_t n = 0; n < expected.size(); ++n) {
        EXPECT_EQ(f.m[static_cast<std::int64_t>(n)], expected[n]) << "n=" << n;
        EXPECT_EQ(f.m[-static_cast<std::int64_t>(n)], expected[n]) << "n=-" << n;
    }
}

TEST(Correctors, SqrtPatternGrowsLikeSquareRoot)
{
    const auto f = pattern_sqrt_growth(0.5, 1.5, 200000);
    const auto w = corrector_walks(f);
    // block pairs of length L end at L(L+1); each pair moves the walk by about L/2
    double prev_gap = 1.0;
    for (std::int64_t L : {10, 100, 400}) {
        double peak = 0;
        for (std::int64_t j = 1; j <= L * (L + 1); ++j) peak = std::max(peak, std::abs(w.chi_m[j]));
        const double gap = std::abs(peak / std::sqrt(static_cast<double>(L * (L + 1))) - 0.5);
        EXPECT_LT(gap, 1.0 / static_cast<double>(L)) << "L=" << L;
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
}

TEST(Correctors, IidEnvelopeAndLil)
{
    const auto f = sample_iid(DistributionSpec::uniform(0.5, 1.5, 8), DistributionSpec::constant(1.0), 20000);
    const auto w = corrector_walks(f);
    const auto rep = lil_envelope_stats(w.chi_m, f.walk_sigma_m());
    EXPECT_GT(rep.C_omega, 0.0);
    EXPECT_LT(static_cast<double>(rep.exceed_count_2sigma) / static_cast<double>(rep.indices_checked), 0.01);
    EXPECT_GE(corrector_envelope_constant(w), rep.C_omega);
    EXPECT_THROW(lil_envelope_stats(Sequence::centered(10), 1.0), std::invalid_argument);
}

TEST(Martingale, MaximalInequalityHolds)
{
    const auto spec = DistributionSpec::uniform(0.5, 1.5);
    for (auto kind : {WalkKind::mass, WalkKind::spring}) {
        const auto r = martingale_maximal_mean(spec, kind, 200, 4000, 123);
        EXPECT_LE(r.mean_max_square, r.doob_bound * (1 + 3 / std::sqrt(4000.0)));
        // the maximum dominates the endpoint, whose second moment is Nσ²
        EXPECT_GE(r.mean_max_square, 0.8 * 200 * r.step_variance);
    }
}

TEST(CoefficientCsv, RoundTrip)
{
    const auto f = sample_iid(DistributionSpec::uniform(0.5, 1.5, 31), DistributionSpec::uniform(0.5, 1.5, 32), 25);
    const auto path = (std::filesystem::temp_directory_path() / "lhomog_coeff_roundtrip.csv").string();
    write_coefficients_csv(f, path);
    const auto g = read_coefficients_csv(path);
    std::filesystem::remove(path);
    ASSERT_TRUE(g.m.same_window(f.m));
    for (std::int64_t j = -25; j <= 25; ++j) {
        EXPECT_EQ(g.m[j], f.m[j]);
        EXPECT_EQ(g.k[j], f.k[j]);
    }
}

TEST(CoefficientCsv, RejectsMalformed)
{
    const auto path = (std::filesystem::temp_directory_path() / "lhomog_coeff_bad.csv").string();
    {
        std::ofstream out(path);
        out << "j,m,k\n-1,1,1\n0,1,1\n2,1,1\n";
    }
    EXPECT_THROW(read_coefficients_csv(path), std::runtime_error);
    std::filesystem::remove(path);
}
