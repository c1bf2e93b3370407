#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chemo/interpolation_check.hpp"
#include "chemo/regimes.hpp"

using namespace chemo;

namespace {

Params gd(double alpha, double beta, double gamma, double a = 1.0, double b = 1.0) {
    Params p;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = gamma;
    p.a = a;
    p.b = b;
    return p;
}

Params dg(double alpha, double beta, double gamma, double a = 1.0, double b = 1.0) {
    Params p = gd(alpha, beta, gamma, a, b);
    p.mode = SourceMode::DecayGrowth;
    return p;
}

}  // namespace

TEST(Classify, AnchoredExamples) {
    EXPECT_EQ(classify(gd(1, 2, 2), 2, 1.0, 1.0).tag, RegimeTag::Case1B);
    EXPECT_EQ(classify(gd(2, 2, 2), 2, 1.0, 1.0).tag, RegimeTag::Case1A);
    EXPECT_EQ(classify(dg(3, 1, 1, 0.01, 50.0), 2, 1.0, 1.0).tag, RegimeTag::Case2A);
    EXPECT_EQ(classify(dg(3, 1, 2, 2, 1), 2, 1.0, 1.0).tag, RegimeTag::Case2B);
    const RegimeCase out = classify(gd(3, 2, 1), 2, 1.0, 1.0);
    EXPECT_EQ(out.tag, RegimeTag::OutsideTheorem);
    EXPECT_NE(out.details.find("beta ≥ alpha"), std::string::npos);
}

TEST(Classify, StrictInequalitiesAtEquality) {
    const RegimeCase tie = classify(gd(1, 1.5, 1.5), 2, 1.0, 1.0);
    EXPECT_EQ(tie.tag, RegimeTag::OutsideTheorem);
    EXPECT_NE(tie.details.find("n/2 + 2"), std::string::npos);
    EXPECT_EQ(classify(gd(2, 2, 1.5), 3, 1.0, 1.0).tag, RegimeTag::OutsideTheorem);
    EXPECT_EQ(classify(dg(3, 1, 2, 1, 1), 1, 1.0, 1.0).tag, RegimeTag::OutsideTheorem);
    // beta = alpha is allowed (non-strict)
    EXPECT_EQ(classify(gd(2, 2, 3), 1, 1.0, 1.0).tag, RegimeTag::Case1A);
}

TEST(Classify, NearTieReportedAsEquality) {
    const RegimeCase c = classify(gd(1, 1.5, 1.5 + 1e-14), 2, 1.0, 1.0);
    EXPECT_EQ(c.tag, RegimeTag::OutsideTheorem);
    EXPECT_TRUE(c.tie);
    EXPECT_NE(c.details.find("tie"), std::string::npos);
    EXPECT_FALSE(classify(gd(1, 2, 2), 2, 1.0, 1.0).tie);
    // exact equality is decided without tolerance
    EXPECT_FALSE(classify(gd(1, 1.5, 1.5), 2, 1.0, 1.0).tie);
    EXPECT_FALSE(classify(dg(2, 1, 1, 5, 1), 2, 1.0, 1.0, 2.0).tie);
}

TEST(Classify, DecayGrowthBranches) {
    EXPECT_EQ(classify(dg(3, 1, 3), 2, 1.0, 1.0).tag, RegimeTag::OutsideTheorem);
    EXPECT_EQ(classify(dg(1.5, 1, 1), 2, 1.0, 1.0).tag, RegimeTag::OutsideTheorem);
    // 2B threshold depends on |Omega|
    EXPECT_EQ(classify(dg(3, 1, 2, 2, 1), 2, 3.0, 1.0).tag, RegimeTag::OutsideTheorem);
    EXPECT_EQ(classify(dg(3, 1, 2, 0.5, 1), 2, 1.0, 1.0).tag, RegimeTag::OutsideTheorem);
}

TEST(Classify, Case2CNeedsUserConstant) {
    Params p = dg(2, 1, 1, 5, 1);
    const RegimeCase none = classify(p, 2, 1.0, 1.0);
    EXPECT_EQ(none.tag, RegimeTag::OutsideTheorem);
    EXPECT_NE(none.details.find("C_P"), std::string::npos);
    EXPECT_EQ(classify(p, 2, 1.0, 1.0, 2.0).tag, RegimeTag::Case2CConditional);
    // a > b|Omega| + C_P chi ||v0|| fails for a large signal
    EXPECT_EQ(classify(p, 2, 1.0, 3.0, 2.0).tag, RegimeTag::OutsideTheorem);
    p.chi = 3.0;
    EXPECT_EQ(classify(p, 2, 1.0, 1.0, 2.0).tag, RegimeTag::OutsideTheorem);
    // equality is not enough
    p.chi = 2.0;
    EXPECT_EQ(classify(p, 2, 1.0, 1.0, 2.0).tag, RegimeTag::OutsideTheorem);
}

TEST(Classify, ModeConsistency) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> e(1.0, 5.0), c(0.1, 5.0);
    for (int i = 0; i < 500; ++i) {
        Params p = gd(e(rng), e(rng), e(rng), c(rng), c(rng));
        p.mode = i % 2 ? SourceMode::DecayGrowth : SourceMode::GrowthDampening;
        const RegimeTag tag = classify(p, 1 + i % 4, c(rng), c(rng), 1.0).tag;
        if (p.mode == SourceMode::GrowthDampening) {
            EXPECT_TRUE(tag == RegimeTag::Case1A || tag == RegimeTag::Case1B || tag == RegimeTag::OutsideTheorem);
        } else {
            EXPECT_TRUE(tag != RegimeTag::Case1A && tag != RegimeTag::Case1B);
        }
    }
}

TEST(Classify, InvariantUnderCommonScalingOfAB) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> e(1.0, 5.0), c(0.1, 5.0);
    for (int i = 0; i < 500; ++i) {
        Params p = gd(e(rng), e(rng), e(rng), c(rng), c(rng));
        if (i % 3 == 0) {
            p = dg(3.0, 1.0, 2.0, c(rng), c(rng));
        } else if (i % 2) {
            p.mode = SourceMode::DecayGrowth;
        }
        const double omega = c(rng);
        const int n = 1 + i % 3;
        const RegimeTag before = classify(p, n, omega, 1.0).tag;
        Params q = p;
        const double k = c(rng);
        q.a *= k;
        q.b *= k;
        const RegimeTag after = classify(q, n, omega, 1.0).tag;
        if (before != RegimeTag::Case2CConditional) EXPECT_EQ(before, after);
    }
}

TEST(Classify, RejectsInvalidInputs) {
    EXPECT_THROW(classify(gd(1, 2, 2), 0, 1.0, 1.0), PreconditionError);
    EXPECT_THROW(classify(gd(1, 2, 2), 1, 0.0, 1.0), PreconditionError);
    EXPECT_THROW(classify(gd(0.5, 2, 2), 1, 1.0, 1.0), PreconditionError);
}

TEST(MassBound, EqualExponentBranch) {
    EXPECT_DOUBLE_EQ(mass_bound(gd(1, 1, 1), 1.0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(mass_bound(gd(2, 2, 2, 4, 1), 1.0, 0.5), 2.0);
    EXPECT_DOUBLE_EQ(mass_bound(gd(2, 2, 2, 4, 1), 1.0, 10.0), 10.0);
    // y1 = (a / (b |Omega|^(1 - gamma)))^(1/gamma) with |Omega| = 4, gamma = 2
    EXPECT_NEAR(mass_threshold(gd(1, 1, 2, 3, 1), 4.0), std::sqrt(3.0 * 4.0), 1e-14);
}

TEST(MassBound, UnequalExponentBranch) {
    // A1 configuration: alpha = 1, beta = gamma = 2 with unit constants gives y1 = 1
    EXPECT_DOUBLE_EQ(mass_threshold(gd(1, 2, 2), 1.0), 1.0);
    // |Omega| = 2, a = 3, b = 0.5, alpha = 1, beta = 3, gamma = 1.5
    const double om = 2.0, a = 3.0, b = 0.5, al = 1.0, be = 3.0, ga = 1.5;
    const double num = a * std::pow(om, (be - al) / be);
    const double den = b * std::pow(om, (1.0 - ga) - (be - 1.0) * (be - al) / be);
    EXPECT_NEAR(mass_threshold(gd(al, be, ga, a, b), om), std::pow(num / den, 1.0 / (be - al + ga)), 1e-13);
}

TEST(MassBound, Preconditions) {
    EXPECT_THROW(mass_bound(dg(1, 1, 1), 1.0, 0.5), PreconditionError);
    EXPECT_THROW(mass_bound(gd(3, 2, 1), 1.0, 0.5), PreconditionError);
}

TEST(MassBound, MonotoneInAAndB) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> e(1.0, 4.0), c(0.2, 4.0);
    for (int i = 0; i < 300; ++i) {
        const double alpha = e(rng);
        Params p = gd(alpha, alpha + (i % 2 ? 0.0 : e(rng) - 1.0), e(rng), c(rng), c(rng));
        const double om = c(rng), m = 0.01;
        Params more_a = p, more_b = p;
        more_a.a *= 1.5;
        more_b.b *= 1.5;
        EXPECT_GE(mass_bound(more_a, om, m), mass_bound(p, om, m));
        EXPECT_LE(mass_bound(more_b, om, m), mass_bound(p, om, m));
    }
}

TEST(OdeComparisonBound, MaxSemantics) {
    EXPECT_EQ(ode_comparison_bound(0.0, 1.0), 1.0);
    EXPECT_EQ(ode_comparison_bound(3.0, 1.0), 3.0);
    EXPECT_EQ(ode_comparison_bound(2.0, 2.0), 2.0);
    EXPECT_THROW(ode_comparison_bound(-1.0, 1.0), PreconditionError);
    EXPECT_THROW(ode_comparison_bound(1.0, 0.0), PreconditionError);
}

TEST(VSupBound, Examples) {
    const Grid g = Grid::line(1.0, 64);
    EXPECT_EQ(v_sup_bound(Field(g, 3.0)), 3.0);
    EXPECT_EQ(v_sup_bound(Field(g, 0.0)), 0.0);
    const Field v = Field::sample(g, [](double x) { return 1.0 + std::cos(std::numbers::pi * x); });
    EXPECT_NEAR(v_sup_bound(v), 2.0, std::pow(std::numbers::pi * g.h(0), 2));
    Field neg(g, 1.0);
    neg[3] = -0.5;
    EXPECT_THROW(v_sup_bound(neg), PreconditionError);
}

TEST(GNExponents, AnchoredInstance) {
    const GNExponents e = gn_exponents(2.0, 1.0, 3);
    ASSERT_TRUE(e.admissible);
    ASSERT_TRUE(e.p.has_value());
    EXPECT_DOUBLE_EQ(*e.p, 6.0);
    EXPECT_NEAR(e.lambda, 0.6, 1e-15);
    EXPECT_NEAR(e.delta, 2.0, 1e-14);
    EXPECT_FALSE(e.convention);
}

TEST(GNExponents, Inadmissible) {
    EXPECT_EQ(gn_exponents(2.0, 2.0, 3).failed_condition, "r < q");
    EXPECT_EQ(gn_exponents(7.0, 1.0, 3).failed_condition, "q < p");
    EXPECT_EQ(gn_exponents(2.0, 0.5, 3).failed_condition, "1 ≤ r");
    // n = 2: q/r = 2/r + 1 exactly with r = 1, q = 3
    const GNExponents e2 = gn_exponents(3.0, 1.0, 2);
    EXPECT_FALSE(e2.admissible);
    EXPECT_EQ(e2.failed_condition, "q/r < 2/r + 1");
    // n = 1: q/r = 2/r + 2 exactly
    EXPECT_EQ(gn_exponents(4.0, 1.0, 1).failed_condition, "q/r < 2/r + 2");
    // n = 3: q/r = 2/r + 1 - 2/p with r = 1.5: q = 2 + 1.5 * (2/3)
    EXPECT_FALSE(gn_exponents(3.0, 1.5, 3).admissible);
}

TEST(GNExponents, LowDimensionsUseConvention) {
    for (auto [q, r, n] : {std::tuple{3.9, 1.0, 1}, std::tuple{2.5, 1.0, 2}, std::tuple{2.0, 1.5, 1}}) {
        const GNExponents e = gn_exponents(q, r, n);
        ASSERT_TRUE(e.admissible) << q << " " << r << " " << n;
        EXPECT_TRUE(e.convention);
        EXPECT_FALSE(e.p.has_value());
        EXPECT_GT(e.lambda, 0.0);
        EXPECT_LT(e.lambda, 1.0);
        EXPECT_GT(e.delta, 0.0);
    }
}

TEST(GNExponents, RandomAdmissibleTriples) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const int n = 1 + i % 8;
        const double r = 1.0 + 4.0 * unit(rng);
        double q_max = n == 1 ? r * (2.0 / r + 2.0) : n == 2 ? r * (2.0 / r + 1.0) : 0.0;
        if (n >= 3) {
            const double p = 2.0 * n / (n - 2.0);
            if (r >= p) continue;
            q_max = std::min(p, 2.0 + r * (1.0 - 2.0 / p));
        }
        if (q_max <= r) continue;
        const double q = r + (q_max - r) * (0.001 + 0.998 * unit(rng));
        const GNExponents e = gn_exponents(q, r, n);
        ASSERT_TRUE(e.admissible) << q << " " << r << " " << n;
        EXPECT_GT(e.lambda, 0.0);
        EXPECT_LT(e.lambda, 1.0);
        EXPECT_GT(2.0 - e.lambda * q, 0.0);
        EXPECT_TRUE(std::isfinite(e.delta));
        EXPECT_GT(e.delta, 0.0);
    }
}

TEST(MakeReport, BoundsPerCase) {
    const Grid g = Grid::line(1.0, 32);
    const Field u0(g, 0.5), v0(g, 2.0);
    const RegimeReport r1 = make_report(gd(1, 2, 2), 1, g.measure(), u0, v0);
    EXPECT_EQ(r1.regime.tag, RegimeTag::Case1B);
    ASSERT_TRUE(r1.mass_bound_m0);
    EXPECT_DOUBLE_EQ(*r1.mass_bound_m0, 1.0);
    EXPECT_EQ(r1.v_sup_bound, 2.0);
    EXPECT_FALSE(r1.threshold_margin);

    const RegimeReport r2 = make_report(dg(3, 1, 2, 2, 1), 1, g.measure(), u0, v0);
    EXPECT_EQ(r2.regime.tag, RegimeTag::Case2B);
    EXPECT_FALSE(r2.mass_bound_m0);
    ASSERT_TRUE(r2.threshold_margin);
    EXPECT_DOUBLE_EQ(*r2.threshold_margin, 1.0);

    const RegimeReport r3 = make_report(dg(2, 1, 1, 6, 1), 1, g.measure(), u0, v0, 1.5);
    EXPECT_EQ(r3.regime.tag, RegimeTag::Case2CConditional);
    EXPECT_DOUBLE_EQ(*r3.threshold_margin, 6.0 - 1.0 - 1.5 * 1.0 * 2.0);
}

TEST(InterpolationCheck, FiniteConstantForAdmissibleTriple) {
    InequalityOptions opts;
    opts.samples = 60;
    // q = 2 is trivial because the right-hand side already contains ||phi||_2^2
    EXPECT_EQ(check_interpolation(2.0, 1.0, 3, opts).fits[1].c0_fitted, 0.0);
    const InequalityReport rep = check_interpolation(2.5, 1.0, 3, opts);
    ASSERT_TRUE(rep.exponents.admissible);
    EXPECT_GT(rep.fits[1].c0_fitted, 0.0);
    ASSERT_EQ(rep.fits.size(), 2u);
    EXPECT_FALSE(rep.violated());
    for (const auto& f : rep.fits) {
        EXPECT_TRUE(std::isfinite(f.c0_fitted));
        EXPECT_LE(f.c0_min, f.c0_median);
        EXPECT_LE(f.c0_median, f.c0_fitted);
    }
    // a smaller eps needs at least as large a constant
    EXPECT_GE(rep.fits[1].c0_fitted, rep.fits[0].c0_fitted);
}

TEST(InterpolationCheck, DeterministicForSeed) {
    InequalityOptions opts;
    opts.samples = 20;
    const auto a = check_interpolation(2.5, 1.0, 1, opts), b = check_interpolation(2.5, 1.0, 1, opts);
    EXPECT_EQ(a.fits[1].c0_fitted, b.fits[1].c0_fitted);
    EXPECT_EQ(a.fits[1].worst_sample, b.fits[1].worst_sample);
}

TEST(InterpolationCheck, InadmissibleSkipsSampling) {
    const InequalityReport rep = check_interpolation(1.0, 1.0, 3);
    EXPECT_FALSE(rep.exponents.admissible);
    EXPECT_TRUE(rep.fits.empty());
    InequalityOptions none;
    none.samples = 0;
    EXPECT_THROW(check_interpolation(2.0, 1.0, 3, none), PreconditionError);
}

TEST(InterpolationCheck, RandomProfilesAreNonnegative) {
    std::mt19937_64 rng(1);
    const Grid g = Grid::line(1.0, 64);
    for (int i = 0; i < 50; ++i) EXPECT_GE(random_smooth_profile(g, rng).min(), 0.0);
}
