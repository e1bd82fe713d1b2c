#include <gtest/gtest.h>

#include "cplxinterp/lattice.hpp"
#include "test_helpers.hpp"

using namespace cplxinterp;
using testutil::close_rel;
using testutil::v;

namespace {

// Brute-force Calderon infimum in dimension one: scan h over a log grid.
double scan_calderon_1d(double w0, double w1, double theta, double f)
{
    double best = kInf;
    for (int k = -4000; k <= 4000; ++k) {
        const double h = f * std::exp(k * 1e-3);
        const double g = std::pow(f / std::pow(h, theta), 1 / (1 - theta));
        best = std::min(best, std::pow(w0 * g, 1 - theta) * std::pow(w1 * h, theta));
    }
    return best;
}

// Brute-force Calderon infimum in dimension two over a grid of h.
double scan_calderon_2d(const LatticeNorm& X0, const LatticeNorm& X1, double theta, const Vec& f)
{
    double best = kInf;
    for (int a = -300; a <= 300; ++a)
        for (int b = -300; b <= 300; ++b) {
            Vec h = v({f[0] * std::exp(a * 0.01), f[1] * std::exp(b * 0.01)});
            Vec g(2);
            for (int i = 0; i < 2; ++i) g[i] = std::pow(f[i] / std::pow(h[i], theta), 1 / (1 - theta));
            best = std::min(best, std::pow(X0.eval(g), 1 - theta) * std::pow(X1.eval(h), theta));
        }
    return best;
}

} // namespace

TEST(LatticeEval, ClosedFormExamples)
{
    EXPECT_DOUBLE_EQ(LatticeNorm::lp(2, 2).eval(v({3, 4})), 5.0);
    EXPECT_DOUBLE_EQ(LatticeNorm::weighted_lp(1, v({2, 1})).eval(v({1, 1})), 3.0);
    EXPECT_DOUBLE_EQ(LatticeNorm::lp(2, kInf).eval(v({1, -2})), 2.0);
}

TEST(LatticeEval, Errors)
{
    auto X = LatticeNorm::lp(2, 2);
    EXPECT_THROW(X.eval(v({1, 2, 3})), DimensionError);
    EXPECT_THROW(X.eval(v({1, NAN})), DomainError);
    EXPECT_THROW(power(X, 0.0), DomainError);
    EXPECT_THROW(power(X, -1.0), DomainError);
    EXPECT_THROW(calderon_product(X, X, 1.0), DomainError);
    EXPECT_THROW(calderon_product(X, X, 0.0), DomainError);
    EXPECT_THROW(calderon_product(X, LatticeNorm::lp(3, 2), 0.5), DimensionError);
    EXPECT_THROW(LatticeNorm::weighted_lp(2, v({1, 0})), DomainError);
}

TEST(LatticeEval, CustomGaugeMatchesKnownBalls)
{
    // generators e_1, e_2, e_3: solid hull is the l_1 ball
    const LatticeNorm l1 = LatticeNorm::custom(Mat::Identity(3, 3));
    // single generator (1,1,1): solid hull is the l_inf ball
    const LatticeNorm linf = LatticeNorm::custom(Mat::Ones(3, 1));
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        const Vec x = random_normal(rng, 3);
        EXPECT_NEAR(l1.eval(x), x.cwiseAbs().sum(), 1e-10);
        EXPECT_NEAR(linf.eval(x), x.cwiseAbs().maxCoeff(), 1e-10);
        // dual is exact through the generators
        EXPECT_NEAR(dual(l1).eval(x), x.cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_THROW(LatticeNorm::custom(v({1, 0}).reshaped(2, 1)), DomainError);
}

TEST(LatticeDual, Examples)
{
    EXPECT_DOUBLE_EQ(dual(LatticeNorm::lp(2, 1)).eval(v({1, 1})), 1.0);
    EXPECT_NEAR(dual(LatticeNorm::lp(2, 2)).eval(v({1, 1})), std::sqrt(2.0), 1e-14);
    // weighted: reciprocal weights
    const auto X = LatticeNorm::weighted_lp(2, v({2, 4}));
    EXPECT_NEAR(dual(X).eval(v({1, 1})), std::sqrt(0.25 + 1.0 / 16), 1e-14);
}

TEST(LatticeDual, NumericMaximizationMatchesConjugateExponent)
{
    DualOptions numeric;
    numeric.force_numeric = true;
    Rng rng(11);
    for (double p : {1.0, 1.5, 3.0, kInf}) {
        const auto X = LatticeNorm::lp(3, p);
        const auto D = dual(X, numeric);
        for (int t = 0; t < 10; ++t) {
            const Vec y = random_normal(rng, 3);
            const double want = WeightedLp{conjugate_exponent(p), Vec::Ones(3)}.p == kInf
                                    ? y.cwiseAbs().maxCoeff()
                                    : weighted_lp_value({conjugate_exponent(p), Vec::Ones(3)}, y.cwiseAbs());
            EXPECT_TRUE(close_rel(D.eval(y), want, 1e-6)) << p << " " << D.eval(y) << " " << want;
        }
    }
}

TEST(LatticeDual, BidualByMaximizationIsReflexive)
{
    DualOptions numeric;
    numeric.force_numeric = true;
    const auto X = LatticeNorm::lp(2, 3);
    const auto DD = dual(dual(X, numeric), numeric);
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        const Vec x = random_normal(rng, 2);
        EXPECT_TRUE(close_rel(DD.eval(x), X.eval(x), kTolClosed));
    }
}

TEST(LatticePower, Examples)
{
    const auto l2 = LatticeNorm::lp(2, 2);
    EXPECT_NEAR(power(l2, 2).eval(v({1, 1})), 2.0, 1e-14);
    EXPECT_NEAR(power(LatticeNorm::lp(2, 1), 0.5).eval(v({1, 1})), std::sqrt(2.0), 1e-14);
    EXPECT_EQ(power(LatticeNorm::lp(2, 1), 0.5).closed_form()->p, 2.0);
    EXPECT_EQ(power(l2, 2).normed_status(), NormedStatus::Normed);
    EXPECT_EQ(power(l2, 3).normed_status(), NormedStatus::UnverifiedNormed);
}

TEST(LatticePower, DirectFormulaMatchesClosedExponent)
{
    // custom l_1 ball has no closed form, so the power goes through ||a^{1/r}||^r
    const auto l1 = LatticeNorm::custom(Mat::Identity(2, 2));
    const auto P = power(l1, 0.5);
    EXPECT_FALSE(P.closed_evaluator());
    EXPECT_NEAR(P.eval(v({1, 1})), std::sqrt(2.0), 1e-10);
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const Vec x = random_normal(rng, 2);
        EXPECT_NEAR(P.eval(x), x.norm(), 1e-10);
    }
}

TEST(LatticePower, Composition)
{
    const auto X = LatticeNorm::custom(Mat::Identity(2, 2));
    const auto X4 = LatticeNorm::lp(2, 4);
    const double r = std::sqrt(2.0);
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const Vec x = random_normal(rng, 2);
        EXPECT_TRUE(close_rel(power(power(X4, r), r).eval(x), power(X4, 2).eval(x), kTolClosed));
        EXPECT_TRUE(close_rel(power(power(X, r), r).eval(x), power(X, 2).eval(x), kTolClosed));
    }
}

TEST(LatticeCalderon, L1LinfAtHalfIsL2)
{
    const auto X0 = LatticeNorm::lp(2, 1), X1 = LatticeNorm::lp(2, kInf);
    const auto C = calderon_product(X0, X1, 0.5);
    EXPECT_FALSE(C.closed_evaluator());
    ASSERT_TRUE(C.closed_form());
    EXPECT_DOUBLE_EQ(C.closed_form()->p, 2.0);
    const double numeric = C.eval(v({1, 1}));
    EXPECT_NEAR(numeric, std::sqrt(2.0), 1e-6);
    // brute-force scan confirms there is no better factorization
    EXPECT_GE(scan_calderon_2d(X0, X1, 0.5, v({1, 1})), numeric - 1e-9);
}

TEST(LatticeCalderon, EqualFactorsReturnTheNorm)
{
    const auto X = LatticeNorm::lp(3, 1.7);
    const auto C = LatticeNorm::custom((Mat(3, 2) << 1, 0.5, 0.2, 1, 1, 1).finished());
    Rng rng(4);
    for (double th : {0.2, 0.5, 0.9}) {
        const Vec f = random_normal(rng, 3);
        EXPECT_TRUE(close_rel(calderon_product(X, X, th).eval(f), X.eval(f), 1e-6));
        EXPECT_TRUE(close_rel(calderon_product(C, C, th).eval(f), C.eval(f), kTolOptim));
    }
}

TEST(LatticeCalderon, WeightedScalarCase)
{
    const auto X0 = LatticeNorm::weighted_lp(2, v({1})), X1 = LatticeNorm::weighted_lp(3, v({4}));
    const double scanned = scan_calderon_1d(1, 4, 0.5, 1.0);
    EXPECT_NEAR(scanned, 2.0, 1e-6);
    EXPECT_NEAR(calderon_product(X0, X1, 0.5).eval(v({1})), 2.0, 1e-8);
}

TEST(LatticeCalderon, MatchesClosedFormOnRandomPairs)
{
    Rng rng(21);
    std::uniform_real_distribution<double> up(1.0, 6.0), uw(0.3, 3.0), ut(0.05, 0.95);
    for (int t = 0; t < 30; ++t) {
        const Index n = 1 + t % 6;
        Vec w0(n), w1(n);
        for (Index i = 0; i < n; ++i) {
            w0[i] = uw(rng);
            w1[i] = uw(rng);
        }
        const double p0 = t % 5 == 0 ? kInf : up(rng);
        const double p1 = t % 7 == 0 ? 1.0 : up(rng);
        const double th = ut(rng);
        const auto C = calderon_product(LatticeNorm::weighted_lp(p0, w0),
                                        LatticeNorm::weighted_lp(p1, w1), th);
        Vec f = random_normal(rng, n);
        if (n > 2) f[1] = 0.0; // zero coordinates are restricted away
        const double want = weighted_lp_value(*C.closed_form(), f.cwiseAbs());
        const auto fac = C.calderon_factorize(f.cwiseAbs());
        EXPECT_TRUE(close_rel(fac.value, want, 1e-4)) << t << ": " << fac.value << " vs " << want;
        if (n > 2) {
            EXPECT_EQ(fac.g[1], 0.0);
            EXPECT_EQ(fac.h[1], 0.0);
        }
        // the reported factorization reproduces |f| and is balanced
        for (Index i = 0; i < n; ++i)
            EXPECT_NEAR(std::pow(fac.g[i], 1 - th) * std::pow(fac.h[i], th), std::abs(f[i]),
                        1e-9 * (1 + std::abs(f[i])));
        EXPECT_TRUE(close_rel(C.children()[0].eval(fac.g), C.children()[1].eval(fac.h), 1e-9));
    }
}

TEST(LatticeProperties, NormAxiomsOnSamples)
{
    const std::vector<LatticeNorm> norms = {
        LatticeNorm::lp(3, 1.0),
        LatticeNorm::lp(3, 4.0 / 3),
        LatticeNorm::weighted_lp(kInf, v({1, 2, 3})),
        LatticeNorm::custom((Mat(3, 3) << 1, 0, 2, 0, 1, 1, 1, 1, 0.5).finished()),
        power(LatticeNorm::lp(3, 4), 2.0),
        calderon_product(LatticeNorm::lp(3, 1), LatticeNorm::lp(3, 2), 0.5),
    };
    Rng rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& X : norms) {
        const bool optim_backed = X.kind() == LatticeNorm::Kind::Calderon;
        const double tol = optim_backed ? kTolOptim : kTolClosed;
        const int samples = optim_backed ? 100 : 1000;
        for (int t = 0; t < samples; ++t) {
            const Vec x = random_normal(rng, 3), y = random_normal(rng, 3);
            const double nx = X.eval(x), ny = X.eval(y);
            EXPECT_LE(X.eval(x + y), (nx + ny) * (1 + tol)) << X.describe();
            EXPECT_TRUE(close_rel(X.eval(-2.5 * x), 2.5 * nx, tol)) << X.describe();
            // |z| <= |x| coordinatewise
            Vec z = x;
            for (Index i = 0; i < 3; ++i) z[i] *= u(rng);
            EXPECT_LE(X.eval(z), nx * (1 + tol)) << X.describe();
        }
        for (Index i = 0; i < 3; ++i) EXPECT_GT(X.eval(Vec::Unit(3, i)), 0.0);
    }
}

TEST(LatticeConstants, ConcavityExamples)
{
    const auto l2 = LatticeNorm::lp(2, 2);
    EXPECT_DOUBLE_EQ(concavity2_ratio(l2, v({1, 0}).reshaped(2, 1)), 1.0);
    EXPECT_NEAR(concavity2_ratio(LatticeNorm::lp(2, kInf), Mat::Identity(2, 2)), std::sqrt(2.0), 1e-14);
    SearchBudget b;
    auto [val, wit] = concavity2_lower(LatticeNorm::lp(4, 1), b);
    EXPECT_LE(val, 1.0 + 1e-9);
    EXPECT_NEAR(concavity2_ratio(LatticeNorm::lp(4, 1), wit.vectors), wit.ratio, 1e-12);
    auto [vinf, winf] = concavity2_lower(LatticeNorm::lp(2, kInf), b);
    EXPECT_GE(vinf, std::sqrt(2.0) - 1e-12);
    EXPECT_THROW(concavity2_ratio(l2, Mat(2, 0)), DomainError);
    SearchBudget empty;
    empty.max_family = 0;
    EXPECT_THROW(concavity2_lower(l2, empty), DomainError);
}

TEST(LatticeConstants, ConvexityExamples)
{
    SearchBudget b;
    EXPECT_LE(convexity2_lower(LatticeNorm::lp(3, 2), b).first, 1.0 + 1e-9);
    EXPECT_NEAR(convexity2_ratio(LatticeNorm::lp(2, 1), Mat::Identity(2, 2)), std::sqrt(2.0), 1e-14);
    EXPECT_DOUBLE_EQ(convexity2_ratio(LatticeNorm::lp(2, 1), v({3, -1}).reshaped(2, 1)), 1.0);
}

TEST(LatticeConstants, SearchIsMonotoneInBudget)
{
    const auto X = LatticeNorm::custom((Mat(2, 2) << 1, 0.3, 0.2, 1).finished());
    double prev = 0.0;
    for (int starts : {1, 3, 6, 10}) {
        SearchBudget b;
        b.starts = starts;
        const double c = concavity2_lower(X, b).first;
        const double x = convexity2_lower(X, b).first;
        EXPECT_GE(c, prev);
        prev = c;
        EXPECT_GE(x, 1.0 - 1e-12);
    }
}

TEST(LatticeConstants, ConcavityInterpolates)
{
    ConstantsRegistry reg;
    SearchBudget b;
    b.starts = 4;
    auto r1 = concavity_interp_check(LatticeNorm::lp(3, 1), LatticeNorm::lp(3, 1), 0.4, b, reg);
    EXPECT_EQ(r1.status, Status::Pass);
    EXPECT_DOUBLE_EQ(r1.bound, 1.0);
    auto r2 = concavity_interp_check(LatticeNorm::lp(3, 1), LatticeNorm::lp(3, 2), 0.5, b, reg);
    EXPECT_EQ(r2.status, Status::Pass);
    EXPECT_LE(r2.best_ratio, 1.0 + 1e-3);
    auto r3 = concavity_interp_check(LatticeNorm::lp(2, 2), LatticeNorm::lp(2, 2), 0.3, b, reg);
    EXPECT_EQ(r3.status, Status::Pass);
    // l_4 has no 2-concavity bound: skipped, never passed
    auto r4 = concavity_interp_check(LatticeNorm::lp(2, 4), LatticeNorm::lp(2, 2), 0.3, b, reg);
    EXPECT_EQ(r4.status, Status::Skipped);
}

TEST(LatticeConstants, ConvexityCertificates)
{
    ConstantsRegistry reg;
    EXPECT_TRUE(has_unit_convexity(LatticeNorm::lp(2, 3), 2.0, reg));
    EXPECT_FALSE(has_unit_convexity(LatticeNorm::lp(2, 1.5), 2.0, reg));
    EXPECT_TRUE(has_unit_convexity(
        calderon_product(LatticeNorm::lp(2, 3), LatticeNorm::lp(2, 4), 0.5), 2.0, reg));
    EXPECT_TRUE(has_unit_convexity(LatticeNorm::custom(Mat::Identity(2, 2)), 1.0, reg));
}
