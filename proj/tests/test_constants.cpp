#include <gtest/gtest.h>

#include "cplxinterp/constants.hpp"
#include "test_helpers.hpp"

using namespace cplxinterp;
using testutil::close_rel;
using testutil::v;

namespace {

NormedSpace lp_space(Index n, double p) { return NormedSpace::from_lattice(LatticeNorm::lp(n, p)); }

CMat random_family(Rng& rng, Index n, Index k)
{
    CMat F(n, k);
    for (Index j = 0; j < k; ++j) F.col(j) = random_complex(rng, n);
    return F;
}

// Direct average over all 2^k patterns, without the symmetry reduction.
double brute_average(const CMat& F, const NormedSpace& E, int moment)
{
    const Index k = F.cols();
    double acc = 0.0;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m) {
        CVec s = CVec::Zero(F.rows());
        for (Index i = 0; i < k; ++i) s += ((m >> i) & 1 ? -1.0 : 1.0) * F.col(i);
        const double x = E.norm(s);
        acc += moment == 1 ? x : x * x;
    }
    acc /= double(std::uint64_t{1} << k);
    return moment == 1 ? acc : std::sqrt(acc);
}

ConstantsRegistry declared(const std::string& key, Quantity q, double value)
{
    ConstantsRegistry r;
    r.declare(key, q, {value, "test", true});
    return r;
}

} // namespace

TEST(Rademacher, Examples)
{
    const CVec x = v({1, -2, 0.5}).cast<Complex>();
    for (int m : {1, 2})
        EXPECT_TRUE(close_rel(rademacher_average(CMat(x), lp_space(3, 1.5), m).value, lp_space(3, 1.5).norm(x), 1e-14));
    const CMat I2 = CMat::Identity(2, 2);
    EXPECT_TRUE(close_rel(rademacher_average(I2, lp_space(2, 2.0), 2).value, std::sqrt(2.0), 1e-14));
    EXPECT_TRUE(close_rel(rademacher_average(I2, lp_space(2, 1.0), 1).value, 2.0, 1e-14));
    EXPECT_THROW(rademacher_average(I2, lp_space(2, 1.0), 3), DomainError);
}

TEST(Rademacher, GrayCodeMatchesBruteForce)
{
    Rng rng(4);
    for (Index k : {1, 3, 6, 9}) {
        const CMat F = random_family(rng, 3, k);
        const auto E = lp_space(3, 1.3);
        for (int m : {1, 2})
            EXPECT_TRUE(close_rel(rademacher_average(F, E, m).value, brute_average(F, E, m), 1e-12));
    }
}

TEST(Rademacher, MonteCarloAgreesWithEnumeration)
{
    Rng rng(6);
    const auto E = lp_space(3, 1.0);
    const CMat F = random_family(rng, 3, 16);
    const auto mc = rademacher_average(F, E, 2);
    EXPECT_FALSE(mc.exact);
    EXPECT_GT(mc.std_error, 0.0);
    const double exact = brute_average(F, E, 2);
    EXPECT_LE(std::abs(mc.value - exact), 3 * mc.std_error);
}

TEST(Cotype, EuclideanRatiosAtMostOne)
{
    ConstantBudget b;
    b.starts = 2;
    b.iterations = 100;
    const auto c = cotype2_lower(NormedSpace::euclidean(3), b);
    EXPECT_NEAR(c.value, 1.0, 1e-9);
    const auto t = type2_lower(NormedSpace::euclidean(3), b);
    EXPECT_NEAR(t.value, 1.0, 1e-9);
}

TEST(Cotype, LinfUnitVectors)
{
    // signs (+,+),(+,-) give norm 1, so the ratio is sqrt 2 exactly
    EXPECT_TRUE(close_rel(cotype2_ratio(CMat::Identity(2, 2), lp_space(2, kInf)), std::sqrt(2.0), 1e-14));
}

TEST(Cotype, BudgetMonotone)
{
    const auto E = lp_space(3, 1.0);
    double prev = 0.0;
    for (int k = 1; k <= 3; ++k) {
        ConstantBudget b;
        b.max_family = k;
        b.starts = 2;
        b.iterations = 80;
        const double c = cotype2_lower(E, b).value;
        EXPECT_GE(c, prev);
        prev = c;
    }
    EXPECT_LE(prev, std::sqrt(2.0) * (1 + 1e-9));
}

TEST(Type, Examples)
{
    EXPECT_TRUE(close_rel(type2_ratio(CMat::Identity(2, 2), lp_space(2, 1.0)), std::sqrt(2.0), 1e-14));
    ConstantBudget empty;
    empty.max_family = 1;
    empty.starts = 0;
    EXPECT_EQ(type2_lower(lp_space(3, 1.0), empty).value, 1.0);
}

TEST(Kahane, Examples)
{
    const CVec x = v({1, 2}).cast<Complex>();
    auto r = khinchine_kahane_check(CMat(x), lp_space(2, 3.0));
    EXPECT_TRUE(close_rel(r.slack, (std::sqrt(2.0) - 1) * lp_space(2, 3.0).norm(x), 1e-12));
    r = khinchine_kahane_check(CMat::Identity(2, 2), lp_space(2, 2.0));
    EXPECT_TRUE(close_rel(r.moment2, std::sqrt(2.0), 1e-14));
    EXPECT_EQ(r.status, Status::Pass);

    Rng rng(12);
    Mat gens(3, 3);
    gens << 1, 0.3, 0.2, 0.1, 1, 0.5, 0.4, 0.2, 1;
    const auto E = NormedSpace::from_lattice(LatticeNorm::custom(gens));
    for (int s = 0; s < 5; ++s) EXPECT_EQ(khinchine_kahane_check(random_family(rng, 3, 10), E).status, Status::Pass);
}

TEST(Registry, SpaceBounds)
{
    const ConstantsRegistry none;
    EXPECT_EQ(space_bound(NormedSpace::euclidean(3), Quantity::T2, none)->value, 1.0);
    EXPECT_EQ(space_bound(lp_space(3, 1.0), Quantity::C2, none)->value, std::sqrt(2.0));
    EXPECT_FALSE(space_bound(lp_space(3, 1.0), Quantity::T2, none).has_value());
    EXPECT_FALSE(space_bound(lp_space(3, kInf), Quantity::C2, none).has_value());
}

TEST(TypeInterpBound, Examples)
{
    const ConstantsRegistry none;
    const auto l2 = NormedSpace::euclidean(3);
    EXPECT_EQ(kouba_rhs(l2, l2, 0.3, none)->value, 1.0);
    ConstantsRegistry r;
    r.declare(lp_space(2, 1.0).describe(), Quantity::T2, {3.0, "test", true});
    r.declare(lp_space(2, 4.0).describe(), Quantity::T2, {5.0, "test", true});
    EXPECT_TRUE(close_rel(kouba_rhs(lp_space(2, 1.0), lp_space(2, 4.0), 0.5, r)->value, std::sqrt(15.0), 1e-14));
    EXPECT_FALSE(kouba_rhs(lp_space(2, 1.0), lp_space(2, 4.0), 0.5, none).has_value());
}

TEST(CotypeInterp, Examples)
{
    const ConstantsRegistry none;
    const auto l2 = NormedSpace::euclidean(2);
    EXPECT_EQ(cotype_interp_bound(l2, l2, 0.5, none)->value, 1.0);
    // duals carry T2 bounds sqrt 2 and 1
    const auto a = lp_space(2, 4.0), b = lp_space(2, 2.0);
    ConstantsRegistry r = declared(dual_space(a).describe(), Quantity::T2, std::sqrt(2.0));
    EXPECT_TRUE(close_rel(cotype_interp_bound(a, b, 0.5, r)->value, std::pow(2.0, 0.25), 1e-14));
}

TEST(CotypeInterp, EstimatorBelowBound)
{
    // (l1, l2): the C2 entries of l1 and of the interpolated l_{4/3} space
    const auto X = calderon_product(LatticeNorm::lp(2, 1.0), LatticeNorm::lp(2, 2.0), 0.5);
    ConstantBudget b;
    b.starts = 2;
    b.iterations = 150;
    const double est = cotype2_lower(NormedSpace::from_lattice(X), b).value;
    const auto bound = space_bound(NormedSpace::from_lattice(X), Quantity::C2, {});
    ASSERT_TRUE(bound.has_value());
    EXPECT_LE(est, bound->value * (1 + 1e-3));
}

TEST(VectorValuedCotype, Examples)
{
    const ConstantsRegistry none;
    EXPECT_TRUE(close_rel(lemma10_bound(LatticeNorm::lp(2, 2.0), NormedSpace::euclidean(2), none)->value,
                          std::sqrt(2.0), 1e-14));
    ConstantBudget b;
    b.max_family = 3;
    b.starts = 1;
    b.iterations = 120;
    auto r = lemma10_check(LatticeNorm::lp(2, 2.0), NormedSpace::euclidean(2), b, none);
    EXPECT_EQ(r.status, Status::Pass);
    EXPECT_LE(r.estimate, 1 + 1e-9);

    r = lemma10_check(LatticeNorm::lp(3, 1.0), lp_space(2, 1.0), b, none);
    EXPECT_TRUE(close_rel(r.bound, 2.0, 1e-14));
    EXPECT_EQ(r.status, Status::Pass);

    // one-dimensional fiber
    r = lemma10_check(LatticeNorm::lp(3, 1.5), lp_space(1, 1.0), b, none);
    EXPECT_TRUE(close_rel(r.bound, std::sqrt(2.0), 1e-14));
    EXPECT_EQ(r.status, Status::Pass);

    r = lemma10_check(LatticeNorm::lp(2, 4.0), lp_space(2, 1.0), b, none);
    EXPECT_EQ(r.status, Status::Skipped);
}

TEST(TTheta, Examples)
{
    const ConstantsRegistry none;
    const auto l2 = NormedSpace::euclidean(2);
    EXPECT_EQ(t_theta(l2, l2, 0.5, true, none)->value, 1.0);
    EXPECT_TRUE(close_rel(t_theta(lp_space(2, 1.0), lp_space(2, 1.0), 0.5, true, none)->value,
                          std::pow(2.0, 1.25), 1e-14));
    const auto a = lp_space(2, 4.0);
    ConstantsRegistry r = declared(dual_space(a).describe(), Quantity::T2, std::sqrt(2.0));
    EXPECT_TRUE(close_rel(t_theta(l2, a, 0.5, false, r)->value, std::pow(2.0, 7.0 / 8), 1e-14));
    EXPECT_FALSE(t_theta(l2, a, 0.5, false, none).has_value());
}
