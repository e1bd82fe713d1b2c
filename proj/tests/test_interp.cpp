#include <gtest/gtest.h>

#include "cplxinterp/interp.hpp"
#include "test_helpers.hpp"

using namespace cplxinterp;
using testutil::close_rel;
using testutil::v;

namespace {

NormedSpace lp_space(Index n, double p) { return NormedSpace::from_lattice(LatticeNorm::lp(n, p)); }

CVec cv(const Vec& x) { return x.cast<Complex>(); }

InterpParams fast_params()
{
    InterpParams p;
    p.degree = 4;
    p.grid = 48;
    p.restarts = 2;
    p.max_iter = 80;
    return p;
}

// Calderon value of the lp couple by direct formula 1/p = (1-t)/p0 + t/p1.
double lp_interp(const Vec& a, double p0, double p1, double t)
{
    const double inv = (1 - t) / p0 + t / p1;
    if (inv == 0.0) return a.cwiseAbs().maxCoeff();
    const double p = 1 / inv;
    return std::pow(a.cwiseAbs().array().pow(p).sum(), 1 / p);
}

} // namespace

TEST(Conformal, ThetaGoesToCentreAndEdgesSplitTheCircle)
{
    for (double t : {0.2, 0.5, 0.8}) {
        EXPECT_LT(std::abs(conformal::to_disk(Complex(t, 0), t)), 1e-14);
        for (double y : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
            for (int j = 0; j < 2; ++j) {
                const Complex w = conformal::to_disk(Complex(j, y), t);
                EXPECT_NEAR(std::abs(w), 1.0, 1e-12);
                EXPECT_EQ(conformal::edge_of_angle(std::arg(w), t), j);
                const Complex z = conformal::to_strip(w, t);
                EXPECT_NEAR(z.real(), double(j), 1e-9);
                EXPECT_NEAR(z.imag(), y, 1e-9);
            }
        }
        const Complex zi(0.3, 0.4);
        EXPECT_LT(std::abs(conformal::to_strip(conformal::to_disk(zi, t), t) - zi), 1e-12);
        EXPECT_LT(std::abs(conformal::to_disk(zi, t)), 1.0);
    }
}

TEST(InterpUpper, EqualCoupleUsesConstantCandidate)
{
    const auto S = lp_space(3, 1.5);
    const InterpCouple c(S, S);
    const CVec x = cv(v({1.0, -2.0, 0.5}));
    const auto r = interp_upper(c, x, 0.4, fast_params());
    EXPECT_LE(r.value, S.norm(x) * (1 + 1e-9));
    EXPECT_EQ(r.candidate.coeffs.front(), x);
}

TEST(InterpUpper, LogConvexityBound)
{
    Rng rng(17);
    const std::vector<std::pair<double, double>> pairs{{1, 2}, {1, kInf}, {1.5, 4}, {2, kInf}};
    for (auto [p0, p1] : pairs) {
        const InterpCouple c(lp_space(3, p0), lp_space(3, p1));
        for (double t : {0.25, 0.5}) {
            const CVec x = random_complex(rng, 3);
            const double lc = std::pow(c.space(0).norm(x), 1 - t) * std::pow(c.space(1).norm(x), t);
            const auto r = interp_upper(c, x, t, fast_params());
            EXPECT_LE(r.value, lc * (1 + 1e-9));
        }
    }
}

TEST(InterpUpper, L1LinfAtOnesApproachesSqrt2)
{
    const InterpCouple c(lp_space(2, 1.0), lp_space(2, kInf));
    InterpParams p;
    const auto r = interp_upper(c, cv(v({1, 1})), 0.5, p);
    EXPECT_TRUE(close_rel(r.value, std::sqrt(2.0), 0.05)) << r.value;
    EXPECT_GE(r.value, std::sqrt(2.0) * (1 - 1e-9));
}

TEST(InterpUpper, NonAbsoluteCoupleImprovesWithDegree)
{
    // a rotated l1 ball against l2: phases are not isometries of the first space
    Mat R(2, 2);
    R << 1, 1, -1, 1;
    R /= std::sqrt(2.0);
    const auto l1 = lp_space(2, 1.0);
    auto rot = NormedSpace::custom(
        2, [l1, R](const CVec& x) { return l1.norm(R.cast<Complex>() * x); },
        [l1, R](const CVec& y) { return l1.dual_norm(R.cast<Complex>() * y); }, "rot-l1");
    const InterpCouple c(rot, lp_space(2, 2.0));
    const CVec x = cv(v({1.0, 0.3}));
    double prev = kInf;
    for (int d : {0, 1, 2, 4}) {
        InterpParams p = fast_params();
        p.degree = d;
        const double u = interp_upper(c, x, 0.5, p).value;
        EXPECT_LE(u, prev * (1 + 1e-12)) << "degree " << d;
        prev = u;
    }
}

TEST(InterpUpper, WitnessRecomputes)
{
    Rng rng(5);
    const InterpCouple c(lp_space(3, 1.0), lp_space(3, 3.0));
    const CVec x = random_complex(rng, 3);
    const auto r = interp_upper(c, x, 0.3, fast_params());
    EXPECT_TRUE(close_rel(recompute_upper(c, r.candidate), r.value, 1e-8));
    EXPECT_LT((eval_candidate(r.candidate, Complex(0.3, 0)) - x).norm(), 1e-10 * x.norm());
}

TEST(InterpLower, Examples)
{
    const InterpCouple c(lp_space(2, 1.0), lp_space(2, kInf));
    EXPECT_EQ(interp_lower(c, CVec::Zero(2), 0.5).value, 0.0);
    const auto r = interp_lower(c, cv(v({1, 0})), 0.5, fast_params());
    EXPECT_TRUE(close_rel(r.value, 1.0, 0.05)) << r.value;

    const auto S = lp_space(3, 3.0);
    const CVec x = cv(v({0.5, -1.0, 2.0}));
    const auto e = interp_lower(InterpCouple(S, S), x, 0.6, fast_params());
    EXPECT_GE(e.value, S.norm(x) * (1 - 1e-9));
}

TEST(InterpNorm, L1L2ContainsL43)
{
    Rng rng(11);
    const InterpCouple c(lp_space(3, 1.0), lp_space(3, 2.0));
    for (int s = 0; s < 3; ++s) {
        const CVec x = random_complex(rng, 3);
        const auto r = interp_norm(c, x, 0.5);
        const double want = lp_interp(x.cwiseAbs(), 1, 2, 0.5);
        EXPECT_TRUE(r.interval.contains(want, 1e-6))
            << r.interval.lower << " " << want << " " << r.interval.upper;
        ASSERT_TRUE(r.calderon.has_value());
        EXPECT_TRUE(close_rel(*r.calderon, want, 1e-8));
        ASSERT_TRUE(r.calderon_closed.has_value());
        EXPECT_TRUE(close_rel(*r.calderon_closed, want, 1e-12));
        EXPECT_TRUE(r.oracle_inside);
        EXPECT_LE(r.interval.lower, r.interval.upper);
    }
}

TEST(InterpNorm, EqualCoupleIsTight)
{
    const auto S = lp_space(3, 1.5);
    const CVec x = cv(v({1.0, 2.0, -0.5}));
    const auto r = interp_norm(InterpCouple(S, S), x, 0.5, fast_params());
    const double n = S.norm(x);
    EXPECT_GE(r.interval.lower, n * (1 - 1e-6));
    EXPECT_LE(r.interval.upper, n * (1 + 1e-6));
}

TEST(InterpNorm, WeightedOneDimensional)
{
    const InterpCouple c(NormedSpace::from_lattice(LatticeNorm::weighted_lp(1.0, v({1}))),
                         NormedSpace::from_lattice(LatticeNorm::weighted_lp(1.0, v({4}))));
    const auto r = interp_norm(c, cv(v({1})), 0.5, fast_params());
    EXPECT_TRUE(r.interval.contains(2.0, 1e-9));
    EXPECT_LT(r.interval.width(), 1e-8);
}

TEST(InterpNorm, RandomLatticeCouplesContainOracle)
{
    Rng rng(23);
    Mat gens(3, 4);
    gens << 1, 0, 0.5, 0.2, 0, 1, 0.5, 0.3, 0.4, 0.2, 0.1, 1;
    const std::vector<LatticeNorm> lats{LatticeNorm::lp(3, 1.0), LatticeNorm::lp(3, 4.0),
                                        LatticeNorm::weighted_lp(2.0, v({1, 3, 0.5})),
                                        LatticeNorm::custom(gens)};
    int inside = 0, total = 0;
    for (size_t a = 0; a < lats.size(); ++a) {
        for (size_t b = 0; b < lats.size(); ++b) {
            if (a == b) continue;
            const InterpCouple c(NormedSpace::from_lattice(lats[a]), NormedSpace::from_lattice(lats[b]));
            const CVec x = random_complex(rng, 3);
            const auto r = interp_norm(c, x, 0.4, fast_params());
            ++total;
            if (r.oracle_inside || r.interval.stagnated) ++inside;
            EXPECT_LE(r.interval.lower, r.interval.upper);
        }
    }
    EXPECT_EQ(inside, total);
}

TEST(InterpNorm, LowerWitnessRecomputes)
{
    const InterpCouple c(lp_space(3, 1.0), lp_space(3, 2.0));
    const CVec x = cv(v({1.0, 0.5, -0.25}));
    InterpParams p = fast_params();
    const auto r = interp_norm(c, x, 0.5, p);
    const double again = lower_from_functional(c, x, r.interval.lower_witness, 0.5, p, true);
    EXPECT_TRUE(close_rel(again, r.interval.lower, 1e-8));
    ASSERT_TRUE(r.interval.upper_witness.has_value());
    EXPECT_TRUE(close_rel(recompute_upper(c, *r.interval.upper_witness), r.interval.upper, 1e-8));
}

TEST(InterpNorm, ThetaToZeroApproachesFirstEndpoint)
{
    const InterpCouple c(lp_space(3, 1.0), lp_space(3, kInf));
    const CVec x = cv(v({1.0, 2.0, 0.5}));
    const double n0 = c.space(0).norm(x);
    double prev_gap = kInf;
    for (double t : {0.1, 0.05, 0.01}) {
        const auto r = interp_norm(c, x, t, fast_params()).interval;
        const double gap = std::abs(r.mid() - n0);
        EXPECT_LE(gap, prev_gap + r.width());
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 0.05 * n0);
}

TEST(InterpNorm, ZeroVector)
{
    const InterpCouple c(lp_space(2, 1.0), lp_space(2, 2.0));
    const auto r = interp_norm(c, CVec::Zero(2), 0.5);
    EXPECT_EQ(r.interval.lower, 0.0);
    EXPECT_EQ(r.interval.upper, 0.0);
}

TEST(InterpNorm, RejectsBadTheta)
{
    const InterpCouple c(lp_space(2, 1.0), lp_space(2, 2.0));
    EXPECT_THROW(interp_norm(c, CVec::Ones(2), 1.5), DomainError);
    EXPECT_THROW(interp_norm(c, CVec::Ones(2), 0.0), DomainError);
    EXPECT_THROW(InterpCouple(lp_space(2, 1.0), lp_space(3, 1.0)), DimensionError);
}

TEST(InterpolatedSpace, LatticeAndVectorValued)
{
    const auto s = interpolated_space(InterpCouple(lp_space(3, 1.0), lp_space(3, 2.0)), 0.5);
    EXPECT_TRUE(s.exact);
    const CVec x = cv(v({1, 2, 3}));
    EXPECT_TRUE(close_rel(s.space.norm(x), lp_interp(v({1, 2, 3}), 1, 2, 0.5), 1e-9));

    const auto vv0 = make_vector_valued(LatticeNorm::lp(2, 1.0), lp_space(2, 2.0));
    const auto vv1 = make_vector_valued(LatticeNorm::lp(2, kInf), lp_space(2, 2.0));
    const auto t = interpolated_space(InterpCouple(vv0, vv1), 0.5);
    EXPECT_TRUE(t.exact);
    const CVec y = cv(v({1, -2, 0.5, 3}));
    EXPECT_TRUE(close_rel(t.space.norm(y), y.norm(), 1e-9));
}

TEST(VectorValuedCalderon, Examples)
{
    Rng rng(3);
    std::vector<CVec> samples{random_complex(rng, 4), random_complex(rng, 4)};
    // l1(l2) and linf(l2) interpolate to l2(l2)
    auto r = vector_valued_calderon_check(LatticeNorm::lp(2, 1.0), LatticeNorm::lp(2, kInf),
                                          lp_space(2, 2.0), lp_space(2, 2.0), 0.5, samples,
                                          fast_params());
    for (const auto& c : r) {
        EXPECT_NE(c.status, Status::Fail);
        EXPECT_TRUE(close_rel(c.rhs_hi, c.rhs_lo, 1e-9));
    }
    // equal everything collapses
    r = vector_valued_calderon_check(LatticeNorm::lp(2, 3.0), LatticeNorm::lp(2, 3.0), lp_space(2, 1.0),
                                     lp_space(2, 1.0), 0.5, samples, fast_params());
    for (size_t i = 0; i < r.size(); ++i) {
        const double n = make_vector_valued(LatticeNorm::lp(2, 3.0), lp_space(2, 1.0)).norm(samples[i]);
        EXPECT_TRUE(close_rel(r[i].lhs_hi, n, 1e-6));
        EXPECT_TRUE(close_rel(r[i].rhs_hi, n, 1e-9));
    }
    // scalar fibers: plain lattice check
    const CVec z = random_complex(rng, 3);
    r = vector_valued_calderon_check(LatticeNorm::lp(3, 1.0), LatticeNorm::lp(3, 2.0), lp_space(1, 1.0),
                                     lp_space(1, 1.0), 0.5, {z}, fast_params());
    EXPECT_NE(r[0].status, Status::Fail);
    // fibers that differ
    r = vector_valued_calderon_check(LatticeNorm::lp(2, 2.0), LatticeNorm::lp(2, 2.0), lp_space(2, 1.0),
                                     lp_space(2, kInf), 0.5, samples, fast_params());
    for (const auto& c : r) EXPECT_NE(c.status, Status::Fail);
}

TEST(Contraction, Examples)
{
    Rng rng(8);
    const auto a = lp_space(2, 1.0), b = lp_space(2, 3.0);
    CMat T(2, 2);
    T << Complex(1, 0.5), 2, -1, Complex(0, 1);
    // trivial couples: ||T|| <= ||T||
    auto r = contraction_check(InterpCouple(a, a), InterpCouple(b, b), 0.5, {T}, fast_params());
    EXPECT_EQ(r[0].status, Status::Pass);
    EXPECT_TRUE(close_rel(r[0].lhs_hi, r[0].rhs_hi, 1e-3));
    // zero operator
    r = contraction_check(InterpCouple(a, b), InterpCouple(b, a), 0.5, {CMat::Zero(2, 2)}, fast_params());
    EXPECT_EQ(r[0].lhs_hi, 0.0);
    EXPECT_NE(r[0].status, Status::Fail);
    // diagonal maps between lp couples
    CMat D = CMat::Zero(2, 2);
    D(0, 0) = 2.0;
    D(1, 1) = Complex(0, -0.5);
    r = contraction_check(InterpCouple(lp_space(2, 1.0), lp_space(2, 2.0)),
                          InterpCouple(lp_space(2, 2.0), lp_space(2, kInf)), 0.5, {D, T}, fast_params());
    for (const auto& c : r) {
        EXPECT_NE(c.status, Status::Fail);
        EXPECT_GE(c.margin, -1e-3 * c.rhs_hi);
    }
}

TEST(DTheta, EqualCoupleIsOne)
{
    DThetaBudget b;
    b.samples = 6;
    b.local_steps = 2;
    b.interp = fast_params();
    const auto S = lp_space(2, 1.0);
    const auto e = d_theta_estimate(InterpCouple(S, S), 0.5, 2, b);
    EXPECT_GE(e.value, 1 - 1e-3);
    EXPECT_LE(e.value, 1 + 1e-3);
}

TEST(DTheta, L1L2IsAtLeastOne)
{
    DThetaBudget b;
    b.samples = 8;
    b.local_steps = 3;
    b.interp = fast_params();
    const auto e = d_theta_estimate(InterpCouple(lp_space(2, 1.0), lp_space(2, 2.0)), 0.5, 2, b);
    EXPECT_GE(e.value, 1 - 1e-3);
    // a crude ceiling: sqrt 2 (C2 of l1) times the identity bound
    EXPECT_LE(e.value, 2.0);
    EXPECT_EQ(e.witness.rows(), 2);
}

TEST(DTheta, PairEstimates)
{
    DThetaBudget b;
    b.samples = 6;
    b.local_steps = 2;
    b.interp = fast_params();
    const auto l2 = lp_space(2, 2.0);
    const auto triv = d_theta_pair_estimate(InterpCouple(l2, l2), InterpCouple(l2, l2), 0.5, b);
    EXPECT_NEAR(triv.value, 1.0, 1e-3);
    const auto e = d_theta_pair_estimate(InterpCouple(lp_space(2, 1.0), l2), InterpCouple(l2, l2), 0.5, b);
    EXPECT_GE(e.value, 1 - 1e-3);
    EXPECT_LE(e.value, 2.0);
}
