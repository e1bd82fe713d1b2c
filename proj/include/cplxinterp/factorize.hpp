#pragma once
//
// Factorizations through Hilbert space: multiplier factorizations
// T = (M_g (x) id) R into X(E), and gamma_2 factorizations T = R S.
//

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cplxinterp/constants.hpp"
#include "cplxinterp/interp.hpp"
#include "cplxinterp/optim.hpp"
#include "cplxinterp/spaces.hpp"

namespace cplxinterp {

struct FactorBudget
{
    int restarts = 6;
    int iterations = 400;
    std::uint64_t seed = 0xfac7;
    /// Operator-norm options used inside the search.
    int inner_restarts = 2;
    OperatorNormOptions op{};
};

struct MRFactorization
{
    /// Positive multiplier on the atoms of X.
    Vec g;
    /// T with fiber k divided by g_k: a map l2^cols -> l2^n(E).
    CMat R;
    CertifiedInterval r_norm;
    /// ||D_g : l2^n -> X||.
    CertifiedInterval mg_norm;
    CertifiedInterval t_norm;
    double product_upper = 0.0;
    double product_lower = 0.0;
    /// Atoms on which T vanishes.
    std::vector<Index> dropped;
};

namespace detail {

inline CMat scale_fibers(const CMat& T, const Vec& s, Index m)
{
    CMat out = T;
    for (Index k = 0; k < s.size(); ++k) out.middleRows(k * m, m) *= s[k];
    return out;
}

} // namespace detail

/// Minimizes ||D_g : l2^n -> X|| * ||R|| over positive g for T : l2^k -> X(E).
inline MRFactorization maurey_rosenthal(const CMat& T, const LatticeNorm& X, const NormedSpace& E,
                                        const FactorBudget& b = {})
{
    const Index n = X.dim(), m = E.dim(), k = T.cols();
    require_dim(T.rows(), n * m, "maurey_rosenthal");
    require_finite(T.reshaped(), "maurey_rosenthal");
    const auto l2n = NormedSpace::euclidean(n, E.field());
    const auto l2k = NormedSpace::euclidean(k, E.field());
    const auto XE = make_vector_valued(X, E);
    const auto HE = make_vector_valued(LatticeNorm::lp(n, 2.0), E);
    const auto Xs = NormedSpace::from_lattice(X, E.field());

    MRFactorization out;
    out.t_norm = operator_norm(T, l2k, XE, b.op);
    out.g = Vec::Ones(n);
    if (T.cwiseAbs().maxCoeff() == 0.0) {
        out.R = T;
        out.r_norm.lower = out.r_norm.upper = 0.0;
        out.mg_norm = operator_norm(diag_matrix(out.g), l2n, Xs, b.op);
        return out;
    }
    Vec fiber(n);
    std::vector<Index> active;
    for (Index i = 0; i < n; ++i) {
        fiber[i] = T.middleRows(i * m, m).norm();
        if (fiber[i] > 0.0) active.push_back(i);
        else out.dropped.push_back(i);
    }
    const Index na = static_cast<Index>(active.size());
    const double floor_scale = 1e-12;

    OperatorNormOptions inner = b.op;
    inner.restarts = b.inner_restarts;
    auto build_g = [&](const Vec& u) {
        Vec g = Vec::Constant(n, 0.0);
        for (Index a = 0; a < na; ++a) g[active[static_cast<size_t>(a)]] = std::exp(u[a]);
        const double gmax = g.maxCoeff();
        for (Index i : out.dropped) g[i] = floor_scale * gmax;
        return g;
    };
    auto objective = [&](const Vec& u) {
        const Vec g = build_g(u);
        const CMat R = detail::scale_fibers(T, g.cwiseInverse(), m);
        const double r = operator_norm(R, l2k, HE, inner).lower;
        const double d = operator_norm(diag_matrix(g), l2n, Xs, inner).lower;
        return std::log(r) + std::log(d);
    };

    std::vector<Vec> starts;
    Vec logf(na);
    for (Index a = 0; a < na; ++a) logf[a] = std::log(fiber[active[static_cast<size_t>(a)]]);
    starts.push_back(Vec::Zero(na));
    starts.push_back(0.5 * logf);
    starts.push_back(logf / 3.0);
    for (int r = 3; r < b.restarts; ++r) {
        Rng rng(mix_seed(b.seed, static_cast<std::uint64_t>(r)));
        starts.push_back(0.5 * logf + 0.5 * random_normal(rng, na));
    }
    Vec best_u = starts[0];
    double best = kInf;
    for (const Vec& s : starts) {
        const double f0 = objective(s);
        if (f0 < best) {
            best = f0;
            best_u = s;
        }
        if (na < 2) continue;
        optim::NelderMeadOptions no;
        no.initial_step = 0.4;
        no.max_iter = b.iterations;
        const auto res = optim::nelder_mead(objective, s, no);
        if (res.value < best) {
            best = res.value;
            best_u = res.x;
        }
    }
    Vec g = build_g(best_u);
    // normalize so that ||D_g|| = ||R||
    {
        const CMat R = detail::scale_fibers(T, g.cwiseInverse(), m);
        const double r = operator_norm(R, l2k, HE, b.op).lower;
        const double d = operator_norm(diag_matrix(g), l2n, Xs, b.op).lower;
        g *= std::sqrt(r / d);
    }
    out.g = g;
    out.R = detail::scale_fibers(T, g.cwiseInverse(), m);
    out.r_norm = operator_norm(out.R, l2k, HE, b.op);
    out.mg_norm = operator_norm(diag_matrix(g), l2n, Xs, b.op);
    out.product_upper = out.r_norm.upper * out.mg_norm.upper;
    out.product_lower = out.r_norm.lower * out.mg_norm.lower;
    return out;
}

/// (M_g (x) id) R, which should reproduce T.
inline CMat mr_reconstruct(const MRFactorization& f, Index fiber_dim)
{
    return detail::scale_fibers(f.R, f.g, fiber_dim);
}

/// product <= sqrt(2) C2(E) M_(2)(X) ||T||.
inline BoundCheck mr_bound_check(const MRFactorization& f, const LatticeNorm& X, const NormedSpace& E,
                                 const ConstantsRegistry& reg, double tol = kTolOptim)
{
    BoundCheck r;
    r.estimate = f.product_lower;
    auto c = lemma10_bound(X, E, reg);
    if (!c) {
        r.note = "no declared bound for " + X.describe() + " or " + E.describe();
        return r;
    }
    r.bound = c->value * f.t_norm.upper;
    r.margin = r.bound * (1 + tol) + 1e-12 - f.product_lower;
    if (!c->analytic) r.status = Status::Informational;
    else r.status = r.margin >= 0 ? Status::Pass : Status::Fail;
    if (f.product_upper < f.t_norm.lower * (1 - tol)) {
        r.status = Status::Fail;
        r.note = "factorization norm below the norm of T";
    }
    return r;
}

// ---------------------------------------------------------------------------
// gamma_2

struct Gamma2Certificate
{
    /// T = R S with S : domain -> l2^r and R : l2^r -> codomain.
    CMat S;
    CMat R;
    double s_norm = 0.0;
    double r_norm = 0.0;
    double value = 0.0;
};

struct Gamma2Result
{
    CertifiedInterval interval;
    Gamma2Certificate certificate;
};

namespace detail {

/// Hermitian matrix from r^2 reals: upper triangle real parts, strictly
/// lower triangle imaginary parts.
inline CMat hermitian_from(const Vec& v, Index r, bool real)
{
    CMat H = CMat::Zero(r, r);
    Index o = 0;
    for (Index i = 0; i < r; ++i)
        for (Index j = i; j < r; ++j) {
            H(i, j) += v[o];
            if (j != i) H(j, i) += v[o];
            ++o;
        }
    if (!real)
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < i; ++j) {
                H(i, j) += Complex(0, v[o]);
                H(j, i) -= Complex(0, v[o]);
                ++o;
            }
    return H;
}

/// exp(H / 2) and its inverse for Hermitian H.
inline std::pair<CMat, CMat> half_exp(const CMat& H)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    const Vec e = (es.eigenvalues() / 2).array().exp().matrix();
    const CMat V = es.eigenvectors();
    return {V * e.cast<Complex>().asDiagonal() * V.adjoint(),
            V * e.cwiseInverse().cast<Complex>().asDiagonal() * V.adjoint()};
}

} // namespace detail

/// Upper bound for gamma_2(T) through factorizations of rank(T); lower
/// bound ||T||.
inline Gamma2Result gamma2_norm(const LinearMap& T, const FactorBudget& b = {})
{
    const CMat& M = T.matrix;
    Gamma2Result out;
    const auto op = operator_norm(T, b.op);
    out.interval.lower = op.lower;
    out.interval.lower_witness = op.lower_witness;
    if (M.cwiseAbs().maxCoeff() == 0.0) {
        out.interval.upper = 0.0;
        out.interval.exact = true;
        out.certificate.S = CMat::Zero(1, M.cols());
        out.certificate.R = CMat::Zero(M.rows(), 1);
        return out;
    }
    Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec sv = svd.singularValues();
    Index r = 0;
    while (r < sv.size() && sv[r] > 1e-12 * sv[0]) ++r;
    const Vec sh = sv.head(r).cwiseSqrt();
    const CMat A = svd.matrixU().leftCols(r) * sh.cast<Complex>().asDiagonal();
    const CMat B = sh.cast<Complex>().asDiagonal() * svd.matrixV().leftCols(r).adjoint();
    const bool real = T.domain.field() == Field::Real && M.imag().cwiseAbs().maxCoeff() == 0.0;
    const auto l2r = NormedSpace::euclidean(r, T.domain.field());
    const Index nv = real ? r * (r + 1) / 2 : r * r;

    OperatorNormOptions inner = b.op;
    inner.restarts = b.inner_restarts;
    auto factors = [&](const Vec& v) {
        const auto [W, Wi] = detail::half_exp(detail::hermitian_from(v, r, real));
        return std::pair<CMat, CMat>{A * W, Wi * B};
    };
    auto objective = [&](const Vec& v) {
        const auto [R, S] = factors(v);
        return std::log(operator_norm(R, l2r, T.codomain, inner).lower) +
               std::log(operator_norm(S, T.domain, l2r, inner).lower);
    };
    Vec best_v = Vec::Zero(nv);
    double best = objective(best_v);
    bool stagnated = false;
    for (int s = 0; s < b.restarts; ++s) {
        Vec start = Vec::Zero(nv);
        if (s > 0) {
            Rng rng(mix_seed(b.seed, static_cast<std::uint64_t>(s)));
            start = 0.7 * random_normal(rng, nv);
        }
        optim::NelderMeadOptions no;
        no.initial_step = 0.3;
        no.max_iter = b.iterations;
        const auto res = optim::nelder_mead(objective, start, no);
        if (res.value < best) {
            best = res.value;
            best_v = res.x;
            stagnated = !res.converged;
        }
    }
    auto [R, S] = factors(best_v);
    const auto rn = operator_norm(R, l2r, T.codomain, b.op);
    const auto sn = operator_norm(S, T.domain, l2r, b.op);
    // balance the two factors
    const double c = std::sqrt(rn.upper / sn.upper);
    out.certificate.R = R / c;
    out.certificate.S = S * c;
    out.certificate.r_norm = rn.upper / c;
    out.certificate.s_norm = sn.upper * c;
    out.certificate.value = rn.upper * sn.upper;
    out.interval.upper = std::max(out.certificate.value, op.upper);
    out.interval.upper_witness = std::nullopt;
    out.interval.stagnated = stagnated;
    out.interval.exact = rn.exact && sn.exact && op.exact &&
                         out.interval.upper <= out.interval.lower * (1 + 1e-12);
    return out;
}

// ---------------------------------------------------------------------------
// d_theta upper bounds from proven estimates

/// Upper bound for d_theta of a couple from the lattice estimates (2-concavity
/// and cotype data) or from type 2 data; nullopt if none applies.
inline std::optional<BoundLookup> d_theta_upper(const InterpCouple& c, double theta,
                                                const ConstantsRegistry& reg)
{
    require_theta(theta);
    if (c.trivial()) return BoundLookup{1.0, true, "trivial couple"};
    std::optional<BoundLookup> best;
    auto take = [&](std::optional<BoundLookup> b) {
        if (b && (!best || b->value < best->value || (b->analytic && !best->analytic))) best = b;
    };
    using K = NormedSpace::Kind;
    auto lattice_of = [](const NormedSpace& s) -> std::optional<LatticeNorm> {
        if (s.kind() == K::Lattice) return s.lattice();
        if (s.kind() == K::Euclidean) return LatticeNorm::lp(s.dim(), 2.0);
        return std::nullopt;
    };
    const NormedSpace& s0 = c.space(0);
    const NormedSpace& s1 = c.space(1);
    auto concavity = [&](const LatticeNorm& X0, const LatticeNorm& X1) -> std::optional<BoundLookup> {
        auto m0 = lattice_bound(X0, Quantity::M2Concavity, reg);
        auto m1 = lattice_bound(X1, Quantity::M2Concavity, reg);
        if (!m0 || !m1) return std::nullopt;
        BoundLookup m = combine(*m0, *m1, 1 - theta, theta);
        m.value *= std::sqrt(2.0);
        return m;
    };
    auto l0 = lattice_of(s0), l1 = lattice_of(s1);
    if (l0 && l1) take(concavity(*l0, *l1));
    if (s0.kind() == K::VectorValued && s1.kind() == K::VectorValued && s0.blocks() == s1.blocks()) {
        auto m = concavity(s0.lattice(), s1.lattice());
        if (m) {
            if (s0.inner().same_as(s1.inner())) {
                if (auto c2 = space_bound(s0.inner(), Quantity::C2, reg)) take(combine(*m, *c2));
            }
            if (auto t = kouba_rhs(dual_space(s0.inner()), dual_space(s1.inner()), theta, reg))
                take(combine(*m, *t, 1.0, 2.0));
        }
    }
    take(kouba_rhs(s0, s1, theta, reg));
    return best;
}

struct Lemma9Record
{
    Comparison cmp;
    double gamma2_upper = 0.0;
};

/// ||T|| in [Gamma2(E0',F0), Gamma2(E1',F1)]_theta against
/// d_theta[E] d_theta[F] gamma2(T : [E0,E1]'_theta -> [F0,F1]_theta).
/// The left side is bounded below through the operator couple, which is
/// dominated by the Gamma2 couple.
inline std::vector<Lemma9Record> lemma9_check(const InterpCouple& E, const InterpCouple& F, double theta,
                                              const std::vector<CMat>& samples, const FactorBudget& b,
                                              const ConstantsRegistry& reg, const InterpParams& p = {},
                                              double tol = kTolOptim)
{
    const auto Et = interpolated_space(E, theta, p);
    const auto Ft = interpolated_space(F, theta, p);
    const NormedSpace dom = dual_space(Et.space);
    const InterpCouple L(operator_space(dual_space(E.space(0)), F.space(0), b.op),
                         operator_space(dual_space(E.space(1)), F.space(1), b.op));
    const auto dE = d_theta_upper(E, theta, reg);
    const auto dF = d_theta_upper(F, theta, reg);
    std::vector<Lemma9Record> out;
    for (const CMat& T : samples) {
        require_dim(T.rows(), F.dim(), "lemma9_check rows");
        require_dim(T.cols(), E.dim(), "lemma9_check cols");
        Lemma9Record rec;
        const auto op = operator_norm(T, dom, Ft.space, b.op);
        const CVec t = Eigen::Map<const CVec>(T.data(), T.size());
        const double lhs_lo = std::max(op.lower, detail::operator_couple_lower(L, t, theta));
        const auto g = gamma2_norm(LinearMap(T, dom, Ft.space), b);
        rec.gamma2_upper = g.interval.upper;
        // log-convexity of the Gamma2 couple
        const double g0 = gamma2_norm(LinearMap(T, dual_space(E.space(0)), F.space(0)), b).interval.upper;
        const double g1 = gamma2_norm(LinearMap(T, dual_space(E.space(1)), F.space(1)), b).interval.upper;
        const double lhs_hi = std::pow(g0, 1 - theta) * std::pow(g1, theta);
        if (!dE || !dF) {
            rec.cmp.lhs_lo = lhs_lo;
            rec.cmp.status = Status::Skipped;
            rec.cmp.note = "no proven d_theta bound";
        } else {
            const double rhs = dE->value * dF->value * g.interval.upper;
            rec.cmp = compare_le(lhs_lo, lhs_hi, rhs, rhs, tol);
            if (!dE->analytic || !dF->analytic || !Et.exact || !Ft.exact) {
                rec.cmp.note = "bound not analytic or interpolated space approximate";
                if (rec.cmp.status == Status::Fail) rec.cmp.status = Status::Informational;
            }
        }
        rec.cmp.lhs_hi = lhs_hi;
        out.push_back(rec);
    }
    return out;
}

} // namespace cplxinterp
