#pragma once
//
// Rademacher averages, type 2 / cotype 2 estimates, and the composite
// bounds built from declared constants.
//

#include <cmath>
#include <optional>
#include <string>

#include "cplxinterp/interval.hpp"
#include "cplxinterp/lattice.hpp"
#include "cplxinterp/optim.hpp"
#include "cplxinterp/spaces.hpp"

namespace cplxinterp {

/// Largest family averaged exactly over all sign patterns.
inline constexpr int kMaxEnumeration = 14;

struct RademacherResult
{
    double value = 0.0;
    /// Zero for exact enumeration.
    double std_error = 0.0;
    bool exact = true;
};

struct RademacherOptions
{
    int mc_samples = 20000;
    std::uint64_t seed = 0x7ade;
};

/// Average of ||sum_i eps_i x_i|| (moment 1) or its root mean square
/// (moment 2) over independent signs; x_i are the columns of the family.
inline RademacherResult rademacher_average(const CMat& family, const NormedSpace& E, int moment,
                                           const RademacherOptions& opt = {})
{
    if (moment != 1 && moment != 2) throw DomainError("rademacher_average: moment must be 1 or 2");
    if (family.cols() < 1) throw DomainError("rademacher_average: empty family");
    require_dim(family.rows(), E.dim(), "rademacher_average");
    require_finite(family.reshaped(), "rademacher_average");
    const Index k = family.cols();
    RademacherResult out;
    if (k <= kMaxEnumeration) {
        // eps_1 = +1 by symmetry; walk the remaining signs in Gray-code order
        const std::uint64_t count = std::uint64_t{1} << (k - 1);
        CVec s = family.rowwise().sum();
        std::vector<int> sign(static_cast<size_t>(k), 1);
        double acc = 0.0;
        for (std::uint64_t g = 0; g < count; ++g) {
            if (g > 0) {
                const int bit = __builtin_ctzll(g) + 1;
                s -= 2.0 * sign[static_cast<size_t>(bit)] * family.col(bit);
                sign[static_cast<size_t>(bit)] = -sign[static_cast<size_t>(bit)];
            }
            const double v = E.norm(s);
            acc += moment == 1 ? v : v * v;
        }
        acc /= static_cast<double>(count);
        out.value = moment == 1 ? acc : std::sqrt(acc);
        return out;
    }
    out.exact = false;
    Rng rng(opt.seed);
    std::bernoulli_distribution coin;
    double sum = 0.0, sumsq = 0.0;
    const int m = std::max(opt.mc_samples, 2);
    for (int t = 0; t < m; ++t) {
        CVec s = CVec::Zero(family.rows());
        for (Index i = 0; i < k; ++i) s += (coin(rng) ? 1.0 : -1.0) * family.col(i);
        const double v = E.norm(s);
        const double q = moment == 1 ? v : v * v;
        sum += q;
        sumsq += q * q;
    }
    const double mean = sum / m;
    const double var = std::max(sumsq / m - mean * mean, 0.0) * m / (m - 1);
    const double se = std::sqrt(var / m);
    if (moment == 1) {
        out.value = mean;
        out.std_error = se;
    } else {
        out.value = std::sqrt(mean);
        out.std_error = mean > 0 ? se / (2 * out.value) : 0.0;
    }
    return out;
}

inline double sum_sq_norms(const CMat& family, const NormedSpace& E)
{
    double s = 0.0;
    for (Index i = 0; i < family.cols(); ++i) {
        const double v = E.norm(family.col(i));
        s += v * v;
    }
    return std::sqrt(s);
}

/// (sum ||x_i||^2)^{1/2} / (E ||sum eps_i x_i||^2)^{1/2}.
inline double cotype2_ratio(const CMat& family, const NormedSpace& E, const RademacherOptions& opt = {})
{
    const double den = rademacher_average(family, E, 2, opt).value;
    return den > 0 ? sum_sq_norms(family, E) / den : 0.0;
}

/// (E ||sum eps_i x_i||^2)^{1/2} / (sum ||x_i||^2)^{1/2}.
inline double type2_ratio(const CMat& family, const NormedSpace& E, const RademacherOptions& opt = {})
{
    const double den = sum_sq_norms(family, E);
    return den > 0 ? rademacher_average(family, E, 2, opt).value / den : 0.0;
}

struct ConstantBudget
{
    int max_family = 4;
    /// Random starts per family size.
    int starts = 4;
    int iterations = 300;
    std::uint64_t seed = 0xc0de;
};

struct ConstantEstimate
{
    double value = 0.0;
    CMat witness;
};

namespace detail {

template <class Ratio>
ConstantEstimate rademacher_search(const NormedSpace& E, const ConstantBudget& b, Ratio ratio)
{
    if (b.max_family < 1) throw DomainError("constant search needs max_family >= 1");
    if (b.max_family > kMaxEnumeration) throw DomainError("constant search: family too large to enumerate");
    const Index n = E.dim();
    const bool real = E.field() == Field::Real;
    ConstantEstimate best;
    best.witness = CMat::Zero(n, 1);
    best.witness(0, 0) = 1.0;
    best.value = ratio(best.witness);
    auto consider = [&](const CMat& fam) {
        const double r = ratio(fam);
        if (std::isfinite(r) && r > best.value) {
            best.value = r;
            best.witness = fam;
        }
    };
    auto unpack = [&](const Vec& v, Index k) {
        CMat fam(n, k);
        for (Index j = 0; j < k; ++j)
            for (Index i = 0; i < n; ++i) {
                const Index o = j * n + i;
                fam(i, j) = real ? Complex(v[o], 0) : Complex(v[o], v[n * k + o]);
            }
        return fam;
    };
    for (Index k = 1; k <= b.max_family; ++k) {
        if (k <= n) consider(CMat::Identity(n, n).leftCols(k));
        for (int s = 0; s < b.starts; ++s) {
            Rng rng(mix_seed(b.seed, static_cast<std::uint64_t>(1000 * k + s)));
            const Vec start = random_normal(rng, (real ? 1 : 2) * n * k);
            consider(unpack(start, k));
            if (b.iterations <= 0) continue;
            auto obj = [&](const Vec& v) {
                const double r = ratio(unpack(v, k));
                return std::isfinite(r) ? -r : 0.0;
            };
            optim::NelderMeadOptions no;
            no.initial_step = 0.3;
            no.max_iter = b.iterations;
            consider(unpack(optim::nelder_mead(obj, start, no).x, k));
        }
    }
    return best;
}

} // namespace detail

/// Lower bound for the cotype 2 constant with a witnessing family.
inline ConstantEstimate cotype2_lower(const NormedSpace& E, const ConstantBudget& b = {})
{
    return detail::rademacher_search(E, b, [&](const CMat& f) { return cotype2_ratio(f, E); });
}

/// Lower bound for the type 2 constant with a witnessing family.
inline ConstantEstimate type2_lower(const NormedSpace& E, const ConstantBudget& b = {})
{
    return detail::rademacher_search(E, b, [&](const CMat& f) { return type2_ratio(f, E); });
}

struct KahaneReport
{
    double moment1 = 0.0;
    double moment2 = 0.0;
    /// sqrt(2) * moment1 - moment2.
    double slack = 0.0;
    Status status = Status::Pass;
};

/// (E||sum eps_i x_i||^2)^{1/2} <= sqrt(2) E||sum eps_i x_i||.
inline KahaneReport khinchine_kahane_check(const CMat& family, const NormedSpace& E,
                                           const RademacherOptions& opt = {})
{
    KahaneReport r;
    const auto m1 = rademacher_average(family, E, 1, opt);
    const auto m2 = rademacher_average(family, E, 2, opt);
    r.moment1 = m1.value;
    r.moment2 = m2.value;
    r.slack = std::sqrt(2.0) * m1.value - m2.value;
    if (!m1.exact) r.status = Status::Informational;
    else if (r.slack < -1e-12 * std::max(1.0, m2.value)) r.status = Status::Fail;
    return r;
}

// ---------------------------------------------------------------------------
// declared bounds for spaces

/// Bounds forced by the space itself; nullopt when nothing is known.
inline std::optional<BoundLookup> analytic_space_bound(const NormedSpace& E, Quantity q)
{
    if (q != Quantity::T2 && q != Quantity::C2) return std::nullopt;
    using K = NormedSpace::Kind;
    if (E.kind() == K::Euclidean || E.dim() == 1)
        return BoundLookup{1.0, true, "Hilbert space (parallelogram identity)"};
    std::optional<WeightedLp> lp;
    if (E.kind() == K::Lattice) lp = E.lattice().closed_form();
    if (lp) {
        if (lp->p == 2.0) return BoundLookup{1.0, true, "weighted l2 is a Hilbert space"};
        if (q == Quantity::C2 && lp->p >= 1.0 && lp->p <= 2.0)
            return BoundLookup{std::sqrt(2.0), true,
                               "Khinchine inequality with constant 2^{-1/2} and 2-concavity of l_p, p<=2"};
    }
    return std::nullopt;
}

/// Registry entry (keyed by the space description) or analytic bound.
inline std::optional<BoundLookup> space_bound(const NormedSpace& E, Quantity q, const ConstantsRegistry& reg)
{
    if (auto e = reg.find(E.describe(), q)) return BoundLookup{e->value, e->analytic, e->provenance};
    if (E.kind() == NormedSpace::Kind::Lattice)
        if (auto e = registry_find(reg, E.lattice(), q)) return BoundLookup{e->value, e->analytic, e->provenance};
    // l2(F) has the (moment 2) type and cotype constants of F, by Fubini
    if ((q == Quantity::T2 || q == Quantity::C2) && E.kind() == NormedSpace::Kind::VectorValued) {
        const auto lp = E.lattice().closed_form();
        if (lp && lp->p == 2.0) {
            auto inner = space_bound(E.inner(), q, reg);
            if (inner) inner->provenance = "l2 sum of: " + inner->provenance;
            return inner;
        }
    }
    return analytic_space_bound(E, q);
}

/// T2(F0)^{1-theta} T2(F1)^theta.
inline std::optional<BoundLookup> kouba_rhs(const NormedSpace& F0, const NormedSpace& F1, double theta,
                                            const ConstantsRegistry& reg)
{
    require_theta(theta);
    auto a = space_bound(F0, Quantity::T2, reg), b = space_bound(F1, Quantity::T2, reg);
    if (!a || !b) return std::nullopt;
    return combine(*a, *b, 1 - theta, theta);
}

/// Upper bound for C2([E0,E1]_theta): C2(E) for a trivial couple, otherwise
/// T2(E0')^{1-theta} T2(E1')^theta.
inline std::optional<BoundLookup> cotype_interp_bound(const NormedSpace& E0, const NormedSpace& E1,
                                                      double theta, const ConstantsRegistry& reg)
{
    require_theta(theta);
    std::optional<BoundLookup> best;
    if (E0.same_as(E1)) best = space_bound(E0, Quantity::C2, reg);
    auto viaDual = kouba_rhs(dual_space(E0), dual_space(E1), theta, reg);
    if (viaDual && (!best || viaDual->value < best->value)) best = viaDual;
    return best;
}

/// sqrt(2) M_(2)(X) C2(E).
inline std::optional<BoundLookup> lemma10_bound(const LatticeNorm& X, const NormedSpace& E,
                                                const ConstantsRegistry& reg)
{
    auto m = lattice_bound(X, Quantity::M2Concavity, reg);
    auto c = space_bound(E, Quantity::C2, reg);
    if (!m || !c) return std::nullopt;
    BoundLookup out = combine(*m, *c);
    out.value *= std::sqrt(2.0);
    return out;
}

struct BoundCheck
{
    Status status = Status::Skipped;
    double estimate = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    CMat witness;
    std::string note;
};

/// Cotype 2 witnesses in X(E) against the vector-valued cotype bound.
inline BoundCheck lemma10_check(const LatticeNorm& X, const NormedSpace& E, const ConstantBudget& b,
                                const ConstantsRegistry& reg, double tol = kTolOptim)
{
    BoundCheck r;
    auto bound = lemma10_bound(X, E, reg);
    if (!bound) {
        r.note = "no declared bound for " + X.describe() + " or " + E.describe();
        return r;
    }
    const auto est = cotype2_lower(make_vector_valued(X, E), b);
    r.estimate = est.value;
    r.witness = est.witness;
    r.bound = bound->value;
    r.margin = r.bound * (1 + tol) - r.estimate;
    if (!bound->analytic) r.status = Status::Informational;
    else r.status = r.margin >= 0 ? Status::Pass : Status::Fail;
    return r;
}

/// C2(G)^{5/2} for G0 = G1, else (T2(G0')^{1-theta} T2(G1')^theta)^{7/2}.
inline std::optional<BoundLookup> t_theta(const NormedSpace& G0, const NormedSpace& G1, double theta,
                                          bool same_space, const ConstantsRegistry& reg)
{
    require_theta(theta);
    if (same_space) {
        auto c = space_bound(G0, Quantity::C2, reg);
        if (!c) return std::nullopt;
        return BoundLookup{std::pow(c->value, 2.5), c->analytic, c->provenance};
    }
    auto k = kouba_rhs(dual_space(G0), dual_space(G1), theta, reg);
    if (!k) return std::nullopt;
    return BoundLookup{std::pow(k->value, 3.5), k->analytic, k->provenance};
}

} // namespace cplxinterp
