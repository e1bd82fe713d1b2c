#pragma once
//
// Verification suites.  Each suite expands the configuration into tasks;
// a task is a self-contained unit of work with its own derived seed and
// returns its records in a fixed order.
//

#include <chrono>
#include <functional>
#include <limits>

#include "cplxinterp/harness/config.hpp"

namespace cplxinterp::harness {

inline constexpr double kNoTheta = std::numeric_limits<double>::quiet_NaN();

struct CheckRecord
{
    std::string suite;
    std::string instance;
    double theta = kNoTheta;
    double lhs_lo = 0.0, lhs_hi = 0.0;
    double rhs_lo = 0.0, rhs_hi = 0.0;
    double margin = 0.0;
    Status status = Status::Pass;
    double seconds = 0.0;
    std::string note;
};

struct Task
{
    std::string suite;
    /// Unique within a run; also the source of the task seed.
    std::string key;
    std::function<std::vector<CheckRecord>(std::uint64_t seed)> run;
};

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"lemma4", "prop3", "cor6_7", "prop8", "theorem", "factorization"};
    return names;
}

inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Readable exponent: "inf", small fractions as "a/b", else decimal.
inline std::string p_label(double p)
{
    if (std::isinf(p)) return "inf";
    for (int b = 1; b <= 12; ++b) {
        const double a = p * b;
        if (std::abs(a - std::round(a)) < 1e-9) {
            const long long ai = std::llround(a);
            return b == 1 ? std::to_string(ai) : std::to_string(ai) + "/" + std::to_string(b);
        }
    }
    return fmt_num(p);
}

inline std::string pad(int i, int width = 2)
{
    std::string s = std::to_string(i);
    return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
}

namespace detail {

class Stopwatch
{
public:
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline CheckRecord record(const std::string& suite, const std::string& instance, double theta,
                          const Comparison& c, double seconds)
{
    return {suite, instance, theta, c.lhs_lo, c.lhs_hi, c.rhs_lo, c.rhs_hi, c.margin, c.status, seconds, c.note};
}

/// Two-sided check: FAIL only when the intervals are disjoint beyond tol.
inline Comparison compare_eq(double lhs_lo, double lhs_hi, double rhs_lo, double rhs_hi, double tol)
{
    Comparison c{lhs_lo, lhs_hi, rhs_lo, rhs_hi, 0.0, Status::Pass, ""};
    const double gap = std::max(lhs_lo - rhs_hi * (1 + tol), rhs_lo * (1 - tol) - lhs_hi);
    c.margin = -gap;
    if (gap > 1e-12) c.status = Status::Fail;
    return c;
}

/// A lower estimate against an optional upper bound.
inline Comparison estimate_vs_bound(double estimate, const std::optional<BoundLookup>& bound, bool exact,
                                    double tol)
{
    Comparison c;
    c.lhs_lo = estimate;
    c.lhs_hi = kInf;
    if (!bound) {
        c.status = Status::Skipped;
        c.note = "no proven bound for the constants involved";
        return c;
    }
    c = compare_le(estimate, kInf, bound->value, bound->value, tol);
    if (!bound->analytic || !exact) {
        c.note = !bound->analytic ? "bound uses declared non-analytic constants"
                                  : "interpolated space evaluated by the solver";
        if (c.status == Status::Fail) c.status = Status::Informational;
    }
    return c;
}

inline CMat random_matrix(Rng& rng, Index rows, Index cols)
{
    CMat Z(rows, cols);
    for (Index j = 0; j < cols; ++j) Z.col(j) = random_complex(rng, rows);
    return Z;
}

/// Samples with the first fifth rank one.
inline std::vector<CMat> sample_matrices(std::uint64_t seed, Index rows, Index cols, int count)
{
    std::vector<CMat> out;
    for (int s = 0; s < count; ++s) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
        if (s < count / 5) out.push_back(random_complex(rng, rows) * random_complex(rng, cols).transpose());
        else out.push_back(random_matrix(rng, rows, cols));
    }
    return out;
}

inline std::optional<BoundLookup> m2(const LatticeNorm& X, const ConstantsRegistry& reg)
{
    return lattice_bound(X, Quantity::M2Concavity, reg);
}

inline std::optional<BoundLookup> scaled(std::optional<BoundLookup> b, double factor)
{
    if (b) b->value *= factor;
    return b;
}

inline std::optional<BoundLookup> product(const std::optional<BoundLookup>& a, const std::optional<BoundLookup>& b,
                                          double ea = 1.0, double eb = 1.0)
{
    if (!a || !b) return std::nullopt;
    return combine(*a, *b, ea, eb);
}

/// M_(2)(X0)^{1-theta} M_(2)(X1)^theta.
inline std::optional<BoundLookup> m2_interp(const LatticeNorm& X0, const LatticeNorm& X1, double theta,
                                            const ConstantsRegistry& reg)
{
    return product(m2(X0, reg), m2(X1, reg), 1 - theta, theta);
}

/// The two-couple constant: 16 [(M X0 M Y0)^{1-theta} (M X1 M Y1)^theta]^{5/2} t[E] t[F].
inline std::optional<BoundLookup> pair_constant(const QuadInstance& q, double theta, const ConstantsRegistry& reg)
{
    auto a0 = product(m2(q.x0, reg), m2(q.y0, reg));
    auto a1 = product(m2(q.x1, reg), m2(q.y1, reg));
    auto m = product(a0, a1, 1 - theta, theta);
    auto te = t_theta(q.e0, q.e1, theta, q.e0.same_as(q.e1), reg);
    auto tf = t_theta(q.f0, q.f1, theta, q.f0.same_as(q.f1), reg);
    if (!m || !te || !tf) return std::nullopt;
    BoundLookup out = combine(combine(*m, *te, 2.5, 1.0), *tf);
    out.value *= 16.0;
    return out;
}

template <class F>
Task make_task(std::string suite, std::string key, F f)
{
    return {std::move(suite), std::move(key), std::function<std::vector<CheckRecord>(std::uint64_t)>(std::move(f))};
}

inline std::string theta_key(double theta) { return "t" + fmt_num(theta); }

} // namespace detail

// ---------------------------------------------------------------------------
// lemma4: diagonal operators, duality and powers of Calderon products

inline std::vector<Task> lemma4_tasks(const Config& cfg)
{
    using namespace detail;
    const std::string S = "lemma4";
    const auto& L = cfg.lemma4;
    const double tol = cfg.tol_equality;
    const ConstantsRegistry& reg = cfg.registry;
    std::vector<Task> out;
    for (double p : L.p) {
        for (Index n : L.dims) {
            const std::string id = "diag/l" + p_label(p) + "/n" + std::to_string(n);
            out.push_back(make_task(S, id, [=, &reg](std::uint64_t seed) {
                std::vector<CheckRecord> recs;
                const auto X = LatticeNorm::lp(n, p);
                Stopwatch sw;
                auto one = [&](const std::string& name, const Vec& lambda) {
                    const auto d = diag_norm_identity(lambda, X, reg);
                    Comparison c = compare_eq(d.lhs.lower, d.lhs.upper, d.rhs, d.rhs, tol);
                    if (c.status == Status::Pass && d.lhs.stagnated) c.status = Status::Stagnated;
                    recs.push_back(record(S, name, kNoTheta, c, sw.lap()));
                };
                if (p == 1.0 && n == 2) one(id + "/anchor", Vec::Ones(2));
                for (int s = 0; s < L.samples; ++s) {
                    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
                    one(id + "/s" + pad(s), random_normal(rng, n));
                }
                return recs;
            }));
        }
    }
    for (size_t a = 0; a < L.p.size(); ++a) {
        for (size_t b = a + 1; b < L.p.size(); ++b) {
            const double p0 = L.p[a], p1 = L.p[b];
            for (double theta : L.theta) {
                for (Index n : L.dims) {
                    const std::string pair = "l" + p_label(p0) + "-l" + p_label(p1) + "/n" + std::to_string(n);
                    out.push_back(make_task(S, "duality/" + pair + "/" + theta_key(theta), [=](std::uint64_t seed) {
                        std::vector<CheckRecord> recs;
                        const auto X0 = LatticeNorm::lp(n, p0), X1 = LatticeNorm::lp(n, p1);
                        DualOptions numeric;
                        numeric.force_numeric = true;
                        const auto lhs = dual(calderon_product(X0, X1, theta), numeric);
                        const auto rhs = calderon_product(dual(X0), dual(X1), theta);
                        Stopwatch sw;
                        for (int s = 0; s < L.samples; ++s) {
                            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
                            const Vec f = random_normal(rng, n);
                            const double l = lhs.eval(f), r = rhs.eval(f);
                            recs.push_back(record(S, "duality/" + pair + "/s" + pad(s), theta,
                                                  compare_eq(l, l, r, r, tol), sw.lap()));
                        }
                        return recs;
                    }));
                    for (double r : L.r) {
                        const std::string id = "power/" + pair + "/r" + fmt_num(r);
                        out.push_back(make_task(S, id + "/" + theta_key(theta), [=](std::uint64_t seed) {
                            std::vector<CheckRecord> recs;
                            const auto X0 = LatticeNorm::lp(n, p0), X1 = LatticeNorm::lp(n, p1);
                            const auto lhs = power(calderon_product(X0, X1, theta), r);
                            const auto rhs = calderon_product(power(X0, r), power(X1, r), theta);
                            Stopwatch sw;
                            for (int s = 0; s < L.samples; ++s) {
                                Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
                                const Vec f = random_normal(rng, n);
                                const double a = lhs.eval(f), b = rhs.eval(f);
                                recs.push_back(
                                    record(S, id + "/s" + pad(s), theta, compare_eq(a, a, b, b, tol), sw.lap()));
                            }
                            return recs;
                        }));
                    }
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// d_theta of vector-valued couples

inline std::vector<Task> prop3_tasks(const Config& cfg)
{
    using namespace detail;
    const std::string S = "prop3";
    const auto& C = cfg.prop3;
    const double tol = cfg.tol_inequality;
    const ConstantsRegistry& reg = cfg.registry;
    std::vector<Task> out;
    for (const auto& inst : C.instances) {
        for (double theta : C.theta) {
            for (Index k : C.k) {
                const std::string id = inst.id + "/k" + std::to_string(k);
                out.push_back(make_task(S, id + "/" + theta_key(theta), [=, &reg](std::uint64_t seed) {
                    Stopwatch sw;
                    const InterpCouple M(make_vector_valued(inst.x0, inst.e0), make_vector_valued(inst.x1, inst.e1));
                    DThetaBudget b = C.budget;
                    b.seed = seed;
                    const auto est = d_theta_estimate(M, theta, k, b);
                    const auto l2 = LatticeNorm::lp(inst.x0.dim(), 2.0);
                    std::optional<BoundLookup> dl2;
                    if (inst.e0.same_as(inst.e1)) dl2 = BoundLookup{1.0, true, "trivial couple"};
                    else
                        dl2 = kouba_rhs(dual_space(make_vector_valued(l2, inst.e0)),
                                        dual_space(make_vector_valued(l2, inst.e1)), theta, reg);
                    auto bound = scaled(product(product(cotype_interp_bound(inst.e0, inst.e1, theta, reg),
                                                        m2_interp(inst.x0, inst.x1, theta, reg)),
                                                dl2),
                                        std::sqrt(2.0));
                    return std::vector<CheckRecord>{record(
                        S, id, theta, estimate_vs_bound(est.value, bound, est.exact_denominator, tol), sw.lap())};
                }));
            }
        }
    }
    return out;
}

inline std::vector<Task> cor6_7_tasks(const Config& cfg)
{
    using namespace detail;
    const std::string S = "cor6_7";
    const auto& C = cfg.cor6_7;
    const double tol = cfg.tol_inequality;
    const ConstantsRegistry& reg = cfg.registry;
    std::vector<Task> out;
    for (const auto& inst : C.instances) {
        for (double theta : C.theta) {
            for (Index k : C.k) {
                const std::string id = inst.id + "/k" + std::to_string(k);
                out.push_back(make_task(S, id + "/" + theta_key(theta), [=, &reg](std::uint64_t seed) {
                    Stopwatch sw;
                    const auto F0 = make_vector_valued(inst.x0, inst.e0);
                    const auto F1 = make_vector_valued(inst.x1, inst.e1);
                    DThetaBudget b = C.budget;
                    b.seed = seed;
                    const auto est = d_theta_estimate(InterpCouple(F0, F1), theta, k, b);
                    const double secs = sw.lap();
                    const auto m = m2_interp(inst.x0, inst.x1, theta, reg);
                    std::vector<CheckRecord> recs;
                    auto emit = [&](const std::string& name, const std::optional<BoundLookup>& bound,
                                    const std::string& skip_note) {
                        Comparison c = estimate_vs_bound(est.value, bound, est.exact_denominator, tol);
                        if (!bound && !skip_note.empty()) c.note = skip_note;
                        recs.push_back(record(S, id + "/" + name, theta, c, secs));
                    };
                    if (inst.e0.same_as(inst.e1))
                        emit("same-fiber", scaled(product(m, space_bound(inst.e0, Quantity::C2, reg)), std::sqrt(2.0)),
                             "");
                    else
                        emit("same-fiber", std::nullopt, "fibers differ");
                    emit("dual-type",
                         scaled(product(m, kouba_rhs(dual_space(inst.e0), dual_space(inst.e1), theta, reg), 1.0, 2.0),
                                std::sqrt(2.0)),
                         "");
                    emit("type", kouba_rhs(F0, F1, theta, reg), "");
                    return recs;
                }));
            }
        }
    }
    for (Index n : C.l1l2_dims) {
        for (double theta : C.theta) {
            const std::string id = "l1-l2/n" + std::to_string(n);
            out.push_back(make_task(S, id + "/" + theta_key(theta), [=, &reg](std::uint64_t seed) {
                Stopwatch sw;
                const InterpCouple M(NormedSpace::from_lattice(LatticeNorm::lp(n, 1.0)),
                                     NormedSpace::from_lattice(LatticeNorm::lp(n, 2.0)));
                DThetaBudget b = C.budget;
                b.seed = seed;
                const auto est = d_theta_estimate(M, theta, n, b);
                return std::vector<CheckRecord>{record(
                    S, id, theta, estimate_vs_bound(est.value, d_theta_upper(M, theta, reg), est.exact_denominator, tol),
                    sw.lap())};
            }));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// two-couple constant

inline std::vector<Task> prop8_tasks(const Config& cfg)
{
    using namespace detail;
    const std::string S = "prop8";
    const auto& C = cfg.prop8;
    const double tol = cfg.tol_inequality;
    const ConstantsRegistry& reg = cfg.registry;
    std::vector<Task> out;
    for (const auto& inst : C.instances) {
        for (double theta : C.theta) {
            out.push_back(make_task(S, inst.id + "/" + theta_key(theta), [=, &reg](std::uint64_t seed) {
                Stopwatch sw;
                const auto bound = pair_constant(inst, theta, reg);
                if (!bound) {
                    Comparison c = estimate_vs_bound(0.0, std::nullopt, true, tol);
                    c.lhs_hi = 0.0;
                    return std::vector<CheckRecord>{record(S, inst.id, theta, c, sw.lap())};
                }
                const InterpCouple M(make_vector_valued(inst.x0, inst.e0), make_vector_valued(inst.x1, inst.e1));
                const InterpCouple N(make_vector_valued(inst.y0, inst.f0), make_vector_valued(inst.y1, inst.f1));
                DThetaBudget b = C.budget;
                b.seed = seed;
                const auto est = d_theta_pair_estimate(M, N, theta, b);
                return std::vector<CheckRecord>{
                    record(S, inst.id, theta, estimate_vs_bound(est.value, bound, est.exact_denominator, tol), sw.lap())};
            }));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// tensor interpolation and the contraction property

inline std::vector<Task> theorem_tasks(const Config& cfg)
{
    using namespace detail;
    const std::string S = "theorem";
    const auto& C = cfg.theorem;
    const double tol = cfg.tol_inequality;
    const ConstantsRegistry& reg = cfg.registry;
    std::vector<Task> out;
    for (const auto& inst : C.instances) {
        for (double theta : C.theta) {
            out.push_back(make_task(S, inst.id + "/" + theta_key(theta), [=, &reg](std::uint64_t seed) {
                Stopwatch sw;
                const InterpCouple M(make_vector_valued(inst.x0, inst.e0), make_vector_valued(inst.x1, inst.e1));
                const InterpCouple N(make_vector_valued(inst.y0, inst.f0), make_vector_valued(inst.y1, inst.f1));
                const auto Mt = interpolated_space(M, theta, C.interp);
                const auto Nt = interpolated_space(N, theta, C.interp);
                const InterpCouple Eps(injective_space(M.space(0), N.space(0)), injective_space(M.space(1), N.space(1)));
                const auto bound = pair_constant(inst, theta, reg);
                InterpParams p = C.interp;
                p.seed = seed;
                std::vector<CheckRecord> recs;
                const auto samples = sample_matrices(seed, M.dim(), N.dim(), C.samples);
                for (size_t s = 0; s < samples.size(); ++s) {
                    const CMat& Z = samples[s];
                    const CVec z = Eigen::Map<const CVec>(Z.data(), Z.size());
                    const auto eps = injective_norm(Z, Mt.space, Nt.space);
                    const auto iv = interp_norm(Eps, z, theta, p).interval;
                    const double secs = sw.lap();
                    const bool stagnated = eps.stagnated || iv.stagnated;
                    const bool exact = Mt.exact && Nt.exact;
                    const std::string tag = "/s" + pad(static_cast<int>(s));

                    Comparison lo = compare_le(eps.lower, eps.upper, iv.lower, iv.upper, tol);
                    if (!exact && lo.status == Status::Fail) lo.status = Status::Informational;
                    if (lo.status == Status::Pass && stagnated) lo.status = Status::Stagnated;
                    recs.push_back(record(S, inst.id + "/lower" + tag, theta, lo, secs));

                    Comparison up;
                    if (bound) {
                        up = compare_le(iv.lower, iv.upper, bound->value * eps.lower, bound->value * eps.upper, tol);
                        if ((!bound->analytic || !exact) && up.status == Status::Fail)
                            up.status = Status::Informational;
                        if (up.status == Status::Pass && stagnated) up.status = Status::Stagnated;
                    } else {
                        up.lhs_lo = iv.lower;
                        up.lhs_hi = iv.upper;
                        up.status = Status::Skipped;
                        up.note = "no proven bound for the constants involved";
                    }
                    recs.push_back(record(S, inst.id + "/upper" + tag, theta, up, 0.0));
                }
                return recs;
            }));
        }
    }
    for (const auto& inst : C.contraction) {
        for (double theta : C.theta) {
            out.push_back(make_task(S, "contraction/" + inst.id + "/" + theta_key(theta), [=](std::uint64_t seed) {
                Stopwatch sw;
                const InterpCouple M(inst.m0, inst.m1), N(inst.n0, inst.n1);
                InterpParams p = C.interp;
                p.seed = seed;
                const auto ops = sample_matrices(seed, N.dim(), M.dim(), C.contraction_samples);
                std::vector<CheckRecord> recs;
                const auto cmps = contraction_check(M, N, theta, ops, p, tol);
                const double secs = cmps.empty() ? 0.0 : sw.lap() / static_cast<double>(cmps.size());
                for (size_t s = 0; s < cmps.size(); ++s)
                    recs.push_back(record(S, "contraction/" + inst.id + "/s" + pad(static_cast<int>(s)), theta,
                                          cmps[s], secs));
                return recs;
            }));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// factorization checks and Rademacher averages

inline std::vector<Task> factorization_tasks(const Config& cfg)
{
    using namespace detail;
    const std::string S = "factorization";
    const auto& C = cfg.factorization;
    const double tol = cfg.tol_inequality;
    const ConstantsRegistry& reg = cfg.registry;
    std::vector<Task> out;
    for (const auto& inst : C.mr) {
        out.push_back(make_task(S, "mr/" + inst.id, [=, &reg](std::uint64_t seed) {
            std::vector<CheckRecord> recs;
            FactorBudget b = C.budget;
            b.seed = seed;
            const Index rows = inst.x.dim() * inst.e.dim();
            std::vector<std::pair<std::string, CMat>> maps{{"zero", CMat::Zero(rows, C.mr_cols)}};
            const auto samples = sample_matrices(seed, rows, C.mr_cols, C.mr_samples);
            for (size_t s = 0; s < samples.size(); ++s) maps.push_back({"s" + pad(static_cast<int>(s)), samples[s]});
            Stopwatch sw;
            for (const auto& [tag, T] : maps) {
                const auto f = maurey_rosenthal(T, inst.x, inst.e, b);
                const auto chk = mr_bound_check(f, inst.x, inst.e, reg, tol);
                const double secs = sw.lap();
                Comparison c{f.product_lower, f.product_upper, chk.bound, chk.bound, chk.margin, chk.status, chk.note};
                if (chk.status == Status::Skipped) c.rhs_lo = c.rhs_hi = c.margin = 0.0;
                recs.push_back(record(S, "mr/" + inst.id + "/" + tag, kNoTheta, c, secs));
                // the factorization can never beat the operator itself
                Comparison floor = compare_le(f.t_norm.lower, f.t_norm.upper, f.product_lower, f.product_upper, tol);
                if (floor.status == Status::Pass && (f.t_norm.stagnated || f.r_norm.stagnated))
                    floor.status = Status::Stagnated;
                recs.push_back(record(S, "mr/" + inst.id + "/floor/" + tag, kNoTheta, floor, 0.0));
            }
            return recs;
        }));
    }
    for (const auto& inst : C.lemma9) {
        for (double theta : C.theta) {
            out.push_back(make_task(S, "gamma2/" + inst.id + "/" + theta_key(theta), [=, &reg, &cfg](std::uint64_t seed) {
                Stopwatch sw;
                FactorBudget b = C.budget;
                b.seed = seed;
                const InterpCouple E(inst.m0, inst.m1), F(inst.n0, inst.n1);
                auto samples = sample_matrices(seed, F.dim(), E.dim(), C.lemma9_samples);
                samples.insert(samples.begin(), CMat::Zero(F.dim(), E.dim()));
                InterpParams p = cfg.interp;
                p.seed = seed;
                const auto rs = lemma9_check(E, F, theta, samples, b, reg, p, tol);
                const double secs = rs.empty() ? 0.0 : sw.lap() / static_cast<double>(rs.size());
                std::vector<CheckRecord> recs;
                for (size_t s = 0; s < rs.size(); ++s) {
                    const std::string tag = s == 0 ? "zero" : "s" + pad(static_cast<int>(s - 1));
                    recs.push_back(record(S, "gamma2/" + inst.id + "/" + tag, theta, rs[s].cmp, secs));
                }
                return recs;
            }));
        }
    }
    for (const auto& inst : C.lemma10) {
        out.push_back(make_task(S, "cotype/" + inst.id, [=, &reg](std::uint64_t seed) {
            Stopwatch sw;
            ConstantBudget b = C.constant_budget;
            b.seed = seed;
            const auto chk = lemma10_check(inst.x, inst.e, b, reg, tol);
            Comparison c{chk.estimate, kInf, chk.bound, chk.bound, chk.margin, chk.status, chk.note};
            return std::vector<CheckRecord>{record(S, "cotype/" + inst.id, kNoTheta, c, sw.lap())};
        }));
    }
    for (size_t i = 0; i < C.kahane_spaces.size(); ++i) {
        const NormedSpace E = C.kahane_spaces[i];
        for (int k : C.kahane_k) {
            const std::string id = "kahane/" + E.describe() + "/k" + std::to_string(k);
            out.push_back(make_task(S, id, [=](std::uint64_t seed) {
                Stopwatch sw;
                std::vector<CheckRecord> recs;
                for (int s = 0; s < C.kahane_families; ++s) {
                    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
                    const CMat family = random_matrix(rng, E.dim(), k);
                    const auto r = khinchine_kahane_check(family, E);
                    const double rhs = std::sqrt(2.0) * r.moment1;
                    Comparison c{r.moment2, r.moment2, rhs, rhs, r.slack, r.status, ""};
                    recs.push_back(record(S, id + "/s" + pad(s), kNoTheta, c, sw.lap()));
                }
                return recs;
            }));
        }
    }
    return out;
}

inline std::vector<Task> suite_tasks(const std::string& suite, const Config& cfg)
{
    if (suite == "lemma4") return lemma4_tasks(cfg);
    if (suite == "prop3") return prop3_tasks(cfg);
    if (suite == "cor6_7") return cor6_7_tasks(cfg);
    if (suite == "prop8") return prop8_tasks(cfg);
    if (suite == "theorem") return theorem_tasks(cfg);
    if (suite == "factorization") return factorization_tasks(cfg);
    throw DomainError("unknown suite '" + suite + "'");
}

} // namespace cplxinterp::harness
