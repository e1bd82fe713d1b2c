#pragma once
//
// Finite-dimensional lattice norms on R^n and the constructions built from
// them: Koethe duals, powers X^r, Calderon products X0^{1-theta} X1^theta,
// plus lower-bound searches for the 2-concavity / 2-convexity constants.
//
// Every norm is immutable once constructed and evaluators are pure, so a
// LatticeNorm may be shared freely between threads.
//

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cplxinterp/common.hpp"
#include "cplxinterp/registry.hpp"

namespace cplxinterp {

/// Closed form ||x|| = ||w . x||_p (p may be < 1 for powers, then only a quasi-norm).
struct WeightedLp
{
    double p = 2.0;
    Vec w;
};

inline double conjugate_exponent(double p)
{
    if (p <= 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

inline double inv_exponent(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

inline double weighted_lp_value(const WeightedLp& f, const Vec& a)
{
    double m = 0.0;
    for (Index i = 0; i < a.size(); ++i) m = std::max(m, f.w[i] * a[i]);
    if (m == 0.0 || std::isinf(f.p)) return m;
    double s = 0.0;
    for (Index i = 0; i < a.size(); ++i) s += std::pow(f.w[i] * a[i] / m, f.p);
    return m * std::pow(s, 1.0 / f.p);
}

/// A norming functional (gradient) of the weighted l_p norm at a >= 0.
inline Vec weighted_lp_gradient(const WeightedLp& f, const Vec& a)
{
    const Index n = a.size();
    Vec g = Vec::Zero(n);
    const double nv = weighted_lp_value(f, a);
    if (nv == 0.0) {
        // any functional in the dual ball is a subgradient at 0
        return g;
    }
    if (std::isinf(f.p)) {
        std::vector<Index> top;
        for (Index i = 0; i < n; ++i)
            if (f.w[i] * a[i] >= nv * (1 - 1e-12)) top.push_back(i);
        for (Index i : top) g[i] = f.w[i] / static_cast<double>(top.size());
        return g;
    }
    if (f.p == 1.0) return f.w;
    for (Index i = 0; i < n; ++i) {
        if (a[i] == 0.0) continue;
        g[i] = f.w[i] * std::pow(f.w[i] * a[i] / nv, f.p - 1.0);
    }
    return g;
}

namespace detail {

struct LpSolution
{
    double value = 0.0;
    Vec y;
    bool unbounded = false;
};

/// Dense simplex for  max c.y  s.t.  M y <= 1, y >= 0  (Bland's rule).
inline LpSolution simplex_unit_rhs(const Mat& M, const Vec& c)
{
    const Index m = M.rows(), n = M.cols();
    Mat T = Mat::Zero(m + 1, n + m + 1);
    T.block(0, 0, m, n) = M;
    T.block(0, n, m, m).setIdentity();
    T.col(n + m).head(m).setOnes();
    T.row(m).head(n) = -c.transpose();
    std::vector<Index> basis(static_cast<size_t>(m));
    for (Index i = 0; i < m; ++i) basis[static_cast<size_t>(i)] = n + i;
    const double eps = 1e-12;
    LpSolution out;
    for (int iter = 0; iter < 10000; ++iter) {
        Index enter = -1;
        for (Index j = 0; j < n + m; ++j)
            if (T(m, j) < -eps) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        Index leave = -1;
        double best = kInf;
        for (Index i = 0; i < m; ++i) {
            if (T(i, enter) > eps) {
                const double r = T(i, n + m) / T(i, enter);
                if (r < best - 1e-15 ||
                    (std::abs(r - best) <= 1e-15 && leave >= 0 &&
                     basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
                    best = r;
                    leave = i;
                }
            }
        }
        if (leave < 0) {
            out.unbounded = true;
            out.value = kInf;
            return out;
        }
        T.row(leave) /= T(leave, enter);
        for (Index i = 0; i <= m; ++i)
            if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
        basis[static_cast<size_t>(leave)] = enter;
    }
    out.y = Vec::Zero(n);
    for (Index i = 0; i < m; ++i)
        if (basis[static_cast<size_t>(i)] < n) out.y[basis[static_cast<size_t>(i)]] = T(i, n + m);
    out.value = T(m, n + m);
    return out;
}

} // namespace detail

enum class NormedStatus { Normed, UnverifiedNormed };

struct CalderonOptions
{
    int starts = 8;
    std::uint64_t seed = 0xca1de7;
    /// Evaluate through the closed form when both factors are weighted l_p.
    /// Off by default: the numeric infimum is the evaluator, the closed form
    /// an oracle.
    bool prefer_closed_form = false;
    int max_iter = 400;
};

struct DualOptions
{
    int starts = 4;
    std::uint64_t seed = 0xd0a1;
    /// Ignore closed forms and maximize over the unit ball.
    bool force_numeric = false;
};

class LatticeNorm;
LatticeNorm dual(const LatticeNorm& X, const DualOptions& opt = {});
LatticeNorm power(const LatticeNorm& X, double r);
LatticeNorm calderon_product(const LatticeNorm& X0, const LatticeNorm& X1, double theta,
                             const CalderonOptions& opt = {});

/// Result of the Calderon infimum: |f| = g^{1-theta} h^theta with
/// ||g||_0 = ||h||_1 = value.
struct CalderonFactorization
{
    double value = 0.0;
    Vec g;
    Vec h;
    bool converged = true;
};

class LatticeNorm
{
public:
    enum class Kind { WeightedLp, Custom, Dual, Power, Calderon };

    static LatticeNorm lp(Index n, double p) { return weighted_lp(p, Vec::Ones(n)); }

    static LatticeNorm weighted_lp(double p, Vec w)
    {
        if (w.size() < 1) throw DomainError("lattice dimension must be positive");
        if (!(p >= 1.0)) throw DomainError("l_p family requires p >= 1");
        for (Index i = 0; i < w.size(); ++i)
            if (!(w[i] > 0.0) || !std::isfinite(w[i]))
                throw DomainError("weights must be positive and finite");
        auto node = std::make_shared<Node>();
        node->kind = Kind::WeightedLp;
        node->dim = w.size();
        const bool unweighted = (w.array() == 1.0).all();
        node->closed = WeightedLp{p, std::move(w)};
        node->closed_eval = true;
        node->desc = (unweighted ? "lp(" : "wlp(") + fmt_exponent(p) + ",n=" +
                     std::to_string(node->dim) + (unweighted ? "" : ",w=" + fmt_vec(node->closed->w)) +
                     ")";
        return LatticeNorm(std::move(node));
    }

    /// Unit ball = solid convex hull of the given points (columns, n x m).
    static LatticeNorm custom(const Mat& generators)
    {
        if (generators.rows() < 1 || generators.cols() < 1)
            throw DomainError("custom lattice needs at least one generator");
        require_finite(generators.reshaped(), "custom lattice generators");
        Mat a = generators.cwiseAbs();
        for (Index i = 0; i < a.rows(); ++i)
            if (a.row(i).maxCoeff() <= 0.0)
                throw DomainError("custom lattice: coordinate " + std::to_string(i) +
                                  " is not covered by any generator");
        auto node = std::make_shared<Node>();
        node->kind = Kind::Custom;
        node->dim = a.rows();
        node->generators = std::move(a);
        node->desc = "custom(n=" + std::to_string(node->dim) +
                     ",m=" + std::to_string(node->generators.cols()) + ")";
        return LatticeNorm(std::move(node));
    }

    Index dim() const { return node_->dim; }
    Kind kind() const { return node_->kind; }
    const std::string& describe() const { return node_->desc; }
    NormedStatus normed_status() const { return node_->status; }

    /// Closed form of this lattice when one is known (used as an oracle).
    const std::optional<WeightedLp>& closed_form() const { return node_->closed; }
    /// True when eval() goes through the closed form.
    bool closed_evaluator() const { return node_->closed_eval; }

    const std::vector<LatticeNorm>& children() const { return node_->children; }
    double exponent_r() const { return node_->r; }
    double theta() const { return node_->theta; }
    const Mat& generators() const { return node_->generators; }

    double eval(const Vec& x) const
    {
        require_dim(x.size(), dim(), "eval_norm");
        require_finite(x, "eval_norm");
        return eval_abs(x.cwiseAbs());
    }

    /// Norm of a coordinatewise nonnegative vector (no validation).
    double eval_abs(const Vec& a) const;

    /// A norming functional y >= 0 at a >= 0: <y, a> = ||a||, ||y||_{X'} <= 1.
    Vec gradient_abs(const Vec& a) const;

    /// Sup of <a, y> over the unit ball (nonnegative y), with the maximizer.
    double dual_eval_abs(const Vec& y, Vec* argmax = nullptr) const;

    CalderonFactorization calderon_factorize(const Vec& f_abs) const;

private:
    struct Node
    {
        Kind kind = Kind::WeightedLp;
        Index dim = 0;
        std::optional<WeightedLp> closed;
        bool closed_eval = false;
        NormedStatus status = NormedStatus::Normed;
        std::string desc;
        Mat generators;
        std::vector<LatticeNorm> children;
        double r = 1.0;
        double theta = 0.5;
        CalderonOptions copt;
        DualOptions dopt;
    };

    explicit LatticeNorm(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static std::string fmt_exponent(double p) { return std::isinf(p) ? "inf" : fmt_num(p); }
    static std::string fmt_vec(const Vec& v)
    {
        std::string s = "[";
        for (Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + fmt_num(v[i]);
        return s + "]";
    }

    double dual_numeric(const Vec& y, Vec* argmax) const;

    friend LatticeNorm dual(const LatticeNorm&, const DualOptions&);
    friend LatticeNorm power(const LatticeNorm&, double);
    friend LatticeNorm calderon_product(const LatticeNorm&, const LatticeNorm&, double,
                                        const CalderonOptions&);

    std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// constructors

inline LatticeNorm dual(const LatticeNorm& X, const DualOptions& opt)
{
    auto node = std::make_shared<LatticeNorm::Node>();
    node->kind = LatticeNorm::Kind::Dual;
    node->dim = X.dim();
    node->children = {X};
    node->dopt = opt;
    node->desc = "dual(" + X.describe() + ")";
    if (X.closed_form()) {
        node->closed = WeightedLp{conjugate_exponent(X.closed_form()->p),
                                  X.closed_form()->w.cwiseInverse()};
        node->closed_eval = X.closed_evaluator() && !opt.force_numeric;
    }
    return LatticeNorm(std::move(node));
}

inline LatticeNorm power(const LatticeNorm& X, double r)
{
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("power exponent must be positive");
    auto node = std::make_shared<LatticeNorm::Node>();
    node->kind = LatticeNorm::Kind::Power;
    node->dim = X.dim();
    node->children = {X};
    node->r = r;
    node->desc = "power(" + X.describe() + ",r=" + fmt_num(r) + ")";
    if (X.closed_form()) {
        const auto& c = *X.closed_form();
        node->closed = WeightedLp{std::isinf(c.p) ? kInf : c.p / r, c.w.array().pow(r).matrix()};
        node->closed_eval = X.closed_evaluator();
    }
    // ||.||_r is a norm when X has r-convexity constant 1 (r > 1); the
    // certificate is checked by callers holding a registry.
    node->status = X.normed_status();
    if (r > 1.0) {
        bool cert = false;
        if (X.closed_form()) cert = X.closed_form()->p >= r;
        if (!cert) node->status = NormedStatus::UnverifiedNormed;
    }
    return LatticeNorm(std::move(node));
}

inline LatticeNorm calderon_product(const LatticeNorm& X0, const LatticeNorm& X1, double theta,
                                    const CalderonOptions& opt)
{
    require_dim(X1.dim(), X0.dim(), "calderon_product");
    require_theta(theta);
    auto node = std::make_shared<LatticeNorm::Node>();
    node->kind = LatticeNorm::Kind::Calderon;
    node->dim = X0.dim();
    node->children = {X0, X1};
    node->theta = theta;
    node->copt = opt;
    node->desc = "calderon(" + X0.describe() + "," + X1.describe() + ",theta=" + fmt_num(theta) + ")";
    if (X0.closed_form() && X1.closed_form()) {
        const auto& a = *X0.closed_form();
        const auto& b = *X1.closed_form();
        const double ip = (1 - theta) * inv_exponent(a.p) + theta * inv_exponent(b.p);
        node->closed = WeightedLp{ip == 0.0 ? kInf : 1.0 / ip,
                                  (a.w.array().pow(1 - theta) * b.w.array().pow(theta)).matrix()};
        node->closed_eval = opt.prefer_closed_form;
    }
    if (X0.normed_status() != NormedStatus::Normed || X1.normed_status() != NormedStatus::Normed)
        node->status = NormedStatus::UnverifiedNormed;
    return LatticeNorm(std::move(node));
}

// ---------------------------------------------------------------------------
// evaluation

inline double LatticeNorm::eval_abs(const Vec& a) const
{
    const Node& n = *node_;
    if (n.closed_eval) return weighted_lp_value(*n.closed, a);
    switch (n.kind) {
    case Kind::WeightedLp: return weighted_lp_value(*n.closed, a);
    case Kind::Custom: {
        if (a.maxCoeff() <= 0.0) return 0.0;
        return detail::simplex_unit_rhs(n.generators.transpose(), a).value;
    }
    case Kind::Dual: return n.children[0].dual_eval_abs(a);
    case Kind::Power: {
        const double r = n.r;
        const double v = n.children[0].eval_abs(a.array().pow(1.0 / r).matrix());
        return std::pow(v, r);
    }
    case Kind::Calderon: return calderon_factorize(a).value;
    }
    return 0.0;
}

inline Vec LatticeNorm::gradient_abs(const Vec& a) const
{
    const Node& n = *node_;
    if (n.closed_eval) return weighted_lp_gradient(*n.closed, a);
    switch (n.kind) {
    case Kind::WeightedLp: return weighted_lp_gradient(*n.closed, a);
    case Kind::Custom: {
        if (a.maxCoeff() <= 0.0) return Vec::Zero(a.size());
        return detail::simplex_unit_rhs(n.generators.transpose(), a).y;
    }
    case Kind::Dual: {
        // envelope theorem: the maximizer normalized in X
        Vec arg;
        const double v = n.children[0].dual_eval_abs(a, &arg);
        if (v == 0.0) return Vec::Zero(a.size());
        return arg;
    }
    case Kind::Power: {
        const double r = n.r;
        const Vec b = a.array().pow(1.0 / r).matrix();
        const double nb = n.children[0].eval_abs(b);
        const Vec gb = n.children[0].gradient_abs(b);
        Vec g = Vec::Zero(a.size());
        for (Index i = 0; i < a.size(); ++i)
            if (a[i] > 0.0) g[i] = std::pow(nb, r - 1.0) * gb[i] * b[i] / a[i];
        return g;
    }
    case Kind::Calderon: {
        const CalderonFactorization cf = calderon_factorize(a);
        Vec g = Vec::Zero(a.size());
        if (cf.value == 0.0) return g;
        const Vec g0 = n.children[0].gradient_abs(cf.g);
        const double ng = n.children[0].eval_abs(cf.g);
        for (Index i = 0; i < a.size(); ++i) {
            if (a[i] > 0.0) {
                g[i] = cf.value * g0[i] * cf.g[i] / (a[i] * ng);
            } else {
                // one-sided difference off the support
                Vec b = a;
                const double h = 1e-7 * cf.value;
                b[i] = h;
                g[i] = (calderon_factorize(b).value - cf.value) / h;
            }
        }
        return g;
    }
    }
    return Vec::Zero(a.size());
}

inline double LatticeNorm::dual_eval_abs(const Vec& y, Vec* argmax) const
{
    const Node& n = *node_;
    if (n.closed_eval) {
        const WeightedLp d{conjugate_exponent(n.closed->p), n.closed->w.cwiseInverse()};
        const double v = weighted_lp_value(d, y);
        if (argmax) *argmax = weighted_lp_gradient(d, y);
        return v;
    }
    if (n.kind == Kind::Custom) {
        // sup of a linear functional over the solid hull is attained at a generator
        const Vec s = n.generators.transpose() * y;
        Index j = 0;
        const double v = s.maxCoeff(&j);
        if (argmax) *argmax = n.generators.col(j);
        return v;
    }
    if (n.kind == Kind::Dual) {
        // bidual of a finite-dimensional lattice is the lattice itself
        const LatticeNorm& inner = n.children[0];
        if (!n.dopt.force_numeric) {
            if (argmax) *argmax = inner.gradient_abs(y);
            return inner.eval_abs(y);
        }
    }
    return dual_numeric(y, argmax);
}

namespace detail {

/// Orthonormal basis (k x (k-1)) of the hyperplane orthogonal to the ones vector.
inline Mat ones_complement(Index k)
{
    Mat A = Mat::Zero(k, k);
    A.col(0).setOnes();
    for (Index j = 1; j < k; ++j) A(j, j) = 1.0;
    Eigen::HouseholderQR<Mat> qr(A);
    Mat Q = qr.householderQ();
    return Q.rightCols(k - 1);
}

} // namespace detail

inline double LatticeNorm::dual_numeric(const Vec& y, Vec* argmax) const
{
    // ||y||_{X'} = 1 / min { ||a|| : a >= 0, <a, y> = 1 }; with a_i = s_i / y_i
    // the feasible set is the probability simplex on the support of y.
    const Index n = dim();
    std::vector<Index> supp;
    for (Index i = 0; i < n; ++i)
        if (y[i] > 0.0) supp.push_back(i);
    if (argmax) *argmax = Vec::Zero(n);
    if (supp.empty()) return 0.0;
    const Index k = static_cast<Index>(supp.size());
    const double ymax = y.maxCoeff();
    Vec ys(k);
    for (Index j = 0; j < k; ++j) ys[j] = y[supp[static_cast<size_t>(j)]] / ymax;

    auto expand = [&](const Vec& s) {
        Vec a = Vec::Zero(n);
        for (Index j = 0; j < k; ++j) a[supp[static_cast<size_t>(j)]] = std::max(0.0, s[j]) / ys[j];
        return a;
    };
    Vec best_s = Vec::Constant(k, 1.0 / static_cast<double>(k));
    if (k > 1) {
        const Mat Q = detail::ones_complement(k);
        const Vec center = best_s;
        auto objective = [&](const Vec& z, Vec& grad) {
            const Vec a = expand(center + Q * z);
            const Vec ga = gradient_abs(a);
            Vec gs(k);
            for (Index j = 0; j < k; ++j) gs[j] = ga[supp[static_cast<size_t>(j)]] / ys[j];
            grad = Q.transpose() * gs;
            return eval_abs(a);
        };
        auto feasible = [&](const Vec& z, Vec& grad) {
            const Vec s = center + Q * z;
            Index worst = 0;
            const double mn = s.minCoeff(&worst);
            if (mn >= 0.0) return false;
            grad = -Q.transpose().col(worst);
            return true;
        };
        optim::EllipsoidOptions eo;
        eo.radius = 1.0;
        eo.gap_tol = 1e-13;
        auto r = optim::ellipsoid(objective, Vec::Zero(k - 1), eo, feasible);
        best_s = center + Q * r.x;
    }
    const Vec a = expand(best_s);
    const double na = eval_abs(a);
    if (argmax) *argmax = a / na;
    return ymax / na;
}

inline CalderonFactorization LatticeNorm::calderon_factorize(const Vec& f_abs) const
{
    if (kind() != Kind::Calderon) throw DomainError("calderon_factorize on a non-product lattice");
    const Node& nd = *node_;
    const LatticeNorm& X0 = nd.children[0];
    const LatticeNorm& X1 = nd.children[1];
    const double theta = nd.theta;
    const Index n = dim();
    CalderonFactorization out;
    out.g = Vec::Zero(n);
    out.h = Vec::Zero(n);
    std::vector<Index> supp;
    for (Index i = 0; i < n; ++i)
        if (f_abs[i] > 0.0) supp.push_back(i);
    if (supp.empty()) return out;
    const Index s = static_cast<Index>(supp.size());
    const double scale = f_abs.maxCoeff();
    Vec logf(s);
    for (Index k = 0; k < s; ++k) logf[k] = std::log(f_abs[supp[static_cast<size_t>(k)]] / scale);

    auto build = [&](const Vec& u, Vec& g, Vec& h) {
        g.setZero(n);
        h.setZero(n);
        for (Index k = 0; k < s; ++k) {
            const Index i = supp[static_cast<size_t>(k)];
            h[i] = std::exp(u[k]);
            g[i] = std::exp((logf[k] - theta * u[k]) / (1 - theta));
        }
    };

    // phi(u) = (1-theta) log||g||_0 + theta log||h||_1 is convex in u = log h
    // (log ||e^v|| is convex for every lattice norm) and invariant under
    // u -> u + c; optimize on the complement of the ones direction.
    Vec u_best = logf;
    bool converged = true;
    if (s > 1) {
        const Mat Q = detail::ones_complement(s);
        auto objective = [&](const Vec& z, Vec& grad) {
            const Vec u = logf + Q * z;
            Vec g, h;
            build(u, g, h);
            const double ng = X0.eval_abs(g);
            const double nh = X1.eval_abs(h);
            const Vec gg = X0.gradient_abs(g);
            const Vec gh = X1.gradient_abs(h);
            Vec gu(s);
            for (Index k = 0; k < s; ++k) {
                const Index i = supp[static_cast<size_t>(k)];
                gu[k] = theta * (-gg[i] * g[i] / ng + gh[i] * h[i] / nh);
            }
            grad = Q.transpose() * gu;
            return (1 - theta) * std::log(ng) + theta * std::log(nh);
        };
        const bool closed_pair = X0.closed_evaluator() && X1.closed_evaluator();
        const int rounds = closed_pair ? 1 : std::max(1, nd.copt.starts);
        optim::EllipsoidOptions eo;
        eo.radius = 8.0 + 3.0 * (logf.maxCoeff() - logf.minCoeff());
        eo.gap_tol = 1e-12;
        eo.max_iter = 200 * nd.copt.max_iter;
        Vec z = Vec::Zero(s - 1);
        double best = kInf;
        for (int round = 0; round < rounds; ++round) {
            auto r = optim::ellipsoid(objective, z, eo);
            converged = r.converged;
            const bool improved = r.value < best - 1e-13;
            best = std::min(best, r.value);
            z = r.x;
            // a restart centred at the optimum that finds nothing better
            // confirms the minimizer lies inside the search ball
            if (!improved) break;
        }
        u_best = logf + Q * z;
    }
    Vec g, h;
    build(u_best, g, h);
    const double ng = X0.eval_abs(g), nh = X1.eval_abs(h);
    const double value = std::pow(ng, 1 - theta) * std::pow(nh, theta);
    // rescale so that ||g||_0 = ||h||_1 (the factorization is invariant)
    const double t = std::pow(nh / ng, theta);
    g *= t;
    h *= std::pow(t, -(1 - theta) / theta);
    out.value = value * scale;
    out.g = g * scale;
    out.h = h * scale;
    out.converged = converged;
    return out;
}

// ---------------------------------------------------------------------------
// declared constants

/// Bound forced by the family itself (no registry): returns nullopt when
/// nothing is known analytically.
inline std::optional<BoundLookup> analytic_lattice_bound(const LatticeNorm& X, Quantity q)
{
    if (const auto& c = X.closed_form()) {
        if (q == Quantity::M2Concavity && c->p >= 1.0 && c->p <= 2.0)
            return BoundLookup{1.0, true, "l_p with p<=2 is 2-concave with constant 1"};
        if (q == Quantity::M2Convexity && c->p >= 2.0)
            return BoundLookup{1.0, true, "l_p with p>=2 is 2-convex with constant 1"};
    }
    return std::nullopt;
}

/// Registry lookup by description, then by the weighted l_p form when the
/// lattice has one (so that e.g. the dual of l_{4/3} finds an l_4 entry).
inline std::optional<ConstantBound> registry_find(const ConstantsRegistry& reg, const LatticeNorm& X,
                                                  Quantity q)
{
    if (auto e = reg.find(X.describe(), q)) return e;
    if (const auto& c = X.closed_form()) return reg.find(LatticeNorm::weighted_lp(c->p, c->w).describe(), q);
    return std::nullopt;
}

/// Registry entry if present, else analytic bound, else interpolated bound
/// for Calderon products of covered factors.
inline std::optional<BoundLookup> lattice_bound(const LatticeNorm& X, Quantity q,
                                                const ConstantsRegistry& reg)
{
    if (auto e = registry_find(reg, X, q)) return BoundLookup{e->value, e->analytic, e->provenance};
    if (auto a = analytic_lattice_bound(X, q)) return a;
    if (X.kind() == LatticeNorm::Kind::Calderon) {
        auto b0 = lattice_bound(X.children()[0], q, reg);
        auto b1 = lattice_bound(X.children()[1], q, reg);
        if (b0 && b1) {
            auto b = combine(*b0, *b1, 1 - X.theta(), X.theta());
            b.provenance = "interpolated (" + b.provenance + ")";
            return b;
        }
    }
    return std::nullopt;
}

/// Whether X carries an r-convexity constant 1 certificate (r-th power normed).
inline bool has_unit_convexity(const LatticeNorm& X, double r, const ConstantsRegistry& reg)
{
    if (r <= 1.0) return true;
    if (X.closed_form()) return X.closed_form()->p >= r;
    switch (X.kind()) {
    case LatticeNorm::Kind::Calderon:
        return has_unit_convexity(X.children()[0], r, reg) &&
               has_unit_convexity(X.children()[1], r, reg);
    case LatticeNorm::Kind::Power:
        return has_unit_convexity(X.children()[0], r * X.exponent_r(), reg);
    default: break;
    }
    if (r <= 2.0) {
        if (auto e = reg.find(X.describe(), Quantity::M2Convexity))
            return e->analytic && e->value <= 1.0;
    }
    return false;
}

// ---------------------------------------------------------------------------
// 2-concavity / 2-convexity lower bounds

/// Vectors (columns) achieving the reported ratio.
struct FamilyWitness
{
    Mat vectors;
    double ratio = 0.0;
};

struct SearchBudget
{
    int max_family = 4;
    int starts = 12;
    int iterations = 400;
    std::uint64_t seed = 1;
};

namespace detail {

inline Vec square_function(const Mat& family)
{
    return family.cwiseAbs2().rowwise().sum().cwiseSqrt();
}

inline double sum_sq_norms(const LatticeNorm& X, const Mat& family)
{
    double s = 0.0;
    for (Index j = 0; j < family.cols(); ++j) {
        const double v = X.eval_abs(family.col(j).cwiseAbs());
        s += v * v;
    }
    return std::sqrt(s);
}

} // namespace detail

/// (sum ||x_i||^2)^{1/2} / || (sum |x_i|^2)^{1/2} ||.
inline double concavity2_ratio(const LatticeNorm& X, const Mat& family)
{
    if (family.cols() == 0) throw DomainError("empty family");
    require_dim(family.rows(), X.dim(), "concavity2_ratio");
    const double den = X.eval_abs(detail::square_function(family));
    return den > 0.0 ? detail::sum_sq_norms(X, family) / den : 0.0;
}

/// || (sum |x_i|^2)^{1/2} || / (sum ||x_i||^2)^{1/2}.
inline double convexity2_ratio(const LatticeNorm& X, const Mat& family)
{
    if (family.cols() == 0) throw DomainError("empty family");
    require_dim(family.rows(), X.dim(), "convexity2_ratio");
    const double den = detail::sum_sq_norms(X, family);
    return den > 0.0 ? X.eval_abs(detail::square_function(family)) / den : 0.0;
}

namespace detail {

template <class Ratio>
std::pair<double, FamilyWitness> family_search(const LatticeNorm& X, const SearchBudget& b,
                                               Ratio ratio)
{
    if (b.max_family < 1) throw DomainError("empty family");
    const Index n = X.dim();
    FamilyWitness best;
    best.vectors = Mat::Zero(n, 1);
    best.vectors(0, 0) = 1.0;
    best.ratio = ratio(best.vectors);

    auto consider = [&](const Mat& fam) {
        const double r = ratio(fam);
        if (r > best.ratio) {
            best.ratio = r;
            best.vectors = fam;
        }
    };
    // unit-vector families first
    for (Index k = 2; k <= std::min<Index>(n, b.max_family); ++k) {
        Mat fam = Mat::Zero(n, k);
        for (Index j = 0; j < k; ++j) fam(j, j) = 1.0;
        consider(fam);
    }
    for (int s = 0; s < b.starts; ++s) {
        // each start has its own stream so enlarging the budget only adds candidates
        Rng rng(mix_seed(b.seed, static_cast<std::uint64_t>(s)));
        const Index k = 1 + s % b.max_family;
        const Vec start = random_normal(rng, n * k);
        auto obj = [&](const Vec& v) {
            const Mat fam = v.reshaped(n, k);
            const double r = ratio(fam);
            return std::isfinite(r) ? -r : 0.0;
        };
        consider(start.reshaped(n, k));
        optim::NelderMeadOptions no;
        no.initial_step = 0.3;
        no.max_iter = b.iterations;
        auto res = optim::nelder_mead(obj, start, no);
        consider(res.x.reshaped(n, k));
    }
    return {best.ratio, best};
}

} // namespace detail

/// Lower bound on the 2-concavity constant M_(2)(X) by multi-start search.
inline std::pair<double, FamilyWitness> concavity2_lower(const LatticeNorm& X,
                                                         const SearchBudget& b = {})
{
    return detail::family_search(X, b, [&](const Mat& f) { return concavity2_ratio(X, f); });
}

/// Lower bound on the 2-convexity constant M^(2)(X) by multi-start search.
inline std::pair<double, FamilyWitness> convexity2_lower(const LatticeNorm& X,
                                                         const SearchBudget& b = {})
{
    return detail::family_search(X, b, [&](const Mat& f) { return convexity2_ratio(X, f); });
}

struct ConcavityInterpReport
{
    Status status = Status::Skipped;
    double bound = 0.0;
    double best_ratio = 0.0;
    double margin = 0.0;
    FamilyWitness witness;
    std::string note;
};

/// Searches 2-concavity witnesses in X0^{1-theta} X1^theta and compares them
/// with M_(2)(X0)^{1-theta} M_(2)(X1)^theta taken from declared bounds.
inline ConcavityInterpReport concavity_interp_check(const LatticeNorm& X0, const LatticeNorm& X1,
                                                    double theta, const SearchBudget& b,
                                                    const ConstantsRegistry& reg,
                                                    double tol = kTolOptim)
{
    require_dim(X1.dim(), X0.dim(), "concavity_interp_check");
    require_theta(theta);
    ConcavityInterpReport rep;
    auto b0 = lattice_bound(X0, Quantity::M2Concavity, reg);
    auto b1 = lattice_bound(X1, Quantity::M2Concavity, reg);
    if (!b0 || !b1) {
        rep.note = "no declared 2-concavity bound for " + (!b0 ? X0.describe() : X1.describe());
        return rep;
    }
    rep.bound = std::pow(b0->value, 1 - theta) * std::pow(b1->value, theta);
    const LatticeNorm prod = calderon_product(X0, X1, theta);
    auto [val, wit] = concavity2_lower(prod, b);
    rep.best_ratio = val;
    rep.witness = wit;
    rep.margin = rep.bound * (1 + tol) - val;
    const bool analytic = b0->analytic && b1->analytic;
    if (rep.margin >= 0.0)
        rep.status = analytic ? Status::Pass : Status::Informational;
    else
        rep.status = analytic ? Status::Fail : Status::Informational;
    return rep;
}

} // namespace cplxinterp
