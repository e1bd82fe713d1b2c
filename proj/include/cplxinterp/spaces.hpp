#pragma once
//
// Finite-dimensional normed spaces over C^n: complexified lattices, euclidean
// spaces, vector-valued spaces X(E), user oracles, duals, and spaces of
// operators / injective tensors.  Vectors are always complex; the field tag
// only records what the space models.
//
// All pairings are bilinear: <x, y> = sum_i x_i y_i.
//

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "cplxinterp/common.hpp"
#include "cplxinterp/interval.hpp"
#include "cplxinterp/lattice.hpp"

namespace cplxinterp {

enum class Field { Real, Complex };

/// How a computed norm relates to the true value.
enum class Bound { Exact, Lower, Upper };

inline Complex pairing(const CVec& x, const CVec& y) { return (x.array() * y.array()).sum(); }

inline CVec unit_phase(const CVec& x)
{
    CVec s(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i]);
        s[i] = a > 0.0 ? x[i] / a : Complex(1.0, 0.0);
    }
    return s;
}

struct OperatorNormOptions
{
    int restarts = 8;
    std::uint64_t seed = 0x0b5e55ed;
    int max_rounds = 300;
    double rel_tol = 1e-8;
    /// Rounds in a row below rel_tol before a restart counts as converged.
    int patience = 3;
    /// Relative gap between lower and reported upper value when every
    /// restart converged, and when some did not.
    double slack = 1e-6;
    double stagnation_slack = 1e-3;
};

class NormedSpace;
struct LinearMap;
CertifiedInterval operator_norm(const CMat& Z, const NormedSpace& dom, const NormedSpace& cod,
                                const OperatorNormOptions& opt = {});

class NormedSpace
{
public:
    enum class Kind { Lattice, Euclidean, VectorValued, Custom, Dual, Operator };
    using NormFn = std::function<double(const CVec&)>;

    static NormedSpace from_lattice(LatticeNorm X, Field field = Field::Complex)
    {
        auto node = std::make_shared<Node>();
        node->kind = Kind::Lattice;
        node->dim = X.dim();
        node->field = field;
        node->desc = X.describe();
        node->absolute = true;
        node->lattice = std::move(X);
        return NormedSpace(std::move(node));
    }

    static NormedSpace euclidean(Index n, Field field = Field::Complex)
    {
        if (n < 1) throw DomainError("euclidean space needs positive dimension");
        auto node = std::make_shared<Node>();
        node->kind = Kind::Euclidean;
        node->dim = n;
        node->field = field;
        node->absolute = true;
        node->desc = "l2(n=" + std::to_string(n) + ")";
        return NormedSpace(std::move(node));
    }

    /// Space given by a norm oracle and (optionally) a dual-norm oracle.
    /// Norming functionals are obtained by differentiating the oracles.
    static NormedSpace custom(Index n, NormFn norm, NormFn dual_norm, std::string name,
                              Field field = Field::Complex, bool absolute = false)
    {
        if (n < 1) throw DomainError("custom space needs positive dimension");
        if (!norm) throw DomainError("custom space needs a norm oracle");
        auto node = std::make_shared<Node>();
        node->kind = Kind::Custom;
        node->dim = n;
        node->field = field;
        node->absolute = absolute;
        node->norm_fn = std::move(norm);
        node->dual_fn = std::move(dual_norm);
        node->desc = "custom(" + name + ",n=" + std::to_string(n) + ")";
        return NormedSpace(std::move(node));
    }

    Index dim() const { return node_->dim; }
    Kind kind() const { return node_->kind; }
    Field field() const { return node_->field; }
    const std::string& describe() const { return node_->desc; }
    /// Norm depends only on the coordinate moduli.
    bool absolute() const { return node_->absolute; }
    Bound norm_bound() const { return node_->norm_bound; }
    Bound dual_bound() const { return node_->dual_bound; }

    /// Outer lattice for lattice and vector-valued kinds.
    const LatticeNorm& lattice() const
    {
        if (!node_->lattice) throw DomainError(describe() + " has no lattice");
        return *node_->lattice;
    }
    /// Fiber of a vector-valued space, base of a dual, codomain of an operator space.
    const NormedSpace& inner() const { return node_->parts.at(0); }
    const NormedSpace& domain() const { return node_->parts.at(1); }
    const NormedSpace& codomain() const { return node_->parts.at(0); }
    /// Number of fibers of a vector-valued space.
    Index blocks() const { return node_->lattice ? node_->lattice->dim() : 0; }
    Index op_rows() const { return node_->rows; }
    Index op_cols() const { return node_->cols; }
    const OperatorNormOptions& op_options() const { return node_->opt; }

    bool same_as(const NormedSpace& o) const
    {
        return node_ == o.node_ || (dim() == o.dim() && describe() == o.describe());
    }

    /// Closed weighted-l_p form of the norm, when known.
    std::optional<WeightedLp> lp_form() const
    {
        if (kind() == Kind::Euclidean) return WeightedLp{2.0, Vec::Ones(dim())};
        if (kind() == Kind::Lattice) return lattice().closed_form();
        return std::nullopt;
    }

    double norm(const CVec& x) const
    {
        require_dim(x.size(), dim(), "norm");
        require_finite(x, "norm");
        return norm_raw(x);
    }
    double dual_norm(const CVec& y) const
    {
        require_dim(y.size(), dim(), "dual_norm");
        require_finite(y, "dual_norm");
        return dual_norm_raw(y);
    }

    double norm_raw(const CVec& x) const;
    double dual_norm_raw(const CVec& y) const;
    /// Values guaranteed not to fall below the true norm / dual norm
    /// (operator norms are widened by their reported slack).
    double norm_upper(const CVec& x) const;
    double dual_norm_upper(const CVec& y) const;

    /// Norm together with a norming functional; one search for operator spaces.
    double norm_with_functional(const CVec& x, CVec& functional) const;

    /// Same space with different search options for operator-type norms
    /// (recursively through fibers and duals).
    NormedSpace with_options(const OperatorNormOptions& opt) const;

    /// x' with <x, x'> = ||x|| and ||x'||_* <= 1 (zero at x = 0).
    CVec norming(const CVec& x) const;
    /// x with ||x|| <= 1 and <x, y> = ||y||_*.
    CVec dual_norming(const CVec& y) const;

    /// Columns b such that diag(exp(i t b)) is an isometry for every real t.
    Mat phase_basis() const;

private:
    struct Node
    {
        Kind kind = Kind::Euclidean;
        Index dim = 0;
        Field field = Field::Complex;
        std::string desc;
        bool absolute = false;
        Bound norm_bound = Bound::Exact;
        Bound dual_bound = Bound::Exact;
        std::optional<LatticeNorm> lattice;
        std::vector<NormedSpace> parts;
        NormFn norm_fn;
        NormFn dual_fn;
        Index rows = 0, cols = 0;
        OperatorNormOptions opt;
    };

    explicit NormedSpace(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    CVec block(const CVec& x, Index k) const
    {
        const Index m = inner().dim();
        return x.segment(k * m, m);
    }
    Vec fiber_norms(const CVec& x) const
    {
        Vec a(blocks());
        for (Index k = 0; k < blocks(); ++k) a[k] = inner().norm_raw(block(x, k));
        return a;
    }
    Vec fiber_dual_norms(const CVec& y) const
    {
        Vec a(blocks());
        for (Index k = 0; k < blocks(); ++k) a[k] = inner().dual_norm_raw(block(y, k));
        return a;
    }
    Eigen::Map<const CMat> as_matrix(const CVec& x) const
    {
        return {x.data(), node_->rows, node_->cols};
    }

    friend NormedSpace make_vector_valued(const LatticeNorm& X, const NormedSpace& E);
    friend NormedSpace dual_space(const NormedSpace& E);
    friend NormedSpace operator_space(const NormedSpace& dom, const NormedSpace& cod,
                                      const OperatorNormOptions& opt);
    friend NormedSpace injective_space(const NormedSpace& E, const NormedSpace& F,
                                       const OperatorNormOptions& opt);

    std::shared_ptr<const Node> node_;
};

/// X(E): vectors made of X.dim() fibers in E, ||x|| = ||(||x_k||_E)_k||_X.
/// Coordinates of fiber k occupy [k*dim(E), (k+1)*dim(E)).
inline NormedSpace make_vector_valued(const LatticeNorm& X, const NormedSpace& E)
{
    auto node = std::make_shared<NormedSpace::Node>();
    node->kind = NormedSpace::Kind::VectorValued;
    node->dim = X.dim() * E.dim();
    node->field = E.field();
    node->absolute = E.absolute();
    node->lattice = X;
    node->parts = {E};
    node->norm_bound = E.norm_bound();
    node->dual_bound = E.dual_bound();
    node->desc = X.describe() + "(" + E.describe() + ")";
    return NormedSpace(std::move(node));
}

/// Dual space under the bilinear pairing.
inline NormedSpace dual_space(const NormedSpace& E)
{
    using K = NormedSpace::Kind;
    switch (E.kind()) {
    case K::Lattice: return NormedSpace::from_lattice(dual(E.lattice()), E.field());
    case K::Euclidean: return E;
    case K::Dual: return E.inner();
    case K::VectorValued: return make_vector_valued(dual(E.lattice()), dual_space(E.inner()));
    default: break;
    }
    auto node = std::make_shared<NormedSpace::Node>();
    node->kind = K::Dual;
    node->dim = E.dim();
    node->field = E.field();
    node->absolute = E.absolute();
    node->parts = {E};
    node->norm_bound = E.dual_bound();
    node->dual_bound = E.norm_bound();
    node->desc = "dual(" + E.describe() + ")";
    return NormedSpace(std::move(node));
}

/// L(dom, cod) on column-major vectorized cod.dim() x dom.dim() matrices.
inline NormedSpace operator_space(const NormedSpace& dom, const NormedSpace& cod,
                                  const OperatorNormOptions& opt = {})
{
    auto node = std::make_shared<NormedSpace::Node>();
    node->kind = NormedSpace::Kind::Operator;
    node->rows = cod.dim();
    node->cols = dom.dim();
    node->dim = node->rows * node->cols;
    node->field = cod.field();
    node->parts = {cod, dom};
    node->opt = opt;
    const bool exact = (dom.lp_form() && dom.lp_form()->p == 1.0) ||
                       (cod.lp_form() && std::isinf(cod.lp_form()->p)) ||
                       (dom.lp_form() && cod.lp_form() && dom.lp_form()->p == 2.0 &&
                        cod.lp_form()->p == 2.0);
    node->norm_bound = exact ? Bound::Exact : Bound::Lower;
    node->dual_bound = Bound::Upper;
    node->desc = "L(" + dom.describe() + "," + cod.describe() + ")";
    return NormedSpace(std::move(node));
}

/// E (x)_eps F on column-major dim(E) x dim(F) matrices; realized as L(F', E).
inline NormedSpace injective_space(const NormedSpace& E, const NormedSpace& F,
                                   const OperatorNormOptions& opt = {})
{
    NormedSpace s = operator_space(dual_space(F), E, opt);
    auto node = std::make_shared<NormedSpace::Node>(*s.node_);
    node->desc = "eps(" + E.describe() + "," + F.describe() + ")";
    return NormedSpace(std::move(node));
}

// ---------------------------------------------------------------------------

namespace detail {

/// Gradient of a real function of a complex vector, in the form x' with
/// d f = Re <x', dx>.
inline CVec fd_complex_gradient(const NormedSpace::NormFn& f, const CVec& x)
{
    const double scale = std::max(x.cwiseAbs().maxCoeff(), 1e-300);
    const double h = 1e-6 * scale;
    CVec g(x.size());
    CVec y = x;
    for (Index i = 0; i < x.size(); ++i) {
        y[i] = x[i] + h;
        const double fp = f(y);
        y[i] = x[i] - h;
        const double fm = f(y);
        y[i] = x[i] + Complex(0, h);
        const double fpi = f(y);
        y[i] = x[i] - Complex(0, h);
        const double fmi = f(y);
        y[i] = x[i];
        g[i] = Complex((fp - fm) / (2 * h), -(fpi - fmi) / (2 * h));
    }
    return g;
}

/// Upper bound for the dual norm of L(dom, cod): the functional S is a
/// sum of rank-one pieces v u^T, each costing ||v||_{cod'} ||u||_dom.
inline double projective_upper(const CMat& S, const NormedSpace& dom, const NormedSpace& cod)
{
    if (S.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    double by_cols = 0.0, by_rows = 0.0, by_svd = 0.0;
    for (Index j = 0; j < S.cols(); ++j) {
        if (S.col(j).cwiseAbs().maxCoeff() == 0.0) continue;
        CVec e = CVec::Zero(S.cols());
        e[j] = 1.0;
        by_cols += cod.dual_norm_raw(S.col(j)) * dom.norm_raw(e);
    }
    for (Index i = 0; i < S.rows(); ++i) {
        if (S.row(i).cwiseAbs().maxCoeff() == 0.0) continue;
        CVec e = CVec::Zero(S.rows());
        e[i] = 1.0;
        by_rows += cod.dual_norm_raw(e) * dom.norm_raw(S.row(i).transpose());
    }
    Eigen::JacobiSVD<CMat> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    for (Index k = 0; k < sv.size(); ++k) {
        if (sv[k] <= 0.0) break;
        by_svd += sv[k] * cod.dual_norm_raw(svd.matrixU().col(k)) *
                  dom.norm_raw(svd.matrixV().col(k).conjugate());
    }
    return std::min({by_cols, by_rows, by_svd});
}

} // namespace detail

inline double NormedSpace::norm_raw(const CVec& x) const
{
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Lattice: return n.lattice->eval_abs(x.cwiseAbs());
    case Kind::Euclidean: return x.norm();
    case Kind::VectorValued: return n.lattice->eval_abs(fiber_norms(x));
    case Kind::Custom: return n.norm_fn(x);
    case Kind::Dual: return inner().dual_norm_raw(x);
    case Kind::Operator:
        return operator_norm(as_matrix(x), domain(), codomain(), n.opt).lower;
    }
    return 0.0;
}

inline double NormedSpace::dual_norm_raw(const CVec& y) const
{
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::Lattice: return n.lattice->dual_eval_abs(y.cwiseAbs());
    case Kind::Euclidean: return y.norm();
    case Kind::VectorValued: return n.lattice->dual_eval_abs(fiber_dual_norms(y));
    case Kind::Custom:
        if (!n.dual_fn) throw DomainError(describe() + ": no dual-norm oracle");
        return n.dual_fn(y);
    case Kind::Dual: return inner().norm_raw(y);
    case Kind::Operator: return detail::projective_upper(as_matrix(y), domain(), codomain());
    }
    return 0.0;
}

inline double NormedSpace::norm_upper(const CVec& x) const
{
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::VectorValued: {
        Vec a(blocks());
        for (Index k = 0; k < blocks(); ++k) a[k] = inner().norm_upper(block(x, k));
        return n.lattice->eval_abs(a);
    }
    case Kind::Dual: return inner().dual_norm_upper(x);
    case Kind::Operator:
        return operator_norm(as_matrix(x), domain(), codomain(), n.opt).upper;
    default: return norm_raw(x);
    }
}

inline double NormedSpace::dual_norm_upper(const CVec& y) const
{
    const Node& n = *node_;
    switch (n.kind) {
    case Kind::VectorValued: {
        Vec a(blocks());
        for (Index k = 0; k < blocks(); ++k) a[k] = inner().dual_norm_upper(block(y, k));
        return n.lattice->dual_eval_abs(a);
    }
    case Kind::Dual: return inner().norm_upper(y);
    default: return dual_norm_raw(y);
    }
}

inline double NormedSpace::norm_with_functional(const CVec& x, CVec& functional) const
{
    const Node& n = *node_;
    if (n.kind == Kind::Operator && x.cwiseAbs().maxCoeff() > 0.0) {
        const auto Z = as_matrix(x);
        const CertifiedInterval r = operator_norm(Z, domain(), codomain(), n.opt);
        const CVec& u = r.lower_witness;
        const CVec v = codomain().norming(Z * u);
        CMat S = v * u.transpose();
        functional = Eigen::Map<const CVec>(S.data(), S.size());
        return r.lower;
    }
    functional = norming(x);
    return norm_raw(x);
}

inline NormedSpace NormedSpace::with_options(const OperatorNormOptions& opt) const
{
    const Node& n = *node_;
    if (n.kind != Kind::Operator && n.kind != Kind::VectorValued && n.kind != Kind::Dual)
        return *this;
    auto node = std::make_shared<Node>(n);
    for (auto& p : node->parts) p = p.with_options(opt);
    if (n.kind == Kind::Operator) node->opt = opt;
    return NormedSpace(std::move(node));
}

inline CVec NormedSpace::norming(const CVec& x) const
{
    const Node& n = *node_;
    const Index d = dim();
    if (x.cwiseAbs().maxCoeff() == 0.0) return CVec::Zero(d);
    switch (n.kind) {
    case Kind::Lattice: {
        const Vec g = n.lattice->gradient_abs(x.cwiseAbs());
        return (g.cast<Complex>().array() * unit_phase(x).conjugate().array()).matrix();
    }
    case Kind::Euclidean: return x.conjugate() / x.norm();
    case Kind::VectorValued: {
        const Vec a = fiber_norms(x);
        const Vec g = n.lattice->gradient_abs(a);
        const Index m = inner().dim();
        CVec out = CVec::Zero(d);
        for (Index k = 0; k < blocks(); ++k) {
            if (g[k] == 0.0) continue;
            const CVec xk = block(x, k);
            if (a[k] > 0.0) {
                out.segment(k * m, m) = g[k] * inner().norming(xk);
            }
        }
        return out;
    }
    case Kind::Custom: return detail::fd_complex_gradient(n.norm_fn, x);
    case Kind::Dual: return inner().dual_norming(x);
    case Kind::Operator: {
        CVec f;
        norm_with_functional(x, f);
        return f;
    }
    }
    return CVec::Zero(d);
}

inline CVec NormedSpace::dual_norming(const CVec& y) const
{
    const Node& n = *node_;
    const Index d = dim();
    if (y.cwiseAbs().maxCoeff() == 0.0) return CVec::Zero(d);
    switch (n.kind) {
    case Kind::Lattice: {
        Vec a;
        n.lattice->dual_eval_abs(y.cwiseAbs(), &a);
        const double na = n.lattice->eval_abs(a);
        if (na > 0.0) a /= na;
        return (a.cast<Complex>().array() * unit_phase(y).conjugate().array()).matrix();
    }
    case Kind::Euclidean: return y.conjugate() / y.norm();
    case Kind::VectorValued: {
        const Vec b = fiber_dual_norms(y);
        Vec a;
        n.lattice->dual_eval_abs(b, &a);
        const double na = n.lattice->eval_abs(a);
        if (na > 0.0) a /= na;
        const Index m = inner().dim();
        CVec out = CVec::Zero(d);
        for (Index k = 0; k < blocks(); ++k) {
            if (a[k] == 0.0) continue;
            if (b[k] > 0.0) {
                out.segment(k * m, m) = a[k] * inner().dual_norming(block(y, k));
            } else {
                // any unit vector of the fiber
                CVec e = CVec::Zero(m);
                e[0] = 1.0;
                out.segment(k * m, m) = a[k] * e / inner().norm_raw(e);
            }
        }
        return out;
    }
    case Kind::Custom:
        if (!n.dual_fn) throw DomainError(describe() + ": no dual-norm oracle");
        return detail::fd_complex_gradient(n.dual_fn, y);
    case Kind::Dual: return inner().norming(y);
    case Kind::Operator: throw DomainError(describe() + ": dual maximizer not available");
    }
    return CVec::Zero(d);
}

inline Mat NormedSpace::phase_basis() const
{
    const Node& n = *node_;
    const Index d = dim();
    switch (n.kind) {
    case Kind::Lattice:
    case Kind::Euclidean: return Mat::Identity(d, d);
    case Kind::Custom: return n.absolute ? Mat(Mat::Identity(d, d)) : Mat(Mat::Ones(d, 1));
    case Kind::Dual: return inner().phase_basis();
    case Kind::VectorValued: {
        if (absolute()) return Mat::Identity(d, d);
        const Mat Bi = inner().phase_basis();
        const Index m = inner().dim();
        Mat B = Mat::Zero(d, blocks() * (1 + Bi.cols()));
        Index c = 0;
        for (Index k = 0; k < blocks(); ++k) {
            B.block(k * m, c++, m, 1).setOnes();
            for (Index j = 0; j < Bi.cols(); ++j) B.block(k * m, c++, m, 1) = Bi.col(j);
        }
        return B;
    }
    case Kind::Operator: {
        const Mat Bc = codomain().phase_basis();
        const Mat Bd = domain().phase_basis();
        const Index R = n.rows, C = n.cols;
        Mat B = Mat::Zero(d, Bc.cols() + Bd.cols());
        for (Index c = 0; c < Bc.cols(); ++c)
            for (Index j = 0; j < C; ++j) B.block(j * R, c, R, 1) = Bc.col(c);
        for (Index c = 0; c < Bd.cols(); ++c)
            for (Index j = 0; j < C; ++j) B.block(j * R, Bc.cols() + c, R, 1).setConstant(Bd(j, c));
        return B;
    }
    }
    return Mat::Ones(d, 1);
}

// ---------------------------------------------------------------------------
// linear maps and operator norms

struct LinearMap
{
    CMat matrix;
    NormedSpace domain;
    NormedSpace codomain;

    LinearMap(CMat m, NormedSpace dom, NormedSpace cod)
        : matrix(std::move(m)), domain(std::move(dom)), codomain(std::move(cod))
    {
        require_dim(matrix.rows(), codomain.dim(), "LinearMap rows");
        require_dim(matrix.cols(), domain.dim(), "LinearMap cols");
        require_finite(matrix.reshaped(), "LinearMap");
    }
};

namespace detail {

struct AlternationRun
{
    double value = 0.0;
    CVec u;
    bool converged = false;
};

/// Monotone alternation  u -> v' = norming(Zu) -> u = dual_norming(Z^T v').
inline AlternationRun alternate(const CMat& Z, const NormedSpace& dom, const NormedSpace& cod,
                                CVec u, const OperatorNormOptions& opt)
{
    AlternationRun run;
    const double nu = dom.norm_raw(u);
    if (!(nu > 0.0)) return run;
    u /= nu;
    double val = cod.norm_raw(Z * u);
    int calm = 0;
    for (int round = 0; round < opt.max_rounds; ++round) {
        const CVec v = cod.norming(Z * u);
        const CVec r = Z.transpose() * v;
        if (r.cwiseAbs().maxCoeff() == 0.0) {
            run.converged = true;
            break;
        }
        CVec un = dom.dual_norming(r);
        const double nn = dom.norm_raw(un);
        if (nn > 0.0) un /= nn;
        const double vn = cod.norm_raw(Z * un);
        if (vn > val) {
            const double gain = (vn - val) / vn;
            u = un;
            val = vn;
            calm = gain < opt.rel_tol ? calm + 1 : 0;
        } else {
            ++calm;
        }
        if (calm >= opt.patience) {
            run.converged = true;
            break;
        }
    }
    run.value = val;
    run.u = u;
    return run;
}

} // namespace detail

/// Norm of Z: dom -> cod.  Exact for l_1-type domains, l_inf-type codomains
/// and weighted euclidean pairs; otherwise the best multi-start alternation
/// value with an upper value widened by the configured slack.
inline CertifiedInterval operator_norm(const CMat& Z, const NormedSpace& dom,
                                       const NormedSpace& cod, const OperatorNormOptions& opt)
{
    require_dim(Z.rows(), cod.dim(), "operator_norm rows");
    require_dim(Z.cols(), dom.dim(), "operator_norm cols");
    CertifiedInterval out;
    const Index m = Z.rows(), n = Z.cols();
    out.lower_witness = CVec::Zero(n);
    if (n > 0) out.lower_witness[0] = 1.0 / dom.norm_raw(CVec::Unit(n, 0));
    if (Z.cwiseAbs().maxCoeff() == 0.0) {
        out.lower = out.upper = 0.0;
        out.exact = true;
        return out;
    }
    const auto df = dom.lp_form();
    const auto cf = cod.lp_form();
    if (df && df->p == 1.0) {
        // extreme points of the unit ball are e_j / w_j up to phase
        double best = -1.0;
        for (Index j = 0; j < n; ++j) {
            const double v = cod.norm_raw(Z.col(j)) / df->w[j];
            if (v > best) {
                best = v;
                out.lower_witness = CVec::Unit(n, j) / df->w[j];
            }
        }
        out.lower = out.upper = best;
        out.exact = true;
        return out;
    }
    if (cf && std::isinf(cf->p)) {
        double best = -1.0;
        Index arg = 0;
        for (Index i = 0; i < m; ++i) {
            const double v = cf->w[i] * dom.dual_norm_raw(Z.row(i).transpose());
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        out.lower = out.upper = best;
        out.lower_witness = dom.dual_norming(Z.row(arg).transpose());
        out.exact = true;
        return out;
    }
    if (df && cf && df->p == 2.0 && cf->p == 2.0) {
        const CMat W = cf->w.cast<Complex>().asDiagonal() * Z *
                       df->w.cwiseInverse().cast<Complex>().asDiagonal();
        Eigen::JacobiSVD<CMat> svd(W, Eigen::ComputeThinV);
        out.lower = out.upper = svd.singularValues()[0];
        out.lower_witness = df->w.cwiseInverse().cast<Complex>().asDiagonal() * svd.matrixV().col(0);
        out.exact = true;
        return out;
    }

    // starts: top right singular vector, best coordinate, then random
    std::vector<CVec> starts;
    {
        Eigen::JacobiSVD<CMat> svd(Z, Eigen::ComputeThinV);
        starts.push_back(svd.matrixV().col(0));
        Index jbest = 0;
        double best = -1.0;
        for (Index j = 0; j < n; ++j) {
            const CVec e = CVec::Unit(n, j);
            const double v = cod.norm_raw(Z.col(j)) / dom.norm_raw(e);
            if (v > best) {
                best = v;
                jbest = j;
            }
        }
        starts.push_back(CVec::Unit(n, jbest));
    }
    for (int r = 2; r < opt.restarts; ++r) {
        Rng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(r)));
        starts.push_back(random_complex(rng, n));
    }
    bool all_converged = true;
    double best = -1.0;
    for (const CVec& s : starts) {
        auto run = detail::alternate(Z, dom, cod, s, opt);
        all_converged = all_converged && run.converged;
        if (run.value > best) {
            best = run.value;
            out.lower_witness = run.u;
        }
    }
    out.lower = best;
    out.stagnated = !all_converged;
    out.upper = best * (1 + (all_converged ? opt.slack : opt.stagnation_slack));
    return out;
}

inline CertifiedInterval operator_norm(const LinearMap& T, const OperatorNormOptions& opt = {})
{
    return operator_norm(T.matrix, T.domain, T.codomain, opt);
}

/// sup |<x' (x) y', Z>| over the dual unit balls, for Z of shape dim(E) x dim(F).
inline CertifiedInterval injective_norm(const CMat& Z, const NormedSpace& E, const NormedSpace& F,
                                        const OperatorNormOptions& opt = {})
{
    require_dim(Z.rows(), E.dim(), "injective_norm rows");
    require_dim(Z.cols(), F.dim(), "injective_norm cols");
    return operator_norm(Z, dual_space(F), E, opt);
}

// ---------------------------------------------------------------------------
// diagonal operators

inline CMat diag_matrix(const Vec& lambda) { return lambda.cast<Complex>().asDiagonal(); }

/// The lattice whose norm should equal ||D_lambda : l2^n -> X||.
inline LatticeNorm diag_norm_lattice(const LatticeNorm& X)
{
    return power(dual(power(dual(X), 2.0)), 0.5);
}

struct DiagIdentity
{
    CertifiedInterval lhs;
    double rhs = 0.0;
};

/// Both sides of ||D_lambda : l2^n -> X|| = ||lambda|| in (((X')^2)')^{1/2};
/// requires a 2-concavity constant 1 certificate for X.
inline DiagIdentity diag_norm_identity(const Vec& lambda, const LatticeNorm& X,
                                       const ConstantsRegistry& reg = {},
                                       const OperatorNormOptions& opt = {})
{
    require_dim(lambda.size(), X.dim(), "diag_norm_identity");
    require_finite(lambda, "diag_norm_identity");
    const auto cert = lattice_bound(X, Quantity::M2Concavity, reg);
    if (!cert || !cert->analytic || cert->value > 1.0)
        throw DomainError("diag_norm_identity: no 2-concavity constant 1 certificate for " +
                          X.describe());
    DiagIdentity out;
    out.lhs = operator_norm(diag_matrix(lambda), NormedSpace::euclidean(X.dim()),
                            NormedSpace::from_lattice(X), opt);
    out.rhs = diag_norm_lattice(X).eval(lambda);
    return out;
}

/// Lower estimate of ||D_lambda (x) id : l2^n(E) -> X(E)||.
inline CertifiedInterval tensor_extension_norm(const Vec& lambda, const LatticeNorm& X,
                                               const NormedSpace& E,
                                               const OperatorNormOptions& opt = {})
{
    require_dim(lambda.size(), X.dim(), "tensor_extension_norm");
    const Index n = X.dim(), m = E.dim();
    CMat Z = CMat::Zero(n * m, n * m);
    for (Index k = 0; k < n; ++k) Z.block(k * m, k * m, m, m) = CMat::Identity(m, m) * lambda[k];
    return operator_norm(Z, make_vector_valued(LatticeNorm::lp(n, 2.0), E),
                         make_vector_valued(X, E), opt);
}

} // namespace cplxinterp
