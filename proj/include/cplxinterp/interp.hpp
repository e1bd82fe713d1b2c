#pragma once
//
// Complex interpolation of finite-dimensional couples.
//
// Upper bounds come from explicit analytic functions on the strip
// S = {0 < Re z < 1}.  The strip is mapped onto the unit disk with theta
// going to 0; candidates are
//
//   F(z) = diag(exp(beta (z - theta))) P(w(z)),   P(w) = x + sum_k c_k w^k,
//
// where beta lies in the span of coordinate phase patterns that act
// isometrically on both spaces, so on edge j the boundary norm only depends
// on the disk angle.  Boundary maxima are taken on a grid and corrected by
// a Lipschitz bound, which keeps the value a genuine upper bound.
//
// Lower bounds come from the duality theorem: |<x, x'>| divided by an upper
// bound for x' in the dual couple.
//

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cplxinterp/interval.hpp"
#include "cplxinterp/optim.hpp"
#include "cplxinterp/spaces.hpp"

namespace cplxinterp {

struct InterpParams
{
    int degree = 8;
    /// Boundary samples per edge.
    int grid = 128;
    int restarts = 6;
    /// Soft-max temperatures (on log norms), used in this order.
    std::vector<double> temperatures{0.03, 0.005, 0.001, 0.0002};
    int max_iter = 150;
    std::uint64_t seed = 0x5eed1;
    double restart_scale = 0.3;
    /// Degree used when bounding dual functionals in the dual couple.
    int dual_degree = 1;
    /// Dual functionals per stage that get the dual-couple solve.
    int dual_candidates = 2;
    /// Operator-norm restarts while optimizing (certification uses the
    /// spaces' own options).
    int inner_restarts = 2;
    /// A run that hit the iteration limit still counts as converged when its
    /// last temperature stage moved the log objective by less than this.
    double stall_tol = 1e-4;
    /// Used when building interpolated spaces of lattice couples; the
    /// oracle in interp_norm always evaluates the numeric infimum.
    CalderonOptions calderon = closed_calderon();

    static CalderonOptions closed_calderon()
    {
        CalderonOptions c;
        c.prefer_closed_form = true;
        return c;
    }
};

class InterpCouple
{
public:
    InterpCouple(NormedSpace s0, NormedSpace s1) : s_{std::move(s0), std::move(s1)}
    {
        require_dim(s_[1].dim(), s_[0].dim(), "InterpCouple");
        if (s_[0].field() != s_[1].field())
            throw DomainError("InterpCouple: spaces over different scalar fields");
    }

    const NormedSpace& space(int j) const { return s_[j]; }
    Index dim() const { return s_[0].dim(); }
    bool trivial() const { return s_[0].same_as(s_[1]); }
    bool absolute() const { return s_[0].absolute() && s_[1].absolute(); }
    bool lattice_couple() const
    {
        return s_[0].kind() == NormedSpace::Kind::Lattice &&
               s_[1].kind() == NormedSpace::Kind::Lattice;
    }
    InterpCouple dual() const { return {dual_space(s_[0]), dual_space(s_[1])}; }

    /// Whether both dual spaces can produce norming functionals (needed to
    /// run the upper-bound solver on the dual couple).
    bool dual_solvable() const
    {
        auto ok = [](const NormedSpace& s) {
            using K = NormedSpace::Kind;
            if (s.kind() == K::Operator) return false;
            if (s.kind() == K::Custom) return false;
            if (s.kind() == K::VectorValued || s.kind() == K::Dual) {
                const auto k = s.inner().kind();
                return k != K::Operator && k != K::Custom;
            }
            return true;
        };
        return ok(s_[0]) && ok(s_[1]);
    }

    /// Phase patterns isometric on both spaces.
    Mat phase_basis() const
    {
        const Index n = dim();
        if (absolute()) return Mat::Identity(n, n);
        const Mat B0 = s_[0].phase_basis(), B1 = s_[1].phase_basis();
        if (B0.rows() == B1.rows() && B0.cols() == B1.cols() && (B0 - B1).cwiseAbs().maxCoeff() == 0.0)
            return B0;
        if (s_[0].absolute()) return B1;
        if (s_[1].absolute()) return B0;
        return Mat::Ones(n, 1);
    }

    InterpCouple with_options(const OperatorNormOptions& opt) const
    {
        return {s_[0].with_options(opt), s_[1].with_options(opt)};
    }

private:
    NormedSpace s_[2];
};

namespace conformal {

/// Strip 0 < Re z < 1 onto the unit disk, theta onto 0.
inline Complex to_disk(Complex z, double theta)
{
    const Complex zeta = std::exp(Complex(0, M_PI) * z);
    const Complex zt = std::polar(1.0, M_PI * theta);
    return (zeta - zt) / (zeta - std::conj(zt));
}

inline Complex to_strip(Complex w, double theta)
{
    const Complex zt = std::polar(1.0, M_PI * theta);
    const Complex zeta = (zt - w * std::conj(zt)) / (1.0 - w);
    // the strip image is the closed upper half plane: arg in [0, pi]
    double a = std::arg(zeta);
    if (a < -M_PI / 2) a += 2 * M_PI;
    return Complex(a, -std::log(std::abs(zeta))) / M_PI;
}

/// Edge (Re z) of the boundary point exp(i phi): the arc (0, 2 pi theta)
/// is Re z = 1, the rest Re z = 0.
inline int edge_of_angle(double phi, double theta)
{
    phi = std::fmod(phi, 2 * M_PI);
    if (phi < 0) phi += 2 * M_PI;
    return phi > 0.0 && phi < 2 * M_PI * theta ? 1 : 0;
}

} // namespace conformal

/// Evaluate a candidate at a point of the closed strip (not at w = 1).
inline CVec eval_candidate(const AnalyticCandidate& c, Complex z)
{
    const Complex w = conformal::to_disk(z, c.theta);
    CVec p = CVec::Zero(c.coeffs.front().size());
    Complex wk = 1.0;
    for (const auto& ck : c.coeffs) {
        p += ck * wk;
        wk *= w;
    }
    for (Index i = 0; i < p.size(); ++i) p[i] *= std::exp(c.beta[i] * (z - c.theta));
    return p;
}

struct UpperResult
{
    double value = 0.0;
    AnalyticCandidate candidate;
    bool stagnated = false;
    /// False when some endpoint norm is only a search estimate.
    bool certified = true;
    /// Dual functionals read off the optimized candidate, one group per
    /// degree stage.
    std::vector<std::vector<CVec>> dual_candidates;
};

namespace detail {

inline std::vector<int> degree_stages(int degree)
{
    std::vector<int> s{0};
    for (int d = 1; d <= degree; d *= 2) s.push_back(d);
    if (s.back() != degree) s.push_back(degree);
    return s;
}

class UpperSolver
{
public:
    UpperSolver(const InterpCouple& work, const InterpCouple& cert, const CVec& x, double theta,
                int grid, Mat B)
        : work_(work), cert_(cert), x_(x), theta_(theta), grid_(grid), B_(std::move(B))
    {
        n_ = x.size();
        r_ = B_.cols();
        arc_[1] = 2 * M_PI * theta;
        arc_[0] = 2 * M_PI * (1 - theta);
    }

    Index nvar(int d) const { return r_ + 2 * n_ * d; }

    void set_degree(int d)
    {
        degree_ = d;
        const int m = d == 0 ? 1 : grid_;
        for (int j = 0; j < 2; ++j) {
            pts_[j].assign(static_cast<size_t>(m), {});
            for (int g = 0; g < m; ++g) {
                const double start = j == 1 ? 0.0 : 2 * M_PI * theta_;
                const double phi = start + arc_[j] * (g + 0.5) / m;
                auto& P = pts_[j][static_cast<size_t>(g)];
                P.resize(d + 1);
                const Complex w = std::polar(1.0, phi);
                Complex wk = 1.0;
                for (int k = 0; k <= d; ++k) {
                    P[k] = wk;
                    wk *= w;
                }
            }
        }
    }

    /// Beta and coefficients from the packed variables.
    void unpack(const Vec& v, Vec& beta, std::vector<CVec>& coeffs) const
    {
        beta = B_ * v.head(r_);
        coeffs.assign(static_cast<size_t>(degree_ + 1), CVec());
        coeffs[0] = x_;
        for (int k = 1; k <= degree_; ++k) {
            const Index off = r_ + 2 * n_ * (k - 1);
            coeffs[static_cast<size_t>(k)] =
                (v.segment(off, n_).cast<Complex>() + Complex(0, 1) * v.segment(off + n_, n_).cast<Complex>());
        }
    }

    Vec scale(const Vec& beta, int j) const { return (beta * (j - theta_)).array().exp().matrix(); }

    CVec boundary(const std::vector<CVec>& coeffs, const Vec& D, const std::vector<Complex>& P) const
    {
        CVec p = coeffs[0] * P[0];
        for (size_t k = 1; k < coeffs.size(); ++k) p += coeffs[k] * P[k];
        return (D.cast<Complex>().array() * p.array()).matrix();
    }

    /// Soft-max of log boundary norms and its gradient.
    double objective(const Vec& v, Vec& grad, double tau, std::vector<CVec>* mult = nullptr) const
    {
        Vec beta;
        std::vector<CVec> coeffs;
        unpack(v, beta, coeffs);
        struct Pt
        {
            int edge;
            size_t g;
            double logn;
            CVec J;
            CVec y;
        };
        std::vector<Pt> pts;
        Vec D[2] = {scale(beta, 0), scale(beta, 1)};
        for (int j = 0; j < 2; ++j) {
            for (size_t g = 0; g < pts_[j].size(); ++g) {
                Pt p{j, g, 0.0, CVec(), boundary(coeffs, D[j], pts_[j][g])};
                const double nv = work_.space(j).norm_with_functional(p.y, p.J);
                p.logn = std::log(std::max(nv, 1e-300));
                p.J /= std::max(nv, 1e-300);
                pts.push_back(std::move(p));
            }
        }
        double mx = -kInf;
        for (const auto& p : pts) mx = std::max(mx, p.logn);
        double S = 0.0;
        std::vector<double> wts(pts.size());
        for (size_t i = 0; i < pts.size(); ++i) {
            wts[i] = std::exp((pts[i].logn - mx) / tau);
            S += wts[i];
        }
        for (double& w : wts) w /= S;
        grad.setZero(nvar(degree_));
        if (mult) mult->assign(3, CVec::Zero(n_));
        double edge_w[2] = {0.0, 0.0};
        for (size_t i = 0; i < pts.size(); ++i) {
            const Pt& p = pts[i];
            const double pi = wts[i];
            const double sj = p.edge - theta_;
            // d log N / d a = (j - theta) B^T Re(J . y)
            const Vec reJy = (p.J.array() * p.y.array()).real().matrix();
            grad.head(r_) += pi * sj * (B_.transpose() * reJy);
            const CVec JD = (p.J.array() * D[p.edge].cast<Complex>().array()).matrix();
            for (int k = 1; k <= degree_; ++k) {
                const Index off = r_ + 2 * n_ * (k - 1);
                const CVec t = JD * pts_[p.edge][p.g][static_cast<size_t>(k)];
                grad.segment(off, n_) += pi * t.real();
                grad.segment(off + n_, n_) -= pi * t.imag();
            }
            if (mult) {
                // sensitivity of the value with respect to x (= c_0)
                const double nv = std::exp(p.logn);
                (*mult)[static_cast<size_t>(p.edge)] += pi * nv * JD;
                (*mult)[2] += pi * nv * JD;
                edge_w[p.edge] += pi;
            }
        }
        if (mult) {
            for (int j = 0; j < 2; ++j)
                if (edge_w[j] > 0) (*mult)[static_cast<size_t>(j)] /= edge_w[j];
        }
        return mx + tau * std::log(S);
    }

    /// Exact grid maximum plus Lipschitz correction, in the certifying spaces.
    AnalyticCandidate certify(const Vec& v, bool& certified) const
    {
        AnalyticCandidate c;
        c.theta = theta_;
        c.degree = degree_;
        c.grid = degree_ == 0 ? 1 : grid_;
        unpack(v, c.beta, c.coeffs);
        certified = true;
        for (int j = 0; j < 2; ++j) {
            const NormedSpace& S = cert_.space(j);
            if (S.norm_bound() == Bound::Lower && S.kind() != NormedSpace::Kind::Operator)
                certified = false;
            const Vec D = scale(c.beta, j);
            double mx = 0.0;
            for (const auto& P : pts_[j]) mx = std::max(mx, S.norm_upper(boundary(c.coeffs, D, P)));
            double lip = 0.0;
            for (int k = 1; k <= degree_; ++k)
                lip += k * S.norm_upper((D.cast<Complex>().array() *
                                         c.coeffs[static_cast<size_t>(k)].array()).matrix());
            c.edge_max[j] = mx;
            c.correction[j] = degree_ == 0 ? 0.0 : lip * (arc_[j] / grid_) / 2;
        }
        c.value = std::max(c.edge_max[0] + c.correction[0], c.edge_max[1] + c.correction[1]);
        return c;
    }

    /// Grid maximum of the (degree-0) boundary norms as a convex function of a.
    double degree0_value(const Vec& a, Vec& grad) const
    {
        Vec v = Vec::Zero(nvar(0));
        v.head(r_) = a;
        Vec beta;
        std::vector<CVec> coeffs;
        unpack(v, beta, coeffs);
        double best = -kInf;
        for (int j = 0; j < 2; ++j) {
            const CVec y = boundary(coeffs, scale(beta, j), pts_[j][0]);
            CVec J;
            const double nv = work_.space(j).norm_with_functional(y, J);
            const double ln = std::log(std::max(nv, 1e-300));
            if (ln > best) {
                best = ln;
                const Vec reJy = (J.array() * y.array()).real().matrix() / std::max(nv, 1e-300);
                grad = (j - theta_) * (B_.transpose() * reJy);
            }
        }
        return best;
    }

    Index r() const { return r_; }

private:
    const InterpCouple& work_;
    const InterpCouple& cert_;
    CVec x_;
    double theta_;
    int grid_;
    Mat B_;
    Index n_ = 0, r_ = 0;
    int degree_ = 0;
    double arc_[2];
    std::vector<std::vector<Complex>> pts_[2];
};

} // namespace detail

/// Upper bound for ||x||_theta with its analytic witness.
inline UpperResult interp_upper(const InterpCouple& c, const CVec& x, double theta,
                                const InterpParams& p = {})
{
    require_theta(theta);
    require_dim(x.size(), c.dim(), "interp_upper");
    require_finite(x, "interp_upper");
    if (p.degree < 0 || p.grid < 1) throw DomainError("interp_upper: degree >= 0 and grid >= 1 required");
    UpperResult out;
    const Index n = c.dim();
    const double n0 = c.space(0).norm_upper(x);
    if (x.cwiseAbs().maxCoeff() == 0.0 || n0 == 0.0) {
        out.candidate.theta = theta;
        out.candidate.coeffs = {CVec::Zero(n)};
        out.candidate.beta = Vec::Zero(n);
        return out;
    }
    if (c.trivial()) {
        // the constant function is optimal
        out.value = n0;
        out.candidate.theta = theta;
        out.candidate.grid = 1;
        out.candidate.coeffs = {x};
        out.candidate.beta = Vec::Zero(n);
        out.candidate.edge_max[0] = out.candidate.edge_max[1] = n0;
        out.candidate.value = n0;
        const NormedSpace& S = c.space(0);
        out.certified = !(S.norm_bound() == Bound::Lower && S.kind() != NormedSpace::Kind::Operator);
        return out;
    }
    // work on x / ||x||_0 and rescale at the end
    const CVec xs = x / n0;
    OperatorNormOptions inner;
    inner.restarts = p.inner_restarts;
    const InterpCouple work = c.with_options(inner);
    const Mat B = c.phase_basis();
    detail::UpperSolver solver(work, c, xs, theta, p.grid, B);

    // start: beta = lambda * 1 with lambda balancing the endpoint norms
    Vec a0 = Vec::Zero(B.cols());
    {
        const double m0 = work.space(0).norm_raw(xs), m1 = work.space(1).norm_raw(xs);
        if (m0 > 0 && m1 > 0) {
            const Vec target = Vec::Constant(n, std::log(m0 / m1));
            const Vec sol = B.colPivHouseholderQr().solve(target);
            if ((B * sol - target).norm() <= 1e-9 * (1 + target.norm())) a0 = sol;
        }
    }

    Vec best_v = a0;
    double best = kInf;
    int best_degree = 0;
    AnalyticCandidate best_cand;
    bool all_certified = true;
    const auto stages = detail::degree_stages(p.degree);
    for (int d : stages) {
        solver.set_degree(d);
        Vec start = Vec::Zero(solver.nvar(d));
        start.head(best_v.size()) = best_v;
        std::vector<Vec> starts{start};
        if (d > 0 || !c.absolute()) {
            for (int r = 1; r < p.restarts; ++r) {
                Rng rng(mix_seed(p.seed, static_cast<std::uint64_t>(1000 * d + r)));
                Vec s = start;
                s += p.restart_scale * random_normal(rng, s.size());
                starts.push_back(s);
            }
        }
        bool stage_stagnated = false;
        std::vector<CVec> mult;
        Vec stage_best_v = start;
        double stage_best = kInf;
        for (size_t si = 0; si < starts.size(); ++si) {
            Vec v = starts[si];
            bool last_conv = true;
            if (d == 0 && c.absolute()) {
                // convex in a: central-cut ellipsoid
                optim::EllipsoidOptions eo;
                const double spread = xs.cwiseAbs().maxCoeff() /
                                      std::max(xs.cwiseAbs().minCoeff(), 1e-300);
                eo.radius = 12.0 + 2.0 * std::min(std::log(spread), 60.0);
                eo.gap_tol = 1e-11;
                eo.max_iter = 40000;
                auto fn = [&](const Vec& z, Vec& g) { return solver.degree0_value(a0 + z, g); };
                auto r = optim::ellipsoid(fn, Vec::Zero(a0.size()), eo);
                v = a0 + r.x;
                last_conv = r.converged;
            } else {
                for (double tau : p.temperatures) {
                    optim::BfgsOptions bo;
                    bo.max_iter = p.max_iter;
                    bo.grad_tol = 1e-7;
                    bo.initial_step = 0.05;
                    auto fn = [&](const Vec& z, Vec& g) { return solver.objective(z, g, tau); };
                    Vec g0;
                    const double f0 = solver.objective(v, g0, tau);
                    auto r = optim::bfgs(fn, v, bo);
                    if (r.value < f0) v = r.x;
                    last_conv = r.converged;
                }
                if (!last_conv) {
                    // out of iterations: one continuation decides, measured on
                    // the unsmoothed maximum
                    const double tau = p.temperatures.back();
                    optim::BfgsOptions bo;
                    bo.max_iter = p.max_iter;
                    bo.grad_tol = 1e-7;
                    bo.initial_step = 0.05;
                    auto fn = [&](const Vec& z, Vec& g) { return solver.objective(z, g, tau); };
                    Vec g0;
                    const double f0 = solver.objective(v, g0, tau);
                    const double h0 = solver.objective(v, g0, 1e-12);
                    auto r = optim::bfgs(fn, v, bo);
                    if (r.value < f0) v = r.x;
                    last_conv = r.converged || (h0 - solver.objective(v, g0, 1e-12)) < p.stall_tol;
                }
            }
            bool cert = true;
            AnalyticCandidate cand = solver.certify(v, cert);
            all_certified = all_certified && cert;
            if (cand.value < stage_best) {
                stage_best = cand.value;
                stage_best_v = v;
                stage_stagnated = !last_conv;
            }
            if (cand.value < best) {
                best = cand.value;
                best_cand = cand;
                best_v = v;
                best_degree = d;
            }
        }
        // also certify the incoming point at this degree (monotone in stages)
        {
            bool cert = true;
            AnalyticCandidate cand = solver.certify(start, cert);
            if (cand.value < best) {
                best = cand.value;
                best_cand = cand;
                best_v = start;
                best_degree = d;
            }
        }
        if (d == stages.back()) out.stagnated = stage_stagnated;
        Vec gdummy;
        solver.objective(stage_best_v, gdummy, p.temperatures.back(), &mult);
        // geometric combination of the edge multipliers
        CVec geo(n);
        for (Index i = 0; i < n; ++i) {
            const double m = std::pow(std::abs(mult[0][i]), 1 - theta) * std::pow(std::abs(mult[1][i]), theta);
            const double ph = (1 - theta) * std::arg(mult[0][i]) + theta * std::arg(mult[1][i]);
            geo[i] = std::polar(m, ph);
        }
        out.dual_candidates.push_back({geo, mult[2], mult[0], mult[1]});
        best_v.conservativeResize(solver.nvar(d));
    }
    (void)best_degree;
    out.value = best * n0;
    best_cand.value *= n0;
    for (auto& ck : best_cand.coeffs) ck *= n0;
    best_cand.coeffs.front() = x;
    for (double& e : best_cand.edge_max) e *= n0;
    for (double& e : best_cand.correction) e *= n0;
    out.candidate = best_cand;
    out.certified = all_certified;
    return out;
}

/// Re-evaluate a candidate's certified value in the given couple.
inline double recompute_upper(const InterpCouple& c, const AnalyticCandidate& cand)
{
    const int m = cand.degree == 0 ? 1 : cand.grid;
    const double arc[2] = {2 * M_PI * (1 - cand.theta), 2 * M_PI * cand.theta};
    double value = 0.0;
    for (int j = 0; j < 2; ++j) {
        const Vec D = (cand.beta * (j - cand.theta)).array().exp().matrix();
        double mx = 0.0;
        for (int g = 0; g < m; ++g) {
            const double start = j == 1 ? 0.0 : 2 * M_PI * cand.theta;
            const Complex w = std::polar(1.0, start + arc[j] * (g + 0.5) / m);
            CVec pw = CVec::Zero(c.dim());
            Complex wk = 1.0;
            for (const auto& ck : cand.coeffs) {
                pw += ck * wk;
                wk *= w;
            }
            mx = std::max(mx, c.space(j).norm_upper((D.cast<Complex>().array() * pw.array()).matrix()));
        }
        double lip = 0.0;
        for (size_t k = 1; k < cand.coeffs.size(); ++k)
            lip += static_cast<double>(k) *
                   c.space(j).norm_upper((D.cast<Complex>().array() * cand.coeffs[k].array()).matrix());
        value = std::max(value, mx + (cand.degree == 0 ? 0.0 : lip * (arc[j] / m) / 2));
    }
    return value;
}

/// Upper bound for ||x'|| in the dual couple: log-convexity bound, refined
/// by the candidate solver when the dual spaces allow it.
inline double dual_couple_upper(const InterpCouple& c, const CVec& xp, double theta,
                                const InterpParams& p, bool refine)
{
    const double d0 = c.space(0).dual_norm_upper(xp), d1 = c.space(1).dual_norm_upper(xp);
    double ub = std::pow(d0, 1 - theta) * std::pow(d1, theta);
    if (refine && c.dual_solvable()) {
        InterpParams q = p;
        q.degree = std::min(p.dual_degree, p.degree);
        q.restarts = 1;
        ub = std::min(ub, interp_upper(c.dual(), xp, theta, q).value);
    }
    return ub;
}

/// Lower bound |<x, x'>| / ||x'||_{dual couple} for one functional.
inline double lower_from_functional(const InterpCouple& c, const CVec& x, const CVec& xp,
                                    double theta, const InterpParams& p, bool refine)
{
    const double num = std::abs(pairing(x, xp));
    if (num == 0.0) return 0.0;
    const double den = dual_couple_upper(c, xp, theta, p, refine);
    return den > 0.0 ? num / den : 0.0;
}

struct LowerResult
{
    double value = 0.0;
    CVec witness;
};

namespace detail {

inline LowerResult lower_from_groups(const InterpCouple& c, const CVec& x, double theta,
                                     const InterpParams& p,
                                     const std::vector<std::vector<CVec>>& groups)
{
    LowerResult out;
    out.witness = CVec::Zero(c.dim());
    auto consider = [&](const CVec& xp, double v) {
        if (v > out.value) {
            out.value = v;
            out.witness = xp;
        }
    };
    // norming functionals of x in each endpoint
    for (int j = 0; j < 2; ++j) {
        const CVec xp = c.space(j).norming(x);
        consider(xp, lower_from_functional(c, x, xp, theta, p, true));
    }
    for (const auto& group : groups) {
        std::vector<std::pair<double, size_t>> quick;
        for (size_t i = 0; i < group.size(); ++i)
            quick.push_back({lower_from_functional(c, x, group[i], theta, p, false), i});
        for (const auto& [v, i] : quick) consider(group[i], v);
        std::stable_sort(quick.begin(), quick.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (size_t k = 0; k < quick.size() && static_cast<int>(k) < p.dual_candidates; ++k) {
            const size_t i = quick[k].second;
            consider(group[i], lower_from_functional(c, x, group[i], theta, p, true));
        }
    }
    return out;
}

} // namespace detail

/// Lower bound for ||x||_theta with its dual witness.
inline LowerResult interp_lower(const InterpCouple& c, const CVec& x, double theta,
                                const InterpParams& p = {})
{
    require_theta(theta);
    require_dim(x.size(), c.dim(), "interp_lower");
    if (x.cwiseAbs().maxCoeff() == 0.0) return {0.0, CVec::Zero(c.dim())};
    const UpperResult up = interp_upper(c, x, theta, p);
    return detail::lower_from_groups(c, x, theta, p, up.dual_candidates);
}

struct InterpResult
{
    CertifiedInterval interval;
    /// Calderon-product values for lattice couples: numeric infimum and
    /// closed form (when known).
    std::optional<double> calderon;
    std::optional<double> calderon_closed;
    bool oracle_inside = true;
};

/// Two-sided certified bounds for ||x||_theta.
inline InterpResult interp_norm(const InterpCouple& c, const CVec& x, double theta,
                                const InterpParams& p = {})
{
    require_theta(theta);
    require_dim(x.size(), c.dim(), "interp_norm");
    InterpResult out;
    auto& iv = out.interval;
    if (x.cwiseAbs().maxCoeff() == 0.0) {
        iv.lower = iv.upper = 0.0;
        iv.lower_witness = CVec::Zero(c.dim());
        iv.exact = true;
    } else {
        // degree 0 first: for couples where it is already optimal the
        // interval closes and higher degrees cannot change it
        InterpParams p0 = p;
        p0.degree = 0;
        UpperResult up = interp_upper(c, x, theta, p0);
        LowerResult lo = detail::lower_from_groups(c, x, theta, p, up.dual_candidates);
        if (p.degree > 0 && up.value - lo.value > 1e-9 * up.value) {
            up = interp_upper(c, x, theta, p);
            LowerResult l2 = detail::lower_from_groups(c, x, theta, p, up.dual_candidates);
            if (l2.value > lo.value) lo = l2;
        }
        iv.upper = up.value;
        iv.upper_witness = up.candidate;
        iv.lower = lo.value;
        iv.lower_witness = lo.witness;
        iv.stagnated = up.stagnated;
        if (!up.certified) iv.note = "endpoint norms are search estimates";
        if (iv.lower > iv.upper) {
            // both sides exact up to rounding
            if (iv.lower <= iv.upper * (1 + 1e-9)) iv.lower = iv.upper;
            else iv.note += (iv.note.empty() ? "" : "; ") + std::string("lower exceeds upper");
        }
    }
    if (c.lattice_couple()) {
        CalderonOptions numeric = p.calderon;
        numeric.prefer_closed_form = false;
        const LatticeNorm prod =
            calderon_product(c.space(0).lattice(), c.space(1).lattice(), theta, numeric);
        const Vec ax = x.cwiseAbs();
        out.calderon = prod.eval_abs(ax);
        if (prod.closed_form()) out.calderon_closed = weighted_lp_value(*prod.closed_form(), ax);
        out.oracle_inside = iv.contains(*out.calderon, 1e-6);
    }
    return out;
}

// ---------------------------------------------------------------------------
// interpolated spaces

struct InterpolatedSpace
{
    NormedSpace space;
    /// False when norms are interpolation upper bounds rather than values.
    bool exact = true;
};

namespace detail {

inline std::optional<LatticeNorm> as_lattice(const NormedSpace& s)
{
    if (s.kind() == NormedSpace::Kind::Lattice) return s.lattice();
    if (s.kind() == NormedSpace::Kind::Euclidean) return LatticeNorm::lp(s.dim(), 2.0);
    return std::nullopt;
}

} // namespace detail

/// [E0, E1]_theta, through the Calderon formula when the couple is built
/// from lattices (possibly vector-valued), otherwise through the solver.
inline InterpolatedSpace interpolated_space(const InterpCouple& c, double theta,
                                            const InterpParams& p = {})
{
    require_theta(theta);
    const NormedSpace& s0 = c.space(0);
    const NormedSpace& s1 = c.space(1);
    if (c.trivial()) return {s0, true};
    auto l0 = detail::as_lattice(s0), l1 = detail::as_lattice(s1);
    if (l0 && l1)
        return {NormedSpace::from_lattice(calderon_product(*l0, *l1, theta, p.calderon), s0.field()),
                true};
    using K = NormedSpace::Kind;
    if (s0.kind() == K::VectorValued && s1.kind() == K::VectorValued && s0.blocks() == s1.blocks() &&
        s0.inner().dim() == s1.inner().dim()) {
        const InterpolatedSpace fiber = interpolated_space({s0.inner(), s1.inner()}, theta, p);
        const LatticeNorm X = calderon_product(s0.lattice(), s1.lattice(), theta, p.calderon);
        return {make_vector_valued(X, fiber.space), fiber.exact};
    }
    const InterpCouple cc = c;
    const InterpParams pp = p;
    auto norm = [cc, theta, pp](const CVec& x) { return interp_upper(cc, x, theta, pp).value; };
    auto dnorm = [cc, theta, pp](const CVec& y) {
        return dual_couple_upper(cc, y, theta, pp, true);
    };
    auto s = NormedSpace::custom(c.dim(), norm, dnorm,
                                 "interp[" + s0.describe() + "," + s1.describe() +
                                     "]_" + fmt_num(theta),
                                 s0.field(), c.absolute());
    return {s, false};
}

// ---------------------------------------------------------------------------
// checks

/// [X0(E0), X1(E1)]_theta against (X0^{1-theta} X1^theta)([E0,E1]_theta).
inline std::vector<Comparison> vector_valued_calderon_check(
    const LatticeNorm& X0, const LatticeNorm& X1, const NormedSpace& E0, const NormedSpace& E1,
    double theta, const std::vector<CVec>& samples, const InterpParams& p = {}, double tol = 1e-3)
{
    require_dim(X1.dim(), X0.dim(), "vector_valued_calderon_check");
    require_dim(E1.dim(), E0.dim(), "vector_valued_calderon_check");
    const InterpCouple vv(make_vector_valued(X0, E0), make_vector_valued(X1, E1));
    const InterpCouple fib(E0, E1);
    const LatticeNorm Xt = calderon_product(X0, X1, theta, p.calderon);
    const Index n = X0.dim(), m = E0.dim();
    std::vector<Comparison> out;
    for (const CVec& x : samples) {
        require_dim(x.size(), n * m, "vector_valued_calderon_check sample");
        const auto lhs = interp_norm(vv, x, theta, p).interval;
        Vec lo(n), hi(n);
        for (Index k = 0; k < n; ++k) {
            const CVec xk = x.segment(k * m, m);
            if (fib.trivial()) {
                lo[k] = hi[k] = E0.norm(xk);
            } else {
                const auto r = interp_norm(fib, xk, theta, p).interval;
                lo[k] = r.lower;
                hi[k] = r.upper;
            }
        }
        Comparison cmp;
        cmp.lhs_lo = lhs.lower;
        cmp.lhs_hi = lhs.upper;
        cmp.rhs_lo = Xt.eval_abs(lo);
        cmp.rhs_hi = Xt.eval_abs(hi);
        // distance between the two intervals (negative = overlap)
        const double gap = std::max(cmp.lhs_lo - cmp.rhs_hi * (1 + tol), cmp.rhs_lo * (1 - tol) - cmp.lhs_hi);
        cmp.margin = -gap;
        cmp.status = gap > 1e-12 ? Status::Fail : Status::Pass;
        if (cmp.status == Status::Pass && lhs.stagnated) cmp.status = Status::Stagnated;
        out.push_back(cmp);
    }
    return out;
}

/// ||T : [M0,M1]_theta -> [N0,N1]_theta|| <= ||T|| in [L(M0,N0), L(M1,N1)]_theta.
inline std::vector<Comparison> contraction_check(const InterpCouple& M, const InterpCouple& N,
                                                 double theta, const std::vector<CMat>& ops,
                                                 const InterpParams& p = {}, double tol = 1e-3,
                                                 const OperatorNormOptions& opt = {})
{
    const InterpolatedSpace Mt = interpolated_space(M, theta, p);
    const InterpolatedSpace Nt = interpolated_space(N, theta, p);
    const InterpCouple L(operator_space(M.space(0), N.space(0), opt),
                         operator_space(M.space(1), N.space(1), opt));
    InterpParams q = p;
    q.degree = 0;
    q.restarts = 1;
    std::vector<Comparison> out;
    for (const CMat& T : ops) {
        require_dim(T.rows(), N.dim(), "contraction_check rows");
        require_dim(T.cols(), M.dim(), "contraction_check cols");
        const CVec t = Eigen::Map<const CVec>(T.data(), T.size());
        const auto lhs = operator_norm(T, Mt.space, Nt.space, opt);
        const double u0 = L.space(0).norm_upper(t), u1 = L.space(1).norm_upper(t);
        double rhs = std::pow(u0, 1 - theta) * std::pow(u1, theta);
        bool stagnated = false;
        if (rhs > 0.0) {
            const auto up = interp_upper(L, t, theta, q);
            rhs = std::min(rhs, up.value);
            stagnated = up.stagnated;
        }
        Comparison cmp = compare_le(lhs.lower, lhs.upper, rhs, rhs, tol);
        if (!Mt.exact || !Nt.exact) {
            cmp.note = "interpolated spaces evaluated by the solver";
            if (cmp.status == Status::Fail) cmp.status = Status::Informational;
        }
        if (cmp.status == Status::Pass && (stagnated || lhs.stagnated)) cmp.status = Status::Stagnated;
        out.push_back(cmp);
    }
    return out;
}

// ---------------------------------------------------------------------------
// d_theta estimates

struct DThetaBudget
{
    int samples = 20;
    int local_steps = 6;
    double step = 0.3;
    std::uint64_t seed = 0xd7e7a;
    InterpParams interp{};
    OperatorNormOptions op{};
};

struct DThetaEstimate
{
    double value = 0.0;
    CMat witness;
    /// Interval of the denominator and lower bound of the numerator at the witness.
    double numerator_lower = 0.0;
    CertifiedInterval denominator;
    bool exhausted = false;
    bool exact_denominator = true;
};

namespace detail {

/// Lower bound for ||t|| in the couple L using functionals read off the
/// endpoint norms; the dual norms are upper bounds.
inline double operator_couple_lower(const InterpCouple& L, const CVec& t, double theta)
{
    double best = 0.0;
    CVec f[2];
    for (int j = 0; j < 2; ++j) L.space(j).norm_with_functional(t, f[j]);
    std::vector<CVec> cands{f[0], f[1]};
    CVec geo(t.size());
    for (Index i = 0; i < t.size(); ++i)
        geo[i] = std::polar(std::pow(std::abs(f[0][i]), 1 - theta) * std::pow(std::abs(f[1][i]), theta),
                            (1 - theta) * std::arg(f[0][i]) + theta * std::arg(f[1][i]));
    cands.push_back(geo);
    cands.push_back(f[0] * (1 - theta) + f[1] * theta);
    for (const CVec& s : cands) {
        const double num = std::abs(pairing(t, s));
        const double den = std::pow(L.space(0).dual_norm_upper(s), 1 - theta) *
                           std::pow(L.space(1).dual_norm_upper(s), theta);
        if (den > 0) best = std::max(best, num / den);
    }
    return best;
}

template <class Eval>
DThetaEstimate ratio_search(Index rows, Index cols, const DThetaBudget& b, Eval eval)
{
    DThetaEstimate best;
    best.value = -1.0;
    Rng rng(b.seed);
    auto random_mat = [&](Rng& r) {
        CMat Z(rows, cols);
        for (Index j = 0; j < cols; ++j) Z.col(j) = random_complex(r, rows);
        return Z;
    };
    auto consider = [&](const CMat& Z) {
        DThetaEstimate e = eval(Z);
        if (e.value > best.value) best = e;
    };
    // rank-one seeds, then generic samples
    for (int s = 0; s < b.samples; ++s) {
        Rng r(mix_seed(b.seed, static_cast<std::uint64_t>(s)));
        if (s < b.samples / 4) {
            const CVec u = random_complex(r, rows), v = random_complex(r, cols);
            consider(u * v.transpose());
        } else {
            consider(random_mat(r));
        }
    }
    // local improvement around the best witness
    double step = b.step;
    for (int k = 0; k < b.local_steps && best.witness.size() > 0; ++k) {
        Rng r(mix_seed(b.seed ^ 0x10ca1, static_cast<std::uint64_t>(k)));
        const CMat trial = best.witness + step * best.witness.norm() / std::sqrt(double(rows * cols)) * random_mat(r);
        const double before = best.value;
        consider(trial);
        if (best.value <= before) step *= 0.5;
    }
    best.exhausted = b.local_steps > 0 && step > 1e-3 * b.step;
    (void)rng;
    return best;
}

} // namespace detail

/// Lower estimate of d_theta[M0, M1] restricted to operators on l2^k.
inline DThetaEstimate d_theta_estimate(const InterpCouple& M, double theta, Index k,
                                       const DThetaBudget& b = {})
{
    require_theta(theta);
    if (k < 1) throw DomainError("d_theta_estimate: k must be positive");
    const auto l2 = NormedSpace::euclidean(k, M.space(0).field());
    const InterpolatedSpace Mt = interpolated_space(M, theta, b.interp);
    const InterpCouple L(operator_space(l2, M.space(0), b.op), operator_space(l2, M.space(1), b.op));
    auto eval = [&](const CMat& T) {
        DThetaEstimate e;
        e.witness = T;
        e.denominator = operator_norm(T, l2, Mt.space, b.op);
        const CVec t = Eigen::Map<const CVec>(T.data(), T.size());
        // ||T||_{L(l2, M_theta)} <= ||T|| in the interpolated operator couple
        e.numerator_lower = std::max(e.denominator.lower, detail::operator_couple_lower(L, t, theta));
        e.value = e.denominator.upper > 0 ? e.numerator_lower / e.denominator.upper : 0.0;
        e.exact_denominator = Mt.exact;
        return e;
    };
    return detail::ratio_search(M.dim(), k, b, eval);
}

/// Lower estimate of d_theta[M0, M1; N0, N1] over tensors of dim(M) x dim(N).
inline DThetaEstimate d_theta_pair_estimate(const InterpCouple& M, const InterpCouple& N,
                                            double theta, const DThetaBudget& b = {})
{
    require_theta(theta);
    const InterpolatedSpace Mt = interpolated_space(M, theta, b.interp);
    const InterpolatedSpace Nt = interpolated_space(N, theta, b.interp);
    const InterpCouple Eps(injective_space(M.space(0), N.space(0), b.op),
                           injective_space(M.space(1), N.space(1), b.op));
    auto eval = [&](const CMat& Z) {
        DThetaEstimate e;
        e.witness = Z;
        e.denominator = injective_norm(Z, Mt.space, Nt.space, b.op);
        const CVec z = Eigen::Map<const CVec>(Z.data(), Z.size());
        e.numerator_lower = std::max(e.denominator.lower, detail::operator_couple_lower(Eps, z, theta));
        e.value = e.denominator.upper > 0 ? e.numerator_lower / e.denominator.upper : 0.0;
        e.exact_denominator = Mt.exact && Nt.exact;
        return e;
    };
    return detail::ratio_search(M.dim(), N.dim(), b, eval);
}

} // namespace cplxinterp
