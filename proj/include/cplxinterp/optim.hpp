#pragma once
//
// Thin wrappers around the GSL multidimensional minimizers.
//
// All callers in this library minimize small (< 200 parameter) smooth or
// piecewise-smooth objectives; the wrappers turn GSL's C callback interface
// into std::function and fix deterministic iteration budgets.
//

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace cplxinterp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

namespace optim {

struct Result
{
    Vec x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

struct NelderMeadOptions
{
    double initial_step = 0.5;
    double size_tol = 1e-10;
    int max_iter = 4000;
};

struct BfgsOptions
{
    double initial_step = 0.1;
    double line_tol = 0.1;
    double grad_tol = 1e-10;
    int max_iter = 500;
};

using Objective = std::function<double(const Vec&)>;
/// Evaluates the objective and writes its gradient into the second argument.
using ObjectiveWithGradient = std::function<double(const Vec&, Vec&)>;

namespace detail {

inline void silence_gsl()
{
    static const bool once = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)once;
}

inline Eigen::Map<const Vec, 0, Eigen::InnerStride<>> view(const gsl_vector* v)
{
    return {v->data, static_cast<Eigen::Index>(v->size),
            Eigen::InnerStride<>(static_cast<Eigen::Index>(v->stride))};
}

inline double guard(double v)
{
    return std::isfinite(v) ? v : std::numeric_limits<double>::max() / 4;
}

struct FdfBridge
{
    const ObjectiveWithGradient* fn;
    Vec x;
    Vec g;

    static double f(const gsl_vector* v, void* p)
    {
        auto* self = static_cast<FdfBridge*>(p);
        self->x = view(v);
        self->g.resize(self->x.size());
        return guard((*self->fn)(self->x, self->g));
    }
    static void df(const gsl_vector* v, void* p, gsl_vector* out)
    {
        double unused;
        fdf(v, p, &unused, out);
    }
    static void fdf(const gsl_vector* v, void* p, double* val, gsl_vector* out)
    {
        auto* self = static_cast<FdfBridge*>(p);
        self->x = view(v);
        self->g.setZero(self->x.size());
        *val = guard((*self->fn)(self->x, self->g));
        for (Eigen::Index i = 0; i < self->g.size(); ++i)
            gsl_vector_set(out, static_cast<size_t>(i),
                           std::isfinite(self->g[i]) ? self->g[i] : 0.0);
    }
};

} // namespace detail

/// Derivative-free simplex minimization (GSL nmsimplex2).
inline Result nelder_mead(const Objective& fn, const Vec& x0,
                          const NelderMeadOptions& opt = {})
{
    detail::silence_gsl();
    const auto n = static_cast<size_t>(x0.size());
    Result out;
    if (n == 0) {
        out.x = x0;
        out.value = fn(x0);
        out.converged = true;
        return out;
    }
    struct Bridge
    {
        const Objective* fn;
        Vec x;
        static double f(const gsl_vector* v, void* p)
        {
            auto* self = static_cast<Bridge*>(p);
            self->x = detail::view(v);
            return detail::guard((*self->fn)(self->x));
        }
    } bridge{&fn, Vec()};

    gsl_multimin_function func{&Bridge::f, n, &bridge};
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    for (size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0[static_cast<Eigen::Index>(i)]);
    gsl_vector_set_all(step, opt.initial_step);

    gsl_multimin_fminimizer* s =
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &func, x, step);
    int status = GSL_CONTINUE;
    int iter = 0;
    while (status == GSL_CONTINUE && iter < opt.max_iter) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.size_tol);
    }
    out.x = detail::view(s->x);
    out.value = s->fval;
    out.iterations = iter;
    out.converged = status == GSL_SUCCESS;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return out;
}

/// Quasi-Newton minimization (GSL vector_bfgs2) with a user gradient.
inline Result bfgs(const ObjectiveWithGradient& fn, const Vec& x0,
                   const BfgsOptions& opt = {})
{
    detail::silence_gsl();
    const auto n = static_cast<size_t>(x0.size());
    Result out;
    Vec g(x0.size());
    if (n == 0) {
        out.x = x0;
        out.value = fn(x0, g);
        out.converged = true;
        return out;
    }
    detail::FdfBridge bridge{&fn, Vec(), Vec()};
    gsl_multimin_function_fdf func{&detail::FdfBridge::f, &detail::FdfBridge::df,
                                   &detail::FdfBridge::fdf, n, &bridge};
    gsl_vector* x = gsl_vector_alloc(n);
    for (size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0[static_cast<Eigen::Index>(i)]);
    gsl_multimin_fdfminimizer* s =
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
    gsl_multimin_fdfminimizer_set(s, &func, x, opt.initial_step, opt.line_tol);

    // Keep the best point seen: the line search may end on a worse point
    // when it gives up.
    out.x = detail::view(s->x);
    out.value = s->f;
    int status = GSL_CONTINUE;
    int iter = 0;
    while (status == GSL_CONTINUE && iter < opt.max_iter) {
        ++iter;
        const int st = gsl_multimin_fdfminimizer_iterate(s);
        if (s->f < out.value) {
            out.value = s->f;
            out.x = detail::view(s->x);
        }
        if (st != GSL_SUCCESS) {
            // no descent left along the search direction: stationary to
            // working precision, as opposed to running out of iterations
            if (st == GSL_ENOPROG) status = GSL_SUCCESS;
            break;
        }
        status = gsl_multimin_test_gradient(s->gradient, opt.grad_tol);
    }
    out.iterations = iter;
    out.converged = status == GSL_SUCCESS;
    gsl_multimin_fdfminimizer_free(s);
    gsl_vector_free(x);
    return out;
}

struct EllipsoidOptions
{
    double radius = 10.0;
    /// Stop once the certified gap bound sqrt(g' P g) drops below this.
    double gap_tol = 1e-12;
    int max_iter = 20000;
};

/// Returns a violated constraint's gradient a (feasible set {x : a.x <= b})
/// or false when x is feasible.
using FeasibilityCut = std::function<bool(const Vec&, Vec&)>;

/// Central-cut ellipsoid method for convex, possibly nonsmooth objectives.
/// The oracle returns f(x) and writes a subgradient.  Convergence is
/// declared when the gap bound certified by the current ellipsoid is below
/// gap_tol (valid as long as the minimizer lies in the initial ball).
inline Result ellipsoid(const ObjectiveWithGradient& fn, const Vec& x0,
                        const EllipsoidOptions& opt = {},
                        const FeasibilityCut& cut = nullptr)
{
    const Index m = x0.size();
    Result out;
    Vec g(m);
    if (m == 0) {
        out.x = x0;
        out.value = fn(x0, g);
        out.converged = true;
        return out;
    }
    Vec x = x0;
    Mat P = Mat::Identity(m, m) * opt.radius * opt.radius;
    const double md = static_cast<double>(m);
    const double expand = m > 1 ? md * md / (md * md - 1.0) : 1.0;
    out.x = x0;
    for (int it = 0; it < opt.max_iter; ++it) {
        out.iterations = it + 1;
        bool objective_cut = true;
        if (cut && cut(x, g)) {
            objective_cut = false;
        } else {
            const double f = fn(x, g);
            if (f < out.value) {
                out.value = f;
                out.x = x;
            }
        }
        const Vec Pg = P * g;
        const double gPg = g.dot(Pg);
        if (!(gPg > 0.0) || !std::isfinite(gPg)) {
            // zero subgradient: x is optimal
            out.converged = objective_cut;
            if (objective_cut) break;
            break;
        }
        const double gap = std::sqrt(gPg);
        if (objective_cut && gap < opt.gap_tol) {
            out.converged = true;
            break;
        }
        const Vec gt = Pg / gap;
        if (m == 1) {
            // bisection
            x -= gt / 2.0;
            P *= 0.25;
        } else {
            x -= gt / (md + 1.0);
            P = expand * (P - (2.0 / (md + 1.0)) * gt * gt.transpose());
            P = 0.5 * (P + P.transpose()).eval();
        }
    }
    return out;
}

/// Central finite-difference gradient; used where no analytic gradient exists.
inline Vec fd_gradient(const Objective& fn, const Vec& x, double h = 1e-6)
{
    Vec g(x.size());
    Vec y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double hi = h * std::max(1.0, std::abs(x[i]));
        y[i] = x[i] + hi;
        const double fp = fn(y);
        y[i] = x[i] - hi;
        const double fm = fn(y);
        y[i] = x[i];
        g[i] = (fp - fm) / (2 * hi);
    }
    return g;
}

} // namespace optim
} // namespace cplxinterp
