#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cplxinterp/common.hpp"

namespace cplxinterp {

/// Analytic function on the strip 0 < Re z < 1 used as an upper-bound witness:
///   F(z) = diag(exp(beta (z - theta))) * sum_k coeffs[k] w(z)^k,
/// where w maps the strip onto the unit disk with w(theta) = 0.
struct AnalyticCandidate
{
    double theta = 0.5;
    int degree = 0;
    std::vector<CVec> coeffs;
    Vec beta;
    int grid = 0;
    /// Additive Lipschitz correction applied on each edge.
    double correction[2] = {0.0, 0.0};
    /// Largest sampled boundary norm on each edge.
    double edge_max[2] = {0.0, 0.0};
    double value = 0.0;
};

struct CertifiedInterval
{
    double lower = 0.0;
    double upper = kInf;
    /// Vector attaining the lower bound: a maximizing point for sup-type
    /// quantities, a dual functional for interpolation norms.
    CVec lower_witness;
    std::optional<AnalyticCandidate> upper_witness;
    bool exact = false;
    bool stagnated = false;
    std::string note;

    double mid() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
    bool contains(double v, double tol = 0.0) const
    {
        return v >= lower * (1 - tol) && v <= upper * (1 + tol);
    }
};

/// One side-by-side comparison: for inequalities lhs <= rhs the margin is
/// rhs_hi - lhs_lo; a FAIL needs lhs_lo above rhs_hi beyond tolerance.
struct Comparison
{
    double lhs_lo = 0.0, lhs_hi = 0.0;
    double rhs_lo = 0.0, rhs_hi = 0.0;
    double margin = 0.0;
    Status status = Status::Pass;
    std::string note;
};

/// Compare a lower certificate of the left side against an upper value of
/// the right side with relative tolerance tol.
inline Comparison compare_le(double lhs_lo, double lhs_hi, double rhs_lo, double rhs_hi, double tol)
{
    Comparison c{lhs_lo, lhs_hi, rhs_lo, rhs_hi, rhs_hi - lhs_lo, Status::Pass, ""};
    if (lhs_lo > rhs_hi * (1 + tol) + 1e-12) c.status = Status::Fail;
    return c;
}

} // namespace cplxinterp
