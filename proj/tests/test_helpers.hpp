#pragma once

#include <cmath>

#include "cplxinterp/common.hpp"

namespace testutil {

inline cplxinterp::Vec v(std::initializer_list<double> xs)
{
    cplxinterp::Vec out(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) out[i++] = x;
    return out;
}

inline bool close_rel(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-12});
}

} // namespace testutil
