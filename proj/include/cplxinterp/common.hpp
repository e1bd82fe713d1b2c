#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cplxinterp/optim.hpp"

namespace cplxinterp {

class DimensionError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative tolerance for comparisons against closed forms.
inline constexpr double kTolClosed = 1e-6;
/// Relative tolerance for comparisons involving optimizer-backed values.
inline constexpr double kTolOptim = 1e-3;

inline void require_dim(Index got, Index want, const char* what)
{
    if (got != want) {
        std::ostringstream os;
        os << what << ": dimension mismatch (got " << got << ", expected " << want << ")";
        throw DimensionError(os.str());
    }
}

template <class V>
void require_finite(const V& x, const char* what)
{
    for (Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(std::abs(x[i])))
            throw DomainError(std::string(what) + ": non-finite entry");
    }
}

inline void require_theta(double theta)
{
    if (!(theta > 0.0 && theta < 1.0))
        throw DomainError("interpolation parameter must lie in (0,1)");
}

/// Deterministic generator; every search derives its stream from an explicit seed.
using Rng = std::mt19937_64;

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    // splitmix64 step over the pair
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Vec random_normal(Rng& rng, Index n)
{
    std::normal_distribution<double> nd;
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

inline CVec random_complex(Rng& rng, Index n)
{
    std::normal_distribution<double> nd;
    CVec v(n);
    for (Index i = 0; i < n; ++i) v[i] = Complex(nd(rng), nd(rng));
    return v;
}

/// Outcome of a single verification record.
enum class Status { Pass, Fail, Skipped, Informational, Stagnated };

inline const char* to_string(Status s)
{
    switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Skipped: return "SKIPPED";
    case Status::Informational: return "INFORMATIONAL";
    case Status::Stagnated: return "STAGNATED";
    }
    return "?";
}

inline double rel_diff(double a, double b)
{
    const double s = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / s;
}

inline std::string fmt_num(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace cplxinterp
