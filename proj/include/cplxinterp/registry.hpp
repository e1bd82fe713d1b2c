#pragma once
//
// Declared upper bounds for geometric constants (type 2, cotype 2,
// 2-concavity, 2-convexity).  Only bounds forced by classical inequalities
// ship with the library; anything else has to be supplied with provenance.
//

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>

namespace cplxinterp {

enum class Quantity { T2, C2, M2Concavity, M2Convexity };

inline const char* to_string(Quantity q)
{
    switch (q) {
    case Quantity::T2: return "T2";
    case Quantity::C2: return "C2";
    case Quantity::M2Concavity: return "M2_concavity";
    case Quantity::M2Convexity: return "M2_convexity";
    }
    return "?";
}

inline std::optional<Quantity> quantity_from_string(const std::string& s)
{
    if (s == "T2") return Quantity::T2;
    if (s == "C2") return Quantity::C2;
    if (s == "M2_concavity") return Quantity::M2Concavity;
    if (s == "M2_convexity") return Quantity::M2Convexity;
    return std::nullopt;
}

struct ConstantBound
{
    double value = 1.0;
    std::string provenance;
    /// False for user-declared values without an analytic argument; such
    /// bounds never decide PASS/FAIL.
    bool analytic = false;
};

/// A bound together with a flag telling whether it may gate a verdict.
struct BoundLookup
{
    double value = 1.0;
    bool analytic = true;
    std::string provenance;
};

/// Combine bounds multiplicatively; the result is analytic only if every
/// ingredient is.
inline BoundLookup combine(const BoundLookup& a, const BoundLookup& b, double ea = 1.0,
                           double eb = 1.0)
{
    return {std::pow(a.value, ea) * std::pow(b.value, eb), a.analytic && b.analytic,
            a.provenance + " * " + b.provenance};
}

class ConstantsRegistry
{
public:
    void declare(const std::string& key, Quantity q, ConstantBound b)
    {
        entries_[{key, q}] = std::move(b);
    }

    std::optional<ConstantBound> find(const std::string& key, Quantity q) const
    {
        auto it = entries_.find({key, q});
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::pair<std::string, Quantity>, ConstantBound> entries_;
};

} // namespace cplxinterp
