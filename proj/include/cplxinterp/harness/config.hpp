#pragma once
//
// Instance configuration: a JSON document with a fixed schema (see
// configs/README.md).  Unknown keys are errors.
//

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cplxinterp/constants.hpp"
#include "cplxinterp/factorize.hpp"
#include "cplxinterp/interp.hpp"

namespace cplxinterp::harness {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A lattice or space description kept next to the object it builds, so
/// instance ids can be derived from it.
struct SpaceSpec
{
    NormedSpace space;
    std::optional<LatticeNorm> lattice;
};

struct PairInstance
{
    std::string id;
    LatticeNorm x0, x1;
    NormedSpace e0, e1;
};

struct QuadInstance
{
    std::string id;
    LatticeNorm x0, x1, y0, y1;
    NormedSpace e0, e1, f0, f1;
};

struct CoupleInstance
{
    std::string id;
    NormedSpace m0, m1, n0, n1;
};

struct LatticeSpaceInstance
{
    std::string id;
    LatticeNorm x;
    NormedSpace e;
};

struct Lemma4Config
{
    std::vector<double> p{1.0, 4.0 / 3.0, 2.0};
    std::vector<Index> dims{2, 3, 4};
    std::vector<double> theta{0.25, 0.5, 0.75};
    std::vector<double> r{0.5, 1.0};
    int samples = 20;
};

struct DThetaConfig
{
    std::vector<PairInstance> instances;
    std::vector<double> theta{0.5};
    std::vector<Index> k{2};
    /// Dimensions n of the (l1^n, l2^n) family (empty: none).
    std::vector<Index> l1l2_dims;
    DThetaBudget budget{};
};

struct PairEstimateConfig
{
    std::vector<QuadInstance> instances;
    std::vector<double> theta{0.5};
    DThetaBudget budget{};
};

struct TheoremConfig
{
    std::vector<QuadInstance> instances;
    std::vector<double> theta{0.5};
    int samples = 50;
    InterpParams interp{};
    std::vector<CoupleInstance> contraction;
    int contraction_samples = 20;
};

struct FactorizationConfig
{
    std::vector<LatticeSpaceInstance> mr;
    int mr_samples = 30;
    Index mr_cols = 2;
    std::vector<CoupleInstance> lemma9;
    int lemma9_samples = 20;
    std::vector<double> theta{0.5};
    std::vector<LatticeSpaceInstance> lemma10;
    ConstantBudget constant_budget{};
    std::vector<NormedSpace> kahane_spaces;
    std::vector<int> kahane_k{1, 2, 4, 8, 14};
    int kahane_families = 3;
    FactorBudget budget{};
};

struct Config
{
    InterpParams interp{};
    double tol_equality = kTolOptim;
    double tol_inequality = kTolOptim;
    ConstantsRegistry registry;
    Lemma4Config lemma4;
    DThetaConfig prop3;
    DThetaConfig cor6_7;
    PairEstimateConfig prop8;
    TheoremConfig theorem;
    FactorizationConfig factorization;
};

namespace detail {

/// Object reader that rejects keys it was not asked about.
class Obj
{
public:
    Obj(const Json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    const Json& at(const std::string& k)
    {
        seen_.insert(k);
        if (!j_.contains(k)) throw ConfigError(path_ + ": missing key '" + k + "'");
        return j_.at(k);
    }

    const Json* get(const std::string& k)
    {
        seen_.insert(k);
        return j_.contains(k) ? &j_.at(k) : nullptr;
    }

    std::string path(const std::string& k) const { return path_ + "." + k; }

    void done() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline double number(const Json& j, const std::string& path)
{
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path + ": not finite");
    return v;
}

inline int integer(const Json& j, const std::string& path, int lo = 0)
{
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > 1000000000) throw ConfigError(path + ": out of range");
    return static_cast<int>(v);
}

/// An exponent: a number >= 1, "inf", or a fraction "a/b".
inline double exponent(const Json& j, const std::string& path)
{
    double p = 0.0;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        const auto slash = s.find('/');
        try {
            if (slash == std::string::npos) throw ConfigError("");
            size_t used = 0;
            const double a = std::stod(s.substr(0, slash), &used);
            if (used != slash) throw ConfigError("");
            const std::string rest = s.substr(slash + 1);
            const double b = std::stod(rest, &used);
            if (used != rest.size() || b == 0.0) throw ConfigError("");
            p = a / b;
        } catch (const std::exception&) {
            throw ConfigError(path + ": bad exponent '" + s + "'");
        }
    } else {
        p = number(j, path);
    }
    if (!(p >= 1.0)) throw ConfigError(path + ": exponent must be >= 1");
    return p;
}

inline double theta_value(const Json& j, const std::string& path)
{
    const double t = number(j, path);
    if (!(t > 0.0 && t < 1.0)) throw ConfigError(path + ": theta must lie in (0,1)");
    return t;
}

template <class F>
auto list(const Json& j, const std::string& path, F each)
{
    if (!j.is_array()) throw ConfigError(path + ": expected an array");
    std::vector<decltype(each(j, path))> out;
    for (size_t i = 0; i < j.size(); ++i) out.push_back(each(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::vector<double> thetas(const Json& j, const std::string& path)
{
    return list(j, path, theta_value);
}

inline std::vector<Index> dims(const Json& j, const std::string& path)
{
    return list(j, path, [](const Json& x, const std::string& p) { return Index(integer(x, p, 1)); });
}

inline Vec vector_of(const Json& j, const std::string& path)
{
    const auto v = list(j, path, number);
    return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

/// {"family": "lp"|"wlp"|"custom"|"euclidean", ...}; euclidean only when
/// a space is allowed.
inline SpaceSpec space_spec(const Json& j, const std::string& path, bool allow_space)
{
    Obj o(j, path);
    const Json& fam = o.at("family");
    if (!fam.is_string()) throw ConfigError(path + ".family: expected a string");
    const std::string f = fam.get<std::string>();
    SpaceSpec out{NormedSpace::euclidean(1), std::nullopt};
    try {
        if (f == "lp") {
            const double p = exponent(o.at("p"), o.path("p"));
            out.lattice = LatticeNorm::lp(integer(o.at("n"), o.path("n"), 1), p);
        } else if (f == "wlp") {
            const double p = exponent(o.at("p"), o.path("p"));
            out.lattice = LatticeNorm::weighted_lp(p, vector_of(o.at("w"), o.path("w")));
        } else if (f == "custom") {
            const Json& g = o.at("generators");
            const auto cols = list(g, o.path("generators"), vector_of);
            if (cols.empty()) throw ConfigError(path + ".generators: empty");
            Mat M(cols[0].size(), static_cast<Index>(cols.size()));
            for (size_t c = 0; c < cols.size(); ++c) {
                if (cols[c].size() != M.rows()) throw ConfigError(path + ".generators: ragged");
                M.col(static_cast<Index>(c)) = cols[c];
            }
            out.lattice = LatticeNorm::custom(M);
        } else if (f == "euclidean" && allow_space) {
            out.space = NormedSpace::euclidean(integer(o.at("n"), o.path("n"), 1));
        } else {
            throw ConfigError(path + ": unknown family '" + f + "'");
        }
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    o.done();
    if (out.lattice) out.space = NormedSpace::from_lattice(*out.lattice);
    return out;
}

inline LatticeNorm lattice(const Json& j, const std::string& path)
{
    return *space_spec(j, path, false).lattice;
}

inline NormedSpace space(const Json& j, const std::string& path) { return space_spec(j, path, true).space; }

inline std::string id_of(Obj& o)
{
    const Json& id = o.at("id");
    if (!id.is_string() || id.get<std::string>().empty()) throw ConfigError(o.path("id") + ": expected a name");
    return id.get<std::string>();
}

inline PairInstance pair_instance(const Json& j, const std::string& path)
{
    Obj o(j, path);
    PairInstance r{id_of(o), lattice(o.at("x0"), o.path("x0")), lattice(o.at("x1"), o.path("x1")),
                   space(o.at("e0"), o.path("e0")), space(o.at("e1"), o.path("e1"))};
    o.done();
    if (r.x0.dim() != r.x1.dim()) throw ConfigError(path + ": lattice dimensions differ");
    if (r.e0.dim() != r.e1.dim()) throw ConfigError(path + ": fiber dimensions differ");
    return r;
}

inline QuadInstance quad_instance(const Json& j, const std::string& path)
{
    Obj o(j, path);
    QuadInstance r{id_of(o),
                   lattice(o.at("x0"), o.path("x0")),
                   lattice(o.at("x1"), o.path("x1")),
                   lattice(o.at("y0"), o.path("y0")),
                   lattice(o.at("y1"), o.path("y1")),
                   space(o.at("e0"), o.path("e0")),
                   space(o.at("e1"), o.path("e1")),
                   space(o.at("f0"), o.path("f0")),
                   space(o.at("f1"), o.path("f1"))};
    o.done();
    if (r.x0.dim() != r.x1.dim() || r.y0.dim() != r.y1.dim() || r.e0.dim() != r.e1.dim() ||
        r.f0.dim() != r.f1.dim())
        throw ConfigError(path + ": couple dimensions differ");
    return r;
}

inline CoupleInstance couple_instance(const Json& j, const std::string& path, const char* a, const char* b,
                                      const char* c, const char* d)
{
    Obj o(j, path);
    CoupleInstance r{id_of(o), space(o.at(a), o.path(a)), space(o.at(b), o.path(b)), space(o.at(c), o.path(c)),
                     space(o.at(d), o.path(d))};
    o.done();
    if (r.m0.dim() != r.m1.dim() || r.n0.dim() != r.n1.dim())
        throw ConfigError(path + ": couple dimensions differ");
    return r;
}

inline LatticeSpaceInstance lattice_space_instance(const Json& j, const std::string& path)
{
    Obj o(j, path);
    LatticeSpaceInstance r{id_of(o), lattice(o.at("x"), o.path("x")), space(o.at("e"), o.path("e"))};
    o.done();
    return r;
}

inline void read_interp(const Json& j, const std::string& path, InterpParams& p)
{
    Obj o(j, path);
    if (auto v = o.get("degree")) p.degree = integer(*v, o.path("degree"));
    if (auto v = o.get("grid")) p.grid = integer(*v, o.path("grid"), 1);
    if (auto v = o.get("restarts")) p.restarts = integer(*v, o.path("restarts"), 1);
    if (auto v = o.get("max_iter")) p.max_iter = integer(*v, o.path("max_iter"), 1);
    if (auto v = o.get("dual_degree")) p.dual_degree = integer(*v, o.path("dual_degree"));
    if (auto v = o.get("stall_tol")) {
        p.stall_tol = number(*v, o.path("stall_tol"));
        if (!(p.stall_tol >= 0)) throw ConfigError(o.path("stall_tol") + ": must be non-negative");
    }
    if (auto v = o.get("temperatures")) {
        p.temperatures = list(*v, o.path("temperatures"), number);
        for (double t : p.temperatures)
            if (!(t > 0)) throw ConfigError(o.path("temperatures") + ": must be positive");
        if (p.temperatures.empty()) throw ConfigError(o.path("temperatures") + ": empty");
    }
    o.done();
}

inline void read_dtheta_budget(const Json& j, const std::string& path, DThetaBudget& b)
{
    Obj o(j, path);
    if (auto v = o.get("samples")) b.samples = integer(*v, o.path("samples"), 1);
    if (auto v = o.get("local_steps")) b.local_steps = integer(*v, o.path("local_steps"));
    o.done();
}

inline void read_dtheta(const Json& j, const std::string& path, DThetaConfig& c, bool family)
{
    Obj o(j, path);
    if (auto v = o.get("instances")) c.instances = list(*v, o.path("instances"), pair_instance);
    if (auto v = o.get("theta")) c.theta = thetas(*v, o.path("theta"));
    if (auto v = o.get("k")) c.k = dims(*v, o.path("k"));
    if (auto v = o.get("budget")) read_dtheta_budget(*v, o.path("budget"), c.budget);
    if (family) {
        if (auto v = o.get("l1l2_dims")) c.l1l2_dims = dims(*v, o.path("l1l2_dims"));
    }
    o.done();
}

inline void read_registry(const Json& j, const std::string& path, ConstantsRegistry& reg)
{
    for (size_t i = 0; i < j.size() || !j.is_array(); ++i) {
        if (!j.is_array()) throw ConfigError(path + ": expected an array");
        const std::string p = path + "[" + std::to_string(i) + "]";
        Obj o(j[i], p);
        const Json& key = o.at("space");
        const Json& q = o.at("quantity");
        if (!key.is_string() || !q.is_string()) throw ConfigError(p + ": space and quantity must be strings");
        const auto quantity = quantity_from_string(q.get<std::string>());
        if (!quantity) throw ConfigError(p + ".quantity: unknown '" + q.get<std::string>() + "'");
        ConstantBound b;
        b.value = number(o.at("value"), o.path("value"));
        if (!(b.value >= 1.0)) throw ConfigError(p + ".value: constants are at least 1");
        const Json& prov = o.at("provenance");
        if (!prov.is_string() || prov.get<std::string>().empty())
            throw ConfigError(p + ".provenance: required");
        b.provenance = prov.get<std::string>();
        if (auto a = o.get("analytic")) {
            if (!a->is_boolean()) throw ConfigError(o.path("analytic") + ": expected a boolean");
            b.analytic = a->get<bool>();
        }
        o.done();
        reg.declare(key.get<std::string>(), *quantity, b);
    }
}

} // namespace detail

inline Config parse_config(const Json& j)
{
    using namespace detail;
    Config c;
    Obj o(j, "config");
    if (auto v = o.get("solver")) read_interp(*v, "config.solver", c.interp);
    if (auto v = o.get("tolerance")) {
        Obj t(*v, "config.tolerance");
        if (auto e = t.get("equality")) c.tol_equality = number(*e, t.path("equality"));
        if (auto e = t.get("inequality")) c.tol_inequality = number(*e, t.path("inequality"));
        t.done();
        if (!(c.tol_equality >= 0 && c.tol_inequality >= 0)) throw ConfigError("config.tolerance: negative");
    }
    if (auto v = o.get("constants")) read_registry(*v, "config.constants", c.registry);
    if (auto v = o.get("lemma4")) {
        Obj s(*v, "config.lemma4");
        if (auto e = s.get("p")) c.lemma4.p = list(*e, s.path("p"), exponent);
        if (auto e = s.get("dims")) c.lemma4.dims = dims(*e, s.path("dims"));
        if (auto e = s.get("theta")) c.lemma4.theta = thetas(*e, s.path("theta"));
        if (auto e = s.get("r")) {
            c.lemma4.r = list(*e, s.path("r"), number);
            for (double r : c.lemma4.r)
                if (!(r > 0)) throw ConfigError(s.path("r") + ": must be positive");
        }
        if (auto e = s.get("samples")) c.lemma4.samples = integer(*e, s.path("samples"));
        s.done();
    }
    if (auto v = o.get("prop3")) read_dtheta(*v, "config.prop3", c.prop3, false);
    if (auto v = o.get("cor6_7")) read_dtheta(*v, "config.cor6_7", c.cor6_7, true);
    if (auto v = o.get("prop8")) {
        Obj s(*v, "config.prop8");
        if (auto e = s.get("instances")) c.prop8.instances = list(*e, s.path("instances"), quad_instance);
        if (auto e = s.get("theta")) c.prop8.theta = thetas(*e, s.path("theta"));
        if (auto e = s.get("budget")) read_dtheta_budget(*e, s.path("budget"), c.prop8.budget);
        s.done();
    }
    if (auto v = o.get("theorem")) {
        Obj s(*v, "config.theorem");
        c.theorem.interp = c.interp;
        if (auto e = s.get("instances")) c.theorem.instances = list(*e, s.path("instances"), quad_instance);
        if (auto e = s.get("theta")) c.theorem.theta = thetas(*e, s.path("theta"));
        if (auto e = s.get("samples")) c.theorem.samples = integer(*e, s.path("samples"));
        if (auto e = s.get("solver")) read_interp(*e, s.path("solver"), c.theorem.interp);
        if (auto e = s.get("contraction"))
            c.theorem.contraction = list(*e, s.path("contraction"), [](const Json& x, const std::string& p) {
                return couple_instance(x, p, "m0", "m1", "n0", "n1");
            });
        if (auto e = s.get("contraction_samples"))
            c.theorem.contraction_samples = integer(*e, s.path("contraction_samples"));
        s.done();
    } else {
        c.theorem.interp = c.interp;
    }
    if (auto v = o.get("factorization")) {
        Obj s(*v, "config.factorization");
        auto& f = c.factorization;
        if (auto e = s.get("mr")) f.mr = list(*e, s.path("mr"), lattice_space_instance);
        if (auto e = s.get("mr_samples")) f.mr_samples = integer(*e, s.path("mr_samples"));
        if (auto e = s.get("mr_cols")) f.mr_cols = integer(*e, s.path("mr_cols"), 1);
        if (auto e = s.get("lemma9"))
            f.lemma9 = list(*e, s.path("lemma9"), [](const Json& x, const std::string& p) {
                return couple_instance(x, p, "e0", "e1", "f0", "f1");
            });
        if (auto e = s.get("lemma9_samples")) f.lemma9_samples = integer(*e, s.path("lemma9_samples"));
        if (auto e = s.get("theta")) f.theta = thetas(*e, s.path("theta"));
        if (auto e = s.get("lemma10")) f.lemma10 = list(*e, s.path("lemma10"), lattice_space_instance);
        if (auto e = s.get("kahane_spaces")) f.kahane_spaces = list(*e, s.path("kahane_spaces"), space);
        if (auto e = s.get("kahane_k")) {
            f.kahane_k = list(*e, s.path("kahane_k"), [](const Json& x, const std::string& p) {
                const int k = integer(x, p, 1);
                if (k > kMaxEnumeration) throw ConfigError(p + ": beyond the enumeration cap");
                return k;
            });
        }
        if (auto e = s.get("kahane_families")) f.kahane_families = integer(*e, s.path("kahane_families"));
        if (auto e = s.get("cotype_budget")) {
            Obj b(*e, s.path("cotype_budget"));
            if (auto x = b.get("max_family")) f.constant_budget.max_family = integer(*x, b.path("max_family"), 1);
            if (auto x = b.get("starts")) f.constant_budget.starts = integer(*x, b.path("starts"));
            if (auto x = b.get("iterations")) f.constant_budget.iterations = integer(*x, b.path("iterations"));
            b.done();
            if (f.constant_budget.max_family > kMaxEnumeration)
                throw ConfigError(s.path("cotype_budget") + ": family beyond the enumeration cap");
        }
        if (auto e = s.get("restarts")) f.budget.restarts = integer(*e, s.path("restarts"), 1);
        if (auto e = s.get("iterations")) f.budget.iterations = integer(*e, s.path("iterations"));
        s.done();
    }
    o.done();
    // the solver block applies to every suite that interpolates
    c.prop3.budget.interp = c.interp;
    c.cor6_7.budget.interp = c.interp;
    c.prop8.budget.interp = c.interp;
    return c;
}

inline Config load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

} // namespace cplxinterp::harness
