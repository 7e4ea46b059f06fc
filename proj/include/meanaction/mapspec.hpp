#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "action.hpp"
#include "annulus_map.hpp"
#include "bounds.hpp"
#include "errors.hpp"
#include "profile.hpp"

namespace meanaction {

/// A map file: the lifted map, lift offset N, quadrature settings and
/// optional rationality flags for the boundary rotations.
struct MapSpec {
    std::string name;
    ActionContext ctx{rigid(0.0)};
    RationalFlags rational;
};

namespace spec_detail {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw SpecFormatError(where + ": " + what);
}

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key)) fail(where, "unknown key '" + key + "'");
}

inline const json& need(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
    return j.at(key);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

inline Profile profile_from_json(const json& j, const std::string& where) {
    const std::string type = need(j, where, "type").is_string() ? j.at("type").get<std::string>() : "";
    if (type == "constant") {
        only_keys(j, where, {"type", "c"});
        return Profile::constant(number(need(j, where, "c"), where + ".c"));
    }
    if (type == "polynomial") {
        only_keys(j, where, {"type", "coeffs"});
        return Profile::polynomial(numbers(need(j, where, "coeffs"), where + ".coeffs"));
    }
    if (type == "smoothstep") {
        only_keys(j, where, {"type", "plateaus", "knots"});
        return Profile::smoothstep(numbers(need(j, where, "plateaus"), where + ".plateaus"),
                                   numbers(need(j, where, "knots"), where + ".knots"));
    }
    fail(where + ".type", "expected one of constant, polynomial, smoothstep");
}

inline json profile_to_json(const Profile& p) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ConstantProfile>)
                return {{"type", "constant"}, {"c", r.c}};
            else if constexpr (std::is_same_v<T, PolynomialProfile>)
                return {{"type", "polynomial"}, {"coeffs", r.coeffs}};
            else
                return {{"type", "smoothstep"}, {"plateaus", r.plateaus}, {"knots", r.knots}};
        },
        p.rep());
}

inline LiftedMap map_from_json(const json& j, const std::string& where) {
    const json& k = need(j, where, "kind");
    if (!k.is_string()) fail(where + ".kind", "expected a string");
    const std::string kind = k.get<std::string>();
    if (kind == "rigid") {
        only_keys(j, where, {"kind", "theta0"});
        return rigid(number(need(j, where, "theta0"), where + ".theta0"));
    }
    if (kind == "twist") {
        only_keys(j, where, {"kind", "g"});
        return twist(profile_from_json(need(j, where, "g"), where + ".g"));
    }
    if (kind == "radial_shear") {
        only_keys(j, where, {"kind", "b"});
        return radial_shear(profile_from_json(need(j, where, "b"), where + ".b"));
    }
    if (kind == "hamiltonian_bump") {
        only_keys(j, where, {"kind", "center", "radius", "strength", "time", "steps"});
        HamiltonianBump h;
        const auto c = numbers(need(j, where, "center"), where + ".center");
        if (c.size() != 2) fail(where + ".center", "expected [x, y]");
        h.center = {c[0], c[1]};
        if (j.contains("radius")) h.radius = number(j["radius"], where + ".radius");
        if (j.contains("strength")) h.strength = number(j["strength"], where + ".strength");
        if (j.contains("time")) h.time = number(j["time"], where + ".time");
        if (j.contains("steps")) h.steps = integer(j["steps"], where + ".steps");
        return LiftedMap(h);
    }
    if (kind == "compose") {
        only_keys(j, where, {"kind", "parts"});
        const json& parts = need(j, where, "parts");
        if (!parts.is_array()) fail(where + ".parts", "expected an array of maps");
        std::vector<LiftedMap> v;
        for (std::size_t i = 0; i < parts.size(); ++i)
            v.push_back(map_from_json(parts[i], where + ".parts[" + std::to_string(i) + "]"));
        return compose(std::move(v));
    }
    fail(where + ".kind", "expected one of rigid, twist, radial_shear, hamiltonian_bump, compose");
}

inline json map_to_json(const LiftedMap& m) {
    return std::visit(
        [](const auto& k) -> json {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, RigidRotation>) {
                return {{"kind", "rigid"}, {"theta0", k.theta0}};
            } else if constexpr (std::is_same_v<T, TwistProfile>) {
                return {{"kind", "twist"}, {"g", profile_to_json(k.g)}};
            } else if constexpr (std::is_same_v<T, RadialShear>) {
                return {{"kind", "radial_shear"}, {"b", profile_to_json(k.b)}};
            } else if constexpr (std::is_same_v<T, HamiltonianBump>) {
                return {{"kind", "hamiltonian_bump"}, {"center", {k.center.x, k.center.y}}, {"radius", k.radius},
                        {"strength", k.strength}, {"time", k.time}, {"steps", k.steps}};
            } else {
                json parts = json::array();
                for (const auto& p : k.parts) parts.push_back(map_to_json(p));
                return {{"kind", "compose"}, {"parts", parts}};
            }
        },
        m.kind());
}

inline QuadratureConfig quad_from_json(const json& j, const std::string& where) {
    only_keys(j, where, {"rule", "nx", "ny", "line_order", "tol", "adaptive_order", "min_panels", "fd_step"});
    QuadratureConfig q;
    if (j.contains("rule")) {
        const auto& r = j["rule"];
        if (r == "simpson")
            q.rule = AreaRule::Simpson;
        else if (r == "gauss_legendre")
            q.rule = AreaRule::GaussLegendre;
        else
            fail(where + ".rule", "expected simpson or gauss_legendre");
    }
    if (j.contains("nx")) q.nx = integer(j["nx"], where + ".nx");
    if (j.contains("ny")) q.ny = integer(j["ny"], where + ".ny");
    if (j.contains("line_order")) q.line_order = integer(j["line_order"], where + ".line_order");
    if (j.contains("tol")) q.tol = number(j["tol"], where + ".tol");
    if (j.contains("adaptive_order")) q.adaptive_order = integer(j["adaptive_order"], where + ".adaptive_order");
    if (j.contains("min_panels")) q.min_panels = integer(j["min_panels"], where + ".min_panels");
    if (j.contains("fd_step")) q.fd_step = number(j["fd_step"], where + ".fd_step");
    if (q.nx < 2 || q.ny < 1 || q.line_order < 1 || q.adaptive_order < 1 || q.min_panels < 1 || !(q.tol > 0) ||
        q.fd_step < 0)
        fail(where, "quadrature settings out of range");
    if (q.rule == AreaRule::Simpson && q.nx % 2 != 0) fail(where + ".nx", "Simpson needs an even nx");
    return q;
}

inline json quad_to_json(const QuadratureConfig& q) {
    return {{"rule", q.rule == AreaRule::Simpson ? "simpson" : "gauss_legendre"},
            {"nx", q.nx},
            {"ny", q.ny},
            {"line_order", q.line_order},
            {"tol", q.tol},
            {"adaptive_order", q.adaptive_order},
            {"min_panels", q.min_panels},
            {"fd_step", q.fd_step}};
}

} // namespace spec_detail

inline MapSpec mapspec_from_json(const nlohmann::json& j) {
    using namespace spec_detail;
    only_keys(j, "spec", {"name", "map", "offset", "quadrature", "rational"});
    MapSpec s;
    if (j.contains("name")) {
        if (!j["name"].is_string()) fail("spec.name", "expected a string");
        s.name = j["name"].get<std::string>();
    }
    s.ctx.map = map_from_json(need(j, "spec", "map"), "spec.map");
    if (j.contains("offset")) s.ctx.offset = integer(j["offset"], "spec.offset");
    if (j.contains("quadrature")) s.ctx.quad = quad_from_json(j["quadrature"], "spec.quadrature");
    if (j.contains("rational")) {
        const json& r = j["rational"];
        only_keys(r, "spec.rational", {"y_plus", "y_minus"});
        for (const char* key : {"y_plus", "y_minus"}) {
            if (!r.contains(key)) continue;
            if (!r[key].is_boolean()) fail(std::string("spec.rational.") + key, "expected true or false");
            (std::string(key) == "y_plus" ? s.rational.y_plus_rational : s.rational.y_minus_rational) =
                r[key].get<bool>();
        }
    }
    return s;
}

inline nlohmann::json mapspec_to_json(const MapSpec& s) {
    using namespace spec_detail;
    json j;
    if (!s.name.empty()) j["name"] = s.name;
    j["map"] = map_to_json(s.ctx.map);
    j["offset"] = s.ctx.offset;
    j["quadrature"] = quad_to_json(s.ctx.quad);
    if (s.rational.y_plus_rational || s.rational.y_minus_rational) {
        json r = json::object();
        if (s.rational.y_plus_rational) r["y_plus"] = *s.rational.y_plus_rational;
        if (s.rational.y_minus_rational) r["y_minus"] = *s.rational.y_minus_rational;
        j["rational"] = r;
    }
    return j;
}

inline MapSpec parse_mapspec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecFormatError(std::string("invalid JSON: ") + e.what());
    }
    return mapspec_from_json(j);
}

inline MapSpec load_mapspec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecFormatError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mapspec(buf.str());
}

inline void save_mapspec(const MapSpec& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SpecFormatError("cannot write " + path);
    out << mapspec_to_json(s).dump(2) << "\n";
}

} // namespace meanaction
