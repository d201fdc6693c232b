#include "polyberg/io.hpp"

#include "polyberg/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace polyberg::io {

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
    return get_or<T>(j, key, T{});
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

} // namespace

std::string hex_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%a", value);
    return buffer;
}

double parse_double(const std::string& text) {
    if (text.empty()) throw ConfigError("empty number");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE) throw ConfigError("malformed number '" + text + "'");
    return v;
}

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError("expected a number or [re, im]");
}

json to_json(const Polygon& polygon) {
    json v = json::array();
    for (Complex w : polygon.vertices()) v.push_back(complex_to_json(w));
    return {{"vertices", v}, {"angle_factors", polygon.angle_factors()}};
}

Polygon polygon_from_json(const json& j) {
    try {
        if (j.is_string()) {
            const std::string name = j.get<std::string>();
            if (name == "unit-square") return unit_square();
            if (name == "l-shape") return l_shape();
            if (name.rfind("regular-", 0) == 0) return regular_polygon(std::stoi(name.substr(8)));
            throw ConfigError("unknown polygon name '" + name + "'");
        }
        if (!j.is_object()) throw ConfigError("polygon must be a name or an object");
        if (j.contains("file")) {
            const std::string path = j.at("file").get<std::string>();
            std::ifstream in(path);
            if (!in) throw ConfigError("cannot open polygon file '" + path + "'");
            json inner;
            try {
                inner = json::parse(in);
            } catch (const json::exception& e) {
                throw ConfigError("polygon file '" + path + "' is not valid JSON: " + e.what());
            }
            return polygon_from_json(inner);
        }
        if (j.contains("vertices")) {
            std::vector<Complex> v;
            for (const json& p : j.at("vertices")) v.push_back(complex_from_json(p));
            return Polygon(std::move(v));
        }
        const std::string kind = require<std::string>(j, "kind");
        if (kind == "pacman") return pacman(require<double>(j, "alpha"), get_or<int>(j, "points", 7));
        if (kind == "random-star") return random_star_polygon(require<int>(j, "n"), get_or<std::uint64_t>(j, "seed", 7));
        if (kind == "regular") return regular_polygon(require<int>(j, "n"));
        throw ConfigError("unknown polygon kind '" + kind + "'");
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid polygon: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid polygon: ") + e.what());
    }
}

json to_json(const WhitneyDecomposition& d, bool with_squares) {
    json out{{"max_level", d.max_level()},
             {"base", {{"anchor", complex_to_json(d.base().anchor)}, {"side", d.base().side}}},
             {"count", d.size()},
             {"level_counts", d.level_counts()},
             {"collar_width", d.collar_width()}};
    if (with_squares) {
        json squares = json::array();
        for (const WhitneySquare& s : d.squares()) {
            squares.push_back({{"level", s.level}, {"i", s.i}, {"j", s.j}, {"anchor", complex_to_json(s.square.anchor)},
                               {"side", s.square.side}});
        }
        out["squares"] = squares;
    }
    return out;
}

json to_json(const PrevertexConfig& c) {
    json args = json::array(), alphas = json::array();
    for (double t : c.arguments) args.push_back(hex_double(t));
    for (double a : c.alphas) alphas.push_back(hex_double(a));
    return {{"arguments", args},
            {"alphas", alphas},
            {"scale", {hex_double(c.scale.real()), hex_double(c.scale.imag())}},
            {"offset", {hex_double(c.offset.real()), hex_double(c.offset.imag())}}};
}

PrevertexConfig prevertex_config_from_json(const json& j) {
    const auto number = [](const json& x) {
        if (x.is_string()) return parse_double(x.get<std::string>());
        if (x.is_number()) return x.get<double>();
        throw ConfigError("expected a number or hexadecimal string");
    };
    const auto pair = [&](const json& x) {
        if (!x.is_array() || x.size() != 2) throw ConfigError("expected [re, im]");
        return Complex(number(x[0]), number(x[1]));
    };
    if (!j.is_object()) throw ConfigError("prevertex config must be an object");
    PrevertexConfig c;
    for (const json& x : require<json>(j, "arguments")) c.arguments.push_back(number(x));
    for (const json& x : require<json>(j, "alphas")) c.alphas.push_back(number(x));
    c.scale = pair(require<json>(j, "scale"));
    c.offset = pair(require<json>(j, "offset"));
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid prevertex config: ") + e.what());
    }
    return c;
}

json to_json(const SolveReport& r) {
    json prevertices = json::array();
    for (Complex z : r.config.prevertices()) prevertices.push_back(complex_to_json(z));
    return {{"config", to_json(r.config)},
            {"arguments", r.config.arguments},
            {"prevertices", prevertices},
            {"scale", complex_to_json(r.config.scale)},
            {"offset", complex_to_json(r.config.offset)},
            {"iterations", r.iterations},
            {"equation_residual", r.equation_residual},
            {"vertex_residual", r.vertex_residual},
            {"crowded", r.crowded},
            {"warnings", r.warnings}};
}

json to_json(const DiskFunction& f) {
    if (!f.has_coefficients()) throw DomainError("only coefficient-form disk functions serialize");
    json c = json::array();
    for (Complex a : f.coefficients()) c.push_back(complex_to_json(a));
    return {{"coefficients", c}};
}

DiskFunction disk_function_from_json(const json& j) {
    std::vector<Complex> c;
    for (const json& a : require<json>(j, "coefficients")) c.push_back(complex_from_json(a));
    return DiskFunction::from_coefficients(std::move(c));
}

json to_json(const QuadratureSpec& s) {
    return {{"base_nodes", s.base_nodes},
            {"max_refinements", s.max_refinements},
            {"abs_tol", s.abs_tol},
            {"rel_tol", s.rel_tol}};
}

QuadratureSpec quadrature_from_json(const json& j, QuadratureSpec s) {
    if (j.is_null()) return s;
    if (!j.is_object()) throw ConfigError("quadrature section must be an object");
    s.base_nodes = get_or(j, "base_nodes", s.base_nodes);
    s.max_refinements = get_or(j, "max_refinements", s.max_refinements);
    s.abs_tol = get_or(j, "abs_tol", s.abs_tol);
    s.rel_tol = get_or(j, "rel_tol", s.rel_tol);
    try {
        s.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid quadrature section: ") + e.what());
    }
    return s;
}

json to_json(const DivergenceSettings& s) {
    return {{"rings", s.rings},
            {"tail", s.tail},
            {"margin", s.margin},
            {"stall_exponent", s.stall_exponent},
            {"nodes", s.nodes}};
}

DivergenceSettings divergence_settings_from_json(const json& j, DivergenceSettings s) {
    if (j.is_null()) return s;
    if (!j.is_object()) throw ConfigError("divergence section must be an object");
    s.rings = get_or(j, "rings", s.rings);
    s.tail = get_or(j, "tail", s.tail);
    s.margin = get_or(j, "margin", s.margin);
    s.stall_exponent = get_or(j, "stall_exponent", s.stall_exponent);
    s.nodes = get_or(j, "nodes", s.nodes);
    if (s.rings < 3 || s.tail < 2 || s.nodes < 1) throw ConfigError("divergence section out of range");
    return s;
}

json to_json(const DivergenceReport& r) {
    return {{"radii", r.radii},
            {"truncated", r.truncated},
            {"increments", r.increments},
            {"fitted_exponent", r.fitted_exponent},
            {"tail_ratios_grow", r.tail_ratios_grow},
            {"verdict", to_string(r.verdict)}};
}

json to_json(const SymbolConditionReport& r) {
    json level_max = json::array(), growth = json::array();
    for (double x : r.level_max) level_max.push_back(nullable(x));
    for (double x : r.level_growth) growth.push_back(nullable(x));
    json out{{"sup_average", nullable(r.sup_average)},
             {"level_max", level_max},
             {"level_growth", growth},
             {"whitney_squares", r.whitney_squares},
             {"translated_squares", r.translated_squares},
             {"averages", r.averages},
             {"verdict", to_string(r.verdict)},
             {"weighted", r.weighted}};
    if (r.weighted) {
        out["t"] = r.t;
        out["vertex"] = r.vertex;
    }
    return out;
}

json to_json(const NormGrowthTable& t) {
    json rows = json::array();
    for (const NormRow& r : t.rows) {
        rows.push_back({{"name", r.name},
                        {"norm_f", nullable(r.norm_f)},
                        {"norm_tf", nullable(r.norm_tf)},
                        {"ratio", nullable(r.ratio)},
                        {"finite", r.finite}});
    }
    return {{"rows", rows}, {"sup_ratio", t.sup_ratio}, {"growth", nullable(t.growth)}};
}

json to_json(const ToeplitzApplication& a) {
    json partial = json::array();
    for (Complex c : a.partial) partial.push_back(complex_to_json(c));
    return {{"checkpoints", a.checkpoints},
            {"partial", partial},
            {"value", complex_to_json(a.value)},
            {"extrapolated", complex_to_json(a.extrapolated)},
            {"absolute_sum", a.absolute_sum},
            {"converged", a.converged},
            {"status", a.status}};
}

bool symbol_needs_map(const json& j) {
    const std::string kind = require<std::string>(j, "kind");
    return kind == "corner_power" || kind == "example_53" || kind == "example_54";
}

Symbol symbol_from_json(const json& j, const Polygon& polygon, const ConformalMap* map) {
    if (!j.is_object()) throw ConfigError("symbol must be an object");
    const std::string kind = require<std::string>(j, "kind");
    const json params = j.contains("params") ? j.at("params") : json::object();
    if (symbol_needs_map(j) && map == nullptr) throw ConfigError("symbol '" + kind + "' needs the conformal map");
    try {
        if (kind == "constant") {
            return Symbol::constant(params.contains("value") ? complex_from_json(params.at("value")) : Complex(1.0));
        }
        if (kind == "coordinate_sum") return Symbol::coordinate_sum();
        if (kind == "inv_boundary_dist") return Symbol::inv_boundary_dist(polygon);
        if (kind == "corner_power") {
            const std::size_t vertex = get_or<std::size_t>(params, "vertex", polygon.max_angle_index());
            if (vertex >= polygon.size()) throw ConfigError("corner_power vertex out of range");
            return Symbol::corner_power(*map, vertex, require<double>(params, "t"));
        }
        if (kind == "example_53") return Symbol::example_53(*map, require<double>(params, "p"));
        if (kind == "example_54") {
            return Symbol::example_54(*map, require<double>(params, "p"), get_or<int>(params, "m", 2));
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid symbol parameters: ") + e.what());
    }
    throw ConfigError("unknown symbol kind '" + kind + "'");
}

} // namespace polyberg::io
