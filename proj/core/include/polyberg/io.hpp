#pragma once

#include "polyberg/bergman.hpp"
#include "polyberg/divergence.hpp"
#include "polyberg/geometry.hpp"
#include "polyberg/quadrature.hpp"
#include "polyberg/scmap.hpp"
#include "polyberg/toeplitz.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace polyberg::io {

using nlohmann::json;

/// C99 hexadecimal float text ("0x1.8p+0"); parses back bit-exactly.
std::string hex_double(double value);
/// Accepts hexadecimal or decimal text. Throws ConfigError.
double parse_double(const std::string& text);

json complex_to_json(Complex c);
/// A number (real) or a two-element array [re, im].
Complex complex_from_json(const json& j);

json to_json(const Polygon& polygon);
/// A polygon description: a name ("unit-square", "l-shape", "regular-<n>"),
/// {"vertices": [[x, y], ...]}, {"kind": "pacman", "alpha": a, "points": k},
/// {"kind": "random-star", "n": n, "seed": s} or {"file": path} holding any
/// of the above. Throws ConfigError.
Polygon polygon_from_json(const json& j);

json to_json(const WhitneyDecomposition& decomposition, bool with_squares = true);

/// Prevertex arguments, angle factors, A and B as hexadecimal floats.
json to_json(const PrevertexConfig& config);
PrevertexConfig prevertex_config_from_json(const json& j);

json to_json(const SolveReport& report);

/// {"coefficients": [[re, im], ...]}
json to_json(const DiskFunction& f);
DiskFunction disk_function_from_json(const json& j);

json to_json(const QuadratureSpec& spec);
/// Missing keys keep the given defaults.
QuadratureSpec quadrature_from_json(const json& j, QuadratureSpec defaults = {});

json to_json(const DivergenceSettings& settings);
DivergenceSettings divergence_settings_from_json(const json& j, DivergenceSettings defaults = {});

json to_json(const DivergenceReport& report);
json to_json(const SymbolConditionReport& report);
json to_json(const NormGrowthTable& table);
json to_json(const ToeplitzApplication& application);

/// {"kind": "constant" | "coordinate_sum" | "inv_boundary_dist" |
/// "corner_power" | "example_53" | "example_54", "params": {...}}.
/// corner_power takes t and an optional vertex (default: largest angle);
/// the example symbols take p (and m). Symbols that need phi require `map`.
Symbol symbol_from_json(const json& j, const Polygon& polygon, const ConformalMap* map);
bool symbol_needs_map(const json& j);

} // namespace polyberg::io
