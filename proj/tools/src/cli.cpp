#include "polyberg/cli.hpp"

#include "polyberg/bergman.hpp"
#include "polyberg/classifier.hpp"
#include "polyberg/errors.hpp"
#include "polyberg/io.hpp"
#include "polyberg/toeplitz.hpp"

#include "CLI11.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace polyberg::cli {

using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct CommonOptions {
    std::string config_path;
    std::string output_path;
    std::string csv_path;
};

void add_common(CLI::App* app, CommonOptions& opts) {
    app->add_option("--config", opts.config_path, "JSON configuration file");
    app->add_option("--output", opts.output_path, "Write the JSON report here instead of stdout");
    app->add_option("--csv", opts.csv_path, "Also write the main table as CSV");
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

// "0.5,0.25" or "0.5" -> complex
Complex parse_point(const std::string& text) {
    const auto comma = text.find(',');
    try {
        if (comma == std::string::npos) return {io::parse_double(text), 0.0};
        return {io::parse_double(text.substr(0, comma)), io::parse_double(text.substr(comma + 1))};
    } catch (const ConfigError&) {
        throw ConfigError("malformed point '" + text + "' (expected x,y)");
    }
}

// A polygon flag is either a known name or a path to a JSON file.
json polygon_flag(const std::string& text) {
    if (text == "unit-square" || text == "l-shape" || text.rfind("regular-", 0) == 0) return text;
    return json{{"file", text}};
}

template <typename T>
T get(const json& config, const char* key, T fallback) {
    if (!config.contains(key)) return fallback;
    try {
        return config.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

Polygon config_polygon(const json& config) {
    if (!config.contains("polygon")) throw ConfigError("no polygon given (use --polygon or the 'polygon' key)");
    return io::polygon_from_json(config.at("polygon"));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    static std::string cell(double x) {
        if (!std::isfinite(x)) return "nan";
        std::ostringstream s;
        s << std::setprecision(17) << x;
        return s.str();
    }

    std::string str() const {
        std::ostringstream s;
        for (std::size_t k = 0; k < header.size(); ++k) s << (k ? "," : "") << header[k];
        s << "\n";
        for (const auto& row : rows) {
            for (std::size_t k = 0; k < row.size(); ++k) s << (k ? "," : "") << row[k];
            s << "\n";
        }
        return s.str();
    }
};

Csv ladder_csv(const json& ladder) {
    Csv csv{{"radius", "increment", "truncated"}, {}};
    for (std::size_t k = 0; k < ladder.at("radii").size(); ++k) {
        csv.rows.push_back({Csv::cell(ladder["radii"][k].get<double>()),
                            Csv::cell(ladder["increments"][k].get<double>()),
                            Csv::cell(ladder["truncated"][k].get<double>())});
    }
    return csv;
}

struct Outcome {
    json body;
    std::optional<Csv> csv;
    int code = kSuccess;
    std::string method = "quadrature";
};

void emit(const CommonOptions& opts, const std::string& command, const json& config, Outcome& outcome,
          std::ostream& out) {
    json report = std::move(outcome.body);
    report["command"] = command;
    report["provenance"] = {{"tool", "polyberg"},
                            {"version", kToolVersion},
                            {"config", config},
                            {"config_hash", sha256_hex(config.dump())},
                            {"method", outcome.method}};
    const std::string text = report.dump(2) + "\n";
    if (opts.output_path.empty()) {
        out << text;
    } else {
        write_text(opts.output_path, text);
    }
    if (!opts.csv_path.empty()) {
        if (!outcome.csv) throw ConfigError("this command has no CSV table");
        write_text(opts.csv_path, outcome.csv->str());
    }
}

// ---------------------------------------------------------------------------

Outcome cmd_map_solve(const json& config) {
    const Polygon polygon = config_polygon(config);
    SolverSettings settings;
    if (config.contains("solver")) {
        const json& s = config.at("solver");
        settings.max_iterations = get(s, "max_iterations", settings.max_iterations);
        settings.tolerance = get(s, "tolerance", settings.tolerance);
        settings.crowding_threshold = get(s, "crowding_threshold", settings.crowding_threshold);
    }
    const SolveReport report = solve_parameter_problem(polygon, settings);
    Outcome o;
    o.body = {{"polygon", io::to_json(polygon)}, {"solve", io::to_json(report)}};
    o.body["solver"] = {{"max_iterations", settings.max_iterations},
                        {"tolerance", settings.tolerance},
                        {"crowding_threshold", settings.crowding_threshold}};
    Csv csv{{"k", "vertex_x", "vertex_y", "alpha", "argument"}, {}};
    for (std::size_t k = 0; k < polygon.size(); ++k) {
        csv.rows.push_back({std::to_string(k), Csv::cell(polygon.vertex(k).real()), Csv::cell(polygon.vertex(k).imag()),
                            Csv::cell(polygon.angle_factors()[k]), Csv::cell(report.config.arguments[k])});
    }
    o.csv = csv;
    return o;
}

Outcome cmd_whitney(const json& config) {
    const Polygon polygon = config_polygon(config);
    const int max_level = get(config, "max_level", 6);
    const std::size_t samples = get<std::size_t>(config, "samples", 10000);
    const std::uint64_t seed = get<std::uint64_t>(config, "seed", 1);
    const WhitneyDecomposition d = whitney_decompose(polygon, max_level);
    const WhitneyInvariants inv = check_whitney_invariants(d, polygon, samples, seed);
    Outcome o;
    o.method = "exact+sampling";
    o.body = {{"polygon", io::to_json(polygon)},
              {"decomposition", io::to_json(d, get(config, "with_squares", true))},
              {"invariants",
               {{"disjoint", inv.disjoint},
                {"distance_violations", inv.distance_violations},
                {"samples", inv.samples},
                {"max_overlap", inv.max_overlap},
                {"overlap_flagged", inv.overlap_flagged},
                {"uncovered", inv.uncovered},
                {"ok", inv.ok()}}}};
    Csv csv{{"level", "i", "j", "anchor_x", "anchor_y", "side"}, {}};
    for (const WhitneySquare& s : d.squares()) {
        csv.rows.push_back({std::to_string(s.level), std::to_string(s.i), std::to_string(s.j),
                            Csv::cell(s.square.anchor.real()), Csv::cell(s.square.anchor.imag()),
                            Csv::cell(s.square.side)});
    }
    o.csv = csv;
    if (!inv.ok()) o.code = kNumericalFailure;
    return o;
}

json jet_json(const MapJet& j) {
    return {{"w", io::complex_to_json(j.w)},
            {"phi", io::complex_to_json(j.zeta)},
            {"phi1", io::complex_to_json(j.d1)},
            {"phi2", io::complex_to_json(j.d2)},
            {"phi3", io::complex_to_json(j.d3)}};
}

Outcome cmd_kernel(const json& config) {
    const Polygon polygon = config_polygon(config);
    if (!config.contains("z") || !config.contains("w")) throw ConfigError("kernel needs points z and w");
    const Complex z = io::complex_from_json(config.at("z"));
    const Complex w = io::complex_from_json(config.at("w"));
    const ConformalMap map = ConformalMap::solve(polygon);
    const MapJet zj = map.jet(z);
    const MapJet wj = map.jet(w);
    Outcome o;
    o.body = {{"polygon", io::to_json(polygon)},
              {"z", jet_json(zj)},
              {"w", jet_json(wj)},
              {"kernel", io::complex_to_json(bergman_kernel(zj, wj))},
              {"koebe_ratio_z", map.koebe_ratio(z)},
              {"koebe_ratio_w", map.koebe_ratio(w)}};
    return o;
}

AnalyticFunction config_function(const json& config) {
    if (!config.contains("function")) return AnalyticFunction::polynomial({0.0, 0.0, 1.0});
    const json& f = config.at("function");
    if (f.contains("coefficients")) {
        return AnalyticFunction::polynomial(io::disk_function_from_json(f).coefficients());
    }
    throw ConfigError("function must be {\"coefficients\": [[re, im], ...]}");
}

Outcome cmd_toeplitz_apply(const json& config) {
    const Polygon polygon = config_polygon(config);
    const ConformalMap map = ConformalMap::solve(polygon);
    const json symbol_json = config.contains("symbol") ? config.at("symbol") : json{{"kind", "constant"}};
    const Symbol a = io::symbol_from_json(symbol_json, polygon, &map);
    const AnalyticFunction f = config_function(config);
    if (!config.contains("z")) throw ConfigError("toeplitz-apply needs the point z");
    const Complex z = io::complex_from_json(config.at("z"));
    if (!polygon.contains(z)) throw ConfigError("z must lie inside the polygon");
    const std::string method = get<std::string>(config, "method", "generalized");
    if (method != "generalized" && method != "classical" && method != "both") {
        throw ConfigError("method must be generalized, classical or both");
    }

    Outcome o;
    o.body = {{"polygon", io::to_json(polygon)}, {"symbol", symbol_json}, {"function", f.name},
              {"z", io::complex_to_json(z)}};
    bool divergent = false;
    if (method != "classical") {
        const int max_level = get(config, "max_level", 6);
        const int nodes = get(config, "nodes_per_axis", 8);
        const double tol = get(config, "tol", 1e-6);
        const WhitneyDecomposition d = whitney_decompose(polygon, max_level);
        const WhitneyBank bank = build_whitney_bank(map, d, nodes);
        const ToeplitzApplication app = apply_generalized(a, f, map, bank, z, tol);
        o.body["generalized"] = io::to_json(app);
        o.body["generalized"]["max_level"] = max_level;
        o.body["generalized"]["nodes_per_axis"] = nodes;
        o.body["generalized"]["tol"] = tol;
        Csv csv{{"squares", "re", "im"}, {}};
        for (std::size_t k = 0; k < app.partial.size(); ++k) {
            csv.rows.push_back({std::to_string(app.checkpoints[k]), Csv::cell(app.partial[k].real()),
                                Csv::cell(app.partial[k].imag())});
        }
        o.csv = csv;
        divergent = divergent || !app.converged;
    }
    if (method != "generalized") {
        DiskGridSpec grid;
        grid.rings = get(config, "rings", grid.rings);
        const DivergenceSettings settings =
            io::divergence_settings_from_json(config.contains("divergence") ? config.at("divergence") : json());
        const ClassicalApplication c = apply_classical(a, f, map, z, grid, settings);
        o.body["classical"] = {{"value", io::complex_to_json(c.value)},
                               {"status", c.status},
                               {"absolute", io::to_json(c.absolute)},
                               {"rings", grid.rings}};
        divergent = divergent || c.absolute.verdict == Verdict::Divergent;
    }
    if (divergent) o.code = kDivergence;
    return o;
}

json exact_or_number(const json& config, const char* key) {
    if (!config.contains(key)) throw ConfigError(std::string("missing '") + key + "'");
    return config.at(key);
}

Exact to_exact(const json& v, const char* key) {
    try {
        if (v.is_string()) return parse_exact(v.get<std::string>());
        if (v.is_number()) return exact_from_double(v.get<double>());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
    throw ConfigError(std::string("'") + key + "' must be a number or a string");
}

Outcome cmd_classify(const json& config) {
    const Exact p = to_exact(exact_or_number(config, "p"), "p");
    const Exact alpha = to_exact(exact_or_number(config, "alpha_max"), "alpha_max");
    BoundednessVerdict v;
    try {
        v = classify(p, alpha, get(config, "weighted", false));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    Outcome o;
    o.method = "exact";
    o.body = {{"p", to_string(v.p)},
              {"alpha_max", to_string(v.alpha_max)},
              {"projection_bounded", v.projection_bounded},
              {"main1_hypothesis", v.main1_hypothesis},
              {"regime", v.regime}};
    o.body["projection_alpha_threshold"] =
        v.projection_alpha_threshold ? json(to_string(*v.projection_alpha_threshold)) : json(nullptr);
    o.body["main1_alpha_threshold"] = v.main1_alpha_threshold ? json(to_string(*v.main1_alpha_threshold)) : json(nullptr);
    if (get(config, "weighted", false)) {
        o.body["weighted_t_min"] = v.weighted_t_min ? json(to_string(*v.weighted_t_min)) : json(nullptr);
    }
    return o;
}

Outcome cmd_symbol_check(const json& config) {
    const Polygon polygon = config_polygon(config);
    const json symbol_json = config.contains("symbol") ? config.at("symbol") : json{{"kind", "constant"}};
    const bool weighted = config.contains("weighted");
    std::optional<ConformalMap> map;
    if (weighted || io::symbol_needs_map(symbol_json)) map.emplace(ConformalMap::solve(polygon));
    const Symbol a = io::symbol_from_json(symbol_json, polygon, map ? &*map : nullptr);
    SymbolCheckSettings s;
    s.max_level = get(config, "max_level", s.max_level);
    s.jitter_per_square = get(config, "jitter", s.jitter_per_square);
    s.zprime_grid = get(config, "zprime_grid", s.zprime_grid);
    s.seed = get<std::uint64_t>(config, "seed", s.seed);
    s.map_nodes = get(config, "map_nodes", s.map_nodes);
    s.quadrature = io::quadrature_from_json(config.contains("quadrature") ? config.at("quadrature") : json(),
                                            s.quadrature);
    SymbolConditionReport r;
    if (weighted) {
        const json& w = config.at("weighted");
        const double t = get(w, "t", 0.0);
        const std::size_t vertex = get<std::size_t>(w, "vertex", polygon.max_angle_index());
        if (vertex >= polygon.size()) throw ConfigError("weighted vertex out of range");
        try {
            r = check_symbol_condition_weighted(a, *map, t, vertex, s);
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    } else {
        r = check_symbol_condition(a, polygon, s, map ? &*map : nullptr);
    }
    Outcome o;
    o.body = {{"polygon", io::to_json(polygon)},
              {"symbol", symbol_json},
              {"report", io::to_json(r)},
              {"settings",
               {{"max_level", s.max_level},
                {"jitter", s.jitter_per_square},
                {"zprime_grid", s.zprime_grid},
                {"seed", s.seed},
                {"fail_growth", s.fail_growth},
                {"fail_run", s.fail_run},
                {"pass_slack", s.pass_slack},
                {"quadrature", io::to_json(s.quadrature)}}}};
    Csv csv{{"level", "max_average", "growth"}, {}};
    for (std::size_t L = 0; L < r.level_max.size(); ++L) {
        csv.rows.push_back({std::to_string(L), Csv::cell(r.level_max[L]), Csv::cell(r.level_growth[L])});
    }
    o.csv = csv;
    return o;
}

Outcome cmd_experiment(const std::string& name, const json& config) {
    bool met = false;
    Outcome o;
    o.body = run_experiment(name, config, met);
    o.method = o.body.value("method", "quadrature");
    o.body.erase("method");
    if (o.body.contains("norm_integral")) o.csv = ladder_csv(o.body["norm_integral"]);
    if (o.body.contains("defining_integral")) o.csv = ladder_csv(o.body["defining_integral"]);
    if (o.body.contains("ratio_table")) {
        Csv csv{{"name", "norm_f", "norm_tf", "ratio"}, {}};
        for (const json& row : o.body["ratio_table"]["rows"]) {
            const auto num = [](const json& x) { return x.is_null() ? std::string("nan") : Csv::cell(x.get<double>()); };
            csv.rows.push_back({row["name"].get<std::string>(), num(row["norm_f"]), num(row["norm_tf"]), num(row["ratio"])});
        }
        o.csv = csv;
    }
    o.code = met ? kSuccess : kNumericalFailure;
    return o;
}

void error_json(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

} // namespace

std::string sha256_hex(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    std::ostringstream s;
    for (unsigned int k = 0; k < length; ++k) s << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
    return s.str();
}

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bergman and Toeplitz operators on polygons", "polyberg"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string polygon;
    std::optional<int> max_level;
    std::string z, w, p, alpha;
    bool weighted = false;
    std::string experiment, n_range;

    auto* map_solve = app.add_subcommand("map-solve", "Solve the Schwarz-Christoffel parameter problem");
    add_common(map_solve, common);
    map_solve->add_option("--polygon", polygon, "Polygon name or JSON file");

    auto* whitney = app.add_subcommand("whitney", "Whitney decomposition with invariant checks");
    add_common(whitney, common);
    whitney->add_option("--polygon", polygon, "Polygon name or JSON file");
    whitney->add_option("--max-level", max_level, "Finest dyadic level");

    auto* kernel_cmd = app.add_subcommand("kernel", "Bergman kernel K(z, w)");
    add_common(kernel_cmd, common);
    kernel_cmd->add_option("--polygon", polygon, "Polygon name or JSON file");
    kernel_cmd->add_option("--z", z, "Point z as x,y");
    kernel_cmd->add_option("--w", w, "Point w as x,y");

    auto* apply = app.add_subcommand("toeplitz-apply", "Evaluate a Toeplitz operator at a point");
    add_common(apply, common);
    apply->add_option("--polygon", polygon, "Polygon name or JSON file");
    apply->add_option("--max-level", max_level, "Finest dyadic level");
    apply->add_option("--z", z, "Point z as x,y");

    auto* classify_cmd = app.add_subcommand("classify", "Exact boundedness criteria");
    add_common(classify_cmd, common);
    classify_cmd->add_option("--p", p, "Exponent p (decimal or fraction)");
    classify_cmd->add_option("--alpha-max", alpha, "Largest angle factor (decimal or fraction)");
    classify_cmd->add_flag("--weighted", weighted, "Also report the weighted exponent threshold");

    auto* symbol_check = app.add_subcommand("symbol-check", "Sample the symbol average condition");
    add_common(symbol_check, common);
    symbol_check->add_option("--polygon", polygon, "Polygon name or JSON file");
    symbol_check->add_option("--max-level", max_level, "Finest dyadic level");

    auto* experiment_cmd = app.add_subcommand("experiment", "Run a named worked example");
    add_common(experiment_cmd, common);
    experiment_cmd->add_option("name", experiment, "Experiment name")->required();
    experiment_cmd->add_option("--n", n_range, "Index or range a..b (e2-closed-form)");
    experiment_cmd->add_option("--polygon", polygon, "Polygon name or JSON file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        error_json(err, "usage", e.what());
        return kConfigError;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    try {
        json config = load_config(common.config_path);
        if (!polygon.empty()) config["polygon"] = polygon_flag(polygon);
        if (max_level) config["max_level"] = *max_level;
        if (!z.empty()) config["z"] = io::complex_to_json(parse_point(z));
        if (!w.empty()) config["w"] = io::complex_to_json(parse_point(w));
        if (!p.empty()) config["p"] = p;
        if (!alpha.empty()) config["alpha_max"] = alpha;
        if (weighted) config["weighted"] = true;
        if (!n_range.empty()) config["n"] = n_range;

        Outcome outcome;
        if (command == "map-solve") {
            outcome = cmd_map_solve(config);
        } else if (command == "whitney") {
            outcome = cmd_whitney(config);
        } else if (command == "kernel") {
            outcome = cmd_kernel(config);
        } else if (command == "toeplitz-apply") {
            outcome = cmd_toeplitz_apply(config);
        } else if (command == "classify") {
            outcome = cmd_classify(config);
        } else if (command == "symbol-check") {
            outcome = cmd_symbol_check(config);
        } else {
            outcome = cmd_experiment(experiment, config);
        }
        emit(common, command, config, outcome, out);
        return outcome.code;
    } catch (const ConfigError& e) {
        error_json(err, "config", e.what());
        return kConfigError;
    } catch (const DomainError& e) {
        error_json(err, "domain", e.what());
        return kConfigError;
    } catch (const json::exception& e) {
        error_json(err, "config", e.what());
        return kConfigError;
    } catch (const NumericalError& e) {
        error_json(err, "numerical", std::string(e.what()) + " (residual " + std::to_string(e.residual()) + ")");
        return kNumericalFailure;
    } catch (const CapacityError& e) {
        error_json(err, "capacity", e.what());
        return kNumericalFailure;
    }
}

} // namespace polyberg::cli
