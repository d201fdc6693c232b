#include "polyberg/toeplitz.hpp"

#include "polyberg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace polyberg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MapJet plain_jet(Complex w) { return MapJet{w, {kNaN, kNaN}, {kNaN, kNaN}, {kNaN, kNaN}, {kNaN, kNaN}}; }

// psi'(zeta)^gamma through the continuous logarithm of psi'.
Complex psi_prime_power(const ConformalMap& map, Complex zeta, double gamma) {
    return std::exp(gamma * map.log_psi_prime(zeta));
}

// Adaptive Gauss-Legendre on a segment, bisecting where the panel and its
// halves disagree.
Complex integrate_line(const std::function<Complex(Complex)>& f, Complex a, Complex b, const QuadratureSpec& spec) {
    const Rule& rule = gauss_legendre(spec.base_nodes);
    const auto panel = [&](Complex p, Complex q) {
        const Complex h = (q - p) / 2.0, c = (q + p) / 2.0;
        Complex s{};
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(c + h * rule.nodes[k]);
        return s * std::abs(h);
    };
    std::function<Complex(Complex, Complex, Complex, int)> recurse = [&](Complex p, Complex q, Complex whole,
                                                                        int depth) -> Complex {
        const Complex m = (p + q) / 2.0;
        const Complex left = panel(p, m);
        const Complex right = panel(m, q);
        const Complex both = left + right;
        if (depth >= spec.max_refinements ||
            std::abs(both - whole) <= std::max(spec.abs_tol, spec.rel_tol * std::abs(both))) {
            return both;
        }
        return recurse(p, m, left, depth + 1) + recurse(m, q, right, depth + 1);
    };
    if (a == b) return {};
    return recurse(a, b, panel(a, b), 0);
}

// Tensor Gauss-Legendre over a box with jets continued from a reference.
Complex integrate_box_mapped(const Symbol::Evaluator& f, const ConformalMap& map, const MapJet& reference, double x0,
                             double x1, double y0, double y1, int nodes) {
    if (x1 == x0 || y1 == y0) return {};
    const Rule& rule = gauss_legendre(nodes);
    const double hx = (x1 - x0) / 2, cx = (x1 + x0) / 2;
    const double hy = (y1 - y0) / 2, cy = (y1 + y0) / 2;
    Complex s{};
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
            const Complex w(cx + hx * rule.nodes[b], cy + hy * rule.nodes[a]);
            s += rule.weights[a] * rule.weights[b] * f(map.jet_near(w, reference));
        }
    }
    return s * hx * hy;
}

Complex box_integral_of(const Symbol& a, double x0, double x1, double y0, double y1, const QuadratureSpec& spec,
                        const ConformalMap* map, const MapJet* reference) {
    if (a.has_box_integral()) return a.box_integral(x0, x1, y0, y1);
    if (!a.needs_map()) return integrate_box([&](Complex w) { return a.at(w); }, x0, x1, y0, y1, spec);
    if (map == nullptr) throw DomainError("symbol '" + a.tag() + "' needs the conformal map");
    const MapJet ref = reference ? *reference : map->jet(Complex((x0 + x1) / 2, (y0 + y1) / 2));
    return integrate_box_mapped([&](const MapJet& j) { return a(j); }, *map, ref, x0, x1, y0, y1, spec.base_nodes);
}

bool finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

} // namespace

// ---------------------------------------------------------------------------
// Symbol

Symbol::Symbol(std::string tag, Evaluator evaluator, bool needs_map, BoxIntegral box)
    : tag_(std::move(tag)), evaluator_(std::move(evaluator)), needs_map_(needs_map), box_(std::move(box)) {
    if (!evaluator_) throw DomainError("symbol evaluator is empty");
}

Complex Symbol::at(Complex w) const {
    if (needs_map_) throw DomainError("symbol '" + tag_ + "' needs the conformal map");
    return evaluator_(plain_jet(w));
}

Complex Symbol::box_integral(double x0, double x1, double y0, double y1) const {
    if (!box_) throw DomainError("symbol '" + tag_ + "' has no closed-form box integral");
    return box_(x0, x1, y0, y1);
}

Symbol Symbol::scaled(Complex factor) const {
    BoxIntegral box;
    if (box_) box = [b = box_, factor](double x0, double x1, double y0, double y1) { return factor * b(x0, x1, y0, y1); };
    return Symbol(tag_, [e = evaluator_, factor](const MapJet& j) { return factor * e(j); }, needs_map_,
                  std::move(box));
}

Symbol Symbol::constant(Complex c) {
    return Symbol(
        "constant", [c](const MapJet&) { return c; }, false,
        [c](double x0, double x1, double y0, double y1) { return c * (x1 - x0) * (y1 - y0); });
}

Symbol Symbol::coordinate_sum() {
    return Symbol(
        "coordinate_sum", [](const MapJet& j) { return Complex(j.w.real() + j.w.imag(), 0.0); }, false,
        [](double x0, double x1, double y0, double y1) {
            const double dx = x1 - x0, dy = y1 - y0;
            return Complex(0.5 * (x1 * x1 - x0 * x0) * dy + 0.5 * (y1 * y1 - y0 * y0) * dx, 0.0);
        });
}

Symbol Symbol::inv_boundary_dist(const Polygon& polygon) {
    return Symbol("inv_boundary_dist",
                  [polygon](const MapJet& j) { return Complex(1.0 / dist_to_boundary(j.w, polygon), 0.0); }, false);
}

Symbol Symbol::corner_power(const ConformalMap& map, std::size_t vertex, double t) {
    const Complex c = std::conj(map.prevertices().at(vertex));
    return Symbol("corner_power",
                  [c, t](const MapJet& j) { return Complex(std::pow(std::abs(1.0 - c * j.zeta), t), 0.0); }, true);
}

Symbol Symbol::corner_power_analytic(const ConformalMap& map, std::size_t vertex, double t) {
    const Complex c = std::conj(map.prevertices().at(vertex));
    return Symbol("corner_power_analytic", [c, t](const MapJet& j) { return std::exp(t * std::log(1.0 - c * j.zeta)); },
                  true);
}

Symbol Symbol::example_53(const ConformalMap& map, double p) {
    if (!(p > 1.0)) throw DomainError("symbol exponent p must exceed 1");
    return Symbol(
        "example_53",
        [&map, gamma = 2.0 / p - 1.0](const MapJet& j) {
            const Complex z = j.zeta;
            const double r2 = std::norm(z);
            return psi_prime_power(map, z, gamma) * (1.0 - r2) * (1.0 + r2 - 2.0 * z);
        },
        true);
}

Symbol Symbol::example_54(const ConformalMap& map, double p, int m) {
    if (!(p > 1.0)) throw DomainError("symbol exponent p must exceed 1");
    if (m < 2) throw DomainError("example symbol power m must be at least 2");
    return Symbol(
        "example_54",
        [&map, m, gamma = 2.0 / p - 1.0](const MapJet& j) {
            const Complex z = j.zeta;
            const double r = std::abs(z);
            const Complex unit = r > 0.0 ? z / r : Complex(1.0, 0.0);
            return psi_prime_power(map, z, gamma) * (1.0 - r * r) * std::pow(unit - r, m);
        },
        true);
}

// ---------------------------------------------------------------------------
// Averages and the symbol condition

Complex hat_average(const Symbol& a, const Square& square, Complex z_prime, const QuadratureSpec& spec,
                    const ConformalMap* map) {
    const double slack = 1e-12 * square.side;
    const double u = square.anchor.real(), v = square.anchor.imag();
    const double x = z_prime.real(), y = z_prime.imag();
    if (!(square.side > 0.0) || x < u - slack || x > u + square.side + slack || y < v - slack ||
        y > v + square.side + slack) {
        throw DomainError("z' lies outside the closed square");
    }
    const double xc = std::clamp(x, u, u + square.side);
    const double yc = std::clamp(y, v, v + square.side);
    const Complex value = box_integral_of(a, u, xc, v, yc, spec, map, nullptr);
    if (!finite(value)) throw NumericalError("symbol average is not finite", std::abs(value));
    return value / square.area();
}

std::string to_string(ConditionVerdict verdict) {
    switch (verdict) {
    case ConditionVerdict::Pass:
        return "PASS";
    case ConditionVerdict::Fail:
        return "FAIL";
    default:
        return "INCONCLUSIVE";
    }
}

namespace {

// A square admissible for the symbol condition: inside the polygon with
// sqrt(2) rho <= dist(S, boundary) <= 4 sqrt(2) rho.
bool condition_admissible(const Square& s, const Polygon& polygon) {
    if (!polygon.contains(s.center())) return false;
    const double d = dist_to_boundary(s, polygon);
    const double r = std::numbers::sqrt2 * s.side;
    return d >= r && d <= 4.0 * r;
}

using WeightFn = std::function<double(const Square&, Complex z_prime, const MapJet& center)>;

SymbolConditionReport run_condition(const Symbol& a, const Polygon& polygon, const SymbolCheckSettings& settings,
                                    const ConformalMap* map, const WeightFn& weight) {
    if (settings.max_level < 0 || settings.zprime_grid < 1 || settings.jitter_per_square < 0) {
        throw DomainError("invalid symbol check settings");
    }
    if (a.needs_map() && map == nullptr) throw DomainError("symbol '" + a.tag() + "' needs the conformal map");
    const bool need_center = a.needs_map() || static_cast<bool>(weight);
    const WhitneyDecomposition decomposition = whitney_decompose(polygon, settings.max_level);

    SymbolConditionReport report;
    report.level_max.assign(static_cast<std::size_t>(settings.max_level) + 1, kNaN);
    report.whitney_squares = decomposition.size();
    std::mt19937_64 rng(settings.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const int g = settings.zprime_grid;
    QuadratureSpec cell_spec = settings.quadrature;
    cell_spec.base_nodes = settings.map_nodes;

    const auto process = [&](const Square& s, int level) {
        const double h = s.side / g;
        const MapJet center = need_center ? map->jet(s.center()) : plain_jet(s.center());
        // Integrals over the g x g cells, then prefix sums give every sub-box.
        std::vector<Complex> cell(static_cast<std::size_t>(g * g));
        for (int r = 0; r < g; ++r) {
            for (int c = 0; c < g; ++c) {
                const double x0 = s.anchor.real() + c * h, y0 = s.anchor.imag() + r * h;
                cell[static_cast<std::size_t>(r * g + c)] =
                    box_integral_of(a, x0, x0 + h, y0, y0 + h, a.needs_map() ? cell_spec : settings.quadrature, map,
                                    a.needs_map() ? &center : nullptr);
            }
        }
        double& level_max = report.level_max[static_cast<std::size_t>(level)];
        for (int r = 0; r < g; ++r) {
            for (int c = 0; c < g; ++c) {
                Complex sum{};
                for (int rr = 0; rr <= r; ++rr) {
                    for (int cc = 0; cc <= c; ++cc) sum += cell[static_cast<std::size_t>(rr * g + cc)];
                }
                const Complex z_prime = s.anchor + Complex((c + 1) * h, (r + 1) * h);
                double value = std::abs(sum) / s.area();
                if (weight) value /= weight(s, z_prime, center);
                if (!std::isfinite(value)) value = std::numeric_limits<double>::infinity();
                report.sup_average = std::max(report.sup_average, value);
                level_max = std::isnan(level_max) ? value : std::max(level_max, value);
                ++report.averages;
            }
        }
    };

    for (const WhitneySquare& ws : decomposition.squares()) {
        if (condition_admissible(ws.square, polygon)) process(ws.square, ws.level);
        for (int k = 0; k < settings.jitter_per_square; ++k) {
            const double dx = unit(rng) * ws.square.side;
            const double dy = unit(rng) * ws.square.side;
            const Square moved{ws.square.anchor + Complex(dx, dy), ws.square.side};
            if (!condition_admissible(moved, polygon)) continue;
            process(moved, ws.level);
            ++report.translated_squares;
        }
    }

    report.level_growth.assign(report.level_max.size(), kNaN);
    std::vector<double> populated;
    int run = 0;
    bool failed = false;
    for (std::size_t L = 0; L < report.level_max.size(); ++L) {
        const double m = report.level_max[L];
        if (std::isnan(m)) continue;
        if (L > 0 && !std::isnan(report.level_max[L - 1]) && report.level_max[L - 1] > 0.0) {
            report.level_growth[L] = m / report.level_max[L - 1];
            run = report.level_growth[L] >= settings.fail_growth ? run + 1 : 0;
            if (run >= settings.fail_run) failed = true;
        }
        populated.push_back(m);
    }
    if (failed || !std::isfinite(report.sup_average)) {
        report.verdict = ConditionVerdict::Fail;
    } else if (report.sup_average == 0.0) {
        report.verdict = ConditionVerdict::Pass;
    } else if (populated.size() >= 2) {
        const double earlier = *std::max_element(populated.begin(), populated.end() - 1);
        report.verdict =
            populated.back() <= settings.pass_slack * earlier ? ConditionVerdict::Pass : ConditionVerdict::Inconclusive;
    }
    return report;
}

} // namespace

SymbolConditionReport check_symbol_condition(const Symbol& a, const Polygon& polygon,
                                             const SymbolCheckSettings& settings, const ConformalMap* map) {
    return run_condition(a, polygon, settings, map, {});
}

SymbolConditionReport check_symbol_condition_weighted(const Symbol& a, const ConformalMap& map, double t,
                                                      std::size_t vertex, const SymbolCheckSettings& settings) {
    if (!(t > 0.0)) throw DomainError("weighted symbol condition requires t > 0");
    if (vertex >= map.prevertices().size()) throw DomainError("vertex index out of range");
    const Complex c = std::conj(map.prevertices()[vertex]);
    const WeightFn weight = [&map, c, t](const Square&, Complex z_prime, const MapJet& center) {
        const Complex zeta = map.phi_near(z_prime, center);
        return std::pow(std::abs(1.0 - c * zeta), t);
    };
    SymbolConditionReport report = run_condition(a, map.polygon(), settings, &map, weight);
    report.weighted = true;
    report.t = t;
    report.vertex = vertex;
    return report;
}

// ---------------------------------------------------------------------------
// Partial sums

std::vector<Complex> square_contributions(const Symbol& a, const AnalyticFunction& f, const WhitneyBank& bank,
                                          const MapJet& z) {
    std::vector<Complex> out;
    out.reserve(bank.square_ends.size());
    std::vector<Complex> terms;
    std::size_t begin = 0;
    for (std::size_t n = 0; n < bank.square_ends.size(); ++n) {
        terms.clear();
        for (std::size_t k = begin; k < bank.square_ends[n]; ++k) {
            const MapNode& node = bank.nodes[k];
            terms.push_back(bergman_kernel(z, node.point) * a(node.point) * f.value(node.point) * node.weight);
        }
        const Complex value = pairwise_sum(terms);
        if (!finite(value)) throw NumericalError("quadrature on Whitney square " + std::to_string(n) + " failed", 0.0);
        out.push_back(value);
        begin = bank.square_ends[n];
    }
    return out;
}

Complex apply_partial(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map, const WhitneyBank& bank,
                      std::size_t m, Complex z) {
    if (m > bank.square_ends.size()) throw DomainError("partial sum index exceeds the number of squares");
    const auto parts = square_contributions(a, f, bank, map.jet(z));
    Complex sum{};
    for (std::size_t n = 0; n < m; ++n) sum += parts[n];
    return sum;
}

Complex apply_partial(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map,
                      const WhitneyDecomposition& decomposition, std::size_t m, Complex z) {
    return apply_partial(a, f, map, build_whitney_bank(map, decomposition), m, z);
}

namespace {

// Level checkpoints with empty levels removed.
std::vector<std::size_t> distinct_checkpoints(const WhitneyBank& bank) {
    std::vector<std::size_t> out;
    for (std::size_t e : bank.level_ends) {
        if (e > 0 && (out.empty() || e != out.back())) out.push_back(e);
    }
    return out;
}

} // namespace

ToeplitzApplication apply_generalized(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map,
                                      const WhitneyBank& bank, Complex z, double tol) {
    ToeplitzApplication out;
    const auto parts = square_contributions(a, f, bank, map.jet(z));
    out.checkpoints = distinct_checkpoints(bank);
    Complex sum{};
    std::size_t n = 0;
    for (std::size_t end : out.checkpoints) {
        for (; n < end; ++n) {
            sum += parts[n];
            out.absolute_sum += std::abs(parts[n]);
        }
        out.partial.push_back(sum);
    }
    out.value = sum;
    const std::size_t c = out.partial.size();
    // Richardson table in h = 2^{-L} over the last (up to) three checkpoints.
    const std::size_t depth = std::min<std::size_t>(c, 3);
    std::vector<Complex> table(out.partial.end() - static_cast<std::ptrdiff_t>(depth), out.partial.end());
    for (std::size_t order = 1; order < depth; ++order) {
        const double factor = std::ldexp(1.0, static_cast<int>(order));
        for (std::size_t k = depth - 1; k >= order; --k) {
            table[k] = (factor * table[k] - table[k - 1]) / (factor - 1.0);
        }
    }
    out.extrapolated = depth > 0 ? table.back() : out.value;
    out.converged = c >= 4 && !parts.empty() && std::abs(parts.back()) < tol;
    for (std::size_t k = c >= 3 ? c - 3 : 0; out.converged && k < c; ++k) {
        if (k == 0 || std::abs(out.partial[k] - out.partial[k - 1]) >= tol) out.converged = false;
    }
    if (parts.empty()) out.converged = true;
    out.status = out.converged ? "converged" : "no convergence";
    return out;
}

TailNormTable partial_sum_tails(const Symbol& a, const AnalyticFunction& f, const WhitneyBank& bank,
                                std::span<const MapNode> evaluation_nodes, double p) {
    if (!(p >= 1.0)) throw DomainError("norm exponent must be at least 1");
    TailNormTable table;
    table.checkpoints = distinct_checkpoints(bank);
    std::vector<std::vector<double>> terms(table.checkpoints.size());
    for (const MapNode& z : evaluation_nodes) {
        const auto parts = square_contributions(a, f, bank, z.point);
        std::vector<Complex> partial;
        Complex sum{};
        std::size_t n = 0;
        for (std::size_t end : table.checkpoints) {
            for (; n < end; ++n) sum += parts[n];
            partial.push_back(sum);
        }
        for (; n < parts.size(); ++n) sum += parts[n];
        for (std::size_t k = 0; k < partial.size(); ++k) {
            terms[k].push_back(std::pow(std::abs(sum - partial[k]), p) * z.weight);
        }
    }
    for (auto& t : terms) table.tails.push_back(std::pow(pairwise_sum(t), 1.0 / p));
    table.monotone = true;
    for (std::size_t k = 1; k < table.tails.size(); ++k) {
        if (table.tails[k] > table.tails[k - 1]) table.monotone = false;
    }
    return table;
}

ClassicalApplication apply_classical(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map, Complex z,
                                     const DiskGridSpec& grid_spec, const DivergenceSettings& settings) {
    DiskGridSpec spec = grid_spec;
    spec.with_image = true;
    const DiskGrid grid = build_disk_grid(map, spec);
    const MapJet zj = map.jet(z);
    std::vector<Complex> ring_values;
    std::vector<double> radii, increments;
    std::size_t begin = 0;
    for (std::size_t ring = 0; ring < grid.ring_ends.size(); ++ring) {
        std::vector<Complex> terms;
        std::vector<double> magnitudes;
        for (std::size_t k = begin; k < grid.ring_ends[ring]; ++k) {
            const MapNode& node = grid.nodes[k];
            const Complex d = 1.0 - zj.zeta * std::conj(node.point.zeta);
            const Complex term = a(node.point) * f.value(node.point) * grid.psi_prime[k] / (d * d) * node.weight;
            terms.push_back(term);
            magnitudes.push_back(std::abs(term));
        }
        ring_values.push_back(pairwise_sum(terms));
        increments.push_back(std::abs(zj.d1) * pairwise_sum(magnitudes));
        radii.push_back(grid.ring_edges[ring + 1]);
        begin = grid.ring_ends[ring];
    }
    ClassicalApplication out;
    out.value = zj.d1 * pairwise_sum(ring_values);
    if (radii.size() < 3) throw DomainError("classical application needs at least 3 rings");
    out.absolute = assess_divergence(radii, increments, settings);
    out.status = out.absolute.verdict == Verdict::Divergent ? "divergent" : "converged";
    return out;
}

// ---------------------------------------------------------------------------
// Integration by parts on one square

FDecomposition f_decomposition_check(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map,
                                     const Square& square, Complex z, const QuadratureSpec& spec) {
    if (!a.has_box_integral()) throw DomainError("the decomposition check needs a closed-form box integral");
    const double u = square.anchor.real(), v = square.anchor.imag();
    const double x1 = u + square.side, y1 = v + square.side;
    const MapJet zj = map.jet(z);
    const MapJet center = map.jet(square.center());
    const Complex c = std::conj(zj.zeta);
    const Complex s = std::conj(zj.d1);

    // g(w) = f(w) K(z, w) = f(w) conj(k(w)), k(w) = conj(phi'(z)) phi'(w) / (1 - c phi(w))^2.
    struct Parts {
        Complex g, gx, gy, gxy;
    };
    const auto parts = [&](Complex w) {
        const MapJet j = map.jet_near(w, center);
        const Complex D = 1.0 - c * j.zeta;
        const Complex D2 = D * D, D3 = D2 * D, D4 = D3 * D;
        const Complex k = s * j.d1 / D2;
        const Complex k1 = s * (j.d2 / D2 + 2.0 * c * j.d1 * j.d1 / D3);
        const Complex k2 = s * (j.d3 / D2 + 6.0 * c * j.d1 * j.d2 / D3 + 6.0 * c * c * j.d1 * j.d1 * j.d1 / D4);
        const Complex fv = f.value(j), f1 = f.d1(j), f2 = f.d2(j);
        const Complex I(0.0, 1.0);
        Parts out;
        out.g = fv * std::conj(k);
        out.gx = f1 * std::conj(k) + fv * std::conj(k1);
        out.gy = I * f1 * std::conj(k) - I * fv * std::conj(k1);
        out.gxy = I * f2 * std::conj(k) - I * fv * std::conj(k2);
        return std::pair{j, out};
    };
    const auto A = [&](double x, double y) { return a.box_integral(u, x, v, y); };

    FDecomposition out;
    out.Fn = integrate_box(
                 [&](Complex w) {
                     const auto [j, p] = parts(w);
                     return a(j) * p.g;
                 },
                 u, x1, v, y1, spec) /
             kPi;
    out.F1 = A(x1, y1) * parts(Complex(x1, y1)).second.g / kPi;
    out.F2 = integrate_line([&](Complex w) { return A(x1, w.imag()) * parts(w).second.gy; }, Complex(x1, v),
                            Complex(x1, y1), spec) /
             kPi;
    out.F3 = integrate_line([&](Complex w) { return A(w.real(), y1) * parts(w).second.gx; }, Complex(u, y1),
                            Complex(x1, y1), spec) /
             kPi;
    out.F4 = integrate_box([&](Complex w) { return A(w.real(), w.imag()) * parts(w).second.gxy; }, u, x1, v, y1, spec) /
             kPi;
    out.residual = std::abs(out.Fn - (out.F1 - out.F2 - out.F3 + out.F4));
    return out;
}

// ---------------------------------------------------------------------------
// Norm estimates

NormGrowthTable estimate_operator_norm(const Symbol& a, const ConformalMap& map, double p,
                                       std::span<const AnalyticFunction> family, const DiskGridSpec& grid_spec) {
    if (!(p >= 1.0)) throw DomainError("norm exponent must be at least 1");
    DiskGridSpec spec = grid_spec;
    spec.with_image = true;
    const DiskGrid grid = build_disk_grid(map, spec);
    const std::size_t N = grid.nodes.size();
    const std::size_t F = family.size();

    // Per node and family member: a f psi' dA.
    std::vector<Complex> source(N * F);
    for (std::size_t j = 0; j < N; ++j) {
        const MapNode& node = grid.nodes[j];
        const Complex base = a(node.point) * grid.psi_prime[j] * node.weight;
        for (std::size_t q = 0; q < F; ++q) source[j * F + q] = base * family[q].value(node.point);
    }

    std::vector<double> xr(N), xi(N);
    for (std::size_t j = 0; j < N; ++j) {
        xr[j] = grid.nodes[j].point.zeta.real();
        xi[j] = -grid.nodes[j].point.zeta.imag();
    }
    std::vector<std::vector<double>> tf_terms(F, std::vector<double>(N));
    std::vector<Complex> inner(F);
    for (std::size_t i = 0; i < N; ++i) {
        const double zr = grid.nodes[i].point.zeta.real(), zim = grid.nodes[i].point.zeta.imag();
        std::fill(inner.begin(), inner.end(), Complex{});
        for (std::size_t j = 0; j < N; ++j) {
            // 1 / (1 - z_i conj(z_j))^2 in real arithmetic; the denominator
            // never vanishes inside the disk.
            const double dr = 1.0 - (zr * xr[j] - zim * xi[j]);
            const double di = -(zr * xi[j] + zim * xr[j]);
            const double sr = dr * dr - di * di, si = 2.0 * dr * di;
            const double n2 = sr * sr + si * si;
            const Complex kernel(sr / n2, -si / n2);
            for (std::size_t q = 0; q < F; ++q) {
                const Complex src = source[j * F + q];
                inner[q] += Complex(kernel.real() * src.real() - kernel.imag() * src.imag(),
                                    kernel.real() * src.imag() + kernel.imag() * src.real());
            }
        }
        const double weight = std::pow(std::abs(grid.psi_prime[i]), 2.0 - p) * grid.nodes[i].weight;
        for (std::size_t q = 0; q < F; ++q) tf_terms[q][i] = std::pow(std::abs(inner[q]), p) * weight;
    }

    NormGrowthTable table;
    for (std::size_t q = 0; q < F; ++q) {
        NormRow row;
        row.name = family[q].name;
        row.norm_f = std::pow(norm_p_power(grid, family[q].value, p), 1.0 / p);
        row.norm_tf = std::pow(pairwise_sum(tf_terms[q]), 1.0 / p);
        row.ratio = row.norm_f > 0.0 ? row.norm_tf / row.norm_f : kNaN;
        row.finite = std::isfinite(row.ratio);
        if (row.finite) table.sup_ratio = std::max(table.sup_ratio, row.ratio);
        table.rows.push_back(row);
    }
    if (table.rows.size() >= 2) {
        double earlier = 0.0;
        for (std::size_t q = 0; q + 1 < table.rows.size(); ++q) earlier = std::max(earlier, table.rows[q].ratio);
        table.growth = earlier > 0.0 ? table.rows.back().ratio / earlier : 0.0;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Worked examples

Example53Witness example_53_identity(int n) {
    if (n < 0) throw DomainError("example index n must be non-negative");
    Example53Witness w;
    w.n = n;
    const auto add = [](std::map<int, Rational>& into, Rational scale, MonomialProjection m) {
        if (m.coefficient.numerator() != 0) into[m.exponent] += scale * m.coefficient;
    };
    // (1 - |z|^2)(1 + |z|^2 - 2z) z^n = z^n - 2 z^{n+1} - z^{n+2} conj(z)^2 + 2 z^{n+2} conj(z)
    add(w.unweighted, 1, disk_project_monomial(n, 0));
    add(w.unweighted, -2, disk_project_monomial(n + 1, 0));
    add(w.unweighted, -1, disk_project_monomial(n + 2, 2));
    add(w.unweighted, 2, disk_project_monomial(n + 2, 1));
    // (1 - |z|^2) * (z^n + z^{n+1} conj(z) - 2 z^{n+1})
    add(w.weighted, 1, disk_project_monomial(n, 0, true));
    add(w.weighted, 1, disk_project_monomial(n + 1, 1, true));
    add(w.weighted, -2, disk_project_monomial(n + 1, 0, true));
    w.closed_form[n] = Rational(2, n + 3);
    w.closed_form[n + 1] = Rational(-2, n + 3);

    const auto clean = [](std::map<int, Rational>& m) {
        std::erase_if(m, [](const auto& kv) { return kv.second.numerator() == 0; });
    };
    clean(w.unweighted);
    clean(w.weighted);
    w.exact_match = w.unweighted == w.closed_form && w.weighted == w.closed_form;

    const DiskFunction lhs = DiskFunction::from_evaluator([n](Complex z) {
        const double r2 = std::norm(z);
        return (1.0 - r2) * (1.0 + r2 - 2.0 * z) * std::pow(z, n);
    });
    const DiskFunction projected = disk_project(lhs);
    const Complex samples[] = {{0.0, 0.0}, {0.3, 0.2}, {-0.5, 0.0}, {0.1, -0.6}, {0.45, 0.45}};
    for (Complex z : samples) {
        const Complex exact = 2.0 * std::pow(z, n) * (1.0 - z) / static_cast<double>(n + 3);
        w.numeric_residual = std::max(w.numeric_residual, std::abs(projected(z) - exact));
    }
    return w;
}

Example54Result example_54_theta_integral(int n, int m, double r, Complex z, const QuadratureSpec& spec) {
    if (m < 2) throw DomainError("m must be at least 2");
    if (n < 0) throw DomainError("n must be non-negative");
    if (!(r > 0.0 && r < 1.0)) throw DomainError("r must lie in (0, 1)");
    if (!(std::abs(z) < 1.0)) throw DomainError("z must lie in the unit disk");
    Example54Result out;
    out.numeric = 2.0 * kPi * integrate_circle(
                                  [&](double t) {
                                      const Complex e = std::polar(1.0, t);
                                      const Complex d = 1.0 - z * r * std::conj(e);
                                      return std::pow(e, n) * std::pow(e - r, m) / (d * d);
                                  },
                                  spec);
    out.closed_form = 2.0 * kPi * std::pow(z - 1.0, m - 1) *
                      (static_cast<double>(n + m + 1) * std::pow(z, n + 1) - static_cast<double>(n + 1) * std::pow(z, n)) *
                      std::pow(r, n + m);
    out.residual = std::abs(out.numeric - out.closed_form);
    return out;
}

E0bReport example_e0b_boundedness(const ConformalMap& map, double p, double t, std::span<const double> family_s,
                                  const DiskGridSpec& grid, double max_growth, const DivergenceSettings& settings) {
    if (!(p > 1.0 && p < 4.0 / 3.0)) throw DomainError("the weighted example needs 1 < p < 4/3");
    if (t < 0.0) throw DomainError("t must be non-negative");
    const std::size_t m = map.polygon().max_angle_index();
    const double alpha = map.polygon().max_angle_factor();
    E0bReport out;
    out.threshold = (2.0 - p) * (alpha - 1.0) - 2.0 * (p - 1.0);

    std::vector<AnalyticFunction> family;
    for (double s : family_s) family.push_back(AnalyticFunction::corner_power(map, m, s));
    out.table = estimate_operator_norm(Symbol::corner_power(map, m, t), map, p, family, grid);
    out.bounded = !out.table.rows.empty() &&
                  std::all_of(out.table.rows.begin(), out.table.rows.end(), [](const NormRow& r) { return r.finite; }) &&
                  (out.table.rows.size() < 2 || out.table.growth <= 1.0 + max_growth);

    out.defining_integral = corner_probe(map, t, {}, settings);
    return out;
}

DivergenceReport psi_weight_probe(const ConformalMap& map, double exponent, const DivergenceSettings& settings) {
    return divergence_probe([&](Complex w) { return std::pow(std::abs(map.psi_prime(w)), exponent); },
                            map.config().arguments, settings);
}

DivergenceReport corner_probe(const ConformalMap& map, double t, Complex lambda, const DivergenceSettings& settings) {
    if (!(std::abs(lambda) < 1.0)) throw DomainError("lambda must lie in the unit disk");
    const std::size_t m = map.polygon().max_angle_index();
    const double alpha = map.polygon().max_angle_factor();
    const Complex c = std::conj(map.prevertices()[m]);
    return divergence_probe(
        [&](Complex w) {
            const double d = std::abs(1.0 - lambda * std::conj(w));
            return std::pow(std::abs(1.0 - c * w), t - 1.0 - alpha) * std::abs(map.psi_prime(w)) / (d * d);
        },
        map.config().arguments, settings);
}

} // namespace polyberg
