// Runs the thirteen acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include "oracles.hpp"

#include "polyberg/bergman.hpp"
#include "polyberg/classifier.hpp"
#include "polyberg/divergence.hpp"
#include "polyberg/geometry.hpp"
#include "polyberg/scmap.hpp"
#include "polyberg/toeplitz.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace polyberg;
using oracle::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::string failures;

    void require(bool condition, const std::string& what) {
        if (condition) return;
        failures += (pass ? "" : "; ") + what;
        pass = false;
    }
};

struct Criterion {
    const char* id;
    const char* title;
    double time_limit;  // seconds, 0 for none
    std::function<void(Outcome&)> run;
};

std::vector<Polygon> test_polygons() {
    return {unit_square(), l_shape(), random_star_polygon(7, 11), pacman(1.8), pacman(1.9)};
}

std::vector<Complex> interior_points(const Polygon& p, std::size_t count, double margin, std::uint64_t seed) {
    const Square box = p.bounding_square();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Complex> out;
    while (out.size() < count) {
        const Complex w = box.anchor + box.side * Complex(u(rng), u(rng));
        if (p.contains(w) && dist_to_boundary(w, p) >= margin) out.push_back(w);
    }
    return out;
}

double diameter(const Polygon& p) {
    double d = 0.0;
    for (Complex a : p.vertices()) {
        for (Complex b : p.vertices()) d = std::max(d, std::abs(a - b));
    }
    return d;
}

// AC1
void whitney_invariants(Outcome& o) {
    const std::vector<std::pair<const char*, Polygon>> domains{
        {"unit square", unit_square()}, {"L-shape", l_shape()}, {"random 7-gon", random_star_polygon(7, 11)}};
    for (const auto& [name, p] : domains) {
        const WhitneyDecomposition d = whitney_decompose(p, 6);
        const WhitneyInvariants inv = check_whitney_invariants(d, p, 10000, 1);
        // Independent pairwise test: open squares meet iff both coordinate
        // intervals overlap with positive length. Corners of a non-dyadic
        // bounding square carry rounding, hence the relative tolerance.
        std::size_t overlaps = 0;
        const auto& s = d.squares();
        for (std::size_t a = 0; a < s.size(); ++a) {
            for (std::size_t b = a + 1; b < s.size(); ++b) {
                const Square& x = s[a].square;
                const Square& y = s[b].square;
                const double dx = std::min(x.anchor.real() + x.side, y.anchor.real() + y.side) -
                                  std::max(x.anchor.real(), y.anchor.real());
                const double dy = std::min(x.anchor.imag() + x.side, y.anchor.imag() + y.side) -
                                  std::max(x.anchor.imag(), y.anchor.imag());
                const double tol = 1e-12 * std::min(x.side, y.side);
                if (dx > tol && dy > tol) ++overlaps;
            }
        }
        o.require(overlaps == 0 && inv.disjoint, std::string(name) + " squares overlap");
        o.require(inv.distance_violations == 0, std::string(name) + " distance bounds violated");
        o.require(inv.max_overlap <= 144, std::string(name) + " enlargement overlap above 144");
        o.require(inv.samples == 10000, std::string(name) + " sample count");
        o.detail << name << ": " << d.size() << " squares, overlap " << inv.max_overlap << ". ";
    }
    const auto sieve = oracle::unit_square_sieve(6);
    o.require(whitney_decompose(unit_square(), 6).level_counts() == sieve, "unit square level counts differ from sieve");
}

// AC2
void sc_solver(Outcome& o) {
    double worst_spacing = 0.0, worst_residual = 0.0;
    for (int n = 3; n <= 8; ++n) {
        const SolveReport r = solve_parameter_problem(regular_polygon(n));
        const double shift = r.config.arguments[0];
        for (int k = 0; k < n; ++k) {
            const double d = std::remainder(r.config.arguments[k] - shift - 2 * kPi * k / n, 2 * kPi);
            worst_spacing = std::max(worst_spacing, std::abs(d));
        }
        worst_residual = std::max(worst_residual, r.vertex_residual / diameter(regular_polygon(n)));
    }
    for (const Polygon& p : test_polygons()) {
        const ConformalMap map = ConformalMap::solve(p);
        double residual = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            residual = std::max(residual, std::abs(psi(map.config(), map.prevertices()[k]) - p.vertex(k)));
        }
        worst_residual = std::max(worst_residual, residual / diameter(p));
    }
    o.require(worst_spacing <= 1e-8, "prevertex spacing");
    o.require(worst_residual <= 1e-8, "vertex residual");
    o.detail << "spacing error " << worst_spacing << ", vertex residual/diam " << worst_residual;
}

// AC3
void map_roundtrip(Outcome& o) {
    const ConformalMap map = ConformalMap::solve(l_shape());
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 40; ++j) {
            const Complex z(-0.99 + 1.98 * i / 39, -0.99 + 1.98 * j / 39);
            if (std::abs(z) > 0.99) continue;
            worst = std::max(worst, std::abs(map.phi(map.psi(z)) - z));
        }
    }
    o.require(worst <= 1e-9, "roundtrip");

    // Finite-difference oracles: five-point centred stencils for phi' from
    // phi, and for phi'' and phi''' from phi'.
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    const auto first = [](const auto& f, Complex w, double h) {
        return (-f(w + 2 * h) + 8.0 * f(w + h) - 8.0 * f(w - h) + f(w - 2 * h)) / (12 * h);
    };
    const auto second = [](const auto& f, Complex w, double h) {
        return (-f(w + 2 * h) + 16.0 * f(w + h) - 30.0 * f(w) + 16.0 * f(w - h) - f(w - 2 * h)) / (12 * h * h);
    };
    const auto phi = [&](Complex w) { return map.phi(w); };
    const auto d1 = [&](Complex w) { return map.jet(w).d1; };
    for (Complex w : interior_points(map.polygon(), 100, 0.05, 21)) {
        const MapJet j = map.jet(w);
        const double h = 1e-3;
        e1 = std::max(e1, rel_err(first(phi, w, h), j.d1));
        e2 = std::max(e2, rel_err(first(d1, w, h), j.d2));
        e3 = std::max(e3, rel_err(second(d1, w, h), j.d3));
    }
    o.require(std::max({e1, e2, e3}) <= 1e-4, "derivative finite differences");
    o.detail << "roundtrip " << worst << ", rel err phi' " << e1 << " phi'' " << e2 << " phi''' " << e3;
}

// AC4
void koebe_band(Outcome& o) {
    double lo = 1.0, hi = 0.0;
    for (const Polygon& p : test_polygons()) {
        const ConformalMap map = ConformalMap::solve(p);
        for (Complex w : interior_points(p, 1000, 1e-6, 4)) {
            const double r = map.koebe_ratio(w);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    o.require(lo >= 0.25 - 1e-9 && hi <= 1.0 + 1e-9, "ratio outside [0.25, 1]");
    o.detail << "ratio range [" << lo << ", " << hi << "]";
}

// AC5
void disk_identities(Outcome& o) {
    // Gram oracle: P(z^m conj(z)^n) = c z^{m-n} with
    // c = <z^m conj(z)^n, z^k> / <z^k, z^k>, k = m - n, and the radial moments
    // int |z|^{2j} dA/pi = 1/(j+1), int (1-|z|^2)|z|^{2j} dA/pi = 1/((j+1)(j+2)).
    using R = Rational;
    std::size_t mismatches = 0;
    for (int m = 0; m <= 10; ++m) {
        for (int n = 0; n <= 10; ++n) {
            for (bool weighted : {false, true}) {
                R expected(0);
                if (m >= n) {
                    const int k = m - n;
                    const R moment = weighted ? R(1, (m + 1) * (m + 2)) : R(1, m + 1);
                    expected = moment / R(1, k + 1);
                }
                const MonomialProjection got = disk_project_monomial(m, n, weighted);
                const bool zero = expected.numerator() == 0;
                if (zero ? got.coefficient.numerator() != 0 : !(got.coefficient == expected && got.exponent == m - n)) {
                    ++mismatches;
                }
            }
        }
        const MonomialProjection plain = disk_project_monomial(m, 0, true);
        if (!(plain.coefficient == R(1, m + 2))) ++mismatches;
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " exact mismatches");

    double worst = 0.0;
    const std::vector<Complex> points{{0.1, 0.2}, {-0.5, 0.3}, {0.7, -0.1}};
    for (int m = 0; m <= 6; ++m) {
        for (int n = 0; n <= 6; ++n) {
            for (bool weighted : {false, true}) {
                const DiskFunction f = DiskFunction::from_evaluator([=](Complex w) {
                    const Complex v = std::pow(w, m) * std::pow(std::conj(w), n);
                    return weighted ? (1 - std::norm(w)) * v : v;
                });
                const MonomialProjection exact = disk_project_monomial(m, n, weighted);
                const double c = boost::rational_cast<double>(exact.coefficient);
                for (Complex z : points) {
                    const Complex want = m >= n ? c * std::pow(z, m - n) : Complex(0.0);
                    worst = std::max(worst, std::abs(disk_project(f, z) - want));
                }
            }
        }
    }
    o.require(worst <= 1e-8, "numeric projection");
    o.detail << "exact m,n <= 10 ok, numeric m,n <= 6 max error " << worst;
}

// AC6
void easy_computation(Outcome& o) {
    double worst = 0.0;
    for (int n = 0; n <= 10; ++n) {
        const Example53Witness w = example_53_identity(n);
        // 2 z^n (1 - z) / (n + 3)
        using R = Rational;
        const std::map<int, R> expected{{n, R(2, n + 3)}, {n + 1, R(-2, n + 3)}};
        o.require(w.exact_match && w.closed_form == expected && w.unweighted == expected,
                  "n = " + std::to_string(n));
        worst = std::max(worst, w.numeric_residual);
    }
    o.detail << "n = 0..10 exact, numeric residual " << worst;
}

// AC7
void theta_integral(Outcome& o) {
    double worst = 0.0;
    for (int n : {0, 1, 3}) {
        for (int m : {2, 3, 4}) {
            for (double r : {0.3, 0.7}) {
                for (Complex z : {Complex(0.0), Complex(0.3, 0.2), Complex(-0.5)}) {
                    const Example54Result res = example_54_theta_integral(n, m, r, z);
                    const Complex closed = 2 * kPi * std::pow(z - 1.0, m - 1) *
                                           (double(n + m + 1) * std::pow(z, n + 1) - double(n + 1) * std::pow(z, n)) *
                                           std::pow(r, n + m);
                    worst = std::max({worst, std::abs(res.numeric - closed), std::abs(res.closed_form - closed)});
                }
            }
        }
    }
    o.require(worst <= 1e-8, "residual");
    o.detail << "max residual " << worst;
}

// AC8
void classifier_table(Outcome& o) {
    const auto q = [](const char* s) { return parse_exact(s); };
    o.require(projection_bounded(q("3"), q("1.99")), "p = 3");
    for (const char* a : {"0.5", "1", "1.5", "1.99"}) o.require(projection_bounded(q("3"), q(a)), "p = 3 any alpha");
    o.require(projection_bounded(q("5"), q("1.5")), "p = 5, alpha = 1.5");
    o.require(!projection_bounded(q("5"), q("1.8")), "p = 5, alpha = 1.8");
    o.require(!projection_bounded(q("1.2"), q("1.9")), "p = 1.2, alpha = 1.9");

    // Conjugate-exponent oracle: bounded iff q' < p < q, q = 2 + 2/(alpha - 1).
    std::size_t disagreements = 0, implications = 0;
    for (int k = 1; k <= 100; ++k) {
        const Exact p = Exact(1) + Exact(k) / Exact(20);
        for (int j = 1; j <= 100; ++j) {
            const Exact alpha = Exact(j) / Exact(51);
            bool expected = true;
            if (alpha > Exact(1)) {
                const Exact upper = Exact(2) + Exact(2) / (alpha - Exact(1));
                const Exact lower = upper / (upper - Exact(1));
                expected = lower < p && p < upper;
            }
            const bool got = projection_bounded(p, alpha);
            if (got != expected) ++disagreements;
            if (main1_hypothesis(p, alpha) && !got) ++implications;
        }
    }
    o.require(disagreements == 0, "grid disagreements");
    o.require(implications == 0, "main hypothesis without boundedness");
    o.detail << "4 worked cases, 10^4 grid: " << disagreements << " disagreements, " << implications
             << " implication failures";
}

// AC9
void symbol_condition(Outcome& o) {
    SymbolCheckSettings s;
    s.max_level = 6;
    for (Complex c : {Complex(1.0), Complex(2, -1)}) {
        const SymbolConditionReport r = check_symbol_condition(Symbol::constant(c), unit_square(), s);
        o.require(r.verdict == ConditionVerdict::Pass, "constant verdict");
        o.require(std::abs(r.sup_average - std::abs(c)) <= 1e-12 * std::abs(c), "constant sup");
    }
    const SymbolConditionReport r = check_symbol_condition(Symbol::inv_boundary_dist(unit_square()), unit_square(), s);
    o.require(r.verdict == ConditionVerdict::Fail, "1/dist verdict");
    o.detail << "1/dist growth";
    for (std::size_t level = 4; level <= 6; ++level) {
        o.require(level < r.level_growth.size() && r.level_growth[level] >= 1.8, "growth at level " + std::to_string(level));
        if (level < r.level_growth.size()) o.detail << " " << r.level_growth[level];
    }
}

// AC10
void f_decomposition(Outcome& o) {
    const ConformalMap map = ConformalMap::solve(l_shape());
    const WhitneyDecomposition d = whitney_decompose(map.polygon(), 5);
    const std::vector<Symbol> symbols{Symbol::constant(Complex(2, -1)), Symbol::coordinate_sum()};
    const std::vector<AnalyticFunction> functions{AnalyticFunction::constant(1.0),
                                                  AnalyticFunction::polynomial({1.0, Complex(0, 1), 0.5})};
    const Complex z(0.6, 0.3);
    const std::size_t stride = d.size() / 20;
    double worst = 0.0;
    for (std::size_t k = 0; k < 20; ++k) {
        const Square& sq = d.squares()[k * stride].square;
        for (const Symbol& a : symbols) {
            for (const AnalyticFunction& f : functions) {
                const FDecomposition r = f_decomposition_check(a, f, map, sq, z);
                worst = std::max(worst, r.residual / std::abs(r.Fn));
            }
        }
    }
    o.require(worst <= 1e-6, "relative residual");
    o.detail << "20 squares x 2 symbols x 2 functions, max relative residual " << worst;
}

// AC11
void reproducing(Outcome& o) {
    const ConformalMap map = ConformalMap::solve(unit_square());
    const WhitneyBank bank = build_whitney_bank(map, whitney_decompose(map.polygon(), 7), 6);
    const AnalyticFunction f = AnalyticFunction::polynomial({0.0, 0.0, 1.0});
    double worst = 0.0;
    for (Complex z : {Complex(0.5, 0.5), Complex(0.3, 0.4), Complex(0.7, 0.25), Complex(0.2, 0.8), Complex(0.65, 0.6)}) {
        const ToeplitzApplication app = apply_generalized(Symbol::constant(1.0), f, map, bank, z);
        worst = std::max(worst, std::abs(app.extrapolated - z * z));
    }
    o.require(worst <= 1e-3, "extrapolated error");
    const WhitneyBank probe = build_whitney_bank(map, whitney_decompose(map.polygon(), 3), 2);
    const TailNormTable t = partial_sum_tails(Symbol::constant(1.0), f, bank, probe.nodes, 2.0);
    o.require(t.monotone, "tails not monotone");
    o.detail << "max extrapolated error " << worst << ", tails";
    for (double x : t.tails) o.detail << " " << x;
}

// AC12
void divergence_probes(Outcome& o) {
    const ConformalMap m18 = ConformalMap::solve(pacman(1.8));
    const DivergenceReport bad = psi_weight_probe(m18, 2.0 - 5.0);
    o.require(bad.verdict == Verdict::Divergent, "p = 5 not divergent");
    o.require(std::abs(bad.fitted_exponent + 0.4) <= 0.1, "fitted exponent");
    const DivergenceReport good = psi_weight_probe(m18, 2.0 - 3.0);
    o.require(good.verdict == Verdict::Convergent, "p = 3 not convergent");
    const ConformalMap m19 = ConformalMap::solve(pacman(1.9));
    const DivergenceReport e0a = corner_probe(m19, 0.0);
    o.require(e0a.verdict == Verdict::Divergent, "p = 1.2 corner integrand not divergent");
    o.detail << "p = 5 exponent " << bad.fitted_exponent << " " << to_string(bad.verdict) << ", p = 3 "
             << to_string(good.verdict) << ", p = 1.2 " << to_string(e0a.verdict);
}

// AC13
void weighted_regime(Outcome& o) {
    const ConformalMap map = ConformalMap::solve(pacman(1.9));
    const Exact threshold = weighted_exponent_threshold(parse_exact("1.2"), parse_exact("1.9"));
    const double t = 2 * threshold.convert_to<double>();
    DiskGridSpec grid;
    grid.rings = 8;
    grid.radius = 1 - std::ldexp(1.0, -grid.rings);
    grid.radial_nodes = 4;
    grid.angular_nodes = 4;
    grid.angular_panels = 8;
    const std::vector<double> family{1.0, 2.0, 2.5, 2.8, 3.0, 3.1};
    const E0bReport r = example_e0b_boundedness(map, 1.2, t, family, grid, 0.10);
    o.require(r.bounded, "ratio table grows more than 10%");
    const DivergenceReport control = corner_probe(map, 0.0);
    o.require(control.verdict == Verdict::Divergent, "t = 0 control not divergent");
    o.detail << "t = " << t << ", growth " << r.table.growth << ", control " << to_string(control.verdict);
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"AC1", "Whitney invariants", 10.0, whitney_invariants},
        {"AC2", "Schwarz-Christoffel solver", 30.0, sc_solver},
        {"AC3", "map roundtrip and derivatives", 0.0, map_roundtrip},
        {"AC4", "Koebe band", 0.0, koebe_band},
        {"AC5", "exact disk identities", 0.0, disk_identities},
        {"AC6", "closed-form projection example", 0.0, easy_computation},
        {"AC7", "theta integral", 5.0, theta_integral},
        {"AC8", "classifier truth table", 0.0, classifier_table},
        {"AC9", "symbol condition", 0.0, symbol_condition},
        {"AC10", "integration by parts identity", 0.0, f_decomposition},
        {"AC11", "reproducing and convergence", 0.0, reproducing},
        {"AC12", "divergence probes", 0.0, divergence_probes},
        {"AC13", "weighted regime", 0.0, weighted_regime},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit > 0 && seconds >= c.time_limit) {
            std::ostringstream limit;
            limit << "runtime above " << c.time_limit << " s";
            o.require(false, limit.str());
        }
        if (!o.pass) ++failed;
        std::string text = o.detail.str();
        if (!o.pass) text += " | failed: " + o.failures;
        std::printf("%-5s %s  %-32s %7.2f s  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, seconds, text.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
