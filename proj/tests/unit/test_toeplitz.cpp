#include "doctest.h"
#include "oracles.hpp"

#include "polyberg/errors.hpp"
#include "polyberg/toeplitz.hpp"

#include <cmath>
#include <numbers>

using namespace polyberg;

namespace {

constexpr double kPi = std::numbers::pi;

Symbol x_coordinate() {
    return Symbol("x", [](const MapJet& j) { return Complex(j.w.real()); }, false);
}

DiskGridSpec small_grid(int rings) {
    DiskGridSpec g;
    g.rings = rings;
    g.radius = 1 - std::ldexp(1.0, -rings);
    g.radial_nodes = 4;
    g.angular_nodes = 4;
    g.angular_panels = 8;
    return g;
}

} // namespace

TEST_CASE("symbol averages") {
    const Square s{{0, 0}, 1};
    const Symbol c = Symbol::constant(Complex(2, -1));
    CHECK(std::abs(hat_average(c, s, {1, 1}) - Complex(2, -1)) <= 1e-14);
    CHECK(std::abs(hat_average(c, s, {0.5, 0.5}) - Complex(2, -1) / 4.0) <= 1e-14);
    // No closed form: falls back to quadrature.
    CHECK(std::abs(hat_average(x_coordinate(), s, {1, 1}) - 0.5) <= 1e-12);
    CHECK(std::abs(hat_average(Symbol::coordinate_sum(), Square{{1, 2}, 0.5}, {1.5, 2.5}) - 3.5) <= 1e-13);
    CHECK_THROWS_AS(hat_average(c, s, {1.5, 0.5}), DomainError);
    CHECK_THROWS_AS(x_coordinate().box_integral(0, 1, 0, 1), DomainError);
}

TEST_CASE("symbol condition") {
    const Polygon square = unit_square();
    SUBCASE("constant and bounded symbols pass") {
        SymbolCheckSettings s;
        s.max_level = 5;
        const SymbolConditionReport one = check_symbol_condition(Symbol::constant(1.0), square, s);
        CHECK(one.verdict == ConditionVerdict::Pass);
        CHECK(one.sup_average == doctest::Approx(1.0).epsilon(1e-12));
        const SymbolConditionReport zero = check_symbol_condition(Symbol::constant(0.0), square, s);
        CHECK(zero.verdict == ConditionVerdict::Pass);
        CHECK(zero.sup_average == 0.0);
        const SymbolConditionReport sum = check_symbol_condition(Symbol::coordinate_sum(), square, s);
        CHECK(sum.sup_average <= 2.0);
    }
    SUBCASE("reciprocal boundary distance fails") {
        SymbolCheckSettings s;
        s.max_level = 6;
        const SymbolConditionReport r = check_symbol_condition(Symbol::inv_boundary_dist(square), square, s);
        CHECK(r.verdict == ConditionVerdict::Fail);
        for (std::size_t level = 4; level <= 6; ++level) CHECK(r.level_growth[level] >= 1.8);
    }
    SUBCASE("weighted condition near the reentrant corner") {
        const ConformalMap map = ConformalMap::solve(l_shape());
        const std::size_t m = map.polygon().max_angle_index();
        SymbolCheckSettings s;
        s.max_level = 5;
        s.jitter_per_square = 2;
        const SymbolConditionReport matched =
            check_symbol_condition_weighted(Symbol::corner_power(map, m, 0.5), map, 0.5, m, s);
        CHECK(matched.verdict == ConditionVerdict::Pass);
        CHECK(matched.sup_average == doctest::Approx(1.0).epsilon(0.1));
        // For a constant symbol the ratio grows like 2^{t / alpha_m} per level, so
        // the 1.5-per-level rule needs t well above alpha_m log2(1.5).
        s.max_level = 6;
        const SymbolConditionReport steep = check_symbol_condition_weighted(Symbol::constant(1.0), map, 2.0, m, s);
        CHECK(steep.verdict == ConditionVerdict::Fail);
        const SymbolConditionReport mild = check_symbol_condition_weighted(Symbol::constant(1.0), map, 0.5, m, s);
        CHECK(mild.verdict != ConditionVerdict::Pass);
        CHECK_THROWS_AS(check_symbol_condition_weighted(Symbol::constant(1.0), map, 0.0, m, s), DomainError);
    }
}

TEST_CASE("partial sums") {
    const ConformalMap map = ConformalMap::solve(unit_square());
    const WhitneyBank bank = build_whitney_bank(map, whitney_decompose(map.polygon(), 4), 4);
    const Complex z(0.4, 0.55);
    const auto f1 = AnalyticFunction::polynomial({1.0, 2.0});
    const auto f2 = AnalyticFunction::polynomial({0.0, Complex(0, 1), 3.0});
    const auto f12 = AnalyticFunction::polynomial({1.0, Complex(2, 1), 3.0});
    const Symbol a = Symbol::coordinate_sum();
    for (std::size_t m : {std::size_t{1}, bank.level_ends[3], bank.square_ends.size()}) {
        CHECK(apply_partial(Symbol::constant(0.0), f1, map, bank, m, z) == Complex(0.0));
        const Complex lhs = apply_partial(a, f12, map, bank, m, z);
        const Complex rhs = apply_partial(a, f1, map, bank, m, z) + apply_partial(a, f2, map, bank, m, z);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1 + std::abs(lhs)));
    }
    CHECK_THROWS_AS(apply_partial(a, f1, map, bank, bank.square_ends.size() + 1, z), DomainError);
}

TEST_CASE("generalized and classical Toeplitz operators") {
    const ConformalMap map = ConformalMap::solve(unit_square());
    const WhitneyBank bank = build_whitney_bank(map, whitney_decompose(map.polygon(), 7), 6);
    const Complex z(0.5, 0.5);
    SUBCASE("zero symbol") {
        const ToeplitzApplication app =
            apply_generalized(Symbol::constant(0.0), AnalyticFunction::polynomial({1.0}), map, bank, z);
        CHECK(app.converged);
        CHECK(app.value == Complex(0.0));
        CHECK(apply_classical(Symbol::constant(0.0), AnalyticFunction::constant(1.0), map, z).value == Complex(0.0));
    }
    SUBCASE("reproducing w^2") {
        const ToeplitzApplication app =
            apply_generalized(Symbol::constant(1.0), AnalyticFunction::polynomial({0.0, 0.0, 1.0}), map, bank, z);
        CHECK(std::abs(app.extrapolated - z * z) <= 1e-3);
        CHECK(std::isfinite(app.absolute_sum));
    }
    SUBCASE("reproducing constants") {
        const ClassicalApplication c =
            apply_classical(Symbol::constant(1.0), AnalyticFunction::constant(1.0), map, {0.3, 0.7});
        CHECK(std::abs(c.value - 1.0) <= 1e-3);
        CHECK(c.absolute.verdict == Verdict::Convergent);
    }
    SUBCASE("both definitions agree for a bounded symbol") {
        const Symbol a = Symbol::coordinate_sum();
        const auto f = AnalyticFunction::polynomial({1.0, 1.0});
        const ToeplitzApplication g = apply_generalized(a, f, map, bank, z);
        const ClassicalApplication c = apply_classical(a, f, map, z);
        CHECK(std::abs(g.extrapolated - c.value) <= 2e-3);
    }
}

TEST_CASE("partial-sum tails decrease") {
    const ConformalMap map = ConformalMap::solve(l_shape());
    const WhitneyBank bank = build_whitney_bank(map, whitney_decompose(map.polygon(), 5), 4);
    const WhitneyBank probe = build_whitney_bank(map, whitney_decompose(map.polygon(), 2), 2);
    const TailNormTable t = partial_sum_tails(Symbol::coordinate_sum(), AnalyticFunction::polynomial({0.0, 1.0}), bank,
                                              probe.nodes, 2.0);
    CHECK(t.monotone);
    REQUIRE(t.tails.size() >= 3);
    for (std::size_t k = 1; k < t.tails.size(); ++k) CHECK(t.tails[k] <= t.tails[k - 1]);
    CHECK(t.tails.back() == doctest::Approx(0.0));
}

TEST_CASE("integration by parts over one square") {
    const ConformalMap map = ConformalMap::solve(unit_square());
    const Square sq{{0.25, 0.375}, 0.125};
    const Complex z(0.6, 0.3);
    const FDecomposition zero =
        f_decomposition_check(Symbol::constant(0.0), AnalyticFunction::constant(1.0), map, sq, z);
    CHECK(zero.Fn == Complex(0.0));
    CHECK(zero.F1 == Complex(0.0));
    CHECK(zero.F2 == Complex(0.0));
    CHECK(zero.F3 == Complex(0.0));
    CHECK(zero.F4 == Complex(0.0));
    const FDecomposition one = f_decomposition_check(Symbol::constant(1.0), AnalyticFunction::constant(1.0), map, sq, z);
    CHECK(one.residual <= 1e-6 * std::abs(one.Fn));
    const FDecomposition lin =
        f_decomposition_check(Symbol::coordinate_sum(), AnalyticFunction::polynomial({0.0, 1.0}), map, sq, z);
    CHECK(lin.residual <= 1e-6 * std::abs(lin.Fn));
    CHECK_THROWS_AS(f_decomposition_check(x_coordinate(), AnalyticFunction::constant(1.0), map, sq, z), DomainError);
}

TEST_CASE("operator norm estimates") {
    const ConformalMap map = ConformalMap::solve(unit_square());
    const std::vector<AnalyticFunction> family{AnalyticFunction::constant(1.0),
                                               AnalyticFunction::polynomial({0.0, 0.0, 1.0}),
                                               AnalyticFunction::polynomial({1.0, 0.0, 0.0, 1.0})};
    const DiskGridSpec grid = small_grid(5);
    const NormGrowthTable zero = estimate_operator_norm(Symbol::constant(0.0), map, 2.0, family, grid);
    for (const NormRow& r : zero.rows) CHECK(r.ratio == 0.0);
    const NormGrowthTable one = estimate_operator_norm(Symbol::constant(1.0), map, 2.0, family, grid);
    CHECK(one.sup_ratio <= 1.05);
    const NormGrowthTable two = estimate_operator_norm(Symbol::constant(2.0), map, 2.0, family, grid);
    for (std::size_t k = 0; k < family.size(); ++k) {
        CHECK(two.rows[k].ratio == doctest::Approx(2 * one.rows[k].ratio).epsilon(1e-10));
    }
}

TEST_CASE("divergence probes") {
    SUBCASE("compact-support example for p > 4") {
        const ConformalMap map = ConformalMap::solve(pacman(1.8));
        const DivergenceReport bad = psi_weight_probe(map, 2.0 - 5.0);
        CHECK(bad.verdict == Verdict::Divergent);
        CHECK(bad.fitted_exponent == doctest::Approx(-0.4).epsilon(0.1 / 0.4));
        CHECK(psi_weight_probe(map, 2.0 - 3.0).verdict == Verdict::Convergent);
    }
    SUBCASE("constant integrand") {
        const std::vector<double> none;
        const DivergenceReport r = divergence_probe([](Complex) { return 1.0; }, none);
        CHECK(r.verdict == Verdict::Convergent);
        CHECK(r.truncated.back() == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("defining integral for p < 4/3") {
        const ConformalMap map = ConformalMap::solve(pacman(1.9));
        CHECK(corner_probe(map, 0.0).verdict == Verdict::Divergent);
        CHECK(corner_probe(map, 0.64).verdict == Verdict::Convergent);
    }
}

TEST_CASE("closed-form projection example") {
    using R = Rational;
    const Example53Witness zero = example_53_identity(0);
    CHECK(zero.exact_match);
    CHECK(zero.closed_form == std::map<int, R>{{0, R(2, 3)}, {1, R(-2, 3)}});
    const Example53Witness three = example_53_identity(3);
    CHECK(three.closed_form == std::map<int, R>{{3, R(1, 3)}, {4, R(-1, 3)}});
    for (int n = 0; n <= 10; ++n) {
        const Example53Witness w = example_53_identity(n);
        CHECK(w.exact_match);
        CHECK(w.numeric_residual <= 1e-8);
    }
    CHECK_THROWS_AS(example_53_identity(-1), DomainError);
}

TEST_CASE("theta integral example") {
    SUBCASE("z = 0") {
        for (int m = 2; m <= 4; ++m) {
            const Example54Result r0 = example_54_theta_integral(0, m, 0.5, 0.0);
            CHECK(std::abs(r0.closed_form - (-2 * kPi * std::pow(-1.0, m - 1) * std::pow(0.5, m))) <= 1e-14);
            CHECK(r0.residual <= 1e-8);
            CHECK(std::abs(example_54_theta_integral(2, m, 0.5, 0.0).closed_form) == 0.0);
        }
    }
    SUBCASE("against a fine trapezoid sum") {
        const int n = 1, m = 2;
        const double r = 0.5;
        const Complex z(0.3, 0.2);
        const int nodes = 1 << 14;
        Complex sum{};
        for (int k = 0; k < nodes; ++k) {
            const double t = 2 * kPi * k / nodes;
            const Complex e = std::polar(1.0, t);
            const Complex d = 1.0 - z * r / e;
            sum += std::pow(e, n) * std::pow(e - r, m) / (d * d);
        }
        sum *= 2 * kPi / nodes;
        const Example54Result res = example_54_theta_integral(n, m, r, z);
        CHECK(std::abs(res.numeric - sum) <= 1e-8);
        CHECK(std::abs(res.closed_form - sum) <= 1e-8);
    }
    SUBCASE("small r") {
        CHECK(std::abs(example_54_theta_integral(1, 2, 1e-4, {0.3, 0.2}).numeric) <= 1e-10);
    }
    CHECK_THROWS_AS(example_54_theta_integral(0, 1, 0.5, 0.0), DomainError);
}

TEST_CASE("weighted regime example") {
    const ConformalMap map = ConformalMap::solve(pacman(1.9));
    const std::vector<double> family{1.0, 2.0, 2.5};
    const E0bReport r = example_e0b_boundedness(map, 1.2, 0.64, family, small_grid(6));
    CHECK(r.bounded);
    CHECK(r.threshold == doctest::Approx(0.32).epsilon(1e-12));
    CHECK(r.defining_integral.verdict == Verdict::Convergent);

    std::vector<AnalyticFunction> fs;
    for (double s : family) fs.push_back(AnalyticFunction::corner_power(map, map.polygon().max_angle_index(), s));
    const NormGrowthTable zero = estimate_operator_norm(Symbol::constant(0.0), map, 1.2, fs, small_grid(5));
    for (const NormRow& row : zero.rows) CHECK(row.ratio == 0.0);
}
