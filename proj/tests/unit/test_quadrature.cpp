#include "doctest.h"

#include "polyberg/bergman.hpp"
#include "polyberg/errors.hpp"
#include "polyberg/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace polyberg;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("Gauss rules") {
    for (int n : {1, 4, 17, 48}) {
        const Rule& r = gauss_legendre(n);
        double sum = 0.0, second = 0.0;
        for (std::size_t k = 0; k < r.nodes.size(); ++k) {
            sum += r.weights[k];
            second += r.weights[k] * r.nodes[k] * r.nodes[k];
        }
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
        if (n >= 2) CHECK(second == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    }
    // Jacobi weight (1 - x)^a: sum of weights = 2^{a+1} / (a + 1).
    const Rule& j = gauss_jacobi(12, -0.5, 0.0);
    double sum = 0.0;
    for (double w : j.weights) sum += w;
    CHECK(sum == doctest::Approx(std::pow(2.0, 0.5) / 0.5).epsilon(1e-13));
    CHECK_THROWS_AS(gauss_jacobi(0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(gauss_jacobi(4, -1.0, 0.0), DomainError);
}

TEST_CASE("normalized area on squares") {
    const Square s{{0, 0}, 1};
    CHECK(std::abs(integrate_square([](Complex) { return Complex(1.0); }, s) - 1 / kPi) <= 1e-13);
    CHECK(std::abs(integrate_square([](Complex w) { return Complex(w.real()); }, s) - 1 / (2 * kPi)) <= 1e-13);
    CHECK(std::abs(integrate_square([](Complex w) { return Complex(std::norm(w)); }, s) - 2 / (3 * kPi)) <= 1e-13);
}

TEST_CASE("normalized area on the disk") {
    CHECK(std::abs(integrate_disk([](Complex) { return Complex(1.0); }) - 1.0) <= 1e-13);
    CHECK(std::abs(integrate_disk([](Complex w) { return Complex(std::norm(w)); }) - 0.5) <= 1e-13);
    for (int m = 1; m <= 5; ++m) {
        const Complex v = integrate_disk([m](Complex w) { return (1 - std::norm(w)) * std::pow(w, m); });
        CHECK(std::abs(v) <= 1e-13);
    }
    CHECK(std::abs(integrate_disk([](Complex) { return Complex(1.0); }, 0.5) - 0.25) <= 1e-13);
}

TEST_CASE("endpoint-singular segments") {
    const auto one = [](Complex) { return Complex(1.0); };
    CHECK(std::abs(integrate_segment_jacobi(one, -0.5, 0.0, 1.0) - 2.0) <= 1e-13);
    CHECK(std::abs(integrate_segment_jacobi([](Complex x) { return x; }, -0.5, 0.0, 1.0) - 4.0 / 3.0) <= 1e-13);
    CHECK(std::abs(integrate_segment_jacobi(one, 0.8, 0.0, 1.0) - 1 / 1.8) <= 1e-13);
    CHECK_THROWS_AS(integrate_segment_jacobi(one, -1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("circle averages") {
    CHECK(std::abs(integrate_circle([](double) { return Complex(1.0); }) - 1.0) <= 1e-14);
    CHECK(std::abs(integrate_circle([](double t) { return std::polar(1.0, t); })) <= 1e-14);
}

TEST_CASE("Cauchy-Szego reproduces analytic boundary values") {
    for (Complex z : {Complex(0, 0), Complex(0.3, 0.2), Complex(-0.6, 0.5)}) {
        for (int n = 0; n <= 4; ++n) {
            const Complex s = szego([n](double t) { return std::polar(1.0, n * t); }, z);
            CHECK(std::abs(s - std::pow(z, n)) <= 1e-12);
        }
        CHECK(std::abs(szego([](double t) { return std::polar(1.0, -t); }, z)) <= 1e-12);
    }
    CHECK_THROWS_AS(szego([](double) { return Complex(1.0); }, 1.0), DomainError);
}

TEST_CASE("pairwise sums") {
    std::vector<double> v(1000, 0.1);
    CHECK(pairwise_sum(std::span<const double>(v)) == doctest::Approx(100.0).epsilon(1e-14));
    std::vector<Complex> c(7, Complex(1, -1));
    CHECK(std::abs(pairwise_sum(std::span<const Complex>(c)) - Complex(7, -7)) <= 1e-14);
    CHECK(pairwise_sum(std::span<const double>()) == 0.0);
}

TEST_CASE("adaptive box integration of a peaked integrand") {
    // int over [0,1]^2 of 1/(x + y + 0.01) dx dy has a closed form.
    const auto f = [](Complex w) { return Complex(1.0 / (w.real() + w.imag() + 0.01)); };
    const double c = 0.01;
    const auto g = [](double t) { return t * std::log(t); };
    const double exact = g(2 + c) - 2 * g(1 + c) + g(c);
    CHECK(std::abs(integrate_box(f, 0, 1, 0, 1, QuadratureSpec{8, 14, 1e-13, 1e-11}).real() - exact) <= 1e-9);
    CHECK_THROWS_AS(QuadratureSpec({0, 1, 1e-3, 1e-3}).validate(), DomainError);
}
