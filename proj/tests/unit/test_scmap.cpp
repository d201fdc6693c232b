#include "doctest.h"
#include "oracles.hpp"

#include "polyberg/errors.hpp"
#include "polyberg/scmap.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace polyberg;
using oracle::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

// Interior sample points of a polygon at least `margin` from the boundary.
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

} // namespace

TEST_CASE("regular polygons have equispaced prevertices") {
    for (int n = 3; n <= 8; ++n) {
        const Polygon p = regular_polygon(n);
        const SolveReport r = solve_parameter_problem(p);
        INFO("n = " << n);
        CHECK(r.vertex_residual <= 1e-8);
        const double shift = r.config.arguments[0];
        for (int k = 0; k < n; ++k) {
            double d = r.config.arguments[k] - shift - 2 * kPi * k / n;
            d = std::remainder(d, 2 * kPi);
            CHECK(std::abs(d) <= 1e-8);
        }

        // The symmetric configuration itself maps onto a regular polygon.
        PrevertexConfig eq;
        for (int k = 0; k < n; ++k) {
            eq.arguments.push_back(2 * kPi * k / n);
            eq.alphas.push_back(1.0 - 2.0 / n);
        }
        std::vector<Complex> image;
        for (Complex z : eq.prevertices()) image.push_back(psi(eq, z));
        const double side = std::abs(image[1] - image[0]);
        for (int k = 0; k < n; ++k) CHECK(std::abs(image[(k + 1) % n] - image[k]) == doctest::Approx(side).epsilon(1e-10));
    }
}

TEST_CASE("any three prevertices give a similar triangle") {
    const Polygon tri({{0, 0}, {3, 0}, {1, 2}});
    PrevertexConfig c;
    c.arguments = {0.3, 2.0, 4.1};
    c.alphas = tri.angle_factors();
    std::vector<Complex> v;
    for (Complex z : c.prevertices()) v.push_back(psi(c, z));
    const auto angles = interior_angles(v);
    for (std::size_t k = 0; k < 3; ++k) CHECK(angles[k] == doctest::Approx(c.alphas[k]).epsilon(1e-9));
    // Fixing A and B from two vertices reproduces the third.
    const Complex A = (tri.vertex(1) - tri.vertex(0)) / (v[1] - v[0]);
    const Complex B = tri.vertex(0) - A * v[0];
    CHECK(std::abs(A * v[2] + B - tri.vertex(2)) <= 1e-9);
}

TEST_CASE("forward map") {
    const ConformalMap map = ConformalMap::solve(l_shape());
    const PrevertexConfig& c = map.config();
    CHECK(std::abs(map.psi(0.0) - c.offset) <= 1e-14);
    CHECK(std::abs(map.psi_prime(0.0) - c.scale) <= 1e-14);
    for (std::size_t k = 0; k < map.prevertices().size(); ++k) {
        CHECK(std::abs(psi(c, map.prevertices()[k]) - map.polygon().vertex(k)) <= 1e-9);
    }

    SUBCASE("path independence") {
        for (Complex z : {Complex(0.5, 0.3), Complex(-0.7, 0.2), Complex(0.1, -0.9)}) {
            const Complex mid(0.4, -0.4);
            const Complex direct = sc_path_integral(c, 0.0, z);
            const Complex via = sc_path_integral(c, 0.0, mid) + sc_path_integral(c, mid, z);
            CHECK(std::abs(direct - via) <= 1e-10);
        }
    }
    SUBCASE("centered difference of psi") {
        const double h = 1e-5;
        for (Complex z : {Complex(0.2, 0.1), Complex(-0.5, 0.4), Complex(0.6, -0.6)}) {
            const Complex fd = (map.psi(z + h) - map.psi(z - h)) / (2 * h);
            CHECK(rel_err(fd, map.psi_prime(z)) <= 1e-6);
        }
    }
    SUBCASE("corner growth of psi'") {
        const std::size_t m = map.polygon().max_angle_index();
        const Complex zm = map.prevertices()[m];
        std::vector<double> x, y;
        for (double r : {0.9, 0.99, 0.999}) {
            x.push_back(std::log(1 - r));
            y.push_back(std::log(std::abs(map.psi_prime(r * zm))));
        }
        const double mx = (x[0] + x[1] + x[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
        double sxy = 0, sxx = 0;
        for (int k = 0; k < 3; ++k) {
            sxy += (x[k] - mx) * (y[k] - my);
            sxx += (x[k] - mx) * (x[k] - mx);
        }
        CHECK(sxy / sxx == doctest::Approx(map.polygon().max_angle_factor() - 1).epsilon(0.02 / 0.5));
    }
}

TEST_CASE("inverse map") {
    const ConformalMap map = ConformalMap::solve(l_shape());
    CHECK(std::abs(map.phi(map.psi(0.0))) <= 1e-12);
    CHECK(rel_err(map.jet(map.psi(0.0)).d1, 1.0 / map.config().scale) <= 1e-10);

    SUBCASE("roundtrip") {
        double worst = 0.0;
        for (int i = 0; i < 40; ++i) {
            for (int j = 0; j < 40; ++j) {
                const Complex z(-0.99 + 1.98 * i / 39, -0.99 + 1.98 * j / 39);
                if (std::abs(z) > 0.99) continue;
                worst = std::max(worst, std::abs(map.phi(map.psi(z)) - z));
            }
        }
        CHECK(worst <= 1e-9);
    }
    SUBCASE("boundary correspondence is monotone") {
        // Trace a curve just inside the unit square boundary counter-clockwise.
        const ConformalMap sq = ConformalMap::solve(unit_square());
        const double e = 0.02;
        std::vector<Complex> corners{{e, e}, {1 - e, e}, {1 - e, 1 - e}, {e, 1 - e}};
        double previous = std::arg(sq.phi(corners[0])), total = 0.0;
        bool monotone = true;
        for (int side = 0; side < 4; ++side) {
            for (int k = 1; k <= 50; ++k) {
                const Complex w = corners[side] + (corners[(side + 1) % 4] - corners[side]) * (k / 50.0);
                const double a = std::arg(sq.phi(w));
                const double step = std::remainder(a - previous, 2 * kPi);
                monotone = monotone && step > 0;
                total += step;
                previous = a;
            }
        }
        CHECK(monotone);
        CHECK(total == doctest::Approx(2 * kPi).epsilon(1e-9));
    }
}

TEST_CASE("derivatives of phi") {
    const ConformalMap map = ConformalMap::solve(l_shape());
    const auto points = interior_points(map.polygon(), 40, 0.05, 9);
    const auto d1 = [&](Complex w) { return map.jet(w).d1; };
    SUBCASE("Cauchy-Riemann partials of conj(phi')") {
        const double h = 1e-5;
        for (Complex w : points) {
            const MapJet j = map.jet(w);
            const Complex dx = (std::conj(d1(w + h)) - std::conj(d1(w - h))) / (2 * h);
            const Complex dy = (std::conj(d1(w + Complex(0, h))) - std::conj(d1(w - Complex(0, h)))) / (2 * h);
            CHECK(rel_err(dx, std::conj(j.d2)) <= 1e-5);
            CHECK(rel_err(dy, Complex(0, -1) * std::conj(j.d2)) <= 1e-5);
        }
    }
    SUBCASE("nested differences of phi'") {
        const double h = 1e-3;
        for (Complex w : points) {
            const MapJet j = map.jet(w);
            const Complex fd2 = (d1(w + h) - d1(w - h)) / (2 * h);
            const Complex fd3 = (d1(w + h) - 2.0 * d1(w) + d1(w - h)) / (h * h);
            CHECK(rel_err(fd2, j.d2) <= 1e-4);
            CHECK(rel_err(fd3, j.d3) <= 1e-4);
        }
    }
}

TEST_CASE("Koebe band") {
    const ConformalMap map = ConformalMap::solve(l_shape());
    for (Complex w : interior_points(map.polygon(), 1000, 1e-6, 4)) {
        const double r = map.koebe_ratio(w);
        CHECK(r >= 0.25 - 1e-9);
        CHECK(r <= 1.0 + 1e-9);
    }
    SUBCASE("centre of a symmetric polygon") {
        const ConformalMap sq = ConformalMap::solve(unit_square());
        const Complex w0 = sq.psi(0.0);
        CHECK(std::abs(w0 - Complex(0.5, 0.5)) <= 1e-10);
        CHECK(sq.koebe_ratio(w0) == doctest::Approx(0.5 * std::abs(sq.jet(w0).d1)).epsilon(1e-12));
    }
    SUBCASE("approach to a mid-edge point") {
        const ConformalMap sq = ConformalMap::solve(unit_square());
        double lowest = 1.0;
        for (int k = 2; k <= 12; ++k) lowest = std::min(lowest, sq.koebe_ratio({0.5, std::ldexp(1.0, -k)}));
        CHECK(lowest >= 0.25);
    }
}

TEST_CASE("kernel derivative bounds on Whitney squares") {
    const ConformalMap map = ConformalMap::solve(unit_square());
    const KernelBoundsTable a = whitney_kernel_bounds(map, whitney_decompose(map.polygon(), 5));
    const KernelBoundsTable b = whitney_kernel_bounds(map, whitney_decompose(map.polygon(), 6));
    for (auto [x, y] : {std::pair{a.rho_phi2, b.rho_phi2}, std::pair{a.rho2_phi3, b.rho2_phi3},
                        std::pair{a.rho_phi1_green, b.rho_phi1_green}}) {
        CHECK(std::isfinite(x));
        CHECK(std::abs(y - x) <= 0.1 * x);
    }
    const double lo = 1 / (4 * std::sqrt(2.0)) * (10.0 / 11.0), hi = 1 / std::sqrt(2.0);
    CHECK(b.rho_over_v_min >= lo - 0.02);
    CHECK(b.rho_over_v_max <= hi + 0.02);

    // A square has no inward corner: constants of the same size as for the
    // disk itself (phi = identity gives rho |phi''| / |phi'| = 0 and
    // rho |phi'| / |1 - phi conj(phi)| <= 1 on Whitney squares).
    CHECK(b.rho_phi2 < 1.0);
    CHECK(b.rho_phi1_green < 1.0);
}

TEST_CASE("solver errors") {
    PrevertexConfig c;
    c.arguments = {0.0, 1.0};
    c.alphas = {0.5, 0.5};
    CHECK_THROWS_AS(c.validate(), DomainError);
    SolverSettings s;
    s.max_iterations = 1;
    s.tolerance = 1e-300;
    CHECK_THROWS_AS(solve_parameter_problem(random_star_polygon(9, 3), s), NumericalError);
}
