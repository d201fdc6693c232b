#pragma once

#include "polyberg/geometry.hpp"

#include <functional>
#include <span>
#include <vector>

namespace polyberg {

/// Settings shared by the adaptive integrators.
struct QuadratureSpec {
    int base_nodes = 16;
    int max_refinements = 12;
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;

    void validate() const;
};

/// Nodes and weights of a one-dimensional rule on [-1, 1].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes (cached, thread-safe).
const Rule& gauss_legendre(int n);

/// Gauss-Jacobi rule for the weight (1-x)^a (1+x)^b on [-1, 1], a, b > -1.
const Rule& gauss_jacobi(int n, double a, double b);

using PlaneIntegrand = std::function<Complex(Complex)>;
using AngleIntegrand = std::function<Complex(double)>;

/// Integral over the box [x0,x1] x [y0,y1] with the planar measure dx dy,
/// tensor Gauss-Legendre with adaptive bisection.
Complex integrate_box(const PlaneIntegrand& f, double x0, double x1, double y0, double y1,
                      const QuadratureSpec& spec = {});

/// Integral over a square with the normalized area measure dA = dx dy / pi.
Complex integrate_square(const PlaneIntegrand& f, const Square& square, const QuadratureSpec& spec = {});

/// Integral over the disk of the given radius with dA = dx dy / pi, on a
/// polar product rule with radial panels graded geometrically toward the rim.
Complex integrate_disk(const PlaneIntegrand& f, double radius = 1.0, const QuadratureSpec& spec = {});

/// Integral over the annulus r0 < |w| < r1 with dA, angular panels graded
/// geometrically toward the given angles (singular boundary points) down to
/// the scale 1 - r1.
Complex integrate_annulus(const PlaneIntegrand& f, double r0, double r1, std::span<const double> hotspots,
                          int nodes = 16);

/// Integral over |w| < radius with radial rings graded toward the rim and
/// angular grading toward hotspot angles in every ring.
Complex integrate_disk_graded(const PlaneIntegrand& f, double radius, std::span<const double> hotspots,
                              int rings = 30, int nodes = 16);

/// Line integral of f(zeta) |end - zeta|^beta d(zeta) along the straight
/// segment start -> end; the weight is absorbed by Gauss-Jacobi nodes.
/// Throws DomainError for beta <= -1.
Complex integrate_segment_jacobi(const PlaneIntegrand& f, double beta, Complex start, Complex end, int nodes = 24);

/// Mean value (1/2pi) * integral of f over [0, 2pi), trapezoid rule with
/// doubling until the relative change drops below spec.rel_tol.
Complex integrate_circle(const AngleIntegrand& f, const QuadratureSpec& spec = {});

/// Deterministic pairwise summation.
Complex pairwise_sum(std::span<const Complex> values);
double pairwise_sum(std::span<const double> values);

} // namespace polyberg
