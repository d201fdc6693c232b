#pragma once

#include "polyberg/divergence.hpp"
#include "polyberg/geometry.hpp"
#include "polyberg/quadrature.hpp"
#include "polyberg/scmap.hpp"

#include <boost/rational.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace polyberg {

/// An analytic function on the polygon with its first two derivatives.
/// Evaluators receive the full jet so that functions may be defined through
/// phi (for instance (1 - conj(z_m) phi(w))^(-s)).
struct AnalyticFunction {
    using Evaluator = std::function<Complex(const MapJet&)>;

    std::string name;
    Evaluator value;
    Evaluator d1;
    Evaluator d2;

    static AnalyticFunction constant(Complex c);
    /// sum_j coefficients[j] * w^j
    static AnalyticFunction polynomial(std::vector<Complex> coefficients);
    /// (1 - conj(z_k) phi(w))^(-s) for the prevertex z_k of the given map.
    static AnalyticFunction corner_power(const ConformalMap& map, std::size_t vertex, double s);
};

/// Bergman kernel evaluation with a cache of phi jets keyed by point.
class KernelContext {
public:
    explicit KernelContext(const ConformalMap& map) : map_(map) {}

    const ConformalMap& map() const { return map_; }
    /// Cached jet of phi at w (thread-safe).
    MapJet point(Complex w) const;
    Complex kernel(Complex z, Complex w) const;

private:
    const ConformalMap& map_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<double, double>, MapJet> cache_;
};

/// K(z, w) = phi'(z) conj(phi'(w)) / (1 - phi(z) conj(phi(w)))^2 from jets.
Complex bergman_kernel(const MapJet& z, const MapJet& w);
Complex kernel(const KernelContext& context, Complex z, Complex w);

/// A function on the disk: a finite Taylor coefficient list or a black box.
class DiskFunction {
public:
    using Evaluator = std::function<Complex(Complex)>;

    static DiskFunction from_coefficients(std::vector<Complex> coefficients);
    static DiskFunction from_evaluator(Evaluator evaluator);

    bool has_coefficients() const { return !evaluator_; }
    const std::vector<Complex>& coefficients() const { return coefficients_; }

    /// Horner evaluation (or the black box).
    Complex operator()(Complex z) const;
    /// Term-by-term power evaluation, used as a consistency check for Horner.
    Complex evaluate_direct(Complex z) const;

private:
    std::vector<Complex> coefficients_;
    Evaluator evaluator_;
};

struct ProjectionSettings {
    /// Degree of the truncated kernel expansion.
    int max_degree = 48;
    int radial_nodes = 48;
    int angular_nodes = 128;
};

/// P_D f as a polynomial: coefficients c_j = (j+1) int f(w) conj(w)^j dA(w)
/// for j <= max_degree. The quadrature is refined once and the two results
/// compared; NumericalError when they disagree beyond 1e-10.
DiskFunction disk_project(const DiskFunction& f, const ProjectionSettings& settings = {});
Complex disk_project(const DiskFunction& f, Complex z, const ProjectionSettings& settings = {});

using Rational = boost::rational<std::int64_t>;

/// P_D(z^m conj(z)^n) = coefficient * z^exponent, or (1 - |z|^2) z^m conj(z)^n
/// when weighted. A zero coefficient means the projection vanishes.
struct MonomialProjection {
    Rational coefficient;
    int exponent = 0;
};

MonomialProjection disk_project_monomial(int m, int n, bool weighted = false);

/// Cauchy-Szego integral (1/2pi) int f(e^{it}) / (1 - z e^{-it}) dt.
Complex szego(const std::function<Complex(double)>& boundary_values, Complex z, const QuadratureSpec& spec = {});

struct TaylorSandwich {
    double lower_sum = 0.0;  ///< sum (n+1)^{-1} |a_n|^p
    double norm_p = 0.0;     ///< ||f||_p^p on the disk
    double upper_sum = 0.0;  ///< sum (n+1)^{p-3} |a_n|^p
};

/// Throws DomainError for p <= 2 or a function without coefficients.
TaylorSandwich taylor_norm_sandwich(const DiskFunction& f, double p);

/// Constant C_p with lower <= C_p * norm and norm <= C_p * upper on the
/// monomials z^0..z^max_degree, times a safety factor of 2.
double taylor_calibration_constant(double p, int max_degree = 32);

// ---------------------------------------------------------------------------
// Node sets for kernel sums.

/// A quadrature node with its map data and dA weight.
struct MapNode {
    MapJet point;
    double weight = 0.0;
};

/// Tensor Gauss-Legendre nodes on every Whitney square, with phi jets.
struct WhitneyBank {
    std::vector<MapNode> nodes;
    /// One past the last node of each square (square order of the decomposition).
    std::vector<std::size_t> square_ends;
    /// One past the last square of each level.
    std::vector<std::size_t> level_ends;
    int nodes_per_axis = 0;
};

WhitneyBank build_whitney_bank(const ConformalMap& map, const WhitneyDecomposition& decomposition,
                               int nodes_per_axis = 8);

struct DiskGridSpec {
    /// Ring edges 1 - 2^{-k}, k = 0..rings, clipped at radius.
    int rings = 16;
    double radius = 1.0;
    int radial_nodes = 8;
    int angular_panels = 16;
    int angular_nodes = 8;
    /// When positive, angular panels in a ring are at most this multiple of
    /// the ring's distance to the unit circle.
    double angular_resolution = 0.0;
    /// Grade angular panels toward the prevertex arguments.
    bool prevertex_hotspots = true;
    /// Compute w = psi(zeta) at every node (chained along each circle).
    bool with_image = true;
};

/// Polar product nodes on the disk with psi' and (optionally) psi.
struct DiskGrid {
    std::vector<MapNode> nodes;
    /// psi'(zeta) at each node.
    std::vector<Complex> psi_prime;
    /// One past the last node of each ring.
    std::vector<std::size_t> ring_ends;
    std::vector<double> ring_edges;
};

DiskGrid build_disk_grid(const ConformalMap& map, const DiskGridSpec& spec, std::span<const double> extra_hotspots = {});

/// ||f||_p^p over the polygon computed on the disk: sum |f(psi)|^p |psi'|^2 dA.
double norm_p_power(const DiskGrid& grid, const AnalyticFunction::Evaluator& f, double p);

struct DerivativeNormRow {
    std::string name;
    double first_ratio = 0.0;   ///< ||v f'||_p / ||f||_p
    double second_ratio = 0.0;  ///< ||v^2 f''||_p / ||f||_p
};

std::vector<DerivativeNormRow> derivative_norm_ratio(const ConformalMap& map, std::span<const AnalyticFunction> family,
                                                     double p, const DiskGridSpec& grid = {});

struct MaximalProjection {
    double value = 0.0;
    /// Ring ladder of the truncated integrals; a DIVERGENT verdict means the
    /// value is a truncation, not a limit.
    DivergenceReport ladder;
};

/// P+ g(z) = int |K(z, w)| g(w) dA(w) for g >= 0, computed on the disk grid
/// ring by ring (the grid's rings form the truncation ladder).
MaximalProjection maximal_project(const ConformalMap& map, const DiskGrid& grid,
                                  const std::function<double(const MapJet&)>& g, Complex z,
                                  const DivergenceSettings& settings = {});

} // namespace polyberg
