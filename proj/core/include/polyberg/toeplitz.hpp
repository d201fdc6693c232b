#pragma once

#include "polyberg/bergman.hpp"
#include "polyberg/divergence.hpp"
#include "polyberg/geometry.hpp"
#include "polyberg/quadrature.hpp"
#include "polyberg/scmap.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace polyberg {

/// A symbol a on the polygon.
///
/// Evaluators receive a jet; symbols that do not need phi only read
/// `jet.w`, and callers may then skip the inverse map. An optional closed
/// form of the planar box integral is used for exact averages.
class Symbol {
public:
    using Evaluator = std::function<Complex(const MapJet&)>;
    /// int_{y0}^{y1} int_{x0}^{x1} a(x + iy) dx dy
    using BoxIntegral = std::function<Complex(double x0, double x1, double y0, double y1)>;

    Symbol(std::string tag, Evaluator evaluator, bool needs_map, BoxIntegral box = {});

    const std::string& tag() const { return tag_; }
    bool needs_map() const { return needs_map_; }
    Complex operator()(const MapJet& point) const { return evaluator_(point); }
    Complex at(Complex w) const;
    bool has_box_integral() const { return static_cast<bool>(box_); }
    Complex box_integral(double x0, double x1, double y0, double y1) const;

    Symbol scaled(Complex factor) const;

    static Symbol constant(Complex c);
    /// a(x + iy) = x + y
    static Symbol coordinate_sum();
    /// a(w) = 1 / dist(w, boundary)
    static Symbol inv_boundary_dist(const Polygon& polygon);
    /// |1 - conj(z_m) phi(w)|^t, the modulus bound of the weighted regime.
    static Symbol corner_power(const ConformalMap& map, std::size_t vertex, double t);
    /// (1 - conj(z_m) phi(w))^t, analytic in phi.
    static Symbol corner_power_analytic(const ConformalMap& map, std::size_t vertex, double t);
    /// a(psi(zeta)) = psi'(zeta)^{2/p - 1} (1 - |zeta|^2)(1 + |zeta|^2 - 2 zeta)
    static Symbol example_53(const ConformalMap& map, double p);
    /// a(psi(zeta)) = psi'(zeta)^{2/p - 1} (1 - |zeta|^2)(zeta/|zeta| - |zeta|)^m
    static Symbol example_54(const ConformalMap& map, double p, int m);

private:
    std::string tag_;
    Evaluator evaluator_;
    bool needs_map_;
    BoxIntegral box_;
};

/// (1/rho^2) int_v^{y'} int_u^{x'} a dx dy for z' = x' + iy' in the closed
/// square. Uses the closed-form box integral when the symbol has one.
/// `map` is required for symbols that need phi.
Complex hat_average(const Symbol& a, const Square& square, Complex z_prime, const QuadratureSpec& spec = {},
                    const ConformalMap* map = nullptr);

enum class ConditionVerdict { Pass, Fail, Inconclusive };

std::string to_string(ConditionVerdict verdict);

struct SymbolCheckSettings {
    int max_level = 6;
    int jitter_per_square = 8;
    /// z' samples per square: the points u + i rho/g, ..., i.e. a g x g grid
    /// whose last point is the far corner.
    int zprime_grid = 2;
    std::uint64_t seed = 20240601;
    QuadratureSpec quadrature{8, 10, 1e-13, 1e-8};
    /// Tensor Gauss-Legendre order for symbols that need phi.
    int map_nodes = 6;
    double fail_growth = 1.5;
    int fail_run = 3;
    double pass_slack = 1.05;
};

struct SymbolConditionReport {
    double sup_average = 0.0;
    /// Maximum of the (weighted) averages per level; NaN for empty levels.
    std::vector<double> level_max;
    /// level_max[L] / level_max[L-1]; NaN when either level is empty.
    std::vector<double> level_growth;
    std::size_t whitney_squares = 0;
    std::size_t translated_squares = 0;
    std::size_t averages = 0;
    ConditionVerdict verdict = ConditionVerdict::Inconclusive;
    bool weighted = false;
    double t = 0.0;
    std::size_t vertex = 0;
};

/// Samples sup |a_S(z')| over Whitney squares and admissible jittered
/// translates. FAIL when the level maxima grow by at least fail_growth over
/// fail_run consecutive levels; PASS when the last level maximum stays
/// within pass_slack of the earlier maxima; otherwise INCONCLUSIVE.
SymbolConditionReport check_symbol_condition(const Symbol& a, const Polygon& polygon,
                                             const SymbolCheckSettings& settings = {},
                                             const ConformalMap* map = nullptr);

/// As above with every average divided by |1 - phi(z') conj(phi(w_m))|^t.
SymbolConditionReport check_symbol_condition_weighted(const Symbol& a, const ConformalMap& map, double t,
                                                      std::size_t vertex, const SymbolCheckSettings& settings = {});

// ---------------------------------------------------------------------------
// Partial sums over Whitney squares.

/// F_n f(z) = int_{S_n} K(z, w) a(w) f(w) dA(w) for every square of the bank.
std::vector<Complex> square_contributions(const Symbol& a, const AnalyticFunction& f, const WhitneyBank& bank,
                                          const MapJet& z);

/// T^(m) f(z): the first m squares, summed sequentially in bank order.
Complex apply_partial(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map, const WhitneyBank& bank,
                      std::size_t m, Complex z);
Complex apply_partial(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map,
                      const WhitneyDecomposition& decomposition, std::size_t m, Complex z);

struct ToeplitzApplication {
    /// Number of squares summed at each checkpoint (level ends).
    std::vector<std::size_t> checkpoints;
    std::vector<Complex> partial;
    Complex value;
    /// Richardson extrapolation in h = 2^{-L} over the last three levels,
    /// eliminating the h and h^2 terms (the uncovered collar has width
    /// proportional to the finest side).
    Complex extrapolated;
    /// sum_n |F_n f(z)|
    double absolute_sum = 0.0;
    bool converged = false;
    std::string status;
};

/// Partial sums checked at the level ends. Converged when the last three
/// checkpoint increments are below tol; otherwise status "no convergence".
ToeplitzApplication apply_generalized(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map,
                                      const WhitneyBank& bank, Complex z, double tol = 1e-6);

struct TailNormTable {
    std::vector<std::size_t> checkpoints;
    /// ||T^(m) f - T^(M) f||_p over the evaluation nodes, M = all squares.
    std::vector<double> tails;
    bool monotone = false;
};

TailNormTable partial_sum_tails(const Symbol& a, const AnalyticFunction& f, const WhitneyBank& bank,
                                std::span<const MapNode> evaluation_nodes, double p);

struct ClassicalApplication {
    Complex value;
    /// Ladder of the absolute integral int |K a f| dA.
    DivergenceReport absolute;
    std::string status;
};

/// T_a f(z) as one global integral on the disk:
/// phi'(z) int a(psi) f(psi) psi' / (1 - phi(z) conj(zeta))^2 dA(zeta).
ClassicalApplication apply_classical(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map, Complex z,
                                     const DiskGridSpec& grid = {}, const DivergenceSettings& settings = {});

struct FDecomposition {
    Complex Fn;
    Complex F1;
    Complex F2;
    Complex F3;
    Complex F4;
    double residual = 0.0;
};

/// Integration by parts of F_n over one square against the partial box
/// integrals A(x, y) of the symbol. The derivatives act on the whole
/// product g(w) = f(w) K(z, w):
///   int a g = A(z') g(z') - int A(x', y) g_y dy - int A(x, y') g_x dx + int int A g_xy.
/// Requires a symbol with a closed-form box integral.
FDecomposition f_decomposition_check(const Symbol& a, const AnalyticFunction& f, const ConformalMap& map,
                                     const Square& square, Complex z, const QuadratureSpec& spec = {});

struct NormRow {
    std::string name;
    double norm_f = 0.0;
    double norm_tf = 0.0;
    double ratio = 0.0;
    bool finite = true;
};

struct NormGrowthTable {
    std::vector<NormRow> rows;
    double sup_ratio = 0.0;
    /// Last ratio over the largest earlier ratio.
    double growth = 0.0;
};

/// ||T_a f||_p / ||f||_p over a family, computed on the disk with both
/// integrals truncated to the grid radius:
///   ||T_a f||^p = int |psi'(z)|^{2-p} |int a(psi) f(psi) psi' / (1 - z conj(w))^2 dA(w)|^p dA(z).
NormGrowthTable estimate_operator_norm(const Symbol& a, const ConformalMap& map, double p,
                                       std::span<const AnalyticFunction> family, const DiskGridSpec& grid);

/// Exact expansion of P_D((1 - |z|^2)(1 + |z|^2 - 2z) z^n).
struct Example53Witness {
    int n = 0;
    /// exponent -> coefficient, via the unweighted monomial rule.
    std::map<int, Rational> unweighted;
    /// exponent -> coefficient, via the weighted monomial rule.
    std::map<int, Rational> weighted;
    /// 2 z^n (1 - z) / (n + 3)
    std::map<int, Rational> closed_form;
    bool exact_match = false;
    /// max |disk_project(lhs)(z) - closed form(z)| over 5 sample points.
    double numeric_residual = 0.0;
};

Example53Witness example_53_identity(int n);

struct Example54Result {
    Complex numeric;
    Complex closed_form;
    double residual = 0.0;
};

/// int_0^{2pi} e^{in t} (e^{it} - r)^m / (1 - z r e^{-it})^2 dt against
/// 2 pi (z - 1)^{m-1} ((n+m+1) z^{n+1} - (n+1) z^n) r^{n+m}.
Example54Result example_54_theta_integral(int n, int m, double r, Complex z, const QuadratureSpec& spec = {});

/// Ladder of int |psi'(w)|^exponent dA(w). With exponent 2 - p this is the
/// norm integral of the compact-support counterexample for p > 4.
DivergenceReport psi_weight_probe(const ConformalMap& map, double exponent, const DivergenceSettings& settings = {});

/// Ladder of int |1 - conj(z_m) w|^{t-1-alpha_m} |psi'(w)| / |1 - lambda conj(w)|^2 dA(w)
/// for the largest-angle prevertex z_m and lambda = phi(point) in the disk.
/// t = 0 is the defining integral of P f for f(psi(w)) = (1 - conj(z_m) w)^{-1-alpha_m}.
DivergenceReport corner_probe(const ConformalMap& map, double t, Complex lambda = {},
                              const DivergenceSettings& settings = {});

struct E0bReport {
    NormGrowthTable table;
    bool bounded = false;
    double threshold = 0.0;
    /// Ladder of int |f(psi)| |1 - w|^t |psi'| / |1 - phi(lambda) conj(w)|^2 dA
    /// with f(psi(w)) = (1 - conj(z_m) w)^{-1-alpha_m}, lambda = psi(0).
    DivergenceReport defining_integral;
};

/// Weighted-regime example for 1 < p < 4/3: symbol |1 - conj(z_m) phi|^t,
/// family (1 - conj(z_m) phi)^{-s}. bounded means the last ratio is within
/// max_growth of the earlier maximum.
E0bReport example_e0b_boundedness(const ConformalMap& map, double p, double t, std::span<const double> family_s,
                                  const DiskGridSpec& grid, double max_growth = 0.10,
                                  const DivergenceSettings& settings = {});

} // namespace polyberg
