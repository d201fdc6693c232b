#pragma once

#include "polyberg/geometry.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace polyberg {

namespace detail {
class ScIntegrand;
}

/// Disk-to-polygon Schwarz-Christoffel parameters:
///   psi(z) = A * int_0^z prod_k (1 - conj(z_k) zeta)^(alpha_k - 1) d zeta + B.
struct PrevertexConfig {
    /// Arguments of the prevertices z_k = exp(i theta_k), strictly increasing in [0, 2pi).
    std::vector<double> arguments;
    std::vector<double> alphas;
    Complex scale{1.0, 0.0};  ///< A
    Complex offset{};         ///< B

    std::vector<Complex> prevertices() const;
    /// Throws DomainError when the invariants do not hold.
    void validate() const;
};

struct SolverSettings {
    int max_iterations = 80;
    /// Target for the max-norm of the log side-ratio residuals.
    double tolerance = 1e-13;
    /// Prevertex gaps below this value produce a crowding warning.
    double crowding_threshold = 1e-10;
};

struct SolveReport {
    PrevertexConfig config;
    int iterations = 0;
    double equation_residual = 0.0;
    /// max_k |psi(z_k) - w_k| / diam
    double vertex_residual = 0.0;
    bool crowded = false;
    std::vector<std::string> warnings;
};

/// Solves for prevertices, A and B. The first three prevertices are fixed
/// at arguments 0, 2pi/n, 4pi/n; the remaining gaps are found by damped
/// Newton on the side-length ratio equations. Throws NumericalError carrying
/// the best residual when the iteration cap is reached.
SolveReport solve_parameter_problem(const Polygon& polygon, const SolverSettings& settings = {});

/// psi(z) by path integration from 0 (|z| <= 1).
Complex psi(const PrevertexConfig& config, Complex z);
/// psi'(z) as the product formula (|z| < 1).
Complex psi_prime(const PrevertexConfig& config, Complex z);

/// The integral of the Schwarz-Christoffel integrand (without A) along the
/// straight segment a -> b in the closed disk. Endpoints that coincide with
/// prevertices are treated with Gauss-Jacobi rules.
Complex sc_path_integral(const PrevertexConfig& config, Complex a, Complex b);

/// phi and its first three derivatives at a point w of the polygon.
struct MapJet {
    Complex w;
    Complex zeta;  ///< phi(w)
    Complex d1;    ///< phi'(w)
    Complex d2;    ///< phi''(w)
    Complex d3;    ///< phi'''(w)
};

/// Solved conformal map pair psi: D -> Omega and phi = psi^{-1}.
///
/// Immutable after construction. Forward evaluations start from the nearest
/// point of a precomputed polar anchor table; the inverse uses ODE
/// continuation from a visible anchor followed by Newton polishing.
class ConformalMap {
public:
    ConformalMap(Polygon polygon, PrevertexConfig config);

    static ConformalMap solve(const Polygon& polygon, const SolverSettings& settings = {});

    const Polygon& polygon() const { return polygon_; }
    const PrevertexConfig& config() const { return config_; }
    const std::vector<Complex>& prevertices() const { return prevertices_; }

    Complex psi(Complex z) const;
    Complex psi_prime(Complex z) const;
    /// Continuous logarithm log A + sum (alpha_k - 1) Log(1 - conj(z_k) z) of psi'.
    Complex log_psi_prime(Complex z) const;
    /// psi(z) given a known pair psi(z_ref) = w_ref, integrating z_ref -> z.
    Complex psi_from(Complex z_ref, Complex w_ref, Complex z) const;

    /// Inverse map. Throws DomainError when w is not strictly inside the
    /// polygon and NumericalError when Newton does not converge.
    Complex phi(Complex w) const;
    /// Inverse map started from a nearby point whose jet is known.
    Complex phi_near(Complex w, const MapJet& reference) const;

    /// phi, phi', phi'', phi''' at w.
    MapJet jet(Complex w) const;
    MapJet jet_near(Complex w, const MapJet& reference) const;
    /// Jet from a known preimage zeta = phi(w).
    MapJet jet_at(Complex zeta, Complex w) const;

    /// G(w, w_k) = 1 - phi(w) conj(phi(w_k)) given zeta = phi(w).
    Complex green_factor(Complex zeta, std::size_t k) const;

    /// v(w) |phi'(w)| / (1 - |phi(w)|^2); lies in [1/4, 1] by Koebe.
    double koebe_ratio(Complex w) const;

private:
    struct Anchor {
        Complex z;
        Complex w;
    };

    Complex newton_polish(Complex w, Complex z, Complex psi_z) const;

    Polygon polygon_;
    PrevertexConfig config_;
    std::vector<Complex> prevertices_;
    std::shared_ptr<const detail::ScIntegrand> integrand_;
    std::vector<Anchor> anchors_;
    double scale_length_;
};

/// Empirical constants of the near-boundary derivative estimates sampled on
/// Whitney squares and their enlargements.
struct KernelBoundsTable {
    struct Level {
        int level = 0;
        double rho_phi2 = 0.0;     ///< sup rho |phi''| / |phi'|
        double rho2_phi3 = 0.0;    ///< sup rho^2 |phi'''| / |phi'|
        double rho_phi1_green = 0.0;  ///< sup rho |phi'(w)| / inf_z |1 - phi(z) conj(phi(w))|
        double rho_over_v_min = 0.0;
        double rho_over_v_max = 0.0;
        std::size_t samples = 0;
    };
    std::vector<Level> levels;
    double rho_phi2 = 0.0;
    double rho2_phi3 = 0.0;
    double rho_phi1_green = 0.0;
    double rho_over_v_min = 0.0;
    double rho_over_v_max = 0.0;
    /// Per vertex: range of log|phi'(w)| - (1 - alpha_k) log|G(w, w_k)| over
    /// sampled points of squares meeting B(w_k, r), r = min vertex gap / 10.
    std::vector<double> corner_log_min;
    std::vector<double> corner_log_max;
};

KernelBoundsTable whitney_kernel_bounds(const ConformalMap& map, const WhitneyDecomposition& decomposition);

} // namespace polyberg
