#pragma once

#include "polyberg/geometry.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace polyberg {

enum class Verdict { Convergent, Divergent };

std::string to_string(Verdict verdict);

struct DivergenceSettings {
    /// Truncation radii r_k = 1 - 2^{-k}, k = 1..rings. Deep ladders are
    /// needed because the smooth part of the disk dominates the increments
    /// down to 1 - r of order 1e-5 for moderate corner singularities.
    int rings = 28;
    /// Number of trailing rings used for the ratio test and the fit.
    int tail = 6;
    /// Growth margin for the ratio test I(r_{k+1}) / I(r_k) >= 1 + margin.
    double margin = 0.05;
    /// Increments decaying slower than (1 - r)^stall_exponent count as
    /// non-decaying (logarithmic or worse growth).
    double stall_exponent = 0.1;
    int nodes = 16;
};

/// Truncated integrals over |z| < r_k of a non-negative integrand.
struct DivergenceReport {
    std::vector<double> radii;
    std::vector<double> truncated;   ///< I(r_k)
    std::vector<double> increments;  ///< I(r_k) - I(r_{k-1})
    /// Least-squares slope of log increment against log(1 - r_k) on the tail.
    double fitted_exponent = 0.0;
    bool tail_ratios_grow = false;
    Verdict verdict = Verdict::Convergent;
};

/// Verdict from ring increments. DIVERGENT when every tail ratio
/// I(r_{k+1})/I(r_k) is at least 1 + margin and the fitted exponent is
/// negative, or when the increments do not decay (fitted exponent at most
/// stall_exponent), which catches logarithmic divergence.
DivergenceReport assess_divergence(std::span<const double> radii, std::span<const double> increments,
                                   const DivergenceSettings& settings = {});

/// Ring-by-ring integration of integrand(zeta) dA over the disk with angular
/// grading toward the hotspot angles.
DivergenceReport divergence_probe(const std::function<double(Complex)>& integrand, std::span<const double> hotspots,
                                  const DivergenceSettings& settings = {});

} // namespace polyberg
