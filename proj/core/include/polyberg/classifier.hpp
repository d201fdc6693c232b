#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace polyberg {

using Exact = boost::multiprecision::cpp_rational;

/// Parses "5", "-1.25", "1.8e-1" or "5/3" into an exact rational.
/// Throws DomainError on malformed input.
Exact parse_exact(const std::string& text);

/// The exact value of a finite double.
Exact exact_from_double(double value);

std::string to_string(const Exact& value);

/// Bergman projection bounded on L^p of a polygon with largest angle factor
/// alpha_max: (2-p)(alpha-1) < 2(p-1) for p <= 2, (p-2)(alpha-1) < 2 for
/// p >= 2. Boundary equality counts as unbounded. The same predicate decides
/// the disk-side projection with weight |psi'|^{2-p}.
/// Throws DomainError unless p > 1 and 0 < alpha_max < 2.
bool projection_bounded(const Exact& p, const Exact& alpha_max);
bool projection_bounded(double p, double alpha_max);

/// Hypothesis of the Toeplitz boundedness theorem: no restriction for
/// 4/3 <= p <= 4, alpha < 1 + 2/(p-2) for p > 4 and
/// alpha < 1 + 2(p-1)/(2-p) for p < 4/3.
bool main1_hypothesis(const Exact& p, const Exact& alpha_max);
bool main1_hypothesis(double p, double alpha_max);

/// Open lower bound for the weight exponent t: (p-2)(alpha-1) - 2 for p > 4,
/// (2-p)(alpha-1) - 2(p-1) for p < 4/3. Throws DomainError for p in
/// [4/3, 4] ("no weighted regime applies") and when alpha lies below the
/// unboundedness threshold of the branch.
Exact weighted_exponent_threshold(const Exact& p, const Exact& alpha_max);

/// "no-restriction", "p>4" or "p<4/3".
std::string regime(const Exact& p);

struct BoundednessVerdict {
    Exact p;
    Exact alpha_max;
    bool projection_bounded = false;
    bool main1_hypothesis = false;
    std::string regime;
    /// alpha_max must stay below this value for the projection to be
    /// bounded; empty at p = 2.
    std::optional<Exact> projection_alpha_threshold;
    /// Same for the Toeplitz hypothesis; empty for 4/3 <= p <= 4.
    std::optional<Exact> main1_alpha_threshold;
    /// Filled when requested and a weighted regime applies.
    std::optional<Exact> weighted_t_min;
};

BoundednessVerdict classify(const Exact& p, const Exact& alpha_max, bool weighted = false);

} // namespace polyberg
