#include "polyberg/divergence.hpp"

#include "polyberg/errors.hpp"
#include "polyberg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polyberg {

std::string to_string(Verdict verdict) { return verdict == Verdict::Divergent ? "DIVERGENT" : "CONVERGENT"; }

DivergenceReport assess_divergence(std::span<const double> radii, std::span<const double> increments,
                                   const DivergenceSettings& settings) {
    if (radii.size() != increments.size()) throw DomainError("radii and increments differ in length");
    if (radii.size() < 3) throw DomainError("divergence assessment needs at least 3 rings");
    DivergenceReport report;
    report.radii.assign(radii.begin(), radii.end());
    report.increments.assign(increments.begin(), increments.end());
    double running = 0.0;
    for (double d : increments) report.truncated.push_back(running += d);

    const std::size_t count = radii.size();
    const std::size_t tail = std::min<std::size_t>(static_cast<std::size_t>(std::max(settings.tail, 2)), count - 1);
    const std::size_t first = count - tail;

    report.tail_ratios_grow = true;
    for (std::size_t k = first; k < count; ++k) {
        const double prev = report.truncated[k - 1];
        if (!(prev > 0.0) || report.truncated[k] / prev < 1.0 + settings.margin) report.tail_ratios_grow = false;
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double m = 0;
    for (std::size_t k = first; k < count; ++k) {
        const double x = std::log(1.0 - radii[k]);
        const double y = std::log(std::max(increments[k], std::numeric_limits<double>::min()));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        m += 1;
    }
    report.fitted_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    const bool power_growth = report.tail_ratios_grow && report.fitted_exponent < 0.0;
    const bool stalled = report.fitted_exponent <= settings.stall_exponent;
    report.verdict = (power_growth || stalled) ? Verdict::Divergent : Verdict::Convergent;
    return report;
}

DivergenceReport divergence_probe(const std::function<double(Complex)>& integrand, std::span<const double> hotspots,
                                  const DivergenceSettings& settings) {
    if (settings.rings < 3) throw DomainError("divergence probe needs at least 3 rings");
    std::vector<double> radii;
    std::vector<double> increments;
    double inner = 0.0;
    const PlaneIntegrand f = [&](Complex z) { return Complex(integrand(z), 0.0); };
    for (int k = 1; k <= settings.rings; ++k) {
        const double outer = 1.0 - std::ldexp(1.0, -k);
        increments.push_back(integrate_annulus(f, inner, outer, hotspots, settings.nodes).real());
        radii.push_back(outer);
        inner = outer;
    }
    return assess_divergence(radii, increments, settings);
}

} // namespace polyberg
