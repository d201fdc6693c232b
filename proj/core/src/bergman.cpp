#include "polyberg/bergman.hpp"

#include "polyberg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polyberg {

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

AnalyticFunction AnalyticFunction::constant(Complex c) {
    AnalyticFunction f;
    f.name = "constant";
    f.value = [c](const MapJet&) { return c; };
    f.d1 = [](const MapJet&) { return Complex{}; };
    f.d2 = [](const MapJet&) { return Complex{}; };
    return f;
}

AnalyticFunction AnalyticFunction::polynomial(std::vector<Complex> coefficients) {
    if (coefficients.empty()) coefficients.push_back(0.0);
    AnalyticFunction f;
    f.name = "polynomial(degree " + std::to_string(coefficients.size() - 1) + ")";
    f.value = [c = coefficients](const MapJet& j) {
        Complex s{};
        for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * j.w + *it;
        return s;
    };
    f.d1 = [c = coefficients](const MapJet& j) {
        Complex s{};
        for (std::size_t k = c.size(); k-- > 1;) s = s * j.w + static_cast<double>(k) * c[k];
        return s;
    };
    f.d2 = [c = coefficients](const MapJet& j) {
        Complex s{};
        for (std::size_t k = c.size(); k-- > 2;) s = s * j.w + static_cast<double>(k * (k - 1)) * c[k];
        return s;
    };
    return f;
}

AnalyticFunction AnalyticFunction::corner_power(const ConformalMap& map, std::size_t vertex, double s) {
    const Complex c = std::conj(map.prevertices().at(vertex));
    AnalyticFunction f;
    f.name = "corner_power(s=" + std::to_string(s) + ")";
    // g = 1 - c phi; f = g^{-s}; f' = s c phi' g^{-s-1};
    // f'' = s c (phi'' g^{-s-1} + (s+1) c phi'^2 g^{-s-2}).
    f.value = [c, s](const MapJet& j) { return std::exp(-s * std::log(1.0 - c * j.zeta)); };
    f.d1 = [c, s](const MapJet& j) {
        const Complex g = 1.0 - c * j.zeta;
        return s * c * j.d1 * std::exp((-s - 1.0) * std::log(g));
    };
    f.d2 = [c, s](const MapJet& j) {
        const Complex g = 1.0 - c * j.zeta;
        const Complex lg = std::log(g);
        return s * c * (j.d2 * std::exp((-s - 1.0) * lg) + (s + 1.0) * c * j.d1 * j.d1 * std::exp((-s - 2.0) * lg));
    };
    return f;
}

MapJet KernelContext::point(Complex w) const {
    const std::pair<double, double> key{w.real(), w.imag()};
    {
        std::lock_guard lock(mutex_);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const MapJet j = map_.jet(w);
    std::lock_guard lock(mutex_);
    cache_.emplace(key, j);
    return j;
}

Complex KernelContext::kernel(Complex z, Complex w) const { return bergman_kernel(point(z), point(w)); }

Complex bergman_kernel(const MapJet& z, const MapJet& w) {
    const Complex d = 1.0 - z.zeta * std::conj(w.zeta);
    return z.d1 * std::conj(w.d1) / (d * d);
}

Complex kernel(const KernelContext& context, Complex z, Complex w) { return context.kernel(z, w); }

DiskFunction DiskFunction::from_coefficients(std::vector<Complex> coefficients) {
    DiskFunction f;
    f.coefficients_ = std::move(coefficients);
    return f;
}

DiskFunction DiskFunction::from_evaluator(Evaluator evaluator) {
    if (!evaluator) throw DomainError("disk function evaluator is empty");
    DiskFunction f;
    f.evaluator_ = std::move(evaluator);
    return f;
}

Complex DiskFunction::operator()(Complex z) const {
    if (evaluator_) return evaluator_(z);
    Complex s{};
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) s = s * z + *it;
    return s;
}

Complex DiskFunction::evaluate_direct(Complex z) const {
    if (evaluator_) return evaluator_(z);
    Complex s{};
    for (std::size_t n = 0; n < coefficients_.size(); ++n) s += coefficients_[n] * std::pow(z, static_cast<int>(n));
    return s;
}

namespace {

std::vector<Complex> projection_coefficients(const DiskFunction& f, int degree, int radial, int angular) {
    const Rule& rule = gauss_legendre(radial);
    std::vector<Complex> c(static_cast<std::size_t>(degree) + 1);
    std::vector<Complex> ring(c.size());
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        const double r = 0.5 * (1.0 + rule.nodes[a]);
        std::fill(ring.begin(), ring.end(), Complex{});
        for (int t = 0; t < angular; ++t) {
            const double theta = 2.0 * kPi * t / angular;
            const Complex value = f(std::polar(r, theta));
            const Complex step = std::polar(1.0, -theta);
            Complex power = 1.0;
            for (std::size_t j = 0; j < ring.size(); ++j) {
                ring[j] += value * power;
                power *= step;
            }
        }
        // dA = r dr dtheta / pi; dr = 0.5 * weight; dtheta = 2 pi / angular.
        const double weight = 0.5 * rule.weights[a] * r * (2.0 / angular);
        double rj = 1.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            c[j] += static_cast<double>(j + 1) * weight * rj * ring[j];
            rj *= r;
        }
    }
    return c;
}

} // namespace

DiskFunction disk_project(const DiskFunction& f, const ProjectionSettings& settings) {
    if (settings.max_degree < 0 || settings.radial_nodes < 4 || settings.angular_nodes < 2 * settings.max_degree + 2) {
        throw DomainError("projection settings too coarse for the requested degree");
    }
    const auto coarse = projection_coefficients(f, settings.max_degree, settings.radial_nodes, settings.angular_nodes);
    const auto fine =
        projection_coefficients(f, settings.max_degree, 2 * settings.radial_nodes, 2 * settings.angular_nodes);
    double change = 0.0;
    double size = 0.0;
    for (std::size_t j = 0; j < fine.size(); ++j) {
        change = std::max(change, std::abs(fine[j] - coarse[j]));
        size = std::max(size, std::abs(fine[j]));
    }
    if (change > 1e-10 * (1.0 + size)) throw NumericalError("disk projection quadrature is not converged", change);
    return DiskFunction::from_coefficients(fine);
}

Complex disk_project(const DiskFunction& f, Complex z, const ProjectionSettings& settings) {
    return disk_project(f, settings)(z);
}

MonomialProjection disk_project_monomial(int m, int n, bool weighted) {
    if (m < 0 || n < 0) throw DomainError("monomial exponents must be non-negative");
    if (m < n) return {Rational(0), 0};
    Rational c(m - n + 1, m + 1);
    if (weighted) c /= Rational(m + 2);
    return {c, m - n};
}

Complex szego(const std::function<Complex(double)>& boundary_values, Complex z, const QuadratureSpec& spec) {
    if (!(std::abs(z) < 1.0)) throw DomainError("Szego integral requires |z| < 1");
    return integrate_circle([&](double t) { return boundary_values(t) / (1.0 - z * std::polar(1.0, -t)); }, spec);
}

TaylorSandwich taylor_norm_sandwich(const DiskFunction& f, double p) {
    if (!(p > 2.0)) throw DomainError("the Taylor coefficient sandwich requires p > 2");
    if (!f.has_coefficients()) throw DomainError("the Taylor coefficient sandwich needs coefficient form");
    TaylorSandwich out;
    const auto& a = f.coefficients();
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double m = std::pow(std::abs(a[n]), p);
        out.lower_sum += m / static_cast<double>(n + 1);
        out.upper_sum += std::pow(static_cast<double>(n + 1), p - 3.0) * m;
    }
    QuadratureSpec spec;
    spec.rel_tol = 1e-11;
    out.norm_p = integrate_disk([&](Complex z) { return Complex(std::pow(std::abs(f(z)), p), 0.0); }, 1.0, spec).real();
    return out;
}

double taylor_calibration_constant(double p, int max_degree) {
    if (!(p > 2.0)) throw DomainError("the Taylor coefficient sandwich requires p > 2");
    double worst = 1.0;
    for (int n = 0; n <= max_degree; ++n) {
        const double lower = 1.0 / (n + 1);
        const double norm = 2.0 / (n * p + 2.0);
        const double upper = std::pow(n + 1.0, p - 3.0);
        worst = std::max({worst, lower / norm, norm / upper});
    }
    return 2.0 * worst;
}

WhitneyBank build_whitney_bank(const ConformalMap& map, const WhitneyDecomposition& decomposition, int nodes_per_axis) {
    if (nodes_per_axis < 1) throw DomainError("nodes_per_axis must be positive");
    const Rule& rule = gauss_legendre(nodes_per_axis);
    WhitneyBank bank;
    bank.nodes_per_axis = nodes_per_axis;
    bank.nodes.reserve(decomposition.size() * rule.nodes.size() * rule.nodes.size());
    for (const WhitneySquare& sq : decomposition.squares()) {
        const double h = sq.square.side / 2;
        const Complex c = sq.square.center();
        const MapJet center = map.jet(c);
        for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
            for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
                const Complex w = c + Complex(h * rule.nodes[b], h * rule.nodes[a]);
                bank.nodes.push_back({map.jet_near(w, center), rule.weights[a] * rule.weights[b] * h * h / kPi});
            }
        }
        bank.square_ends.push_back(bank.nodes.size());
    }
    bank.level_ends = decomposition.level_ends();
    return bank;
}

DiskGrid build_disk_grid(const ConformalMap& map, const DiskGridSpec& spec, std::span<const double> extra_hotspots) {
    if (spec.rings < 1 || spec.radial_nodes < 1 || spec.angular_nodes < 1 || spec.angular_panels < 1) {
        throw DomainError("disk grid needs positive ring and node counts");
    }
    if (!(spec.radius > 0.0 && spec.radius <= 1.0)) throw DomainError("disk grid radius must lie in (0, 1]");
    DiskGrid grid;
    grid.ring_edges.push_back(0.0);
    for (int k = 1; k <= spec.rings; ++k) {
        const double e = 1.0 - std::ldexp(1.0, -k);
        if (e >= spec.radius) break;
        grid.ring_edges.push_back(e);
    }
    if (spec.radius < 1.0) grid.ring_edges.push_back(spec.radius);

    std::vector<double> hotspots(extra_hotspots.begin(), extra_hotspots.end());
    if (spec.prevertex_hotspots) {
        for (double t : map.config().arguments) hotspots.push_back(t);
    }

    const Rule& radial = gauss_legendre(spec.radial_nodes);
    const Rule& angular = gauss_legendre(spec.angular_nodes);
    for (std::size_t ring = 0; ring + 1 < grid.ring_edges.size(); ++ring) {
        const double r0 = grid.ring_edges[ring];
        const double r1 = grid.ring_edges[ring + 1];
        int panels = spec.angular_panels;
        if (spec.angular_resolution > 0.0) {
            panels = std::max(panels, static_cast<int>(std::ceil(2.0 * kPi / (spec.angular_resolution * (1.0 - r1)))));
        }
        std::vector<double> breaks;
        for (int k = 0; k < panels; ++k) breaks.push_back(2.0 * kPi * k / panels);
        const double scale = 0.5 * std::max(1.0 - r1, r1 - r0);
        for (double h : hotspots) {
            breaks.push_back(h);
            for (double d = scale; d < kPi; d *= 2.0) {
                breaks.push_back(h + d);
                breaks.push_back(h - d);
            }
        }
        for (double& b : breaks) {
            b = std::fmod(b, 2.0 * kPi);
            if (b < 0) b += 2.0 * kPi;
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return b - a < 1e-15; }),
                     breaks.end());
        breaks.push_back(breaks.front() + 2.0 * kPi);

        const double hr = (r1 - r0) / 2, cr = (r1 + r0) / 2;
        for (std::size_t a = 0; a < radial.nodes.size(); ++a) {
            const double r = cr + hr * radial.nodes[a];
            bool first = true;
            Complex z_prev{};
            Complex w_prev{};
            for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
                const double ht = (breaks[p + 1] - breaks[p]) / 2, ct = (breaks[p + 1] + breaks[p]) / 2;
                for (std::size_t b = 0; b < angular.nodes.size(); ++b) {
                    const Complex zeta = std::polar(r, ct + ht * angular.nodes[b]);
                    Complex w{};
                    if (spec.with_image) {
                        w = first ? map.psi(zeta) : map.psi_from(z_prev, w_prev, zeta);
                        first = false;
                        z_prev = zeta;
                        w_prev = w;
                    }
                    MapNode node{map.jet_at(zeta, w), radial.weights[a] * angular.weights[b] * hr * ht * r / kPi};
                    grid.psi_prime.push_back(1.0 / node.point.d1);
                    grid.nodes.push_back(node);
                }
            }
        }
        grid.ring_ends.push_back(grid.nodes.size());
    }
    return grid;
}

double norm_p_power(const DiskGrid& grid, const AnalyticFunction::Evaluator& f, double p) {
    std::vector<double> terms(grid.nodes.size());
    for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
        terms[k] = std::pow(std::abs(f(grid.nodes[k].point)), p) * std::norm(grid.psi_prime[k]) * grid.nodes[k].weight;
    }
    return pairwise_sum(terms);
}

std::vector<DerivativeNormRow> derivative_norm_ratio(const ConformalMap& map, std::span<const AnalyticFunction> family,
                                                     double p, const DiskGridSpec& grid_spec) {
    if (!(p >= 1.0)) throw DomainError("norm exponent must be at least 1");
    DiskGridSpec spec = grid_spec;
    spec.with_image = true;
    const DiskGrid grid = build_disk_grid(map, spec);
    std::vector<double> v(grid.nodes.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = dist_to_boundary(grid.nodes[k].point.w, map.polygon());

    std::vector<DerivativeNormRow> rows;
    for (const AnalyticFunction& f : family) {
        const double base = norm_p_power(grid, f.value, p);
        if (!(base > 0.0)) throw NumericalError("test function has zero norm", base);
        std::vector<double> first(v.size()), second(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double jac = std::norm(grid.psi_prime[k]) * grid.nodes[k].weight;
            first[k] = std::pow(v[k] * std::abs(f.d1(grid.nodes[k].point)), p) * jac;
            second[k] = std::pow(v[k] * v[k] * std::abs(f.d2(grid.nodes[k].point)), p) * jac;
        }
        rows.push_back({f.name, std::pow(pairwise_sum(first) / base, 1.0 / p),
                        std::pow(pairwise_sum(second) / base, 1.0 / p)});
    }
    return rows;
}

MaximalProjection maximal_project(const ConformalMap& map, const DiskGrid& grid,
                                  const std::function<double(const MapJet&)>& g, Complex z,
                                  const DivergenceSettings& settings) {
    const MapJet zj = map.jet(z);
    const double scale = std::abs(zj.d1);
    std::vector<double> radii;
    std::vector<double> increments;
    std::size_t begin = 0;
    double total = 0.0;
    for (std::size_t ring = 0; ring < grid.ring_ends.size(); ++ring) {
        std::vector<double> terms;
        for (std::size_t k = begin; k < grid.ring_ends[ring]; ++k) {
            const MapNode& node = grid.nodes[k];
            const double gv = g(node.point);
            if (gv < 0.0) throw DomainError("maximal projection requires a non-negative integrand");
            // |K(z, psi(zeta))| |psi'(zeta)|^2 = |phi'(z)| |psi'(zeta)| / |1 - phi(z) conj(zeta)|^2
            const double d = std::abs(1.0 - zj.zeta * std::conj(node.point.zeta));
            terms.push_back(scale * std::abs(grid.psi_prime[k]) / (d * d) * gv * node.weight);
        }
        increments.push_back(pairwise_sum(terms));
        total += increments.back();
        radii.push_back(grid.ring_edges[ring + 1]);
        begin = grid.ring_ends[ring];
    }
    MaximalProjection out;
    out.value = total;
    if (radii.size() >= 3) out.ladder = assess_divergence(radii, increments, settings);
    return out;
}

} // namespace polyberg
