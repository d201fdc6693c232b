#include "polyberg/quadrature.hpp"

#include "polyberg/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <tuple>

namespace polyberg {

namespace {

constexpr double kPi = std::numbers::pi;

// Golub-Welsch for the Jacobi weight (1-x)^a (1+x)^b.
Rule golub_welsch_jacobi(int n, double a, double b) {
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 0));
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            diag[k] = (b - a) / (ab + 2.0);
        } else {
            const double s = 2.0 * k + ab;
            diag[k] = (b * b - a * a) / (s * (s + 2.0));
        }
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        double v;
        if (k == 1) {
            v = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        } else {
            v = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
        }
        sub[k - 1] = std::sqrt(v);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double mu0 =
        std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
    Rule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        rule.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()[k];
        const double v0 = solver.eigenvectors()(0, k);
        rule.weights[static_cast<std::size_t>(k)] = mu0 * v0 * v0;
    }
    return rule;
}

// Newton polish of Legendre nodes; weights from the derivative.
void polish_legendre(Rule& rule) {
    const int n = static_cast<int>(rule.nodes.size());
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        double x = rule.nodes[k];
        double dp = 1.0;
        for (int it = 0; it < 3; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            x -= p1 / dp;
        }
        rule.nodes[k] = x;
        rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

Complex tensor_box(const PlaneIntegrand& f, double x0, double x1, double y0, double y1, const Rule& rule) {
    const double hx = (x1 - x0) / 2, cx = (x1 + x0) / 2;
    const double hy = (y1 - y0) / 2, cy = (y1 + y0) / 2;
    Complex total{};
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        Complex row{};
        const double y = cy + hy * rule.nodes[a];
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
            row += rule.weights[b] * f(Complex(cx + hx * rule.nodes[b], y));
        }
        total += rule.weights[a] * row;
    }
    return total * hx * hy;
}

struct Panel {
    double x0, x1, y0, y1;
    int depth;
    Complex coarse;
    Complex children[4];
    Complex fine() const { return children[0] + children[1] + children[2] + children[3]; }
    double error() const { return std::abs(fine() - coarse); }
};

Panel make_panel(const PlaneIntegrand& f, double x0, double x1, double y0, double y1, int depth, Complex coarse,
                 const Rule& rule) {
    Panel p{x0, x1, y0, y1, depth, coarse, {}};
    const double xm = (x0 + x1) / 2, ym = (y0 + y1) / 2;
    p.children[0] = tensor_box(f, x0, xm, y0, ym, rule);
    p.children[1] = tensor_box(f, xm, x1, y0, ym, rule);
    p.children[2] = tensor_box(f, x0, xm, ym, y1, rule);
    p.children[3] = tensor_box(f, xm, x1, ym, y1, rule);
    return p;
}

template <class T>
T pairwise(std::span<const T> v) {
    if (v.empty()) return T{};
    if (v.size() <= 8) {
        T s{};
        for (const T& x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise(v.subspan(0, half)) + pairwise(v.subspan(half));
}

} // namespace

void QuadratureSpec::validate() const {
    if (base_nodes < 4) throw DomainError("quadrature base_nodes must be at least 4");
    if (max_refinements < 0) throw DomainError("quadrature max_refinements must be non-negative");
    if (!(abs_tol > 0) || !(rel_tol > 0)) throw DomainError("quadrature tolerances must be positive");
}

const Rule& gauss_jacobi(int n, double a, double b) {
    if (n < 1) throw DomainError("quadrature rule needs at least one node");
    if (!(a > -1.0) || !(b > -1.0)) throw DomainError("Jacobi exponents must exceed -1");
    static std::mutex mutex;
    static std::map<std::tuple<int, double, double>, std::unique_ptr<Rule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{n, a, b}];
    if (!slot) {
        slot = std::make_unique<Rule>(golub_welsch_jacobi(n, a, b));
        if (a == 0.0 && b == 0.0) polish_legendre(*slot);
    }
    return *slot;
}

const Rule& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

Complex integrate_box(const PlaneIntegrand& f, double x0, double x1, double y0, double y1,
                      const QuadratureSpec& spec) {
    spec.validate();
    if (x1 == x0 || y1 == y0) return {};
    const Rule& rule = gauss_legendre(spec.base_nodes);
    const auto worse = [](const Panel& a, const Panel& b) { return a.error() < b.error(); };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> queue(worse);
    std::vector<Panel> finished;
    queue.push(make_panel(f, x0, x1, y0, y1, 0, tensor_box(f, x0, x1, y0, y1, rule), rule));

    // Budget on the number of panels; depth bounded by max_refinements.
    const std::size_t budget = 64 + 16 * static_cast<std::size_t>(spec.max_refinements) * spec.max_refinements;
    const auto totals = [&]() {
        Complex value{};
        double error = 0.0;
        auto copy = queue;
        while (!copy.empty()) {
            value += copy.top().fine();
            error += copy.top().error();
            copy.pop();
        }
        for (const Panel& p : finished) {
            value += p.fine();
            error += p.error();
        }
        return std::pair{value, error};
    };

    double running_error = queue.top().error();
    Complex running_value = queue.top().fine();
    while (!queue.empty()) {
        if (running_error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(running_value))) break;
        if (queue.size() + finished.size() >= budget) break;
        Panel worst = queue.top();
        queue.pop();
        if (worst.depth >= spec.max_refinements) {
            finished.push_back(worst);
            continue;
        }
        running_error -= worst.error();
        running_value -= worst.fine();
        const double xm = (worst.x0 + worst.x1) / 2, ym = (worst.y0 + worst.y1) / 2;
        const double bx[4][4] = {{worst.x0, xm, worst.y0, ym},
                                 {xm, worst.x1, worst.y0, ym},
                                 {worst.x0, xm, ym, worst.y1},
                                 {xm, worst.x1, ym, worst.y1}};
        for (int c = 0; c < 4; ++c) {
            Panel child = make_panel(f, bx[c][0], bx[c][1], bx[c][2], bx[c][3], worst.depth + 1, worst.children[c], rule);
            running_error += child.error();
            running_value += child.fine();
            queue.push(child);
        }
    }
    const auto [value, error] = totals();
    if (!std::isfinite(std::abs(value))) throw NumericalError("box quadrature produced a non-finite value", error);
    if (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
        throw NumericalError("box quadrature did not reach tolerance (residual estimate " + std::to_string(error) + ")",
                             error);
    }
    return value;
}

Complex integrate_square(const PlaneIntegrand& f, const Square& square, const QuadratureSpec& spec) {
    const double x0 = square.anchor.real(), y0 = square.anchor.imag();
    return integrate_box(f, x0, x0 + square.side, y0, y0 + square.side, spec) / kPi;
}

namespace {

Complex polar_rule(const PlaneIntegrand& f, double radius, int radial_nodes, int angular_nodes, int panels) {
    const Rule& rule = gauss_legendre(radial_nodes);
    std::vector<double> edges{0.0};
    for (int k = 1; k <= panels; ++k) edges.push_back(radius * (1.0 - std::ldexp(1.0, -k)));
    edges.push_back(radius);
    std::vector<Complex> rings;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double h = (edges[p + 1] - edges[p]) / 2, c = (edges[p + 1] + edges[p]) / 2;
        for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
            const double r = c + h * rule.nodes[a];
            Complex ring{};
            for (int t = 0; t < angular_nodes; ++t) {
                const double theta = 2.0 * kPi * t / angular_nodes;
                ring += f(std::polar(r, theta));
            }
            // (1/pi) * r dr * (2 pi / N) * sum
            rings.push_back(ring * (2.0 / angular_nodes) * r * h * rule.weights[a]);
        }
    }
    return pairwise_sum(rings);
}

} // namespace

Complex integrate_disk(const PlaneIntegrand& f, double radius, const QuadratureSpec& spec) {
    spec.validate();
    if (!(radius > 0.0) || radius > 1.0) throw DomainError("disk radius must lie in (0, 1]");
    int nr = spec.base_nodes;
    int nt = 4 * spec.base_nodes;
    Complex previous = polar_rule(f, radius, nr, nt, spec.max_refinements);
    double change = 0.0;
    for (int round = 0; round < 4; ++round) {
        nr *= 2;
        nt *= 2;
        const Complex current = polar_rule(f, radius, nr, nt, spec.max_refinements);
        change = std::abs(current - previous);
        if (change <= std::max(spec.abs_tol, spec.rel_tol * std::abs(current))) return current;
        previous = current;
    }
    throw NumericalError("disk quadrature did not reach tolerance", change);
}

Complex integrate_annulus(const PlaneIntegrand& f, double r0, double r1, std::span<const double> hotspots,
                          int nodes) {
    const Rule& rule = gauss_legendre(nodes);
    const double scale = 0.5 * std::max(1.0 - r1, r1 - r0);
    std::vector<double> breaks;
    for (int k = 0; k < 16; ++k) breaks.push_back(2.0 * kPi * k / 16);
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
    std::vector<Complex> parts;
    parts.reserve(breaks.size());
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double ht = (breaks[p + 1] - breaks[p]) / 2, ct = (breaks[p + 1] + breaks[p]) / 2;
        Complex panel{};
        for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
            const double r = cr + hr * rule.nodes[a];
            Complex row{};
            for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
                row += rule.weights[b] * f(std::polar(r, ct + ht * rule.nodes[b]));
            }
            panel += rule.weights[a] * r * row;
        }
        parts.push_back(panel * hr * ht / kPi);
    }
    return pairwise_sum(parts);
}

Complex integrate_disk_graded(const PlaneIntegrand& f, double radius, std::span<const double> hotspots, int rings,
                              int nodes) {
    std::vector<Complex> parts;
    double inner = 0.0;
    for (int k = 1; k <= rings; ++k) {
        const double outer = radius * (1.0 - std::ldexp(1.0, -k));
        parts.push_back(integrate_annulus(f, inner, outer, hotspots, nodes));
        inner = outer;
    }
    parts.push_back(integrate_annulus(f, inner, radius, hotspots, nodes));
    return pairwise_sum(parts);
}

Complex integrate_segment_jacobi(const PlaneIntegrand& f, double beta, Complex start, Complex end, int nodes) {
    if (!(beta > -1.0)) throw DomainError("endpoint exponent must exceed -1");
    const Rule& rule = gauss_jacobi(nodes, beta, 0.0);
    const Complex half = (end - start) / 2.0;
    const double scale = std::pow(std::abs(half), beta);
    Complex total{};
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        total += rule.weights[k] * f(start + half * (1.0 + rule.nodes[k]));
    }
    return total * half * scale;
}

Complex integrate_circle(const AngleIntegrand& f, const QuadratureSpec& spec) {
    spec.validate();
    int n = 4 * spec.base_nodes;
    Complex sum{};
    for (int k = 0; k < n; ++k) sum += f(2.0 * kPi * k / n);
    Complex mean = sum / static_cast<double>(n);
    double change = std::numeric_limits<double>::infinity();
    for (int round = 0; round < spec.max_refinements; ++round) {
        Complex odd{};
        for (int k = 0; k < n; ++k) odd += f(2.0 * kPi * (k + 0.5) / n);
        sum += odd;
        n *= 2;
        const Complex refined = sum / static_cast<double>(n);
        change = std::abs(refined - mean);
        mean = refined;
        if (change <= std::max(spec.abs_tol, spec.rel_tol * std::abs(mean))) return mean;
    }
    throw NumericalError("circle quadrature did not reach tolerance", change);
}

Complex pairwise_sum(std::span<const Complex> values) { return pairwise(values); }
double pairwise_sum(std::span<const double> values) { return pairwise(values); }

} // namespace polyberg
