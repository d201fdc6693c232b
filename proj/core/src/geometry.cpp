#include "polyberg/geometry.hpp"

#include "polyberg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <tuple>

namespace polyberg {

namespace {

constexpr double kCollinearTolerance = 1e-9;

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

double signed_area(std::span<const Complex> v) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        s += cross(v[k], v[(k + 1) % v.size()]);
    }
    return s / 2;
}

double point_segment_distance(Complex w, Complex a, Complex b) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(w - a);
    double t = ((w - a) * std::conj(ab)).real() / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(w - (a + t * ab));
}

int orientation(Complex a, Complex b, Complex c) {
    const double v = cross(b - a, c - a);
    return (v > 0) - (v < 0);
}

bool on_segment(Complex a, Complex b, Complex p) {
    return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
           std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
}

bool segments_intersect(Complex p1, Complex p2, Complex q1, Complex q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

// Liang-Barsky clip of segment ab against the closed box.
bool segment_meets_box(Complex a, Complex b, double x0, double x1, double y0, double y1) {
    double t0 = 0.0;
    double t1 = 1.0;
    const double dx = b.real() - a.real();
    const double dy = b.imag() - a.imag();
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.real() - x0, x1 - a.real(), a.imag() - y0, y1 - a.imag()};
    for (int k = 0; k < 4; ++k) {
        if (p[k] == 0.0) {
            if (q[k] < 0.0) return false;
            continue;
        }
        const double r = q[k] / p[k];
        if (p[k] < 0.0) {
            t0 = std::max(t0, r);
        } else {
            t1 = std::min(t1, r);
        }
        if (t0 > t1) return false;
    }
    return true;
}

double point_box_distance(Complex w, double x0, double x1, double y0, double y1) {
    const double dx = std::max({x0 - w.real(), 0.0, w.real() - x1});
    const double dy = std::max({y0 - w.imag(), 0.0, w.imag() - y1});
    return std::hypot(dx, dy);
}

double segment_box_distance(Complex a, Complex b, const Square& s) {
    const double x0 = s.anchor.real();
    const double y0 = s.anchor.imag();
    const double x1 = x0 + s.side;
    const double y1 = y0 + s.side;
    if (segment_meets_box(a, b, x0, x1, y0, y1)) return 0.0;
    double d = std::min(point_box_distance(a, x0, x1, y0, y1), point_box_distance(b, x0, x1, y0, y1));
    const Complex corners[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    for (const Complex& c : corners) d = std::min(d, point_segment_distance(c, a, b));
    return d;
}

bool crossing_inside(std::span<const Complex> v, Complex w) {
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t k = 0, j = n - 1; k < n; j = k++) {
        const Complex a = v[k];
        const Complex b = v[j];
        if ((a.imag() > w.imag()) != (b.imag() > w.imag())) {
            const double x = a.real() + (w.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
            if (w.real() < x) inside = !inside;
        }
    }
    return inside;
}

} // namespace

bool Square::contains(Complex w) const {
    return anchor.real() <= w.real() && w.real() <= anchor.real() + side && anchor.imag() <= w.imag() &&
           w.imag() <= anchor.imag() + side;
}

Square enlarge(const Square& square) {
    const double shift = square.side / 20;
    return Square{square.anchor - Complex(shift, shift), square.side * 11 / 10};
}

std::vector<double> interior_angles(std::span<const Complex> vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw DomainError("polygon needs at least 3 vertices");
    std::vector<double> alphas(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Complex in = vertices[k] - vertices[(k + n - 1) % n];
        const Complex out = vertices[(k + 1) % n] - vertices[k];
        if (in == Complex{} || out == Complex{}) {
            throw DomainError("repeated vertex at index " + std::to_string(k));
        }
        const double turn = std::arg(out / in);
        const double alpha = 1.0 - turn / std::numbers::pi;
        if (std::abs(alpha - 1.0) < kCollinearTolerance) {
            throw DomainError("collinear vertex at index " + std::to_string(k) + " (angle factor 1)");
        }
        if (alpha <= 0.0 || alpha >= 2.0) {
            throw DomainError("degenerate spike at vertex " + std::to_string(k));
        }
        alphas[k] = alpha;
    }
    return alphas;
}

Polygon::Polygon(std::vector<Complex> vertices) : vertices_(std::move(vertices)) {
    const std::size_t n = vertices_.size();
    if (n < 3) throw DomainError("polygon needs at least 3 vertices");
    if (signed_area(vertices_) < 0) std::reverse(vertices_.begin() + 1, vertices_.end());
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const bool adjacent = (b == a + 1) || (a == 0 && b == n - 1);
            if (adjacent) continue;
            if (segments_intersect(vertices_[a], vertices_[(a + 1) % n], vertices_[b], vertices_[(b + 1) % n])) {
                throw DomainError("polygon boundary is not simple: edges " + std::to_string(a) + " and " +
                                  std::to_string(b) + " intersect");
            }
        }
    }
    alphas_ = interior_angles(vertices_);
}

std::size_t Polygon::max_angle_index() const {
    return static_cast<std::size_t>(std::max_element(alphas_.begin(), alphas_.end()) - alphas_.begin());
}

double Polygon::diameter() const {
    double d = 0.0;
    for (const Complex& a : vertices_) {
        for (const Complex& b : vertices_) d = std::max(d, std::abs(a - b));
    }
    return d;
}

double Polygon::area() const { return signed_area(vertices_); }

Square Polygon::bounding_square() const {
    double x0 = vertices_[0].real(), x1 = x0, y0 = vertices_[0].imag(), y1 = y0;
    for (const Complex& v : vertices_) {
        x0 = std::min(x0, v.real());
        x1 = std::max(x1, v.real());
        y0 = std::min(y0, v.imag());
        y1 = std::max(y1, v.imag());
    }
    return Square{{x0, y0}, std::max(x1 - x0, y1 - y0)};
}

bool Polygon::contains(Complex w) const {
    return crossing_inside(vertices_, w) && dist_to_boundary(w, *this) > 0.0;
}

double dist_to_boundary(Complex w, const Polygon& polygon) {
    const auto& v = polygon.vertices();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v.size(); ++k) {
        d = std::min(d, point_segment_distance(w, v[k], v[(k + 1) % v.size()]));
    }
    return d;
}

double dist_to_boundary(const Square& square, const Polygon& polygon) {
    const auto& v = polygon.vertices();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v.size(); ++k) {
        d = std::min(d, segment_box_distance(v[k], v[(k + 1) % v.size()], square));
        if (d == 0.0) break;
    }
    return d;
}

bool segment_inside(const Polygon& polygon, Complex a, Complex b) {
    if (!polygon.contains(a) || !polygon.contains(b)) return false;
    const auto& v = polygon.vertices();
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (segments_intersect(a, b, v[k], v[(k + 1) % v.size()])) return false;
    }
    return true;
}

bool whitney_admissible(const Square& square, const Polygon& polygon) {
    const double d = dist_to_boundary(square, polygon);
    if (d == 0.0) return false;
    if (!crossing_inside(polygon.vertices(), square.center())) return false;
    return d * d >= 2.0 * square.side * square.side;
}

WhitneyDecomposition::WhitneyDecomposition(Square base, int max_level, std::vector<WhitneySquare> squares)
    : base_(base), max_level_(max_level), squares_(std::move(squares)) {}

double WhitneyDecomposition::side_at(int level) const { return std::ldexp(base_.side, -level); }

double WhitneyDecomposition::collar_width() const {
    return 2.0 * std::numbers::sqrt2 * side_at(max_level_);
}

std::vector<std::size_t> WhitneyDecomposition::level_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_level_) + 1, 0);
    for (const auto& s : squares_) ++counts[static_cast<std::size_t>(s.level)];
    return counts;
}

std::vector<std::size_t> WhitneyDecomposition::level_ends() const {
    std::vector<std::size_t> ends(static_cast<std::size_t>(max_level_) + 1, 0);
    std::size_t running = 0;
    const auto counts = level_counts();
    for (std::size_t k = 0; k < counts.size(); ++k) {
        running += counts[k];
        ends[k] = running;
    }
    return ends;
}

std::size_t WhitneyDecomposition::overlap_count(Complex w) const {
    return static_cast<std::size_t>(std::count_if(squares_.begin(), squares_.end(),
                                                  [&](const WhitneySquare& s) { return s.enlarged.contains(w); }));
}

WhitneyDecomposition whitney_decompose(const Polygon& polygon, int max_level, std::size_t capacity) {
    if (max_level < 1) throw DomainError("max_level must be at least 1");
    const Square base = polygon.bounding_square();
    std::vector<WhitneySquare> accepted;
    std::vector<std::pair<std::int64_t, std::int64_t>> candidates{{0, 0}};
    std::size_t examined = 0;

    for (int level = 0; level <= max_level && !candidates.empty(); ++level) {
        const double side = std::ldexp(base.side, -level);
        std::vector<std::pair<std::int64_t, std::int64_t>> next;
        std::vector<WhitneySquare> this_level;
        for (const auto& [i, j] : candidates) {
            if (++examined > capacity) {
                throw CapacityError("Whitney decomposition exceeds capacity of " + std::to_string(capacity) +
                                    " candidate squares at level " + std::to_string(level));
            }
            const Square sq{base.anchor + Complex(static_cast<double>(i) * side, static_cast<double>(j) * side), side};
            const double d = dist_to_boundary(sq, polygon);
            bool subdivide = false;
            if (d == 0.0) {
                subdivide = true;
            } else if (crossing_inside(polygon.vertices(), sq.center())) {
                if (d * d >= 2.0 * side * side) {
                    this_level.push_back(WhitneySquare{sq, enlarge(sq), level, i, j});
                } else {
                    subdivide = true;
                }
            }
            if (subdivide && level < max_level) {
                for (std::int64_t di = 0; di < 2; ++di) {
                    for (std::int64_t dj = 0; dj < 2; ++dj) next.emplace_back(2 * i + di, 2 * j + dj);
                }
            }
        }
        std::sort(this_level.begin(), this_level.end(), [](const WhitneySquare& a, const WhitneySquare& b) {
            return std::tie(a.i, a.j) < std::tie(b.i, b.j);
        });
        accepted.insert(accepted.end(), this_level.begin(), this_level.end());
        candidates = std::move(next);
    }
    return WhitneyDecomposition(base, max_level, std::move(accepted));
}

Polygon unit_square() { return Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

Polygon l_shape() { return Polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}); }

Polygon regular_polygon(int n) {
    if (n < 3) throw DomainError("a polygon needs at least 3 vertices");
    std::vector<Complex> v;
    for (int k = 0; k < n; ++k) v.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / n));
    return Polygon(std::move(v));
}

Polygon pacman(double alpha, int points) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("pacman angle factor must lie in (1, 2)");
    if (points < 3) throw DomainError("pacman needs at least 3 circle points");
    const double open = (2.0 - alpha) * std::numbers::pi;
    std::vector<Complex> v{0.0};
    for (int j = 0; j < points; ++j) {
        v.push_back(std::polar(1.0, open / 2 + (2.0 * std::numbers::pi - open) * j / (points - 1)));
    }
    return Polygon(std::move(v));
}

Polygon random_star_polygon(int n, std::uint64_t seed) {
    if (n < 3) throw DomainError("a polygon needs at least 3 vertices");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    std::uniform_real_distribution<double> radius(0.5, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<Complex> v;
        for (int k = 0; k < n; ++k) {
            v.push_back(std::polar(radius(rng), 2.0 * std::numbers::pi * (k + jitter(rng)) / n));
        }
        try {
            return Polygon(std::move(v));
        } catch (const DomainError&) {
            // Degenerate draw (collinear vertices); try again.
        }
    }
    throw DomainError("could not draw a simple star polygon");
}

WhitneyInvariants check_whitney_invariants(const WhitneyDecomposition& decomposition, const Polygon& polygon,
                                           std::size_t samples, std::uint64_t seed) {
    WhitneyInvariants out;
    std::set<std::tuple<int, std::int64_t, std::int64_t>> keys;
    for (const WhitneySquare& s : decomposition.squares()) {
        if (!keys.emplace(s.level, s.i, s.j).second) out.disjoint = false;
    }
    for (const WhitneySquare& s : decomposition.squares()) {
        for (int up = 1; up <= s.level; ++up) {
            if (keys.count({s.level - up, s.i >> up, s.j >> up})) out.disjoint = false;
        }
        const double d = dist_to_boundary(s.square, polygon);
        const double lower = std::numbers::sqrt2 * s.square.side;
        if (d < lower * (1.0 - 1e-12) || d > 4.0 * lower * (1.0 + 1e-12)) ++out.distance_violations;
    }

    const Square box = polygon.bounding_square();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double collar = decomposition.collar_width();
    while (out.samples < samples) {
        const Complex w = box.anchor + Complex(unit(rng) * box.side, unit(rng) * box.side);
        if (!polygon.contains(w)) continue;
        ++out.samples;
        out.max_overlap = std::max(out.max_overlap, decomposition.overlap_count(w));
        if (dist_to_boundary(w, polygon) >= collar) {
            const bool covered = std::any_of(decomposition.squares().begin(), decomposition.squares().end(),
                                             [&](const WhitneySquare& s) { return s.square.contains(w); });
            if (!covered) ++out.uncovered;
        }
    }
    out.overlap_flagged = out.max_overlap > 100 && out.max_overlap <= 144;
    return out;
}

} // namespace polyberg
