#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace polyberg {

using Complex = std::complex<double>;

/// Axis-aligned square S(anchor, side) = [u, u+side] x [v, v+side].
struct Square {
    Complex anchor;
    double side = 0.0;

    Complex center() const { return anchor + Complex(side / 2, side / 2); }
    /// The corner opposite to the anchor, u+side + i(v+side).
    Complex far_corner() const { return anchor + Complex(side, side); }
    double area() const { return side * side; }
    bool contains(Complex w) const;
};

/// The enlarged square with side 11/10 of the input and the anchor moved
/// by -side/20 along both axes.
Square enlarge(const Square& square);

/// Interior angle factors alpha_k (angle / pi) of a counterclockwise simple
/// polygon. Throws DomainError for collinear (alpha = 1) or spike vertices.
std::vector<double> interior_angles(std::span<const Complex> vertices);

/// A bounded simply connected polygon with its interior angle factors.
///
/// Vertices are stored counterclockwise; a clockwise input is reversed with
/// the first vertex kept in place. Construction rejects fewer than three
/// vertices, self-intersecting boundaries and collinear vertices.
class Polygon {
public:
    explicit Polygon(std::vector<Complex> vertices);

    std::size_t size() const { return vertices_.size(); }
    const std::vector<Complex>& vertices() const { return vertices_; }
    const std::vector<double>& angle_factors() const { return alphas_; }
    Complex vertex(std::size_t k) const { return vertices_[k % vertices_.size()]; }

    /// Index of the vertex with the largest angle factor (first one on ties).
    std::size_t max_angle_index() const;
    double max_angle_factor() const { return alphas_[max_angle_index()]; }

    double diameter() const;
    double area() const;
    /// Lower-left corner and side of the smallest enclosing axis-aligned
    /// square anchored at (min x, min y).
    Square bounding_square() const;

    /// Strict interior test; points on the boundary are reported outside.
    bool contains(Complex w) const;

private:
    std::vector<Complex> vertices_;
    std::vector<double> alphas_;
};

/// The unit square [0,1]^2.
Polygon unit_square();
/// The L-shaped hexagon (0,0), (2,0), (2,1), (1,1), (1,2), (0,2).
Polygon l_shape();
/// Regular n-gon inscribed in the unit circle, first vertex at 1.
Polygon regular_polygon(int n);
/// One reflex vertex at the origin with angle factor alpha in (1, 2),
/// followed by `points` vertices on the unit circle spread over the
/// complement of the opening; all other angle factors are below 1.
Polygon pacman(double alpha, int points = 7);
/// Star-shaped random n-gon around the origin (sorted jittered angles,
/// radii in [0.5, 1]). Deterministic for a given seed.
Polygon random_star_polygon(int n, std::uint64_t seed);

/// Euclidean distance from w to the polygon boundary (works for any w).
double dist_to_boundary(Complex w, const Polygon& polygon);

/// True when the closed segment a-b lies in the open polygon.
bool segment_inside(const Polygon& polygon, Complex a, Complex b);

/// Distance between a closed square and the polygon boundary; zero when they
/// touch.
double dist_to_boundary(const Square& square, const Polygon& polygon);

struct WhitneySquare {
    Square square;
    Square enlarged;
    int level = 0;
    /// Integer grid position of the anchor at this level.
    std::int64_t i = 0;
    std::int64_t j = 0;
};

/// Finite truncation of the dyadic Whitney decomposition of a polygon.
///
/// Squares live on the dyadic grid of the polygon's bounding square (level k
/// has side base_side / 2^k). A grid square is accepted when it lies inside
/// the polygon with dist(S, boundary) >= sqrt(2) * side and no ancestor was
/// accepted. Accepted squares are ordered level-major, then by (i, j).
class WhitneyDecomposition {
public:
    WhitneyDecomposition(Square base, int max_level, std::vector<WhitneySquare> squares);

    const std::vector<WhitneySquare>& squares() const { return squares_; }
    std::size_t size() const { return squares_.size(); }
    int max_level() const { return max_level_; }
    const Square& base() const { return base_; }
    double side_at(int level) const;

    /// Points whose boundary distance is at least this value are covered by
    /// the truncation: 2 sqrt(2) times the finest side.
    double collar_width() const;

    /// Number of accepted squares at each level 0..max_level.
    std::vector<std::size_t> level_counts() const;
    /// Index one past the last square of each level (checkpoints for
    /// partial sums ordered by level).
    std::vector<std::size_t> level_ends() const;

    /// Number of enlarged squares containing w.
    std::size_t overlap_count(Complex w) const;

private:
    Square base_;
    int max_level_;
    std::vector<WhitneySquare> squares_;
};

/// The acceptance predicate for a single grid square, ignoring ancestors.
bool whitney_admissible(const Square& square, const Polygon& polygon);

/// Decomposes the polygon down to max_level. Throws CapacityError when more
/// than `capacity` candidate squares would have to be examined.
WhitneyDecomposition whitney_decompose(const Polygon& polygon, int max_level,
                                       std::size_t capacity = std::size_t{1} << 22);

struct WhitneyInvariants {
    /// No accepted square is a dyadic ancestor or duplicate of another
    /// (interior-disjointness, checked on the integer grid indices).
    bool disjoint = true;
    /// Squares violating sqrt(2) rho <= dist(S, boundary) <= 4 sqrt(2) rho
    /// beyond a relative tolerance of 1e-12.
    std::size_t distance_violations = 0;
    std::size_t samples = 0;
    /// Largest number of enlarged squares containing a sampled point.
    std::size_t max_overlap = 0;
    /// max_overlap lies in (100, 144]: within the bound but worth a look.
    bool overlap_flagged = false;
    /// Sampled points at distance >= collar_width not covered by a square.
    std::size_t uncovered = 0;

    bool ok() const { return disjoint && distance_violations == 0 && max_overlap <= 144 && uncovered == 0; }
};

/// Checks the decomposition invariants on `samples` uniformly drawn interior
/// points.
WhitneyInvariants check_whitney_invariants(const WhitneyDecomposition& decomposition, const Polygon& polygon,
                                           std::size_t samples = 10000, std::uint64_t seed = 1);

} // namespace polyberg
