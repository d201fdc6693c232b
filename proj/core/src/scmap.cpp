#include "polyberg/scmap.hpp"

#include "polyberg/errors.hpp"
#include "polyberg/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace polyberg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSmoothNodes = 16;
constexpr int kJacobiNodes = 24;
constexpr double kSnap = 1e-14;

double point_segment_distance(Complex w, Complex a, Complex b) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(w - a);
    const double t = std::clamp(((w - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
    return std::abs(w - (a + t * ab));
}

double point_square_distance(Complex w, const Square& s) {
    const double dx = std::max({s.anchor.real() - w.real(), 0.0, w.real() - s.anchor.real() - s.side});
    const double dy = std::max({s.anchor.imag() - w.imag(), 0.0, w.imag() - s.anchor.imag() - s.side});
    return std::hypot(dx, dy);
}

} // namespace

namespace detail {

/// prod_k (1 - conj(z_k) zeta)^(alpha_k - 1) with principal powers, and its
/// segment integrals.
class ScIntegrand {
public:
    explicit ScIntegrand(const PrevertexConfig& config) : z_(config.prevertices()) {
        for (std::size_t k = 0; k < z_.size(); ++k) {
            c_.push_back(std::conj(z_[k]));
            beta_.push_back(config.alphas[k] - 1.0);
        }
        gap_.assign(z_.size(), 2.0);
        for (std::size_t k = 0; k < z_.size(); ++k) {
            for (std::size_t j = 0; j < z_.size(); ++j) {
                if (j != k) gap_[k] = std::min(gap_[k], std::abs(z_[k] - z_[j]));
            }
        }
    }

    std::size_t size() const { return z_.size(); }
    const std::vector<Complex>& prevertices() const { return z_; }
    double beta(std::size_t k) const { return beta_[k]; }

    Complex value(Complex zeta) const {
        Complex s{};
        for (std::size_t k = 0; k < z_.size(); ++k) s += beta_[k] * std::log(1.0 - c_[k] * zeta);
        return std::exp(s);
    }

    Complex integrate(Complex a, Complex b) const {
        if (a == b) return {};
        const auto ka = prevertex_at(a);
        const auto kb = prevertex_at(b);
        if (ka && kb) {
            const Complex m = (a + b) / 2.0;
            return from_prevertex(*ka, m) - from_prevertex(*kb, m);
        }
        if (ka) return from_prevertex(*ka, b);
        if (kb) return -from_prevertex(*kb, a);
        return regular(a, b, 0);
    }

private:
    std::optional<std::size_t> prevertex_at(Complex p) const {
        if (std::norm(p) < 1.0 - 1e-12) return std::nullopt;
        for (std::size_t k = 0; k < z_.size(); ++k) {
            if (std::abs(p - z_[k]) < kSnap) return k;
        }
        return std::nullopt;
    }

    double singular_distance(Complex a, Complex b) const {
        double d = std::numeric_limits<double>::infinity();
        for (const Complex& z : z_) d = std::min(d, point_segment_distance(z, a, b));
        return d;
    }

    Complex gauss(Complex a, Complex b) const {
        const Rule& rule = gauss_legendre(kSmoothNodes);
        const Complex half = (b - a) / 2.0;
        const Complex mid = (a + b) / 2.0;
        Complex total{};
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            total += rule.weights[k] * value(mid + half * rule.nodes[k]);
        }
        return total * half;
    }

    // Bisect until each piece is no longer than its distance to the nearest
    // prevertex, which keeps the Legendre rule in its spectral regime.
    Complex regular(Complex a, Complex b, int depth) const {
        const double length = std::abs(b - a);
        const double d = singular_distance(a, b);
        if (length <= d || depth > 200) return gauss(a, b);
        const Complex m = (a + b) / 2.0;
        return regular(a, m, depth + 1) + regular(m, b, depth + 1);
    }

    // Integral from the prevertex z_k to b.
    Complex from_prevertex(std::size_t k, Complex b) const {
        const Complex zk = z_[k];
        const double length = std::abs(b - zk);
        const double h = std::min(length, 0.5 * gap_[k]);
        const Complex c = zk + (b - zk) * (h / length);
        const Complex u = (zk - c) / std::abs(zk - c);
        const Complex lead = std::pow(c_[k] * u, beta_[k]);
        const auto smooth = [&](Complex zeta) {
            Complex s{};
            for (std::size_t j = 0; j < z_.size(); ++j) {
                if (j != k) s += beta_[j] * std::log(1.0 - c_[j] * zeta);
            }
            return lead * std::exp(s);
        };
        const Complex near = -integrate_segment_jacobi(smooth, beta_[k], c, zk, kJacobiNodes);
        if (h >= length) return near;
        return near + regular(c, b, 0);
    }

    std::vector<Complex> z_;
    std::vector<Complex> c_;
    std::vector<double> beta_;
    std::vector<double> gap_;
};

} // namespace detail

using detail::ScIntegrand;

std::vector<Complex> PrevertexConfig::prevertices() const {
    std::vector<Complex> z;
    z.reserve(arguments.size());
    for (double t : arguments) z.push_back(std::polar(1.0, t));
    return z;
}

void PrevertexConfig::validate() const {
    if (arguments.size() < 3) throw DomainError("prevertex configuration needs at least 3 prevertices");
    if (arguments.size() != alphas.size()) throw DomainError("prevertex and angle factor counts differ");
    for (std::size_t k = 0; k < arguments.size(); ++k) {
        if (!std::isfinite(arguments[k]) || arguments[k] < 0.0 || arguments[k] >= kTwoPi) {
            throw DomainError("prevertex argument " + std::to_string(k) + " outside [0, 2pi)");
        }
        if (k > 0 && !(arguments[k] > arguments[k - 1])) {
            throw DomainError("prevertex arguments must be strictly increasing");
        }
        if (!(alphas[k] > 0.0 && alphas[k] < 2.0)) throw DomainError("angle factor outside (0, 2)");
    }
    if (scale == Complex{}) throw DomainError("scale constant A must be nonzero");
}

Complex sc_path_integral(const PrevertexConfig& config, Complex a, Complex b) {
    return ScIntegrand(config).integrate(a, b);
}

Complex psi(const PrevertexConfig& config, Complex z) {
    if (std::abs(z) > 1.0 + 1e-14) throw DomainError("psi requires |z| <= 1");
    return config.scale * ScIntegrand(config).integrate(0.0, z) + config.offset;
}

Complex psi_prime(const PrevertexConfig& config, Complex z) {
    if (!(std::abs(z) < 1.0)) throw DomainError("psi' requires |z| < 1");
    return config.scale * ScIntegrand(config).value(z);
}

namespace {

std::vector<double> arguments_from(std::span<const double> y, std::size_t n) {
    std::vector<double> theta(n);
    theta[0] = 0.0;
    theta[1] = kTwoPi / static_cast<double>(n);
    theta[2] = 2.0 * kTwoPi / static_cast<double>(n);
    if (n == 3) return theta;
    // n-2 gaps over [theta_2, 2pi], softmax of (y, 0).
    const double span = kTwoPi - theta[2];
    double top = 0.0;
    for (double v : y) top = std::max(top, v);
    std::vector<double> e(n - 2);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) total += e[i] = std::exp(y[i] - top);
    total += e.back() = std::exp(-top);
    double position = theta[2];
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
        position += span * e[i] / total;
        theta[3 + i] = position;
    }
    return theta;
}

struct SideSystem {
    const Polygon& polygon;

    std::vector<Complex> vertex_integrals(const PrevertexConfig& config) const {
        const ScIntegrand f(config);
        std::vector<Complex> out;
        for (const Complex& z : f.prevertices()) out.push_back(f.integrate(0.0, z));
        return out;
    }

    Eigen::VectorXd residual(std::span<const double> y, PrevertexConfig& config) const {
        const std::size_t n = polygon.size();
        config.arguments = arguments_from(y, n);
        const auto I = vertex_integrals(config);
        Eigen::VectorXd F(static_cast<Eigen::Index>(n - 3));
        const double s0 = std::abs(I[1] - I[0]);
        const double e0 = std::abs(polygon.vertex(1) - polygon.vertex(0));
        for (std::size_t j = 1; j + 2 < n; ++j) {
            const double sj = std::abs(I[j + 1] - I[j]);
            const double ej = std::abs(polygon.vertex(j + 1) - polygon.vertex(j));
            F[static_cast<Eigen::Index>(j - 1)] = std::log(sj / s0) - std::log(ej / e0);
        }
        return F;
    }
};

} // namespace

SolveReport solve_parameter_problem(const Polygon& polygon, const SolverSettings& settings) {
    const std::size_t n = polygon.size();
    SolveReport report;
    PrevertexConfig& config = report.config;
    config.alphas = polygon.angle_factors();
    const SideSystem system{polygon};

    std::vector<double> y(n - 3, 0.0);
    const auto m = static_cast<Eigen::Index>(n - 3);
    if (n > 3) {
        Eigen::VectorXd F = system.residual(y, config);
        double best = F.lpNorm<Eigen::Infinity>();
        int it = 0;
        for (; it < settings.max_iterations && best > settings.tolerance; ++it) {
            Eigen::MatrixXd J(m, m);
            for (Eigen::Index c = 0; c < m; ++c) {
                auto yp = y;
                const double h = 1e-7 * std::max(1.0, std::abs(y[static_cast<std::size_t>(c)]));
                yp[static_cast<std::size_t>(c)] += h;
                PrevertexConfig scratch = config;
                J.col(c) = (system.residual(yp, scratch) - F) / h;
            }
            Eigen::VectorXd step = J.colPivHouseholderQr().solve(-F);
            const double big = step.lpNorm<Eigen::Infinity>();
            if (!std::isfinite(big)) break;
            if (big > 4.0) step *= 4.0 / big;

            bool accepted = false;
            double lambda = 1.0;
            for (int halving = 0; halving < 30; ++halving, lambda /= 2) {
                auto trial = y;
                for (Eigen::Index c = 0; c < m; ++c) trial[static_cast<std::size_t>(c)] += lambda * step[c];
                PrevertexConfig scratch = config;
                const Eigen::VectorXd Ft = system.residual(trial, scratch);
                if (Ft.norm() < (1.0 - 1e-4 * lambda) * F.norm()) {
                    y = trial;
                    F = Ft;
                    config = scratch;
                    accepted = true;
                    break;
                }
            }
            best = F.lpNorm<Eigen::Infinity>();
            if (!accepted) break;
        }
        report.iterations = it;
        report.equation_residual = best;
        // Stagnation at the quadrature noise floor is accepted slightly above the target.
        if (!(best <= std::max(settings.tolerance, 1e-11))) {
            throw NumericalError("parameter problem did not converge after " + std::to_string(it) +
                                     " iterations (best residual " + std::to_string(best) + ")",
                                 best);
        }
    } else {
        config.arguments = arguments_from(y, n);
    }
    config.arguments = arguments_from(y, n);

    const auto I = system.vertex_integrals(config);
    config.scale = (polygon.vertex(1) - polygon.vertex(0)) / (I[1] - I[0]);
    config.offset = polygon.vertex(0) - config.scale * I[0];

    // Vertex check along boundary chords, a path independent of the radial one.
    const ScIntegrand f(config);
    const auto z = f.prevertices();
    Complex w = config.scale * I[0] + config.offset;
    double worst = std::abs(w - polygon.vertex(0));
    for (std::size_t k = 0; k + 1 < n; ++k) {
        w += config.scale * f.integrate(z[k], z[k + 1]);
        worst = std::max(worst, std::abs(w - polygon.vertex(k + 1)));
    }
    report.vertex_residual = worst / polygon.diameter();

    double gap = kTwoPi - config.arguments.back();
    for (std::size_t k = 1; k < n; ++k) gap = std::min(gap, config.arguments[k] - config.arguments[k - 1]);
    if (gap < settings.crowding_threshold) {
        report.crowded = true;
        report.warnings.push_back("prevertex crowding: minimum gap " + std::to_string(gap) +
                                  " is below the threshold; accuracy claims are void");
    }
    return report;
}

ConformalMap::ConformalMap(Polygon polygon, PrevertexConfig config)
    : polygon_(std::move(polygon)), config_(std::move(config)) {
    config_.validate();
    if (config_.alphas.size() != polygon_.size()) throw DomainError("configuration does not match the polygon");
    prevertices_ = config_.prevertices();
    integrand_ = std::make_shared<const ScIntegrand>(config_);
    scale_length_ = polygon_.diameter();

    constexpr double radii[] = {0.3, 0.5, 0.7, 0.85, 0.93, 0.97};
    constexpr int angles = 32;
    anchors_.push_back({0.0, config_.offset});
    for (int t = 0; t < angles; ++t) {
        const double theta = kTwoPi * (t + 0.5) / angles;
        Complex z_prev = 0.0;
        Complex w_prev = config_.offset;
        for (double r : radii) {
            const Complex z = std::polar(r, theta);
            w_prev += config_.scale * integrand_->integrate(z_prev, z);
            z_prev = z;
            anchors_.push_back({z, w_prev});
        }
    }
}

ConformalMap ConformalMap::solve(const Polygon& polygon, const SolverSettings& settings) {
    return ConformalMap(polygon, solve_parameter_problem(polygon, settings).config);
}

Complex ConformalMap::psi(Complex z) const {
    if (std::abs(z) > 1.0 + 1e-14) throw DomainError("psi requires |z| <= 1");
    const Anchor* best = &anchors_.front();
    for (const Anchor& a : anchors_) {
        if (std::norm(z - a.z) < std::norm(z - best->z)) best = &a;
    }
    return psi_from(best->z, best->w, z);
}

Complex ConformalMap::psi_prime(Complex z) const {
    if (!(std::abs(z) < 1.0)) throw DomainError("psi' requires |z| < 1");
    return config_.scale * integrand_->value(z);
}

Complex ConformalMap::log_psi_prime(Complex z) const {
    if (!(std::abs(z) < 1.0)) throw DomainError("psi' requires |z| < 1");
    Complex s = std::log(config_.scale);
    for (std::size_t k = 0; k < prevertices_.size(); ++k) {
        s += (config_.alphas[k] - 1.0) * std::log(1.0 - std::conj(prevertices_[k]) * z);
    }
    return s;
}

Complex ConformalMap::psi_from(Complex z_ref, Complex w_ref, Complex z) const {
    return w_ref + config_.scale * integrand_->integrate(z_ref, z);
}

Complex ConformalMap::newton_polish(Complex w, Complex z, Complex psi_z) const {
    const double tol = 1e-14 * scale_length_;
    double residual = std::abs(w - psi_z);
    for (int it = 0; it < 60; ++it) {
        if (residual <= tol) return z;
        Complex dz = (w - psi_z) / psi_prime(z);
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving, dz /= 2.0) {
            const Complex trial = z + dz;
            if (!(std::abs(trial) < 1.0)) continue;
            const Complex psi_trial = psi_from(z, psi_z, trial);
            const double r = std::abs(w - psi_trial);
            if (r < residual) {
                z = trial;
                psi_z = psi_trial;
                improved = residual - r > 0.0;
                residual = r;
                break;
            }
        }
        if (!improved) {
            // Noise floor of the path integrals.
            if (residual <= 1e-11 * scale_length_) return z;
            break;
        }
    }
    if (residual <= 1e-11 * scale_length_) return z;
    throw NumericalError("inverse map Newton iteration did not converge", residual / scale_length_);
}

Complex ConformalMap::phi(Complex w) const {
    if (!polygon_.contains(w)) throw DomainError("phi requires a point strictly inside the polygon");
    std::vector<const Anchor*> order;
    for (const Anchor& a : anchors_) order.push_back(&a);
    std::sort(order.begin(), order.end(), [&](const Anchor* a, const Anchor* b) {
        return std::norm(a->w - w) < std::norm(b->w - w);
    });
    double best_residual = std::numeric_limits<double>::infinity();
    int tried = 0;
    for (const Anchor* a : order) {
        if (tried >= 6) break;
        if (a->w != w && !segment_inside(polygon_, a->w, w)) continue;
        ++tried;
        for (int steps = 8; steps <= 512; steps *= 4) {
            // RK4 on dz/dt = (w - w_a) / psi'(z), t in [0, 1].
            const Complex dw = w - a->w;
            Complex z = a->z;
            const double h = 1.0 / steps;
            bool left_disk = false;
            const auto rhs = [&](Complex x) {
                if (!(std::abs(x) < 1.0)) {
                    left_disk = true;
                    return Complex{};
                }
                return dw / psi_prime(x);
            };
            for (int s = 0; s < steps && !left_disk; ++s) {
                const Complex k1 = rhs(z);
                const Complex k2 = rhs(z + 0.5 * h * k1);
                const Complex k3 = rhs(z + 0.5 * h * k2);
                const Complex k4 = rhs(z + h * k3);
                z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (!(std::abs(z) < 1.0)) left_disk = true;
            }
            if (left_disk) continue;
            try {
                return newton_polish(w, z, psi_from(a->z, a->w, z));
            } catch (const NumericalError& e) {
                best_residual = std::min(best_residual, e.residual());
            }
        }
    }
    throw NumericalError("inverse map failed to converge from any visible anchor", best_residual);
}

Complex ConformalMap::phi_near(Complex w, const MapJet& reference) const {
    if (!polygon_.contains(w)) throw DomainError("phi requires a point strictly inside the polygon");
    const Complex d = w - reference.w;
    const Complex z0 = reference.zeta + d * (reference.d1 + d * (reference.d2 / 2.0 + d * reference.d3 / 6.0));
    if (std::abs(z0) < 1.0) {
        try {
            return newton_polish(w, z0, psi_from(reference.zeta, reference.w, z0));
        } catch (const NumericalError&) {
        }
    }
    return phi(w);
}

MapJet ConformalMap::jet_at(Complex zeta, Complex w) const {
    // phi' = 1/psi'(zeta); with T = sum (1-alpha_k) conj(z_k)/G_k:
    // phi'' = -phi'^2 T, phi''' = phi'^3 (2T^2 - sum (1-alpha_k) conj(z_k)^2 / G_k^2).
    MapJet j;
    j.w = w;
    j.zeta = zeta;
    Complex log_sum{};
    Complex T{};
    Complex Q{};
    for (std::size_t k = 0; k < prevertices_.size(); ++k) {
        const Complex c = std::conj(prevertices_[k]);
        const Complex G = 1.0 - c * zeta;
        const double e = 1.0 - config_.alphas[k];
        log_sum += e * std::log(G);
        const Complex t = e * c / G;
        T += t;
        Q += t * c / G;
    }
    j.d1 = std::exp(log_sum) / config_.scale;
    j.d2 = -j.d1 * j.d1 * T;
    j.d3 = j.d1 * j.d1 * j.d1 * (2.0 * T * T - Q);
    return j;
}

MapJet ConformalMap::jet(Complex w) const { return jet_at(phi(w), w); }

MapJet ConformalMap::jet_near(Complex w, const MapJet& reference) const {
    return jet_at(phi_near(w, reference), w);
}

Complex ConformalMap::green_factor(Complex zeta, std::size_t k) const {
    return 1.0 - zeta * std::conj(prevertices_.at(k));
}

double ConformalMap::koebe_ratio(Complex w) const {
    const MapJet j = jet(w);
    return dist_to_boundary(w, polygon_) * std::abs(j.d1) / (1.0 - std::norm(j.zeta));
}

KernelBoundsTable whitney_kernel_bounds(const ConformalMap& map, const WhitneyDecomposition& decomposition) {
    KernelBoundsTable table;
    const Polygon& polygon = map.polygon();
    const std::size_t n = polygon.size();
    table.corner_log_min.assign(n, std::numeric_limits<double>::infinity());
    table.corner_log_max.assign(n, -std::numeric_limits<double>::infinity());
    table.rho_over_v_min = std::numeric_limits<double>::infinity();

    double vertex_gap = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            vertex_gap = std::min(vertex_gap, std::abs(polygon.vertex(a) - polygon.vertex(b)));
        }
    }
    const double corner_radius = vertex_gap / 10.0;

    std::vector<KernelBoundsTable::Level> levels(static_cast<std::size_t>(decomposition.max_level()) + 1);
    for (std::size_t k = 0; k < levels.size(); ++k) {
        levels[k].level = static_cast<int>(k);
        levels[k].rho_over_v_min = std::numeric_limits<double>::infinity();
    }

    for (const WhitneySquare& sq : decomposition.squares()) {
        const double rho = sq.square.side;
        const Square& e = sq.enlarged;
        const MapJet center = map.jet(e.center());
        std::vector<MapJet> jets{center};
        const Complex corners[4] = {e.anchor, e.anchor + Complex(e.side, 0.0), e.far_corner(),
                                    e.anchor + Complex(0.0, e.side)};
        for (const Complex& c : corners) jets.push_back(map.jet_near(c, center));

        auto& lv = levels[static_cast<std::size_t>(sq.level)];
        for (const MapJet& w : jets) {
            const double a1 = std::abs(w.d1);
            lv.rho_phi2 = std::max(lv.rho_phi2, rho * std::abs(w.d2) / a1);
            lv.rho2_phi3 = std::max(lv.rho2_phi3, rho * rho * std::abs(w.d3) / a1);
            double green = std::numeric_limits<double>::infinity();
            for (const MapJet& z : jets) green = std::min(green, std::abs(1.0 - z.zeta * std::conj(w.zeta)));
            lv.rho_phi1_green = std::max(lv.rho_phi1_green, rho * a1 / green);
            const double ratio = rho / dist_to_boundary(w.w, polygon);
            lv.rho_over_v_min = std::min(lv.rho_over_v_min, ratio);
            lv.rho_over_v_max = std::max(lv.rho_over_v_max, ratio);
            ++lv.samples;
        }

        for (std::size_t k = 0; k < n; ++k) {
            if (point_square_distance(polygon.vertex(k), e) > corner_radius) continue;
            const double value = std::log(std::abs(center.d1)) -
                                 (1.0 - polygon.angle_factors()[k]) * std::log(std::abs(map.green_factor(center.zeta, k)));
            table.corner_log_min[k] = std::min(table.corner_log_min[k], value);
            table.corner_log_max[k] = std::max(table.corner_log_max[k], value);
        }
    }

    for (const auto& lv : levels) {
        if (lv.samples == 0) continue;
        table.rho_phi2 = std::max(table.rho_phi2, lv.rho_phi2);
        table.rho2_phi3 = std::max(table.rho2_phi3, lv.rho2_phi3);
        table.rho_phi1_green = std::max(table.rho_phi1_green, lv.rho_phi1_green);
        table.rho_over_v_min = std::min(table.rho_over_v_min, lv.rho_over_v_min);
        table.rho_over_v_max = std::max(table.rho_over_v_max, lv.rho_over_v_max);
        table.levels.push_back(lv);
    }
    return table;
}

} // namespace polyberg
