#pragma once

// Discretized least-action functional over strings in a flow:
//
//   S_mass   = sum_j m_j sum_k G(mid_k) |dx_k|
//   S_charge = sum_j e_j sum_k <A(mid_k), dx_k>
//   S_field  = field energy supplied by the field, if any
//
// with mid_k the segment midpoint and dx_k = x_{k+1} - x_k.

#include "flows4/core/types.hpp"
#include "flows4/errors.hpp"
#include "flows4/relativity.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>
#include <limits>
#include <vector>

namespace flows4 {

enum class Endpoints { fixed, free };

struct StringPath {
    std::vector<Vec4> nodes;
    double dtau = 1;
    double mass = 0;
    double charge = 0;
    Endpoints endpoints = Endpoints::fixed;

    std::size_t segments() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

/// Straight string from `a` to `b` with `n_segments` equal segments.
inline StringPath straight_string(const Vec4& a, const Vec4& b, int n_segments, double mass, double charge,
                                  Endpoints ends = Endpoints::fixed) {
    StringPath s;
    s.mass = mass;
    s.charge = charge;
    s.endpoints = ends;
    for (int k = 0; k <= n_segments; ++k) s.nodes.push_back(a + (b - a) * (double(k) / n_segments));
    s.dtau = vacuum_flow().dot(b - a) / n_segments;
    return s;
}

/// <c, dx_k> for each segment; the direction condition requires all of them positive.
inline std::vector<double> direction_values(const StringPath& s) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < s.nodes.size(); ++k) out.push_back(vacuum_flow().dot(s.nodes[k + 1] - s.nodes[k]));
    return out;
}

inline bool satisfies_direction(const StringPath& s) {
    const auto d = direction_values(s);
    return std::all_of(d.begin(), d.end(), [](double v) { return v > 0; });
}

/// |<c, dx_k> - dtau| per segment.
inline std::vector<double> homogeneity_residuals(const StringPath& s) {
    auto d = direction_values(s);
    for (double& v : d) v = std::abs(v - s.dtau);
    return d;
}

/// Redistributes nodes so every segment has the same <c, dx> (piecewise-linear resampling).
inline StringPath reparametrize_by_flow_time(const StringPath& s) {
    if (!satisfies_direction(s)) throw DomainError("reparametrization needs the direction condition");
    const auto d = direction_values(s);
    std::vector<double> cum{0};
    for (double v : d) cum.push_back(cum.back() + v);
    StringPath out = s;
    const std::size_t n = s.segments();
    out.dtau = cum.back() / static_cast<double>(n);
    std::size_t seg = 0;
    for (std::size_t k = 1; k < n; ++k) {
        const double target = out.dtau * static_cast<double>(k);
        while (seg + 1 < n && cum[seg + 1] < target) ++seg;
        const double f = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
        out.nodes[k] = s.nodes[seg] + f * (s.nodes[seg + 1] - s.nodes[seg]);
    }
    return out;
}

inline std::vector<ObserverEvent> observer_coords(const StringPath& s) { return observer_coords(s.nodes); }

// ---------------------------------------------------------------------------
// Fields the functional can be evaluated in.

template <class F>
concept ActionField = requires(const F& f, const Vec4& x) {
    { f.weight(x) } -> std::convertible_to<double>;
    { f.weight_gradient(x) } -> std::convertible_to<Vec4>;
    { f.potential_covector(x) } -> std::convertible_to<Vec4>;
    { f.potential_jacobian(x) } -> std::convertible_to<Mat4>;
};

template <class F>
concept HasFieldEnergy = requires(const F& f) {
    { f.field_energy() } -> std::convertible_to<double>;
};

/// G = const, A = 0.
struct UniformWeightField {
    double g = 1;
    double weight(const Vec4&) const { return g; }
    Vec4 weight_gradient(const Vec4&) const { return Vec4::Zero(); }
    Vec4 potential_covector(const Vec4&) const { return Vec4::Zero(); }
    Mat4 potential_jacobian(const Vec4&) const { return Mat4::Zero(); }
};

/// G = g0 + <slope, x>, A = 0.
struct LinearWeightField {
    double g0 = 1;
    Vec4 slope = Vec4::Zero();
    double weight(const Vec4& x) const { return g0 + slope.dot(x); }
    Vec4 weight_gradient(const Vec4&) const { return slope; }
    Vec4 potential_covector(const Vec4&) const { return Vec4::Zero(); }
    Mat4 potential_jacobian(const Vec4&) const { return Mat4::Zero(); }
};

/// Adds the exact covector d(chi) of chi = 1/2 x^T Q x + <b, x> to a field's potential.
template <ActionField F>
struct GaugeShifted {
    F base;
    Mat4 quadratic = Mat4::Zero(); // symmetric
    Vec4 linear = Vec4::Zero();
    double weight(const Vec4& x) const { return base.weight(x); }
    Vec4 weight_gradient(const Vec4& x) const { return base.weight_gradient(x); }
    Vec4 potential_covector(const Vec4& x) const { return base.potential_covector(x) + quadratic * x + linear; }
    Mat4 potential_jacobian(const Vec4& x) const { return base.potential_jacobian(x) + quadratic; }
};

// ---------------------------------------------------------------------------

struct StringContribution {
    double mass = 0;
    double charge = 0;
};

struct ActionBreakdown {
    double mass = 0;
    double charge = 0;
    double field = 0;
    double total = 0;
    std::vector<StringContribution> per_string;
};

template <ActionField F>
double mass_term(const std::vector<Vec4>& nodes, const F& field) {
    double s = 0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const Vec4 dx = nodes[k + 1] - nodes[k];
        s += field.weight(0.5 * (nodes[k] + nodes[k + 1])) * dx.norm();
    }
    return s;
}

template <ActionField F>
double charge_term(const std::vector<Vec4>& nodes, const F& field) {
    double s = 0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const Vec4 dx = nodes[k + 1] - nodes[k];
        s += field.potential_covector(0.5 * (nodes[k] + nodes[k + 1])).dot(dx);
    }
    return s;
}

inline void check_strings(const std::vector<StringPath>& strings) {
    for (std::size_t j = 0; j < strings.size(); ++j) {
        if (strings[j].nodes.size() < 3)
            throw DomainError("string " + std::to_string(j) + " needs at least two segments");
        if (!satisfies_direction(strings[j]))
            throw DomainError("string " + std::to_string(j) + " violates the direction condition");
    }
}

template <ActionField F>
ActionBreakdown action_value(const std::vector<StringPath>& strings, const F& field) {
    check_strings(strings);
    ActionBreakdown b;
    for (const auto& s : strings) {
        StringContribution c;
        if (s.mass != 0) c.mass = s.mass * mass_term(s.nodes, field);
        if (s.charge != 0) c.charge = s.charge * charge_term(s.nodes, field);
        b.mass += c.mass;
        b.charge += c.charge;
        b.per_string.push_back(c);
    }
    if constexpr (HasFieldEnergy<F>) b.field = field.field_energy();
    b.total = b.mass + b.charge + b.field;
    return b;
}

/// dS/dx for every node of every string; endpoint rows are zero for fixed strings.
template <ActionField F>
std::vector<std::vector<Vec4>> action_gradient(const std::vector<StringPath>& strings, const F& field) {
    check_strings(strings);
    std::vector<std::vector<Vec4>> grad;
    grad.reserve(strings.size());
    for (const auto& s : strings) {
        std::vector<Vec4> g(s.nodes.size(), Vec4::Zero());
        for (std::size_t k = 0; k + 1 < s.nodes.size(); ++k) {
            const Vec4 dx = s.nodes[k + 1] - s.nodes[k];
            const Vec4 mid = 0.5 * (s.nodes[k] + s.nodes[k + 1]);
            Vec4 shared = Vec4::Zero(); // derivative through the midpoint, split evenly
            Vec4 along = Vec4::Zero();  // derivative through dx
            if (s.mass != 0) {
                const double len = dx.norm();
                if (!(len > 0)) throw SingularityError("degenerate string segment");
                shared += s.mass * 0.5 * len * field.weight_gradient(mid);
                along += s.mass * field.weight(mid) * dx / len;
            }
            if (s.charge != 0) {
                shared += s.charge * 0.5 * field.potential_jacobian(mid).transpose() * dx;
                along += s.charge * field.potential_covector(mid);
            }
            g[k] += shared - along;
            g[k + 1] += shared + along;
        }
        if (s.endpoints == Endpoints::fixed) {
            g.front().setZero();
            g.back().setZero();
        }
        grad.push_back(std::move(g));
    }
    return grad;
}

inline double max_node_norm(const std::vector<std::vector<Vec4>>& grad) {
    double m = 0;
    for (const auto& g : grad)
        for (const auto& v : g) m = std::max(m, v.norm());
    return m;
}

struct RelaxOptions {
    int max_iters = 20000;
    double tol = 1e-7;
    double armijo = 1e-4;
    double shrink = 0.5;
    double initial_step = 1.0;
    int memory = 8; // L-BFGS history; 0 gives plain steepest descent
};

struct RelaxResult {
    std::vector<StringPath> strings;
    double residual = 0; // max node gradient norm
    int iterations = 0;
    bool converged = false;
    std::vector<double> action_trace; // S_total after each accepted step (first entry: start)
};

namespace detail {

inline Eigen::VectorXd flatten_nodes(const std::vector<std::vector<Vec4>>& rows) {
    Eigen::Index n = 0;
    for (const auto& r : rows) n += static_cast<Eigen::Index>(4 * r.size());
    Eigen::VectorXd v(n);
    Eigen::Index i = 0;
    for (const auto& r : rows)
        for (const auto& x : r) {
            v.segment<4>(i) = x;
            i += 4;
        }
    return v;
}

// Two-loop recursion: approximate inverse Hessian applied to g.
inline Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::vector<Eigen::VectorXd>& s,
                                       const std::vector<Eigen::VectorXd>& y) {
    Eigen::VectorXd q = g;
    const std::size_t m = s.size();
    std::vector<double> alpha(m), rho(m);
    for (std::size_t i = m; i-- > 0;) {
        rho[i] = 1.0 / y[i].dot(s[i]);
        alpha[i] = rho[i] * s[i].dot(q);
        q -= alpha[i] * y[i];
    }
    if (m > 0) q *= s.back().dot(y.back()) / y.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
        const double beta = rho[i] * y[i].dot(q);
        q += (alpha[i] - beta) * s[i];
    }
    return q;
}

} // namespace detail

/// Deterministic descent with Armijo backtracking (shrink factor and constant from the
/// options) along a limited-memory quasi-Newton direction; endpoints must be fixed.
template <ActionField F>
RelaxResult relax_strings(std::vector<StringPath> strings, const F& field, const RelaxOptions& opt = {}) {
    for (const auto& s : strings)
        if (s.endpoints != Endpoints::fixed) throw DomainError("relax_strings requires fixed endpoints");
    RelaxResult r;
    double value = action_value(strings, field).total;
    auto grad = action_gradient(strings, field);
    Eigen::VectorXd g = detail::flatten_nodes(grad);
    r.residual = max_node_norm(grad);
    r.action_trace.push_back(value);
    std::vector<Eigen::VectorXd> hist_s, hist_y;
    while (r.residual > opt.tol && r.iterations < opt.max_iters) {
        Eigen::VectorXd dir = -detail::lbfgs_direction(g, hist_s, hist_y);
        double slope = g.dot(dir);
        double step = opt.initial_step;
        if (!(slope < 0)) {
            hist_s.clear();
            hist_y.clear();
            dir = -g;
            slope = -g.squaredNorm();
        }
        if (hist_s.empty()) step = std::min(opt.initial_step, 0.1 / std::max(1e-300, std::sqrt(g.squaredNorm())));
        bool accepted = false;
        std::vector<StringPath> trial = strings;
        double tv = 0;
        for (int attempt = 0; attempt < 80; ++attempt) {
            Eigen::Index i = 0;
            for (std::size_t j = 0; j < strings.size(); ++j)
                for (std::size_t k = 0; k < strings[j].nodes.size(); ++k) {
                    trial[j].nodes[k] = strings[j].nodes[k] + step * dir.segment<4>(i);
                    i += 4;
                }
            bool ok = true;
            for (const auto& s : trial) ok = ok && satisfies_direction(s);
            if (ok) {
                try {
                    tv = action_value(trial, field).total;
                } catch (const SingularityError&) {
                    ok = false;
                }
            }
            if (ok && std::isfinite(tv)) {
                const double bound = value + opt.armijo * step * slope;
                // Once the predicted decrease is below the rounding level of the action the
                // Armijo test is vacuous; the approximate Wolfe test on the directional
                // derivative replaces it.
                if (bound < value) {
                    if (tv <= bound) {
                        accepted = true;
                        break;
                    }
                } else if (tv <= value) {
                    const double dt = detail::flatten_nodes(action_gradient(trial, field)).dot(dir);
                    if (dt <= (2 * opt.armijo - 1) * slope && dt >= 0.9 * slope) {
                        accepted = true;
                        break;
                    }
                }
            }
            step *= opt.shrink;
        }
        if (!accepted) {
            if (hist_s.empty()) break; // stalled: no representable decrease along -grad
            hist_s.clear();
            hist_y.clear();
            continue;
        }
        strings.swap(trial);
        value = tv;
        ++r.iterations;
        r.action_trace.push_back(value);
        grad = action_gradient(strings, field);
        const Eigen::VectorXd g_new = detail::flatten_nodes(grad);
        const Eigen::VectorXd sk = step * dir, yk = g_new - g;
        if (opt.memory > 0 && yk.dot(sk) > 1e-14 * sk.norm() * yk.norm()) {
            hist_s.push_back(sk);
            hist_y.push_back(yk);
            if (static_cast<int>(hist_s.size()) > opt.memory) {
                hist_s.erase(hist_s.begin());
                hist_y.erase(hist_y.begin());
            }
        }
        g = g_new;
        r.residual = max_node_norm(grad);
    }
    r.converged = r.residual <= opt.tol;
    r.strings = std::move(strings);
    return r;
}

// ---------------------------------------------------------------------------
// Helical strings: circular orbits in observer space advancing uniformly in flow time.

struct HelixParams {
    double radius = 1;
    double angular_step = 0.1;    // rotation angle per segment
    double flow_time_step = 0.5;  // <n, dx> per segment
    int segments = 32;
    double mass = 1;
    double charge = -1;
    Vec3 center = Vec3::Zero();
};

inline StringPath helix_string(const HelixParams& p) {
    StringPath s;
    s.mass = p.mass;
    s.charge = p.charge;
    s.endpoints = Endpoints::fixed;
    for (int k = 0; k <= p.segments; ++k) {
        const double a = p.angular_step * k;
        s.nodes.push_back(embed(p.flow_time_step * k, p.center + Vec3(p.radius * std::cos(a), p.radius * std::sin(a), 0)));
    }
    s.dtau = vacuum_flow().dot(s.nodes[1] - s.nodes[0]);
    return s;
}

/// Outward radial component of dS/dx at the middle node of a helix of the given radius.
template <ActionField F>
double helix_radial_gradient(HelixParams p, const F& field) {
    const StringPath s = helix_string(p);
    const auto g = action_gradient(std::vector<StringPath>{s}, field);
    const std::size_t mid = s.nodes.size() / 2;
    const Vec3 radial = (spatial_part(s.nodes[mid]) - p.center).normalized();
    return lift_spatial(radial).dot(g[0][mid]);
}

/// Radius in [lo, hi] at which the helix is stationary, by bisection on the radial gradient.
template <ActionField F>
double stationary_helix_radius(HelixParams p, const F& field, double lo, double hi, double rtol = 1e-15) {
    p.radius = lo;
    double flo = helix_radial_gradient(p, field);
    p.radius = hi;
    const double fhi = helix_radial_gradient(p, field);
    if (flo * fhi > 0) throw NumericalFailure("stationary_helix_radius: no sign change in bracket");
    for (int it = 0; it < 200 && hi - lo > rtol * hi; ++it) {
        p.radius = 0.5 * (lo + hi);
        const double fm = helix_radial_gradient(p, field);
        if ((fm < 0) == (flo < 0)) {
            lo = p.radius;
            flo = fm;
        } else {
            hi = p.radius;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace flows4
