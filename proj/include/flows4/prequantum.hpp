#pragma once

// Pre-quantum orbit selection for strings: among helical strings that are
// stationary for the action (delta S = 0), pick the one whose period action
// is an integer multiple of h. Both residuals are reported separately.

#include "flows4/action.hpp"
#include "flows4/quantization.hpp"
#include "flows4/statics.hpp"

#include <cmath>
#include <string>

namespace flows4 {

struct PrequantumOrbit {
    int z = 0;
    double angular_step = 0;
    double radius = 0;
    double period_action = 0;
    double gradient_residual = 0; // max node |dS/dx| on the stationary helix
    double phase_residual = 0;    // |S_cl / h - round(S_cl / h)|
    StringPath string;
};

/// Period action sum p.dq over one revolution, p = m G ds / |dx| per segment.
template <ActionField F>
double helix_period_action(const HelixParams& p, const F& field) {
    const StringPath s = helix_string(p);
    const std::size_t k = s.nodes.size() / 2;
    const Vec4 dx = s.nodes[k + 1] - s.nodes[k];
    const Vec3 ds = spatial_part(dx);
    const double g = field.weight(0.5 * (s.nodes[k] + s.nodes[k + 1]));
    const double per_segment = p.mass * g * ds.squaredNorm() / dx.norm();
    return two_pi / p.angular_step * per_segment;
}

/// Selects the stationary helix with S_cl = z h by bisection over the angular step.
/// `r_lo`, `r_hi` bracket the stationary radius for every angular step in [w_lo, w_hi].
template <ActionField F>
PrequantumOrbit select_prequantum_orbit(HelixParams p, const F& field, const QuantConfig& cfg, int z,
                                        double w_lo, double w_hi, double r_lo, double r_hi) {
    auto stationary = [&](double w) {
        p.angular_step = w;
        p.radius = stationary_helix_radius(p, field, r_lo, r_hi);
        return p;
    };
    const double target = z * cfg.h();
    auto f = [&](double w) { return helix_period_action(stationary(w), field) - target; };
    double flo = f(w_lo);
    const double fhi = f(w_hi);
    if (flo * fhi > 0) throw NumericalFailure("select_prequantum_orbit: S_cl = z h not bracketed for z = " + std::to_string(z));
    for (int it = 0; it < 200 && w_hi - w_lo > 1e-15 * w_hi; ++it) {
        const double mid = 0.5 * (w_lo + w_hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            w_lo = mid;
            flo = fm;
        } else {
            w_hi = mid;
        }
    }
    PrequantumOrbit o;
    o.z = z;
    const HelixParams best = stationary(0.5 * (w_lo + w_hi));
    o.angular_step = best.angular_step;
    o.radius = best.radius;
    o.string = helix_string(best);
    o.period_action = helix_period_action(best, field);
    o.gradient_residual = max_node_norm(action_gradient(std::vector<StringPath>{o.string}, field));
    o.phase_residual = phase_residual(o.period_action, cfg);
    return o;
}

} // namespace flows4
