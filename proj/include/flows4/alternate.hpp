#pragma once

// Alternating minimization of the action over strings and a lattice field.
//
// The electromagnetic potential phi_E lives on a periodic 3-D lattice over
// observer space and is static in flow time. Strings read it through cubic
// B-spline shape functions and deposit their charge through the same shapes,
// so the field half-step (a Poisson solve) is the exact minimizer of
//   S_field + S_charge = 1/2 T <d phi, d phi> + sum_c rho_c phi_c
// over mean-free phi, where T is the flow-time extent of the region. The
// gravitational sector is held at the vacuum (unit mass weight).

#include "flows4/action.hpp"
#include "flows4/core/lattice.hpp"
#include "flows4/core/poisson.hpp"
#include "flows4/core/types.hpp"
#include "flows4/errors.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace flows4 {

namespace detail {

// Cubic B-spline weights and derivatives for the four nodes around fractional offset t in [0, 1).
inline void bspline3(double t, std::array<double, 4>& w, std::array<double, 4>& dw) {
    const double u = 1.0 - t;
    w = {u * u * u / 6.0, (3 * t * t * t - 6 * t * t + 4) / 6.0, (-3 * t * t * t + 3 * t * t + 3 * t + 1) / 6.0,
         t * t * t / 6.0};
    dw = {-u * u / 2.0, (9 * t * t - 12 * t) / 6.0, (-9 * t * t + 6 * t + 3) / 6.0, t * t / 2.0};
}

} // namespace detail

/// Static electromagnetic field on a periodic observer-space lattice.
class LatticeStaticField {
public:
    LatticeStaticField(Lattice<3> lattice, double flow_time_extent)
        : phi_(lattice, 0), extent_(flow_time_extent) {
        if (lattice.boundary() != Boundary::periodic || lattice.signature() != Signature::euclidean)
            throw ConfigError("lattice field needs a periodic Euclidean lattice");
        if (!(extent_ > 0)) throw ConfigError("flow-time extent must be positive");
    }

    const Lattice<3>& lattice() const { return phi_.lattice(); }
    const Form<3>& potential() const { return phi_; }
    Form<3>& potential() { return phi_; }
    double flow_time_extent() const { return extent_; }

    /// Visits the 64 lattice sites supporting point s with (site, weight, d weight / ds).
    template <class Visit>
    void stencil(const Vec3& s, Visit&& visit) const {
        const auto& lat = phi_.lattice();
        const double h = lat.spacing();
        std::array<int, 3> base{};
        std::array<std::array<double, 4>, 3> w{}, dw{};
        for (int a = 0; a < 3; ++a) {
            const double u = s[a] / h;
            const double f = std::floor(u);
            base[a] = static_cast<int>(f) - 1;
            detail::bspline3(u - f, w[a], dw[a]);
        }
        const auto& dims = lat.dims();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    std::array<int, 3> c{base[0] + i, base[1] + j, base[2] + k};
                    for (int a = 0; a < 3; ++a) c[a] = ((c[a] % dims[a]) + dims[a]) % dims[a];
                    const double wt = w[0][i] * w[1][j] * w[2][k];
                    const Vec3 dwt(dw[0][i] * w[1][j] * w[2][k], w[0][i] * dw[1][j] * w[2][k],
                                   w[0][i] * w[1][j] * dw[2][k]);
                    visit(lat.index(c), wt, Vec3(dwt / h));
                }
    }

    double phi_at(const Vec3& s) const {
        double v = 0;
        stencil(s, [&](std::size_t site, double w, const Vec3&) { v += w * phi_.at(0, site); });
        return v;
    }

    Vec3 phi_gradient_at(const Vec3& s) const {
        Vec3 g = Vec3::Zero();
        stencil(s, [&](std::size_t site, double, const Vec3& dw) { g += dw * phi_.at(0, site); });
        return g;
    }

    // ActionField interface
    double weight(const Vec4&) const { return 1.0; }
    Vec4 weight_gradient(const Vec4&) const { return Vec4::Zero(); }
    Vec4 potential_covector(const Vec4& x) const { return phi_at(spatial_part(x)) * unit_flow(); }
    Mat4 potential_jacobian(const Vec4& x) const {
        return unit_flow() * lift_spatial(phi_gradient_at(spatial_part(x))).transpose();
    }

    /// 1/2 T <d phi, d phi>, equal to 1/2 <dB, dB> over the 4-D region for this static field.
    double field_energy() const {
        const Form<3> d = ext_d(phi_);
        return 0.5 * extent_ * form_inner(d, d);
    }

private:
    Form<3> phi_;
    double extent_;
};

/// Charge deposited by strings onto lattice sites: rho_c = sum_k e <n, dx_k> w_c(mid_k).
inline Form<3> deposit_charge(const std::vector<StringPath>& strings, const LatticeStaticField& field) {
    Form<3> rho(field.lattice(), 0);
    for (const auto& s : strings) {
        if (s.charge == 0) continue;
        for (std::size_t k = 0; k + 1 < s.nodes.size(); ++k) {
            const Vec4 dx = s.nodes[k + 1] - s.nodes[k];
            const double q = s.charge * unit_flow().dot(dx);
            field.stencil(spatial_part(0.5 * (s.nodes[k] + s.nodes[k + 1])),
                          [&](std::size_t site, double w, const Vec3&) { rho.at(0, site) += q * w; });
        }
    }
    return rho;
}

/// Field half-step: the mean-free minimizer of S over phi for the current strings.
inline PoissonResult solve_field(const std::vector<StringPath>& strings, LatticeStaticField& field,
                                 const PoissonOptions& opt = {}) {
    Form<3> rho = deposit_charge(strings, field);
    const double h = field.lattice().spacing();
    // T <d phi, d.> + rho = 0  <=>  codiff d phi = -rho / (T h^3)
    rho *= -1.0 / (field.flow_time_extent() * h * h * h);
    PoissonResult info;
    field.potential() = solve_poisson(std::move(rho), opt, &info);
    return info;
}

struct AlternateOptions {
    int rounds = 4;
    RelaxOptions relax{};
    PoissonOptions poisson{};
    double monotone_tol = 1e-8;
};

struct AlternateResult {
    std::vector<StringPath> strings;
    LatticeStaticField field;
    std::vector<ActionBreakdown> trace; // entry 0: start, then after each round
    std::vector<double> relax_residuals;
    std::vector<PoissonResult> solves;
};

/// Thrown when the action trace increases beyond tolerance; carries the trace so far.
class AlternateDivergence : public NumericalFailure {
public:
    AlternateDivergence(const std::string& what, std::vector<double> trace)
        : NumericalFailure(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

inline AlternateResult alternate_relax(std::vector<StringPath> strings, LatticeStaticField field,
                                       const AlternateOptions& opt = {}) {
    AlternateResult out{strings, field, {}, {}, {}};
    out.trace.push_back(action_value(strings, field));
    std::vector<double> totals{out.trace.back().total};
    for (int round = 0; round < opt.rounds; ++round) {
        out.solves.push_back(solve_field(strings, field, opt.poisson));
        RelaxResult rr = relax_strings(std::move(strings), field, opt.relax);
        strings = std::move(rr.strings);
        out.relax_residuals.push_back(rr.residual);
        out.trace.push_back(action_value(strings, field));
        totals.push_back(out.trace.back().total);
        const double prev = totals[totals.size() - 2];
        if (totals.back() > prev + opt.monotone_tol * std::max(1.0, std::abs(prev)))
            throw AlternateDivergence("alternate_relax: action increased in round " + std::to_string(round + 1), totals);
    }
    out.strings = std::move(strings);
    out.field = std::move(field);
    return out;
}

} // namespace flows4
