#pragma once

#include "flows4/core/lattice.hpp"
#include "flows4/errors.hpp"

#include <cmath>
#include <string>

namespace flows4 {

struct PoissonOptions {
    double tolerance = 1e-10; // relative residual
    int max_iterations = 5000;
};

struct PoissonResult {
    int iterations = 0;
    double residual = 0; // relative, |rhs - L phi| / |rhs|
};

namespace detail {

template <int N>
double plain_dot(const Form<N>& a, const Form<N>& b) {
    double s = 0;
    const auto& x = a.values();
    const auto& y = b.values();
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

template <int N>
void remove_mean(Form<N>& f) {
    double m = 0;
    for (double v : f.values()) m += v;
    m /= static_cast<double>(f.values().size());
    for (double& v : f.values()) v -= m;
}

} // namespace detail

/// Positive semidefinite graph Laplacian codiff(ext_d(phi)) on 0-forms, i.e. -Laplacian.
template <int N>
Form<N> neg_laplacian(const Form<N>& phi) {
    if (phi.degree() != 0) throw DegreeError("neg_laplacian expects a 0-form");
    return codiff(ext_d(phi));
}

/// Solves codiff(ext_d(phi)) = rhs for a mean-free phi on a periodic Euclidean lattice
/// by conjugate gradients. The mean of rhs is projected out first.
template <int N>
Form<N> solve_poisson(Form<N> rhs, const PoissonOptions& opt = {}, PoissonResult* info = nullptr) {
    const Lattice<N>& lat = rhs.lattice();
    if (rhs.degree() != 0) throw DegreeError("solve_poisson expects a 0-form right-hand side");
    if (lat.boundary() != Boundary::periodic || lat.signature() != Signature::euclidean)
        throw ShapeError("solve_poisson needs a periodic Euclidean lattice");
    detail::remove_mean(rhs);

    Form<N> phi(lat, 0);
    const double rhs_norm = std::sqrt(detail::plain_dot(rhs, rhs));
    PoissonResult result;
    if (rhs_norm == 0) {
        if (info) *info = result;
        return phi;
    }

    Form<N> r = rhs;
    Form<N> p = r;
    double rr = detail::plain_dot(r, r);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        Form<N> ap = neg_laplacian(p);
        const double alpha = rr / detail::plain_dot(p, ap);
        for (std::size_t i = 0; i < phi.values().size(); ++i) {
            phi.values()[i] += alpha * p.values()[i];
            r.values()[i] -= alpha * ap.values()[i];
        }
        const double rr_new = detail::plain_dot(r, r);
        result.iterations = it;
        result.residual = std::sqrt(rr_new) / rhs_norm;
        if (result.residual <= opt.tolerance) {
            // recompute from scratch so the reported residual is the true one
            Form<N> check = rhs - neg_laplacian(phi);
            result.residual = std::sqrt(detail::plain_dot(check, check)) / rhs_norm;
            if (result.residual <= opt.tolerance) {
                detail::remove_mean(phi);
                if (info) *info = result;
                return phi;
            }
            r = check;
            rr = detail::plain_dot(r, r);
            p = r;
            continue;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < p.values().size(); ++i) p.values()[i] = r.values()[i] + beta * p.values()[i];
    }
    if (info) *info = result;
    throw NumericalFailure("poisson solve did not reach residual " + std::to_string(opt.tolerance) +
                           " within " + std::to_string(opt.max_iterations) + " iterations (residual " +
                           std::to_string(result.residual) + ")");
}

} // namespace flows4
