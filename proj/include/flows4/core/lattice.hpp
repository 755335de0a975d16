#pragma once

// Discrete exterior calculus on regular N-dimensional lattices.
//
// A p-form is stored as a cochain: one real number per p-cell, equal to the
// integral of the form over that cell. A p-cell is addressed by its base site
// and the sorted set of axes it spans (a bitmask). Components of a degree-p
// form follow the lexicographic order of their axis sets.

#include "flows4/errors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace flows4 {

enum class Boundary { periodic, open };
enum class Signature { euclidean, minkowski };

namespace testing_hooks {
// Flips the sign of the Hodge star on 1-forms. Mutation sanity only.
inline std::atomic<bool> hodge_sign_fault{false};
} // namespace testing_hooks

namespace detail {

inline std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

// Axis sets of size p in lexicographic order of their sorted members.
inline std::vector<unsigned> axis_sets(int n, int p) {
    std::vector<unsigned> out;
    for (unsigned m = 0; m < (1u << n); ++m)
        if (std::popcount(m) == p) out.push_back(m);
    auto members = [n](unsigned m) {
        std::vector<int> v;
        for (int i = 0; i < n; ++i)
            if (m & (1u << i)) v.push_back(i);
        return v;
    };
    std::sort(out.begin(), out.end(), [&](unsigned a, unsigned b) { return members(a) < members(b); });
    return out;
}

// (-1)^(number of members of `set` below `axis`): the sign of d(x_axis) moved into place.
inline int insertion_sign(unsigned set, int axis) {
    return (std::popcount(set & ((1u << axis) - 1u)) % 2) ? -1 : 1;
}

// Parity of the permutation that sorts (members of I, members of complement of I).
inline int shuffle_sign(unsigned set, int n) {
    int inversions = 0;
    for (int i = 0; i < n; ++i) {
        if (set & (1u << i)) continue;
        // every member of the set above a complement member is an inversion
        inversions += std::popcount(set & ~((1u << (i + 1)) - 1u));
    }
    return inversions % 2 ? -1 : 1;
}

} // namespace detail

/// Regular lattice with `N` axes. Axis 0 is the timelike one in Minkowski signature.
template <int N>
class Lattice {
    static_assert(N >= 1 && N <= 4, "lattices of dimension 1..4 are supported");

public:
    static constexpr int dim = N;

    Lattice(std::array<int, N> dims, double spacing, Boundary boundary = Boundary::periodic,
            Signature signature = Signature::euclidean)
        : dims_(dims), h_(spacing), boundary_(boundary), signature_(signature) {
        for (int d : dims_)
            if (d < 4) throw ShapeError("lattice: every axis needs at least 4 sites");
        if (!(h_ > 0) || !std::isfinite(h_)) throw ShapeError("lattice: spacing must be positive");
        sites_ = 1;
        for (int d : dims_) sites_ *= static_cast<std::size_t>(d);
        for (int i = N - 1, s = 1; i >= 0; --i) {
            stride_[i] = static_cast<std::size_t>(s);
            s *= dims_[i];
        }
    }

    static Lattice cube(int n, double spacing, Boundary b = Boundary::periodic,
                        Signature sig = Signature::euclidean) {
        std::array<int, N> d;
        d.fill(n);
        return Lattice(d, spacing, b, sig);
    }

    const std::array<int, N>& dims() const { return dims_; }
    double spacing() const { return h_; }
    Boundary boundary() const { return boundary_; }
    Signature signature() const { return signature_; }
    std::size_t sites() const { return sites_; }

    std::size_t index(const std::array<int, N>& c) const {
        std::size_t i = 0;
        for (int a = 0; a < N; ++a) i += static_cast<std::size_t>(c[a]) * stride_[a];
        return i;
    }

    std::array<int, N> coords(std::size_t idx) const {
        std::array<int, N> c{};
        for (int a = 0; a < N; ++a) {
            c[a] = static_cast<int>(idx / stride_[a]);
            idx %= stride_[a];
        }
        return c;
    }

    /// Neighbour of `site` shifted by `step` along `axis`; returns false if it leaves an open box.
    bool shift(std::size_t site, int axis, int step, std::size_t& out) const {
        const int c = static_cast<int>((site / stride_[axis]) % static_cast<std::size_t>(dims_[axis]));
        int t = c + step;
        if (t < 0 || t >= dims_[axis]) {
            if (boundary_ == Boundary::open) return false;
            t = ((t % dims_[axis]) + dims_[axis]) % dims_[axis];
        }
        out = site + static_cast<std::size_t>(t) * stride_[axis] - static_cast<std::size_t>(c) * stride_[axis];
        return true;
    }

    /// Whether the cell at `site` spanning `axes` lies inside the box.
    bool cell_valid(std::size_t site, unsigned axes) const {
        if (boundary_ == Boundary::periodic) return true;
        for (int a = 0; a < N; ++a) {
            if (!(axes & (1u << a))) continue;
            const int c = static_cast<int>((site / stride_[a]) % static_cast<std::size_t>(dims_[a]));
            if (c + 1 >= dims_[a]) return false;
        }
        return true;
    }

    /// Product of metric diagonal entries over the axes of a cell.
    int metric_sign(unsigned axes) const {
        if (signature_ == Signature::euclidean) return 1;
        // eta = diag(+1, -1, ..., -1)
        const int negatives = std::popcount(axes & ~1u);
        return negatives % 2 ? -1 : 1;
    }

    /// Sign of det(eta).
    int determinant_sign() const { return metric_sign((1u << N) - 1u); }

    bool operator==(const Lattice& o) const {
        return dims_ == o.dims_ && h_ == o.h_ && boundary_ == o.boundary_ && signature_ == o.signature_;
    }

private:
    std::array<int, N> dims_;
    double h_;
    Boundary boundary_;
    Signature signature_;
    std::size_t sites_ = 0;
    std::array<std::size_t, N> stride_{};
};

/// A degree-p cochain on a lattice.
template <int N>
class Form {
public:
    Form(Lattice<N> lattice, int degree) : lattice_(std::move(lattice)), degree_(degree) {
        if (degree_ < 0 || degree_ > N) throw DegreeError("form degree out of range");
        sets_ = detail::axis_sets(N, degree_);
        values_.assign(sets_.size() * lattice_.sites(), 0.0);
    }

    const Lattice<N>& lattice() const { return lattice_; }
    int degree() const { return degree_; }
    std::size_t components() const { return sets_.size(); }
    unsigned axes(std::size_t component) const { return sets_[component]; }

    std::size_t component_of(unsigned axes) const {
        auto it = std::find(sets_.begin(), sets_.end(), axes);
        if (it == sets_.end()) throw ShapeError("axis set does not match form degree");
        return static_cast<std::size_t>(it - sets_.begin());
    }

    double& at(std::size_t component, std::size_t site) { return values_[component * lattice_.sites() + site]; }
    double at(std::size_t component, std::size_t site) const {
        return values_[component * lattice_.sites() + site];
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    Form& operator+=(const Form& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Form& operator-=(const Form& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Form& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator-(Form a, const Form& b) { return a -= b; }
    friend Form operator*(double s, Form a) { return a *= s; }

    void check_same(const Form& o) const {
        if (!(lattice_ == o.lattice_)) throw ShapeError("forms live on different lattices");
        if (degree_ != o.degree_) throw ShapeError("forms have different degrees");
    }

    double max_abs() const {
        double m = 0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    Lattice<N> lattice_;
    int degree_;
    std::vector<unsigned> sets_;
    std::vector<double> values_;
};

/// Exterior derivative. Cells that stick out of an open box are left at zero.
template <int N>
Form<N> ext_d(const Form<N>& f) {
    const int p = f.degree();
    if (p >= N) throw DegreeError("ext_d: no forms above the top degree");
    const Lattice<N>& lat = f.lattice();
    Form<N> out(lat, p + 1);
    for (std::size_t c = 0; c < out.components(); ++c) {
        const unsigned set = out.axes(c);
        std::array<std::size_t, N> face{};
        for (int j = 0; j < N; ++j)
            if (set & (1u << j)) face[j] = f.component_of(set & ~(1u << j));
        for (std::size_t s = 0; s < lat.sites(); ++s) {
            if (!lat.cell_valid(s, set)) continue;
            double acc = 0;
            for (int j = 0; j < N; ++j) {
                if (!(set & (1u << j))) continue;
                std::size_t up = 0;
                lat.shift(s, j, 1, up);
                acc += detail::insertion_sign(set, j) * (f.at(face[j], up) - f.at(face[j], s));
            }
            out.at(c, s) = acc;
        }
    }
    return out;
}

/// Cell weight h^(N-2p): turns products of cell integrals into an L2 pairing.
template <int N>
double cell_weight(const Lattice<N>& lat, int degree) {
    return std::pow(lat.spacing(), N - 2 * degree);
}

/// Codifferential: the adjoint of ext_d under form_inner.
template <int N>
Form<N> codiff(const Form<N>& g) {
    const int q = g.degree();
    if (q == 0) throw DegreeError("codiff: 0-forms have no codifferential");
    const Lattice<N>& lat = g.lattice();
    Form<N> out(lat, q - 1);
    const double ratio = cell_weight(lat, q) / cell_weight(lat, q - 1);
    for (std::size_t c = 0; c < out.components(); ++c) {
        const unsigned set = out.axes(c);
        const int own_sign = lat.metric_sign(set);
        std::array<std::size_t, N> coface{};
        for (int j = 0; j < N; ++j)
            if (!(set & (1u << j))) coface[j] = g.component_of(set | (1u << j));
        for (std::size_t s = 0; s < lat.sites(); ++s) {
            double acc = 0;
            for (int j = 0; j < N; ++j) {
                if (set & (1u << j)) continue;
                const unsigned cell = set | (1u << j);
                const std::size_t gc = coface[j];
                const double sgn = detail::insertion_sign(cell, j) * lat.metric_sign(cell);
                // cell based at s contributes -g, cell based one step below contributes +g
                if (lat.cell_valid(s, cell)) acc -= sgn * g.at(gc, s);
                std::size_t down = 0;
                if (lat.shift(s, j, -1, down) && lat.cell_valid(down, cell)) acc += sgn * g.at(gc, down);
            }
            out.at(c, s) = ratio * own_sign * acc;
        }
    }
    return out;
}

/// Hodge star with orientation (x0, ..., x_{N-1}); cells are co-located with their duals.
template <int N>
Form<N> hodge(const Form<N>& f) {
    const int p = f.degree();
    const Lattice<N>& lat = f.lattice();
    Form<N> out(lat, N - p);
    const unsigned all = (1u << N) - 1u;
    const double scale = std::pow(lat.spacing(), N - 2 * p);
    const bool fault = p == 1 && testing_hooks::hodge_sign_fault.load();
    for (std::size_t c = 0; c < f.components(); ++c) {
        const unsigned set = f.axes(c);
        double sgn = detail::shuffle_sign(set, N) * lat.metric_sign(set) * scale;
        if (fault) sgn = -sgn;
        const std::size_t oc = out.component_of(all & ~set);
        for (std::size_t s = 0; s < lat.sites(); ++s) out.at(oc, s) = sgn * f.at(c, s);
    }
    return out;
}

/// L2 pairing of two forms of equal degree, with metric signs in Minkowski signature.
template <int N>
double form_inner(const Form<N>& f, const Form<N>& g) {
    f.check_same(g);
    const Lattice<N>& lat = f.lattice();
    const double w = cell_weight(lat, f.degree());
    double total = 0;
    for (std::size_t c = 0; c < f.components(); ++c) {
        double acc = 0;
        for (std::size_t s = 0; s < lat.sites(); ++s) acc += f.at(c, s) * g.at(c, s);
        total += lat.metric_sign(f.axes(c)) * acc;
    }
    return w * total;
}

/// Sign relating form_inner(*f, *g) to form_inner(f, g).
template <int N>
int hodge_isometry_sign(const Lattice<N>& lat) {
    return lat.determinant_sign();
}

/// Sign s with **f = s f on degree-p forms.
template <int N>
int hodge_involution_sign(const Lattice<N>& lat, int p) {
    return ((p * (N - p)) % 2 ? -1 : 1) * lat.determinant_sign();
}

/// Samples a 0-form from a function of lattice coordinates (in units of the spacing).
template <int N, class Fn>
Form<N> sample_scalar(const Lattice<N>& lat, Fn&& fn) {
    Form<N> f(lat, 0);
    for (std::size_t s = 0; s < lat.sites(); ++s) {
        std::array<double, N> x{};
        const auto c = lat.coords(s);
        for (int a = 0; a < N; ++a) x[a] = c[a] * lat.spacing();
        f.at(0, s) = fn(x);
    }
    return f;
}

/// Extracts component `axis` of a 1-form as a 0-form (same coefficients).
template <int N>
Form<N> one_form_component(const Form<N>& f, int axis) {
    if (f.degree() != 1) throw DegreeError("expected a 1-form");
    Form<N> out(f.lattice(), 0);
    const std::size_t c = f.component_of(1u << axis);
    for (std::size_t s = 0; s < f.lattice().sites(); ++s) out.at(0, s) = f.at(c, s);
    return out;
}

} // namespace flows4
