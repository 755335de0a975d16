#pragma once

#include "flows4/core/types.hpp"
#include "flows4/errors.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace flows4 {

// ---------------------------------------------------------------------------
// Null coordinates: y0 = x0 + x1 + x2 + x3, y_i = x0 - x_i.

struct NullCoords {
    double y0 = 0, y1 = 0, y2 = 0, y3 = 0;
};

inline NullCoords null_map(const Point4& p) {
    return {p.x0 + p.x1 + p.x2 + p.x3, p.x0 - p.x1, p.x0 - p.x2, p.x0 - p.x3};
}

inline Point4 null_map_inverse(const NullCoords& y) {
    const double x0 = (y.y0 + y.y1 + y.y2 + y.y3) / 4.0;
    return {x0, x0 - y.y1, x0 - y.y2, x0 - y.y3};
}

// ---------------------------------------------------------------------------
// The commutative algebra of matrices [[t0, t1], [t1, t0]].

struct Endo2 {
    double t0 = 1, t1 = 0;

    friend Endo2 operator*(const Endo2& a, const Endo2& b) {
        return {a.t0 * b.t0 + a.t1 * b.t1, a.t0 * b.t1 + a.t1 * b.t0};
    }

    /// Eigenvalues (t0 + t1, t0 - t1); multiplication is componentwise in this basis.
    std::pair<double, double> diagonal() const { return {t0 + t1, t0 - t1}; }

    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d m;
        m << t0, t1, t1, t0;
        return m;
    }
};

inline Endo2 endo_mul(const Endo2& a, const Endo2& b) { return a * b; }

// ---------------------------------------------------------------------------
// Boosts on null pairs (u, v) = (t + x, t - x).

struct NullPair {
    double u = 0, v = 0;
};

inline NullPair boost(const NullPair& p, double k) {
    if (!(k > 0)) throw DomainError("boost factor must be positive");
    return {k * p.u, p.v / k};
}

inline NullPair boost_rapidity(const NullPair& p, double theta) { return boost(p, std::exp(theta)); }

// ---------------------------------------------------------------------------
// SO(1,3) acting on (t, x, y, z) with eta = diag(+1, -1, -1, -1).

inline Mat4 minkowski_metric() { return Vec4(1, -1, -1, -1).asDiagonal(); }

inline double interval(const Vec4& v) { return v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3]; }

class LorentzElement {
public:
    enum class Kind { identity, boost, rotation, product, matrix };

    LorentzElement() : m_(Mat4::Identity()), kind_(Kind::identity) {}

    /// Validates an arbitrary matrix; throws InvariantViolation off the group.
    static LorentzElement from_matrix(const Mat4& m, double tol = 1e-12) {
        const double defect = (m.transpose() * minkowski_metric() * m - minkowski_metric()).cwiseAbs().maxCoeff();
        if (!(defect <= tol)) throw InvariantViolation("matrix does not preserve the Minkowski form (defect " + std::to_string(defect) + ")");
        const double det = m.determinant();
        if (!(std::abs(det - 1.0) <= tol)) throw InvariantViolation("Lorentz matrix must have unit determinant");
        if (!(m(0, 0) > 0)) throw InvariantViolation("Lorentz matrix must preserve time orientation");
        return LorentzElement(m, Kind::matrix);
    }

    /// Boost with rapidity `theta` along the unit spatial direction `axis`.
    static LorentzElement boost(double theta, const Vec3& axis) {
        const double n = axis.norm();
        if (!(n > 0)) throw DomainError("boost axis must be nonzero");
        const Vec3 d = axis / n;
        const double ch = std::cosh(theta), sh = std::sinh(theta);
        Mat4 m = Mat4::Identity();
        m(0, 0) = ch;
        m.block<1, 3>(0, 1) = -sh * d.transpose();
        m.block<3, 1>(1, 0) = -sh * d;
        m.block<3, 3>(1, 1) = Mat3::Identity() + (ch - 1.0) * d * d.transpose();
        return LorentzElement(m, Kind::boost);
    }

    /// Rotation of (x, y, z) by `angle` about `axis` (right-handed).
    static LorentzElement rotation(double angle, const Vec3& axis) {
        const double n = axis.norm();
        if (!(n > 0)) throw DomainError("rotation axis must be nonzero");
        Mat4 m = Mat4::Identity();
        m.block<3, 3>(1, 1) = Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
        return LorentzElement(m, Kind::rotation);
    }

    friend LorentzElement operator*(const LorentzElement& a, const LorentzElement& b) {
        return LorentzElement(a.m_ * b.m_, Kind::product);
    }

    const Mat4& matrix() const { return m_; }
    Kind kind() const { return kind_; }

    /// Largest entry of |L^T eta L - eta|.
    double defect() const {
        return (m_.transpose() * minkowski_metric() * m_ - minkowski_metric()).cwiseAbs().maxCoeff();
    }

private:
    LorentzElement(const Mat4& m, Kind k) : m_(m), kind_(k) {}
    Mat4 m_;
    Kind kind_;
};

inline Vec4 lorentz_apply(const LorentzElement& l, const Vec4& v) {
    if (!(l.defect() <= 1e-12) || !(std::abs(l.matrix().determinant() - 1.0) <= 1e-12))
        throw InvariantViolation("lorentz_apply: element has drifted off the group");
    if (l.kind() == LorentzElement::Kind::rotation) {
        Vec4 out = l.matrix() * v;
        out[0] = v[0];
        return out;
    }
    return l.matrix() * v;
}

// ---------------------------------------------------------------------------
// Observer coordinates accumulated along a string:
//   t = int (dx0 + dx1 + dx2 + dx3), x = int (dx0 + dx1), y = int (dx0 + dx2), z = int (dx0 + dx3).

struct ObserverEvent {
    double t = 0, x = 0, y = 0, z = 0;

    friend ObserverEvent operator+(const ObserverEvent& a, const ObserverEvent& b) {
        return {a.t + b.t, a.x + b.x, a.y + b.y, a.z + b.z};
    }
};

inline ObserverEvent observer_differential(const Vec4& dx) {
    return {dx[0] + dx[1] + dx[2] + dx[3], dx[0] + dx[1], dx[0] + dx[2], dx[0] + dx[3]};
}

/// Observer coordinates of every node, relative to the first; the integrands are exact,
/// so each entry is a difference of node values.
inline std::vector<ObserverEvent> observer_coords(const std::vector<Vec4>& nodes) {
    std::vector<ObserverEvent> out;
    out.reserve(nodes.size());
    if (nodes.empty()) return out;
    for (const Vec4& x : nodes) out.push_back(observer_differential(x - nodes.front()));
    return out;
}

/// Pairings of observer differentials with the frame e0..e3:
///   <dt,e0> = <dx,e1> = <dy,e2> = <dz,e3> = tau0,  <dt,e_i> = <dx_i,e0> = tau_i.
struct PairingTable {
    double tau0 = 1, tau1 = 0, tau2 = 0, tau3 = 0;

    Mat4 table() const {
        Mat4 m = tau0 * Mat4::Identity();
        const double t[3] = {tau1, tau2, tau3};
        for (int i = 0; i < 3; ++i) m(0, i + 1) = m(i + 1, 0) = t[i];
        return m;
    }

    double pairing(int differential, int frame) const { return table()(differential, frame); }

    /// Table for a string whose frame vector e0 is the tangent x': column e0 holds (dt, dx, dy, dz)/dtau.
    static PairingTable from_tangent(const Vec4& tangent) {
        const ObserverEvent d = observer_differential(tangent);
        if (!(d.t > 0)) throw DomainError("string tangent must satisfy the direction condition");
        return {d.t, d.x, d.y, d.z};
    }
};

// ---------------------------------------------------------------------------
// Quadratic form induced by a flow at a point:
//   g(v) = <u, v>^2 - |v - <u, v> u|^2,  u = B / |B|.

template <class Flow>
double induced_form(const Flow& flow, const Vec4& x, const Vec4& v) {
    const Vec4 b = flow.flow(x);
    const double n = b.norm();
    if (!(n > 1e-14)) throw SingularityError("induced_form: flow vanishes at the point");
    const Vec4 u = b / n;
    const double along = u.dot(v);
    return along * along - (v - along * u).squaredNorm();
}

template <class Flow>
Mat4 induced_form_matrix(const Flow& flow, const Vec4& x) {
    const Vec4 b = flow.flow(x);
    const double n = b.norm();
    if (!(n > 1e-14)) throw SingularityError("induced_form: flow vanishes at the point");
    const Vec4 u = b / n;
    return 2.0 * u * u.transpose() - Mat4::Identity();
}

/// (number of positive, number of negative) eigenvalues of a symmetric matrix.
inline std::pair<int, int> signature_of(const Mat4& m, double tol = 1e-12) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(m);
    int pos = 0, neg = 0;
    for (int i = 0; i < 4; ++i) {
        if (es.eigenvalues()[i] > tol) ++pos;
        else if (es.eigenvalues()[i] < -tol) ++neg;
    }
    return {pos, neg};
}

} // namespace flows4
