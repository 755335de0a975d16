#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

namespace flows4 {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Canonical representative of an angle in [0, 2 pi).
inline double wrap_angle(double a) {
    double r = std::fmod(a, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r = 0;
    return r;
}

/// A point of E(4) in the fixed coordinate order (x0, x1, x2, x3).
struct Point4 {
    double x0 = 0, x1 = 0, x2 = 0, x3 = 0;

    Vec4 vec() const { return {x0, x1, x2, x3}; }
    static Point4 from(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
    bool finite() const {
        return std::isfinite(x0) && std::isfinite(x1) && std::isfinite(x2) && std::isfinite(x3);
    }
};

/// Vacuum flow covector c = dx0 + dx1 + dx2 + dx3.
inline Vec4 vacuum_flow() { return Vec4::Ones(); }

/// Unit flow covector n = c / |c|.
inline Vec4 unit_flow() { return Vec4::Constant(0.5); }

/// Orthonormal frame (n, e1, e2, e3) of E(4): first row is the unit flow,
/// the remaining rows span the observer hyperplane orthogonal to c.
inline Mat4 observer_frame() {
    Mat4 h;
    h << 1, 1, 1, 1,
         1, 1, -1, -1,
         1, -1, 1, -1,
         1, -1, -1, 1;
    return 0.5 * h;
}

/// Spatial (observer) coordinates of a point of E(4).
inline Vec3 spatial_part(const Vec4& x) { return observer_frame().bottomRows<3>() * x; }

/// Flow-time coordinate <n, x>.
inline double flow_time(const Vec4& x) { return unit_flow().dot(x); }

/// Embeds flow time T and spatial coordinates s back into E(4).
inline Vec4 embed(double flow_t, const Vec3& s) {
    const Mat4 f = observer_frame();
    return f.row(0).transpose() * flow_t + f.bottomRows<3>().transpose() * s;
}

/// Lifts a spatial covector (gradient in observer coordinates) to E(4).
inline Vec4 lift_spatial(const Vec3& g) { return observer_frame().bottomRows<3>().transpose() * g; }

} // namespace flows4
