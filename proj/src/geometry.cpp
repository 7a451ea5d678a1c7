#include "anchorloc/geometry.hpp"

#include <stdexcept>

namespace anchorloc {

EulerAngles EulerAngles::normalized() const {
    EulerAngles e{wrap_pi(roll), wrap_pi(pitch), wrap_pi(yaw)};
    if (e.pitch > kPi / 2.0) { // fold pitch back into [-pi/2, pi/2]
        e.pitch = kPi - e.pitch;
        e.roll = wrap_pi(e.roll + kPi);
        e.yaw = wrap_pi(e.yaw + kPi);
    } else if (e.pitch < -kPi / 2.0) {
        e.pitch = -kPi - e.pitch;
        e.roll = wrap_pi(e.roll + kPi);
        e.yaw = wrap_pi(e.yaw + kPi);
    }
    return e;
}

Rotation Rotation::about_x(double angle) {
    double c = std::cos(angle);
    double s = std::sin(angle);
    Rotation R;
    R.m = {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
    return R;
}

Rotation Rotation::about_y(double angle) {
    double c = std::cos(angle);
    double s = std::sin(angle);
    Rotation R;
    R.m = {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
    return R;
}

Rotation Rotation::about_z(double angle) {
    double c = std::cos(angle);
    double s = std::sin(angle);
    Rotation R;
    R.m = {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
    return R;
}

Rotation Rotation::operator*(const Rotation& o) const {
    Rotation r;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += m[i][k] * o.m[k][j];
            r.m[i][j] = acc;
        }
    }
    return r;
}

Vec3 Rotation::operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

Rotation Rotation::transposed() const {
    Rotation r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
}

double Rotation::determinant() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

bool Rotation::is_orthonormal(double tol) const {
    Rotation rtr = transposed() * (*this);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(rtr.m[i][j] - expect) > tol) return false;
        }
    }
    return std::abs(determinant() - 1.0) <= tol;
}

Rotation euler_to_rotation(const EulerAngles& e) {
    return Rotation::about_z(e.yaw) * Rotation::about_x(e.pitch) * Rotation::about_y(e.roll);
}

EulerAngles rotation_to_euler(const Rotation& R) {
    // With R = Rz(y)*Rx(p)*Ry(r):
    //   R(2,1) = sin(p)
    //   R(2,0) = -cos(p)sin(r), R(2,2) = cos(p)cos(r)
    //   R(0,1) = -sin(y)cos(p), R(1,1) = cos(y)cos(p)
    double sp = R(2, 1);
    if (sp > 1.0) sp = 1.0;
    if (sp < -1.0) sp = -1.0;
    EulerAngles e;
    e.pitch = std::asin(sp);
    if (std::abs(sp) < 1.0 - 1e-12) {
        e.roll = std::atan2(-R(2, 0), R(2, 2));
        e.yaw = std::atan2(-R(0, 1), R(1, 1));
    } else {
        // Gimbal lock: roll fixed at zero, yaw takes the free angle.
        e.roll = 0.0;
        e.yaw = std::atan2(R(1, 0), R(0, 0));
    }
    e.roll = wrap_pi(e.roll);
    e.yaw = wrap_pi(e.yaw);
    return e;
}

Point3 spherical_to_point(const SphericalFix& s) {
    double ca = std::cos(s.azimuth);
    double sa = std::sin(s.azimuth);
    double ce = std::cos(s.elevation);
    double se = std::sin(s.elevation);
    return {s.range * sa * ce, s.range * ca * ce, s.range * se};
}

SphericalFix point_to_spherical(const Point3& p) {
    double r = p.norm();
    if (r <= 0.0) throw std::domain_error("point_to_spherical: zero-length point");
    if (p.y <= 0.0) throw std::domain_error("point_to_spherical: point outside forward field of view (y <= 0)");
    double se = p.z / r;
    if (se > 1.0) se = 1.0;
    if (se < -1.0) se = -1.0;
    return {r, std::atan2(p.x, p.y), std::asin(se)};
}

} // namespace anchorloc
