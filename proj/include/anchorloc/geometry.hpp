#pragma once

#include <array>
#include <cmath>

namespace anchorloc {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0; // m/s

inline constexpr double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad2deg(double rad) { return rad * (180.0 / kPi); }

/// Wrap an angle to (-pi, pi].
inline double wrap_pi(double angle) {
    double r = std::fmod(angle + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

// Positions are meters in whichever frame the context names.
using Point3 = Vec3;

/// Airframe attitude in radians. Convention: x-right, y-forward (radar
/// boresight at zero attitude), z-up. Pitch tilts about x, roll about y,
/// yaw about z.
struct EulerAngles {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;

    /// Normalize to yaw, roll in (-pi, pi] and pitch in [-pi/2, pi/2].
    EulerAngles normalized() const;
    bool finite() const {
        return std::isfinite(roll) && std::isfinite(pitch) && std::isfinite(yaw);
    }
};

/// 3x3 orthonormal rotation matrix, row-major.
struct Rotation {
    std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    static Rotation identity() { return Rotation{}; }
    static Rotation about_x(double angle);
    static Rotation about_y(double angle);
    static Rotation about_z(double angle);

    double operator()(int r, int c) const { return m[r][c]; }
    double& operator()(int r, int c) { return m[r][c]; }

    Rotation operator*(const Rotation& o) const;
    Vec3 operator*(const Vec3& v) const;

    Rotation transposed() const;
    double determinant() const;
    /// RtR == I and det == +1, both within tol.
    bool is_orthonormal(double tol = 1e-9) const;
};

/// Range/azimuth/elevation of a target seen by a forward-facing radar.
/// Invariants: range >= 0, |azimuth| <= pi/2, |elevation| <= pi/2.
struct SphericalFix {
    double range = 0.0;     // m
    double azimuth = 0.0;   // rad
    double elevation = 0.0; // rad
};

/// R = Rz(yaw) * Rx(pitch) * Ry(roll).
Rotation euler_to_rotation(const EulerAngles& e);

/// Inverse of euler_to_rotation. At gimbal lock (|pitch| = pi/2) the roll
/// is set to 0 and yaw absorbs the free angle.
EulerAngles rotation_to_euler(const Rotation& R);

/// x = r*sin(az)*cos(el), y = r*cos(az)*cos(el), z = r*sin(el).
Point3 spherical_to_point(const SphericalFix& s);

/// Inverse of spherical_to_point. Throws std::domain_error when the norm is
/// zero or the point lies outside the forward field of view (y <= 0).
SphericalFix point_to_spherical(const Point3& p);

/// Timestamped 6DoF pose: position of the drone in the anchor frame plus
/// the flight-frame attitude.
struct Pose6DoF {
    double timestamp = 0.0; // s
    Point3 position;        // m, anchor frame
    Rotation attitude;      // flight frame -> anchor frame
};

} // namespace anchorloc
