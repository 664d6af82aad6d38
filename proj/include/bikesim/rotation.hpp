#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace bikesim {

template <typename T>
using Vec3 = Eigen::Matrix<T, 3, 1>;
template <typename T>
using Mat3 = Eigen::Matrix<T, 3, 3>;

template <typename T>
Mat3<T> rot_x(const T& a)
{
    using std::cos;
    using std::sin;
    const T c = cos(a), s = sin(a);
    Mat3<T> m;
    m << T(1), T(0), T(0),
         T(0), c, -s,
         T(0), s, c;
    return m;
}

template <typename T>
Mat3<T> rot_y(const T& a)
{
    using std::cos;
    using std::sin;
    const T c = cos(a), s = sin(a);
    Mat3<T> m;
    m << c, T(0), s,
         T(0), T(1), T(0),
         -s, T(0), c;
    return m;
}

template <typename T>
Mat3<T> rot_z(const T& a)
{
    using std::cos;
    using std::sin;
    const T c = cos(a), s = sin(a);
    Mat3<T> m;
    m << c, -s, T(0),
         s, c, T(0),
         T(0), T(0), T(1);
    return m;
}

inline Eigen::Matrix3d skew(const Eigen::Vector3d& a)
{
    Eigen::Matrix3d m;
    m << 0.0, -a.z(), a.y(),
         a.z(), 0.0, -a.x(),
         -a.y(), a.x(), 0.0;
    return m;
}

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
    constexpr double pi = std::numbers::pi;
    double r = std::remainder(a, 2.0 * pi);
    if (r <= -pi) {
        r += 2.0 * pi;
    }
    return r;
}

// Angles of R = Rz(yaw) * Rx(roll) * Ry(pitch).
struct YawRollPitch {
    double yaw = 0.0;
    double roll = 0.0;
    double pitch = 0.0;
};

// cos_roll receives cos(roll) >= 0; near zero, yaw and pitch are not
// separable and callers should report a degeneracy.
inline YawRollPitch decompose_zxy(const Eigen::Matrix3d& r, double* cos_roll = nullptr)
{
    YawRollPitch out;
    const double cr = std::hypot(r(2, 0), r(2, 2));
    out.roll = std::atan2(r(2, 1), cr);
    out.pitch = std::atan2(-r(2, 0), r(2, 2));
    out.yaw = std::atan2(-r(0, 1), r(1, 1));
    if (cos_roll != nullptr) {
        *cos_roll = cr;
    }
    return out;
}

} // namespace bikesim
