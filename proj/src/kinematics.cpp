#include "bikesim/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bikesim/dual.hpp"
#include "bikesim/errors.hpp"
#include "bikesim/rotation.hpp"

namespace bikesim {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

std::array<double, 10> MinimalCoords::to_array() const
{
    return {xP, yP, Psi, phi, delta, thetaR, thetaF, phi_dot, delta_dot, thetaF_dot};
}

MinimalCoords MinimalCoords::from_array(const std::array<double, 10>& a)
{
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9]};
}

std::array<double, 11> AltMinimalCoords::to_array() const
{
    return {xP, yP, xPsi, yPsi, phi, delta, thetaR, thetaF, phi_dot, delta_dot, thetaF_dot};
}

AltMinimalCoords to_alt(const MinimalCoords& q)
{
    return {q.xP, q.yP, std::cos(q.Psi), std::sin(q.Psi), q.phi, q.delta,
            q.thetaR, q.thetaF, q.phi_dot, q.delta_dot, q.thetaF_dot};
}

MinimalCoords from_alt(const AltMinimalCoords& q)
{
    return {q.xP, q.yP, std::atan2(q.yPsi, q.xPsi), q.phi, q.delta,
            q.thetaR, q.thetaF, q.phi_dot, q.delta_dot, q.thetaF_dot};
}

BodyPose::BodyPose(const Matrix3d& rotation, const Vector3d& translation)
{
    T.setIdentity();
    T.topLeftCorner<3, 3>() = rotation;
    T.topRightCorner<3, 1>() = translation;
}

namespace {

// Geometry of the rear-to-front contact chain with the yaw rotation removed
// (coordinates in the ground frame rotated by Psi).
template <typename T>
struct Chain {
    Mat3<T> rear_contact;  // Rx(phi)
    Mat3<T> rear_frame;    // Rx(phi) Ry(thetaB)
    Mat3<T> fork;          // rear_frame Ry(-lambda) Rz(delta), steering axis = z
    Vec3<T> axle;          // front wheel axle
    Vec3<T> hub_to_contact;
    Vec3<T> rear_to_front;
};

template <typename T>
Chain<T> contact_chain(const T& phi, const T& delta, const T& thetaB, const BicycleParams& p)
{
    using std::sqrt;
    Chain<T> c;
    c.rear_contact = rot_x(phi);
    c.rear_frame = c.rear_contact * rot_y(thetaB);
    c.fork = c.rear_frame * rot_y(T(-p.lambda)) * rot_z(delta);
    const Vec3<T> frame_dir = c.rear_frame * rot_y(T(-p.alpha)).col(0);
    c.axle = c.fork.col(1);

    const Vec3<T> ez(T(0), T(0), T(1));
    const Vec3<T> f = -ez + c.axle.z() * c.axle;
    c.hub_to_contact = f / sqrt(f.squaredNorm());

    c.rear_to_front = T(p.rR) * c.rear_contact.col(2) + T(p.d1) * frame_dir -
                      T(p.d2) * c.fork.col(2) + T(p.d3) * c.fork.col(0) +
                      T(p.rF) * c.hub_to_contact;
    return c;
}

double heading_from_axle(const Vector3d& axle)
{
    // Rz(mu1) Rx(mu2) Ry(mu3): the axle is the second column, whose
    // horizontal part has length cos(mu2).
    const double cos_mu2 = std::hypot(axle.x(), axle.y());
    if (cos_mu2 < 1e-9) {
        throw GimbalDegeneracy("front wheel axle is vertical; contact heading undefined");
    }
    return std::atan2(-axle.x(), axle.y());
}

Vector3d to_vec(const Vec3<double>& v) { return v; }

Vector3d value(const Vec3<Dual>& v) { return {v.x().v, v.y().v, v.z().v}; }
Vector3d tangent(const Vec3<Dual>& v) { return {v.x().d, v.y().d, v.z().d}; }

// Reference-configuration points (x forward, z up, origin at P).
struct RefPoints {
    Vector3d rear_hub;
    Vector3d head;      // on the steering axis, end of the frame
    Vector3d front_hub;
    Vector3d com_B;
    Vector3d com_H;
};

RefPoints ref_points(const BicycleParams& p)
{
    RefPoints r;
    r.rear_hub = {0.0, 0.0, p.rR};
    r.head = r.rear_hub + p.d1 * Vector3d(std::cos(p.alpha), 0.0, std::sin(p.alpha));
    const Vector3d axis(-std::sin(p.lambda), 0.0, std::cos(p.lambda));
    const Vector3d offset(std::cos(p.lambda), 0.0, std::sin(p.lambda));
    r.front_hub = r.head - p.d2 * axis + p.d3 * offset;
    r.com_B = {p.com_B.x(), 0.0, p.com_B.y()};
    r.com_H = {p.com_H.x(), 0.0, p.com_H.y()};
    return r;
}

constexpr double kHalfPi = std::numbers::pi / 2.0;

} // namespace

double pitch_residual(double phi, double delta, double thetaB, const BicycleParams& p)
{
    return contact_chain(phi, delta, thetaB, p).rear_to_front.z();
}

double solve_pitch(double phi, double delta, const BicycleParams& p, double initial_guess)
{
    if (!(std::abs(phi) < kHalfPi)) {
        throw InvalidInput("solve_pitch: |phi| must be < pi/2");
    }
    constexpr int kMaxIter = 25;
    constexpr double kTol = 1e-12;
    constexpr double kAccept = 1e-9;

    double theta = initial_guess;
    double residual = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
        const Dual g = contact_chain(Dual(phi), Dual(delta), Dual(theta, 1.0), p).rear_to_front.z();
        residual = g.v;
        if (std::abs(residual) <= kTol) {
            return theta;
        }
        if (g.d == 0.0 || !std::isfinite(g.d)) {
            break;
        }
        const double step = g.v / g.d;
        theta -= step;
        if (std::abs(step) < 1e-16) {
            break;
        }
    }
    residual = pitch_residual(phi, delta, theta, p);
    if (!(std::abs(residual) <= kAccept)) {
        throw NonConvergence("solve_pitch: residual " + std::to_string(residual) +
                             " after " + std::to_string(kMaxIter) + " iterations");
    }
    return theta;
}

double solve_pitch(const MinimalCoords& q, const BicycleParams& p, double initial_guess)
{
    return solve_pitch(q.phi, q.delta, p, initial_guess);
}

double pitch_rate(const MinimalCoords& q, double thetaB, const BicycleParams& p)
{
    // Time derivative of the contact constraint g(phi, delta, thetaB) = 0.
    const Dual g_theta =
        contact_chain(Dual(q.phi), Dual(q.delta), Dual(thetaB, 1.0), p).rear_to_front.z();
    const Dual g_dir = contact_chain(Dual(q.phi, q.phi_dot), Dual(q.delta, q.delta_dot),
                                     Dual(thetaB), p).rear_to_front.z();
    return -g_dir.d / g_theta.d;
}

double wheelbase(double phi, double delta, double thetaB, const BicycleParams& p)
{
    return contact_chain(phi, delta, thetaB, p).rear_to_front.norm();
}

double wheelbase(const MinimalCoords& q, const BicycleParams& p)
{
    return wheelbase(q.phi, q.delta, solve_pitch(q, p), p);
}

double front_contact_heading(double phi, double delta, double thetaB, const BicycleParams& p)
{
    return heading_from_axle(contact_chain(phi, delta, thetaB, p).axle);
}

double front_contact_heading(const MinimalCoords& q, const BicycleParams& p)
{
    return front_contact_heading(q.phi, q.delta, solve_pitch(q, p), p);
}

double wheel_speed_from_forward(double v, const BicycleParams& p)
{
    return v / p.rF;
}

ContactKinematics contact_kinematics(double phi, double delta, double phi_dot, double delta_dot,
                                     double v, const BicycleParams& p, double pitch_guess)
{
    ContactKinematics k;
    k.thetaB = solve_pitch(phi, delta, p, pitch_guess);

    MinimalCoords q;
    q.phi = phi;
    q.delta = delta;
    q.phi_dot = phi_dot;
    q.delta_dot = delta_dot;
    k.thetaB_dot = pitch_rate(q, k.thetaB, p);

    const auto c = contact_chain(Dual(phi, phi_dot), Dual(delta, delta_dot),
                                 Dual(k.thetaB, k.thetaB_dot), p);
    const Vector3d r = value(c.rear_to_front);
    const Vector3d r_dot = tangent(c.rear_to_front);
    k.rear_to_front = r.head<2>();
    k.rear_to_front_rate = r_dot.head<2>();
    k.wheelbase = r.norm();
    k.mu1_rel = heading_from_axle(value(c.axle));

    // Q = P + Rz(Psi) rho with P moving along the heading and Q along mu1:
    //   rear_speed * ex + yaw_rate * J rho + rho_dot = v (cos mu, sin mu)
    const double s = std::sin(k.mu1_rel);
    const double cm = std::cos(k.mu1_rel);
    k.yaw_rate = (v * s - r_dot.y()) / r.x();
    k.rear_speed = v * cm + k.yaw_rate * r.y() - r_dot.x();
    return k;
}

Vector2d front_contact_point(const MinimalCoords& q, double thetaB, const BicycleParams& p)
{
    const Vector3d r = to_vec(contact_chain(q.phi, q.delta, thetaB, p).rear_to_front);
    const Eigen::Matrix2d yaw = rot_z(q.Psi).topLeftCorner<2, 2>();
    return Vector2d(q.xP, q.yP) + yaw * r.head<2>();
}

RedundantState minimal_to_redundant(const MinimalCoords& q, const BicycleParams& p,
                                    double pitch_guess)
{
    const RefPoints ref = ref_points(p);
    const double v = p.rF * q.thetaF_dot;
    const ContactKinematics k =
        contact_kinematics(q.phi, q.delta, q.phi_dot, q.delta_dot, v, p, pitch_guess);

    RedundantState out;
    out.thetaB = k.thetaB;
    out.thetaB_dot = k.thetaB_dot;
    out.wheelbase = k.wheelbase;
    out.mu1 = wrap_angle(q.Psi + k.mu1_rel);

    // Poses.
    const Matrix3d R_T1 = rot_z(q.Psi) * rot_x(q.phi);
    const Vector3d P(q.xP, q.yP, 0.0);
    const Matrix3d R_B = R_T1 * rot_y(k.thetaB);
    const Vector3d rear_hub = P + R_T1 * ref.rear_hub;
    const Vector3d p_B = rear_hub + R_B * (ref.com_B - ref.rear_hub);
    const Vector3d head = rear_hub + R_B * (ref.head - ref.rear_hub);
    const Matrix3d R_BH = rot_y(-p.lambda) * rot_z(q.delta) * rot_y(p.lambda);
    const Matrix3d R_H = R_B * R_BH;
    const Vector3d p_H = head + R_H * (ref.com_H - ref.head);
    const Vector3d front_hub = p_H + R_H * (ref.front_hub - ref.com_H);
    const Matrix3d R_F = R_H * rot_z(kHalfPi) * rot_x(q.thetaF);
    const Matrix3d R_R = R_B * rot_z(kHalfPi) * rot_x(q.thetaR);

    out.pose[0] = BodyPose(R_R, rear_hub);
    out.pose[1] = BodyPose(R_B, p_B);
    out.pose[2] = BodyPose(R_H, p_H);
    out.pose[3] = BodyPose(R_F, front_hub);

    // Angular velocities: rear frame, handlebar, front wheel.
    const Vector3d ez = Vector3d::UnitZ();
    const Vector3d w_B = k.yaw_rate * ez + R_T1 * Vector3d(q.phi_dot, k.thetaB_dot, 0.0);
    const Vector3d w_BH_local = rot_y(-p.lambda) * Vector3d(0.0, 0.0, q.delta_dot);
    const Vector3d w_H = R_B * (R_B.transpose() * w_B + w_BH_local);
    const Vector3d w_F = R_H * (R_H.transpose() * w_H + Vector3d(0.0, q.thetaF_dot, 0.0));

    // Translational velocities from the front contact backwards.
    const Vector3d axle = R_H.col(1);
    const Vector3d f = -ez + axle.z() * axle;
    const double f_norm = f.norm();
    const Vector3d h = f / f_norm;
    const Vector3d axle_dot = w_H.cross(axle);
    const Vector3d f_dot = axle_dot.z() * axle + axle.z() * axle_dot;
    const Vector3d h_dot = (f_dot - h * h.dot(f_dot)) / f_norm;
    // Angular velocity of the front contact frame; its component along h
    // does not enter the hub velocity.
    const Vector3d w_T3 = h.cross(h_dot);
    const Vector3d v_T3 = v * Vector3d(std::cos(out.mu1), std::sin(out.mu1), 0.0);
    const Vector3d r_Q_hub = -p.rF * h;

    const Vector3d v_F = v_T3 + w_T3.cross(r_Q_hub);
    const Vector3d v_H = v_F + w_H.cross(p_H - front_hub);
    const Vector3d v_head = v_H + w_H.cross(head - p_H);
    const Vector3d v_B = v_head + w_B.cross(p_B - head);
    const Vector3d v_R = v_B + w_B.cross(rear_hub - p_B);

    // Rear wheel spin from the rear contact speed.
    const Vector3d w_T1 = w_B - k.thetaB_dot * R_T1.col(1);
    const Vector3d v_P = R_T1.transpose() * (v_R + w_T1.cross(P - rear_hub));
    const double thetaR_dot = v_P.x() / p.rR;
    const Vector3d w_R = R_B * (R_B.transpose() * w_B + Vector3d(0.0, thetaR_dot, 0.0));

    out.twist[0] = {v_R, w_R};
    out.twist[1] = {v_B, w_B};
    out.twist[2] = {v_H, w_H};
    out.twist[3] = {v_F, w_F};
    return out;
}

MinimalCoords redundant_to_minimal(const RedundantState& r, const BicycleParams& p)
{
    const Matrix3d R_B = r.pose_of(Body::RearFrame).rotation();
    double cos_roll = 0.0;
    const YawRollPitch ypr = decompose_zxy(R_B, &cos_roll);
    // R_B = Rz(Psi) Rx(phi) Ry(thetaB): the middle angle is the roll.
    if (cos_roll < 1e-9) {
        throw GimbalDegeneracy("rear frame orientation is degenerate for yaw-roll-pitch extraction");
    }

    MinimalCoords q;
    q.Psi = wrap_angle(ypr.yaw);
    q.phi = ypr.roll;

    const Matrix3d R_T1 = rot_z(q.Psi) * rot_x(q.phi);
    const Vector3d rear_hub = r.pose_of(Body::RearWheel).translation();
    const Vector3d P = rear_hub - p.rR * R_T1.col(2);
    q.xP = P.x();
    q.yP = P.y();

    const Matrix3d R_H = r.pose_of(Body::Handlebar).rotation();
    const Matrix3d steer = rot_y(p.lambda) * (R_B.transpose() * R_H) * rot_y(-p.lambda);
    q.delta = std::atan2(steer(1, 0), steer(0, 0));

    const Matrix3d spin_R = rot_z(-kHalfPi) * R_B.transpose() *
                            r.pose_of(Body::RearWheel).rotation();
    q.thetaR = std::atan2(spin_R(2, 1), spin_R(1, 1));
    const Matrix3d spin_F = rot_z(-kHalfPi) * R_H.transpose() *
                            r.pose_of(Body::FrontWheel).rotation();
    q.thetaF = std::atan2(spin_F(2, 1), spin_F(1, 1));

    const Vector3d& w_B = r.twist_of(Body::RearFrame).angular;
    const Vector3d& w_H = r.twist_of(Body::Handlebar).angular;
    const Vector3d& w_F = r.twist_of(Body::FrontWheel).angular;
    q.phi_dot = R_T1.col(0).dot(w_B);
    const Vector3d steer_axis = R_B * rot_y(-p.lambda).col(2);
    q.delta_dot = (w_H - w_B).dot(steer_axis);
    q.thetaF_dot = (w_F - w_H).dot(R_H.col(1));
    return q;
}

ContactCheck check_contacts(const RedundantState& r, const BicycleParams& p)
{
    ContactCheck c;
    const Vector3d ez = Vector3d::UnitZ();

    const Matrix3d R_B = r.pose_of(Body::RearFrame).rotation();
    const YawRollPitch ypr = decompose_zxy(R_B);
    const Matrix3d R_T1 = rot_z(ypr.yaw) * rot_x(ypr.roll);
    const Vector3d rear_hub = r.pose_of(Body::RearWheel).translation();
    c.rear_contact = rear_hub - p.rR * R_T1.col(2);
    const Vector3d w_T1 = r.twist_of(Body::RearFrame).angular - r.thetaB_dot * R_T1.col(1);
    const Vector3d v_P = r.twist_of(Body::RearWheel).linear + w_T1.cross(c.rear_contact - rear_hub);
    c.rear_slip = R_T1.col(1).dot(v_P);

    const Matrix3d R_F = r.pose_of(Body::FrontWheel).rotation();
    const Vector3d axle = R_F.col(0);
    const Vector3d f = -ez + axle.z() * axle;
    const Vector3d h = f.normalized();
    const Vector3d front_hub = r.pose_of(Body::FrontWheel).translation();
    c.front_contact = front_hub + p.rF * h;
    const Vector3d axle_dot = r.twist_of(Body::FrontWheel).angular.cross(axle);
    const Vector3d f_dot = axle_dot.z() * axle + axle.z() * axle_dot;
    const Vector3d h_dot = (f_dot - h * h.dot(f_dot)) / f.norm();
    const Vector3d v_Q = r.twist_of(Body::FrontWheel).linear + p.rF * h_dot;
    const Vector3d lateral = ez.cross(axle.cross(ez)).normalized();
    // Horizontal direction perpendicular to rolling: projection of the axle.
    c.front_slip = lateral.dot(v_Q);
    return c;
}

} // namespace bikesim
