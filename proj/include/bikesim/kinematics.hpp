#pragma once

#include <array>

#include <Eigen/Core>

#include "bikesim/params.hpp"

namespace bikesim {

// Minimal coordinates, ordered as in the state vector:
// (xP, yP, Psi, phi, delta, thetaR, thetaF, phi_dot, delta_dot, thetaF_dot).
struct MinimalCoords {
    double xP = 0.0;
    double yP = 0.0;
    double Psi = 0.0;
    double phi = 0.0;
    double delta = 0.0;
    double thetaR = 0.0;
    double thetaF = 0.0;
    double phi_dot = 0.0;
    double delta_dot = 0.0;
    double thetaF_dot = 0.0;

    std::array<double, 10> to_array() const;
    static MinimalCoords from_array(const std::array<double, 10>& a);
};

// Yaw replaced by the unit vector (cos Psi, sin Psi).
struct AltMinimalCoords {
    double xP = 0.0;
    double yP = 0.0;
    double xPsi = 1.0;
    double yPsi = 0.0;
    double phi = 0.0;
    double delta = 0.0;
    double thetaR = 0.0;
    double thetaF = 0.0;
    double phi_dot = 0.0;
    double delta_dot = 0.0;
    double thetaF_dot = 0.0;

    std::array<double, 11> to_array() const;
};

AltMinimalCoords to_alt(const MinimalCoords& q);
MinimalCoords from_alt(const AltMinimalCoords& q);

struct BodyPose {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();

    BodyPose() = default;
    BodyPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

    Eigen::Matrix3d rotation() const { return T.topLeftCorner<3, 3>(); }
    Eigen::Vector3d translation() const { return T.topRightCorner<3, 1>(); }
};

// Velocities of a body's reference point (its centre of mass), global frame.
struct BodyTwist {
    Eigen::Vector3d linear = Eigen::Vector3d::Zero();
    Eigen::Vector3d angular = Eigen::Vector3d::Zero();
};

enum class Body { RearWheel = 0, RearFrame = 1, Handlebar = 2, FrontWheel = 3 };

struct RedundantState {
    std::array<BodyPose, 4> pose;
    std::array<BodyTwist, 4> twist;
    double thetaB = 0.0;
    double thetaB_dot = 0.0;
    double wheelbase = 0.0;
    double mu1 = 0.0; // global heading of the front contact point's motion

    const BodyPose& pose_of(Body b) const { return pose[static_cast<int>(b)]; }
    const BodyTwist& twist_of(Body b) const { return twist[static_cast<int>(b)]; }
};

// Ground-contact constraint: z-component of the rear-to-front contact vector.
double pitch_residual(double phi, double delta, double thetaB, const BicycleParams& p);

// Newton solve of the ground-contact constraint for the rear frame pitch.
// Throws InvalidInput when |phi| >= pi/2 and NonConvergence when the
// residual exceeds 1e-9 after 25 iterations.
double solve_pitch(double phi, double delta, const BicycleParams& p, double initial_guess = 0.0);
double solve_pitch(const MinimalCoords& q, const BicycleParams& p, double initial_guess = 0.0);

double pitch_rate(const MinimalCoords& q, double thetaB, const BicycleParams& p);

double wheelbase(double phi, double delta, double thetaB, const BicycleParams& p);
double wheelbase(const MinimalCoords& q, const BicycleParams& p);

// Direction of motion of the front contact point relative to the rear
// contact frame's heading (yaw removed). Throws GimbalDegeneracy when the
// front wheel axle is vertical.
double front_contact_heading(double phi, double delta, double thetaB, const BicycleParams& p);
double front_contact_heading(const MinimalCoords& q, const BicycleParams& p);

double wheel_speed_from_forward(double v, const BicycleParams& p);

// Rear-to-front contact vector in the yaw-aligned ground frame and the
// velocity quantities of the slip-free rolling contacts.
struct ContactKinematics {
    double thetaB = 0.0;
    double thetaB_dot = 0.0;
    double mu1_rel = 0.0;
    double wheelbase = 0.0;
    Eigen::Vector2d rear_to_front = Eigen::Vector2d::Zero();
    Eigen::Vector2d rear_to_front_rate = Eigen::Vector2d::Zero();
    double yaw_rate = 0.0;
    double rear_speed = 0.0; // speed of the rear contact point along its heading
};

// v is the front contact speed rF * thetaF_dot.
ContactKinematics contact_kinematics(double phi, double delta, double phi_dot, double delta_dot,
                                     double v, const BicycleParams& p, double pitch_guess = 0.0);

// Front contact point Q on the ground plane.
Eigen::Vector2d front_contact_point(const MinimalCoords& q, double thetaB, const BicycleParams& p);

RedundantState minimal_to_redundant(const MinimalCoords& q, const BicycleParams& p,
                                    double pitch_guess = 0.0);

// Inverse mapping from body poses and twists (the quantities a multibody
// code reports through its sensors). Angles are wrapped into (-pi, pi].
MinimalCoords redundant_to_minimal(const RedundantState& r, const BicycleParams& p);

// Rear and front contact points recomputed from the body poses, together
// with the lateral slip velocity of each (component along the contact
// frame's y-axis).
struct ContactCheck {
    Eigen::Vector3d rear_contact = Eigen::Vector3d::Zero();
    Eigen::Vector3d front_contact = Eigen::Vector3d::Zero();
    double rear_slip = 0.0;
    double front_slip = 0.0;
};

ContactCheck check_contacts(const RedundantState& r, const BicycleParams& p);

} // namespace bikesim
