#pragma once

#include <array>
#include <complex>

#include <Eigen/Core>

#include "bikesim/kinematics.hpp"
#include "bikesim/params.hpp"

namespace bikesim {

struct SteeringDrive {
    double P_gain = 9.0;   // N m / rad
    double D_gain = 1.6;   // N m s / rad
    double delta_set = 0.0;
    double delta_dot_set = 0.0;
};

// tau = P (delta - delta_set) + D (delta_dot - delta_dot_set)
double steering_torque(double delta, double delta_dot, const SteeringDrive& drive);

// Roll/steer model in the engine's sign convention (roll positive to the
// right, steer positive to the left). The drive torque tau opposes positive
// steer error, so the steer equation receives -tau.
struct LateralModel {
    Eigen::Matrix2d M, C1, K0, K2;
    double g = 9.81;

    static LateralModel from_params(const BicycleParams& p);

    // (phi_ddot, delta_ddot) for the given state and steer-axis torque.
    Eigen::Vector2d accelerations(const Eigen::Vector2d& q, const Eigen::Vector2d& qd, double v,
                                  double tau) const;

    // First-order system matrix on (phi, delta, phi_dot, delta_dot).
    Eigen::Matrix4d system_matrix(double v) const;
};

std::array<std::complex<double>, 4> lateral_eigenvalues(double v, const BicycleParams& p);
double max_real_eigenvalue(double v, const BicycleParams& p);

struct SimState {
    MinimalCoords q;
    double thetaB = 0.0;
    double thetaB_dot = 0.0;
    double t = 0.0;

    double speed(const BicycleParams& p) const { return p.rF * q.thetaF_dot; }
};

// Solves pitch and pitch rate for q (cold start).
SimState make_state(const MinimalCoords& q, const BicycleParams& p, double t = 0.0);

constexpr double kSubstepDt = 0.005;

// One classical Runge-Kutta step of the coupled lateral dynamics and contact
// kinematics with constant steer torque. thetaF_dot is left untouched.
// Angles Psi, thetaR, thetaF are wrapped into (-pi, pi].
SimState substep(const SimState& s, double tau, double dt, const BicycleParams& p);

// Time derivative of the propagated coordinates, exposed for tests:
// (phi, delta, phi_dot, delta_dot, xP, yP, Psi, thetaR, thetaF).
using DynVector = Eigen::Matrix<double, 9, 1>;
DynVector state_derivative(const DynVector& y, double v, double tau, const BicycleParams& p,
                           double pitch_guess = 0.0);

// Advances n substeps, recomputing the PD torque before each one. Returns the
// torque applied in the last substep.
double advance(SimState& s, const SteeringDrive& drive, int n, const BicycleParams& p,
               double dt = kSubstepDt);

struct StepResponse {
    double overshoot = 0.0;  // (max delta - target) / target
    double peak = 0.0;
    double peak_time = 0.0;
    double final_value = 0.0;
};

// Stationary bicycle with gravity removed, set value stepping from 0 to
// target at t = 0. Uses the full lateral model at v = 0, so roll is free.
StepResponse step_response(const BicycleParams& p, const SteeringDrive& drive,
                           double target = 70.0 * 3.14159265358979323846 / 180.0,
                           double duration = 3.0, double dt = kSubstepDt);

double step_response_overshoot(const BicycleParams& p, const SteeringDrive& drive);

} // namespace bikesim
