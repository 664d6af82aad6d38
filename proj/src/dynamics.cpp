#include "bikesim/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "bikesim/rotation.hpp"

namespace bikesim {

using Eigen::Matrix2d;
using Eigen::Matrix4d;
using Eigen::Vector2d;

double steering_torque(double delta, double delta_dot, const SteeringDrive& drive)
{
    return drive.P_gain * (delta - drive.delta_set) + drive.D_gain * (delta_dot - drive.delta_dot_set);
}

LateralModel LateralModel::from_params(const BicycleParams& p)
{
    // Published blocks use y right / z down, so steer flips sign.
    const Matrix2d S = Eigen::Vector2d(1.0, -1.0).asDiagonal();
    LateralModel m;
    m.M = S * p.lateral.M * S;
    m.C1 = S * p.lateral.C1 * S;
    m.K0 = S * p.lateral.K0 * S;
    m.K2 = S * p.lateral.K2 * S;
    m.g = p.gravity_g;
    return m;
}

Vector2d LateralModel::accelerations(const Vector2d& q, const Vector2d& qd, double v,
                                     double tau) const
{
    const Vector2d rhs = Vector2d(0.0, -tau) - v * C1 * qd - (g * K0 + v * v * K2) * q;
    return M.inverse() * rhs;
}

Matrix4d LateralModel::system_matrix(double v) const
{
    const Matrix2d Minv = M.inverse();
    Matrix4d A = Matrix4d::Zero();
    A.topRightCorner<2, 2>().setIdentity();
    A.bottomLeftCorner<2, 2>() = -Minv * (g * K0 + v * v * K2);
    A.bottomRightCorner<2, 2>() = -Minv * (v * C1);
    return A;
}

std::array<std::complex<double>, 4> lateral_eigenvalues(double v, const BicycleParams& p)
{
    const Matrix4d A = LateralModel::from_params(p).system_matrix(v);
    Eigen::EigenSolver<Matrix4d> es(A, false);
    std::array<std::complex<double>, 4> out;
    for (int i = 0; i < 4; ++i) {
        out[i] = es.eigenvalues()[i];
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

double max_real_eigenvalue(double v, const BicycleParams& p)
{
    return lateral_eigenvalues(v, p)[3].real();
}

SimState make_state(const MinimalCoords& q, const BicycleParams& p, double t)
{
    SimState s;
    s.q = q;
    s.thetaB = solve_pitch(q, p);
    s.thetaB_dot = pitch_rate(q, s.thetaB, p);
    s.t = t;
    return s;
}

DynVector state_derivative(const DynVector& y, double v, double tau, const BicycleParams& p,
                           double pitch_guess)
{
    const LateralModel lat = LateralModel::from_params(p);
    const Vector2d q(y[0], y[1]);
    const Vector2d qd(y[2], y[3]);
    const Vector2d qdd = lat.accelerations(q, qd, v, tau);
    const ContactKinematics k = contact_kinematics(y[0], y[1], y[2], y[3], v, p, pitch_guess);

    DynVector d;
    d[0] = qd[0];
    d[1] = qd[1];
    d[2] = qdd[0];
    d[3] = qdd[1];
    d[4] = k.rear_speed * std::cos(y[6]);
    d[5] = k.rear_speed * std::sin(y[6]);
    d[6] = k.yaw_rate;
    d[7] = k.rear_speed / p.rR;
    d[8] = v / p.rF;
    return d;
}

namespace {

DynVector pack(const SimState& s)
{
    DynVector y;
    y << s.q.phi, s.q.delta, s.q.phi_dot, s.q.delta_dot, s.q.xP, s.q.yP, s.q.Psi, s.q.thetaR,
        s.q.thetaF;
    return y;
}

} // namespace

SimState substep(const SimState& s, double tau, double dt, const BicycleParams& p)
{
    const double v = s.speed(p);
    const double guess = s.thetaB;
    const DynVector y = pack(s);
    const DynVector k1 = state_derivative(y, v, tau, p, guess);
    const DynVector k2 = state_derivative(y + 0.5 * dt * k1, v, tau, p, guess);
    const DynVector k3 = state_derivative(y + 0.5 * dt * k2, v, tau, p, guess);
    const DynVector k4 = state_derivative(y + dt * k3, v, tau, p, guess);
    const DynVector yn = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    SimState n = s;
    n.q.phi = yn[0];
    n.q.delta = yn[1];
    n.q.phi_dot = yn[2];
    n.q.delta_dot = yn[3];
    n.q.xP = yn[4];
    n.q.yP = yn[5];
    n.q.Psi = wrap_angle(yn[6]);
    n.q.thetaR = wrap_angle(yn[7]);
    n.q.thetaF = wrap_angle(yn[8]);
    n.thetaB = solve_pitch(n.q, p, guess);
    n.thetaB_dot = pitch_rate(n.q, n.thetaB, p);
    n.t = s.t + dt;
    return n;
}

double advance(SimState& s, const SteeringDrive& drive, int n, const BicycleParams& p, double dt)
{
    double tau = 0.0;
    for (int i = 0; i < n; ++i) {
        tau = steering_torque(s.q.delta, s.q.delta_dot, drive);
        s = substep(s, tau, dt, p);
    }
    return tau;
}

StepResponse step_response(const BicycleParams& p, const SteeringDrive& drive, double target,
                           double duration, double dt)
{
    LateralModel lat = LateralModel::from_params(p);
    lat.g = 0.0;
    SteeringDrive d = drive;
    d.delta_set = target;
    d.delta_dot_set = 0.0;

    // Plain RK4 on (phi, delta, phi_dot, delta_dot); v = 0 removes every
    // velocity- and speed-dependent term.
    using V4 = Eigen::Vector4d;
    auto f = [&](const V4& x, double tau) {
        const Vector2d a = lat.accelerations(x.head<2>(), x.tail<2>(), 0.0, tau);
        return V4(x[2], x[3], a[0], a[1]);
    };

    StepResponse r;
    V4 x = V4::Zero();
    const int n = static_cast<int>(std::lround(duration / dt));
    r.peak = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double tau = steering_torque(x[1], x[3], d);
        const V4 k1 = f(x, tau);
        const V4 k2 = f(x + 0.5 * dt * k1, tau);
        const V4 k3 = f(x + 0.5 * dt * k2, tau);
        const V4 k4 = f(x + dt * k3, tau);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (x[1] > r.peak) {
            r.peak = x[1];
            r.peak_time = i * dt;
        }
    }
    r.final_value = x[1];
    r.overshoot = (r.peak - target) / target;
    return r;
}

double step_response_overshoot(const BicycleParams& p, const SteeringDrive& drive)
{
    return step_response(p, drive).overshoot;
}

} // namespace bikesim
