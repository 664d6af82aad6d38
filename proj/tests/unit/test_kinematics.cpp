#include <cmath>
#include <numbers>

#include <doctest.h>

#include "bikesim/dynamics.hpp"
#include "bikesim/errors.hpp"
#include "bikesim/kinematics.hpp"
#include "bikesim/rng.hpp"

using namespace bikesim;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_diff(double a, double b)
{
    return std::remainder(a - b, 2.0 * std::numbers::pi);
}

double bisect_pitch(double phi, double delta, const BicycleParams& p)
{
    double lo = -0.5, hi = 0.5;
    double flo = pitch_residual(phi, delta, lo, p);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = pitch_residual(phi, delta, mid, p);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

MinimalCoords random_state(Rng& rng)
{
    MinimalCoords q;
    q.xP = rng.uniform(-50, 50);
    q.yP = rng.uniform(-50, 50);
    q.Psi = rng.uniform(-3.1, 3.1);
    q.phi = rng.uniform(-45 * kDeg, 45 * kDeg);
    q.delta = rng.uniform(-70 * kDeg, 70 * kDeg);
    q.thetaR = rng.uniform(-3.1, 3.1);
    q.thetaF = rng.uniform(-3.1, 3.1);
    q.phi_dot = rng.uniform(-2, 2);
    q.delta_dot = rng.uniform(-2, 2);
    q.thetaF_dot = rng.uniform(2, 7) / 0.35;
    return q;
}

} // namespace

TEST_CASE("pitch in the reference configuration is zero")
{
    const auto p = BicycleParams::benchmark();
    CHECK(std::abs(solve_pitch(0.0, 0.0, p)) < 1e-15);
}

TEST_CASE("pitch matches a bisection oracle")
{
    const auto p = BicycleParams::benchmark();
    const double tb = solve_pitch(0.3, 0.5, p);
    CHECK(std::abs(tb - bisect_pitch(0.3, 0.5, p)) < 1e-8);
    CHECK(std::abs(tb - (-0.010294845905179432)) < 1e-12);
}

TEST_CASE("pitch residual small near the roll threshold")
{
    const auto p = BicycleParams::benchmark();
    const double tb = solve_pitch(0.78, -1.2, p);
    CHECK(std::abs(pitch_residual(0.78, -1.2, tb, p)) < 1e-9);
}

TEST_CASE("pitch rejects roll at or beyond 90 deg")
{
    const auto p = BicycleParams::benchmark();
    CHECK_THROWS_AS(solve_pitch(std::numbers::pi / 2, 0.0, p), InvalidInput);
}

TEST_CASE("pitch rate")
{
    const auto p = BicycleParams::benchmark();
    MinimalCoords q;
    q.phi = 0.1;
    q.delta = 0.2;
    const double tb = solve_pitch(q, p);
    CHECK(pitch_rate(q, tb, p) == 0.0);

    q.phi_dot = 0.3;
    q.delta_dot = -0.1;
    const double rate = pitch_rate(q, tb, p);
    const double eps = 1e-6;
    const double fd = (solve_pitch(q.phi + eps * q.phi_dot, q.delta + eps * q.delta_dot, p) -
                       solve_pitch(q.phi - eps * q.phi_dot, q.delta - eps * q.delta_dot, p)) /
                      (2 * eps);
    CHECK(std::abs(rate - fd) < 1e-6);
    CHECK(std::abs(rate - (-0.0044891467491052694)) < 1e-12);

    q.phi_dot = -0.3;
    q.delta_dot = 0.1;
    CHECK(pitch_rate(q, tb, p) == doctest::Approx(-rate).epsilon(1e-14));
}

TEST_CASE("wheelbase")
{
    const auto p = BicycleParams::benchmark();
    CHECK(std::abs(wheelbase(0.0, 0.0, 0.0, p) - 1.02) < 1e-12);
    const double tb = solve_pitch(0.0, 70 * kDeg, p);
    CHECK(std::abs(wheelbase(0.0, 70 * kDeg, tb, p) - 1.0929130908415463) < 1e-12);

    MinimalCoords a;
    a.phi = 0.2;
    a.delta = -0.4;
    MinimalCoords b = a;
    b.xP = 3;
    b.yP = -7;
    b.Psi = 2;
    b.thetaR = 1;
    b.thetaF = -1;
    CHECK(wheelbase(a, p) == wheelbase(b, p));
}

TEST_CASE("front contact heading reproduces the reference table")
{
    const auto p = BicycleParams::benchmark();
    const double table[9][3] = {
        {0, 0, 0},        {0, 60, 58.8},      {0, 70, 69.11},
        {-45, 0, 0},      {-45, 60, 81.66},   {-45, 70, 92.16},
        {45, 0, 0},       {45, -60, -81.66},  {45, -70, -92.16},
    };
    for (const auto& row : table) {
        const double mu = front_contact_heading(row[0] * kDeg, row[1] * kDeg,
                                                solve_pitch(row[0] * kDeg, row[1] * kDeg, p), p);
        CHECK(std::abs(mu / kDeg - row[2]) < 0.01);
    }
}

TEST_CASE("front contact heading is continuous through zero steer")
{
    const auto p = BicycleParams::benchmark();
    const double a = front_contact_heading(0.2, -1e-7, solve_pitch(0.2, -1e-7, p), p);
    const double b = front_contact_heading(0.2, 1e-7, solve_pitch(0.2, 1e-7, p), p);
    CHECK(std::abs(a - b) < 1e-5);
}

TEST_CASE("wheel speed from forward speed")
{
    const auto p = BicycleParams::benchmark();
    CHECK(wheel_speed_from_forward(0.0, p) == 0.0);
    CHECK(wheel_speed_from_forward(p.rF, p) == 1.0);
    CHECK(wheel_speed_from_forward(7.0, p) == doctest::Approx(20.0).epsilon(1e-15));
}

TEST_CASE("alternative coordinates")
{
    MinimalCoords q;
    q.Psi = std::numbers::pi / 2;
    const auto a = to_alt(q);
    CHECK(std::abs(a.xPsi) < 1e-16);
    CHECK(a.yPsi == 1.0);
    CHECK(std::abs(from_alt(a).Psi - q.Psi) < 1e-15);
}

TEST_CASE("reference configuration at rest")
{
    const auto p = BicycleParams::benchmark();
    MinimalCoords q;
    q.xP = 2;
    q.yP = -3;
    const auto r = minimal_to_redundant(q, p);
    for (const auto& t : r.twist) {
        CHECK(t.linear.norm() == 0.0);
        CHECK(t.angular.norm() == 0.0);
    }
    const auto c = check_contacts(r, p);
    CHECK((c.rear_contact - Eigen::Vector3d(2, -3, 0)).norm() < 1e-12);
}

TEST_CASE("straight upright ride")
{
    const auto p = BicycleParams::benchmark();
    MinimalCoords q;
    q.Psi = 0.7;
    q.thetaF_dot = 5.0 / p.rF;
    const auto r = minimal_to_redundant(q, p);
    const Eigen::Vector3d vB = r.twist_of(Body::RearFrame).linear;
    CHECK((vB - Eigen::Vector3d(5 * std::cos(0.7), 5 * std::sin(0.7), 0)).norm() < 1e-12);
    const auto k = contact_kinematics(0, 0, 0, 0, 5.0, p);
    CHECK(std::abs(k.yaw_rate) < 1e-15);
}

TEST_CASE("round trip and contact constraints on random states")
{
    const auto p = BicycleParams::benchmark();
    Rng rng(11);
    double worst = 0, worst_slip = 0, worst_res = 0;
    for (int i = 0; i < 1000; ++i) {
        const MinimalCoords q = random_state(rng);
        const auto r = minimal_to_redundant(q, p);
        const auto back = redundant_to_minimal(r, p);
        const auto a = q.to_array(), b = back.to_array();
        for (int k = 0; k < 10; ++k) {
            const bool angle = k == 2 || k == 5 || k == 6;
            worst = std::max(worst, std::abs(angle ? wrap_diff(a[k], b[k]) : a[k] - b[k]));
        }
        const auto c = check_contacts(r, p);
        worst_slip = std::max({worst_slip, std::abs(c.rear_slip), std::abs(c.front_slip)});
        worst_res = std::max(worst_res, std::abs(pitch_residual(q.phi, q.delta, r.thetaB, p)));
        worst_res = std::max({worst_res, std::abs(c.rear_contact.z()), std::abs(c.front_contact.z())});
    }
    CHECK(worst < 1e-9);
    CHECK(worst_slip < 1e-8);
    CHECK(worst_res < 1e-9);
}

TEST_CASE("yaw recovered modulo 2 pi")
{
    const auto p = BicycleParams::benchmark();
    for (double psi : {std::numbers::pi, -std::numbers::pi}) {
        MinimalCoords q;
        q.Psi = psi;
        const auto back = redundant_to_minimal(minimal_to_redundant(q, p), p);
        CHECK(std::abs(wrap_diff(back.Psi, psi)) < 1e-12);
    }
}

TEST_CASE("body velocities match finite differences along a trajectory")
{
    const auto p = BicycleParams::benchmark();
    Rng rng(5);
    for (int n = 0; n < 20; ++n) {
        MinimalCoords q = random_state(rng);
        q.phi *= 0.5;
        q.delta *= 0.5;
        SimState s = make_state(q, p);
        const double h = 1e-4;
        SimState sm = substep(s, 0.3, -h, p);
        SimState sp = substep(s, 0.3, h, p);
        const auto rm = minimal_to_redundant(sm.q, p, s.thetaB);
        const auto r0 = minimal_to_redundant(s.q, p, s.thetaB);
        const auto rp = minimal_to_redundant(sp.q, p, s.thetaB);
        for (int b = 0; b < 4; ++b) {
            const Eigen::Vector3d fd =
                (rp.pose[b].translation() - rm.pose[b].translation()) / (2 * h);
            CHECK((fd - r0.twist[b].linear).norm() < 1e-5);
        }
        CHECK(std::abs((sp.thetaB - sm.thetaB) / (2 * h) - r0.thetaB_dot) < 1e-5);
    }
}
