#include <cmath>
#include <numbers>

#include <doctest.h>

#include "bikesim/dynamics.hpp"

using namespace bikesim;

namespace {

SimState rolling(double v, double phi0, const BicycleParams& p)
{
    MinimalCoords q;
    q.phi = phi0;
    q.thetaF_dot = v / p.rF;
    return make_state(q, p);
}

double crossing(double lo, double hi, const BicycleParams& p)
{
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((max_real_eigenvalue(mid, p) < 0) == (max_real_eigenvalue(lo, p) < 0)) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("steering torque")
{
    SteeringDrive d;
    CHECK(steering_torque(0.3, 0.0, SteeringDrive{9, 1.6, 0.3, 0}) == 0.0);
    d.delta_set = 0.1;
    CHECK(steering_torque(0.0, 0.0, d) == doctest::Approx(-0.9).epsilon(1e-15));
    d.delta_set = 0.0;
    CHECK(steering_torque(0.0, 0.5, d) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("eigenvalues")
{
    const auto p = BicycleParams::benchmark();
    CHECK(max_real_eigenvalue(5, p) < 0);
    CHECK(max_real_eigenvalue(2, p) > 0);
    CHECK(max_real_eigenvalue(7, p) > 0);
    CHECK(max_real_eigenvalue(7, p) < max_real_eigenvalue(2, p));
    CHECK(std::abs(max_real_eigenvalue(2, p) - 2.6823451751274563) < 1e-9);
    CHECK(std::abs(max_real_eigenvalue(5, p) - (-0.322866429004109)) < 1e-9);
    CHECK(std::abs(max_real_eigenvalue(7, p) - 0.10268170574765596) < 1e-9);

    const double lo = crossing(3.5, 5.0, p);
    const double hi = crossing(5.0, 6.5, p);
    CHECK(lo > 4.2);
    CHECK(lo < 4.4);
    CHECK(hi > 5.9);
    CHECK(hi < 6.1);
}

TEST_CASE("zero input equilibrium and forward speed conservation")
{
    const auto p = BicycleParams::benchmark();
    SimState s = rolling(5.0, 0.0, p);
    s.q.Psi = 0.4;
    const double x0 = s.q.xP;
    const SimState n = substep(s, 0.0, kSubstepDt, p);
    CHECK(n.q.phi == 0.0);
    CHECK(n.q.delta == 0.0);
    CHECK(std::abs(n.q.xP - x0 - 5 * kSubstepDt * std::cos(0.4)) < 1e-12);
    CHECK(n.q.thetaF_dot == s.q.thetaF_dot);
}

TEST_CASE("state derivative against the lateral model")
{
    const auto p = BicycleParams::benchmark();
    const auto m = LateralModel::from_params(p);
    DynVector y = DynVector::Zero();
    y << 0.05, -0.1, 0.2, 0.3, 0, 0, 0, 0, 0;
    const DynVector d = state_derivative(y, 4.0, 0.7, p);
    const Eigen::Vector2d acc = m.accelerations({0.05, -0.1}, {0.2, 0.3}, 4.0, 0.7);
    CHECK(d(0) == 0.2);
    CHECK(d(1) == 0.3);
    CHECK(std::abs(d(2) - acc(0)) < 1e-12);
    CHECK(std::abs(d(3) - acc(1)) < 1e-12);
}

TEST_CASE("self-stable speed: perturbation decays")
{
    const auto p = BicycleParams::benchmark();
    SimState s = rolling(5.0, 0.01, p);
    SteeringDrive off{0, 0, 0, 0};
    advance(s, off, 1000, p);
    // Decay rate of the weave mode limits this to a few milliradians at 5 s.
    CHECK(std::abs(s.q.phi) < 0.01);
    CHECK(std::abs(s.q.phi - 0.00306206569) < 1e-9);
    advance(s, off, 2000, p);
    CHECK(std::abs(s.q.phi) < 1e-3);
}

TEST_CASE("unstable speed: perturbation grows")
{
    const auto p = BicycleParams::benchmark();
    SimState s = rolling(2.0, 0.01, p);
    SteeringDrive off{0, 0, 0, 0};
    double peak = 0.01;
    int n = 0;
    while (std::abs(s.q.phi) < 0.8 && n < 2000) {
        advance(s, off, 1, p);
        peak = std::max(peak, std::abs(s.q.phi));
        ++n;
    }
    CHECK(peak >= 0.8);
}

TEST_CASE("steer step response")
{
    const auto p = BicycleParams::benchmark();
    const double o = step_response_overshoot(p, SteeringDrive{});
    CHECK(std::abs(o - 0.12534524405950362) < 1e-9);
    CHECK(step_response_overshoot(p, SteeringDrive{9, 3.2, 0, 0}) < o);
    const auto r = step_response(p, SteeringDrive{0, 1.6, 0, 0});
    CHECK(r.peak < 70.0 * std::numbers::pi / 180.0);
}
