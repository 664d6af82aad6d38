#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "bikesim/evaluation.hpp"

using namespace bikesim;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Path straight(double L = 400) { return Path({0, 0, 0}, {PathElement::line(L)}); }

Policy tuned() { return load_policy(BIKESIM_SOURCE_DIR "/config/baseline_gains.json"); }

} // namespace

TEST_CASE("zero action on a straight path tracks perfectly")
{
    const auto p = BicycleParams::benchmark();
    const Policy zero(BaselineGains{});
    const auto r = evaluate_ride(zero, p, EnvSettings::named("prop"), straight(), 5.0);
    CHECK(r.t_bar < 1e-9);
    CHECK(r.t_hat < 1e-9);
    CHECK_FALSE(r.failed);
    CHECK(r.steps == 600);
    CHECK(r.trace.size() == 600);
    CHECK(r.trace.back().t == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("tuned baseline stabilises a perturbed straight ride")
{
    const auto p = BicycleParams::benchmark();
    RideOptions opt;
    opt.phi0 = 2 * kDeg;
    const auto r = evaluate_ride(tuned(), p, EnvSettings::named("prop"), straight(), 5.0, opt);
    CHECK_FALSE(r.failed);
    CHECK(r.t_bar < 0.2);
    // distance decreasing after the transient
    const auto& tr = r.trace;
    CHECK(tr[599].t0 < tr[100].t0 + 1e-9);
    CHECK(std::abs(tr[599].phi) < 1e-3);
}

TEST_CASE("uncontrolled slow ride fails")
{
    const auto p = BicycleParams::benchmark();
    RideOptions opt;
    opt.phi0 = 2 * kDeg;
    const auto r = evaluate_ride(Policy(BaselineGains{}), p, EnvSettings::named("prop"),
                                 straight(), 2.0, opt);
    CHECK(r.failed);
    CHECK(r.cause == Cause::Roll);
    CHECK(r.steps < 600);
}

TEST_CASE("closed path ride stops at the start")
{
    const auto p = BicycleParams::benchmark();
    const Path circle({0, 0, 0}, {PathElement::arc(std::numbers::pi, 12, 1),
                                  PathElement::arc(std::numbers::pi, 12, 1)});
    RideOptions opt;
    opt.until_closure = true;
    const auto r = evaluate_ride(tuned(), p, EnvSettings::named("prop"), circle, 5.0, opt);
    CHECK_FALSE(r.failed);
    CHECK(r.closed_loop);
    CHECK(r.steps * 0.05 * 5.0 > circle.length() - 2);
    CHECK(r.steps * 0.05 * 5.0 < circle.length() + 2);
}

TEST_CASE("velocity grid")
{
    const auto g = velocity_grid();
    CHECK(g.size() == 21);
    CHECK(g.front() == 2.0);
    CHECK(g.back() == 7.0);
    CHECK(g[4] == 3.0);
}

TEST_CASE("performance sweep")
{
    const auto p = BicycleParams::benchmark();
    const std::vector<Policy> pols = {tuned(), Policy(BaselineGains{-3.0, -0.8, {0, 0, 0, -0.3, 0}})};
    RideOptions opt;
    opt.duration = 5;
    opt.phi0 = 2 * kDeg;
    const std::vector<Path> paths = {straight(100)};
    const auto one = performance_sweep({pols[0]}, p, EnvSettings::named("prop"), paths, {4.5, 5.5}, opt, 1);
    const auto two = performance_sweep(pols, p, EnvSettings::named("prop"), paths, {4.5, 5.5}, opt, 3);
    REQUIRE(one.rows.size() == 2);
    for (int i = 0; i < 2; ++i) {
        const auto& r1 = one.rows[i];
        const auto& r2 = two.rows[i];
        CHECK(r1.T == r1.agents[0].t_bar);
        CHECK(r2.agents[0].t_bar == r1.agents[0].t_bar);
        CHECK(r2.T == (r2.agents[0].t_bar + r2.agents[1].t_bar) / 2);
        const auto solo = evaluate_ride(pols[1], p, EnvSettings::named("prop"), paths[0], r2.v, opt);
        CHECK(r2.agents[1].t_bar == solo.t_bar);
    }
    std::ostringstream out;
    write_sweep_csv(out, two);
    CHECK(out.str().find('\n') != std::string::npos);
}

TEST_CASE("simple moving average")
{
    CHECK(sma({2, 2, 2, 2}, 3) == std::vector<double>{2, 2, 2, 2});
    std::vector<double> impulse(60, 0.0);
    impulse[25] = 1.0;
    const auto s = sma(impulse, 20);
    for (int i = 25; i < 45; ++i) CHECK(s[i] == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(std::abs(s[45]) < 1e-15);
    Rng rng(6);
    std::vector<double> x(100);
    for (auto& v : x) v = rng.uniform(-1, 1);
    const auto m = sma(x, 7);
    for (int i = 0; i < 100; ++i) {
        double sum = 0;
        int n = 0;
        for (int j = std::max(0, i - 6); j <= i; ++j, ++n) sum += x[j];
        CHECK(std::abs(m[i] - sum / n) < 1e-12);
    }
}

TEST_CASE("full circle detection")
{
    const Path five({0, 0, 0}, {PathElement::line(5), PathElement::arc(1, 10, 1),
                                PathElement::arc(1, 10, 1), PathElement::arc(1, 10, 1),
                                PathElement::arc(1, 10, 1), PathElement::arc(1, 10, 1)});
    CHECK(has_full_circle(five));
    const Path mixed({0, 0, 0}, {PathElement::line(5), PathElement::arc(1, 10, 1),
                                 PathElement::arc(1, 10, 1), PathElement::arc(1, 10, -1),
                                 PathElement::arc(1, 10, 1), PathElement::arc(1, 10, 1)});
    CHECK_FALSE(has_full_circle(mixed));

    CurriculumState part4;
    part4.part = 4;
    Rng rng(2024);
    const double pr = full_circle_probability(rng, active_intervals(part4).path, 10000);
    CHECK(pr == doctest::Approx(0.0024).epsilon(1e-12));

    Rng r2(1);
    // nearly all arcs after the forced first element, always to the left
    CHECK(full_circle_probability(r2, PathIntervals{}, 200, 300, 5, ElementMix{0.99, 0, 0.01, 1.0}) >
          0.95);
    Rng r3(1);
    CHECK(full_circle_probability(r3, PathIntervals{}, 200, 6, 5) == 0.0);
}
