#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "bikesim/curriculum.hpp"

using namespace bikesim;

namespace {

void check_interval(const Interval& a, double lo, double hi)
{
    CHECK(a.lo == lo);
    CHECK(a.hi == hi);
}

// Runs n learning steps without breach and collects the directives.
std::vector<Directives> run(CurriculumController& c, long n, bool breached = false)
{
    std::vector<Directives> out;
    for (long i = 0; i < n; ++i) out.push_back(c.on_step(breached));
    return out;
}

ValidationReport report(bool ok)
{
    ValidationReport r;
    r.e.assign(10, ok ? 0.01 : 0.5);
    finalize_report(r, 0.2 / 3.5);
    return r;
}

} // namespace

TEST_CASE("curriculum table")
{
    const double rows[4][8] = {{4, 4, 14, 14, 20, 22, 2, 2},
                               {2, 7, 12, 14, 18, 22, 2, 4},
                               {2, 7, 10, 14, 16, 22, 2, 6},
                               {2, 7, 8, 14, 14, 22, 2, 8}};
    for (int part = 1; part <= 4; ++part) {
        CurriculumState s;
        s.part = part;
        const ResetIntervals iv = active_intervals(s);
        const auto* r = rows[part - 1];
        check_interval(iv.v, r[0], r[1]);
        check_interval(iv.path.R, r[2], r[3]);
        check_interval(iv.path.LP, r[4], r[5]);
        check_interval(iv.path.WP, r[6], r[7]);
        check_interval(iv.path.L, 5, 15);
        check_interval(iv.xP, -10, 10);
    }
    CurriculumState s;
    s.part = 2;
    s.expanding = true;
    s.expansion_progress = 0.5;
    const ResetIntervals iv = active_intervals(s);
    check_interval(iv.v, 3, 5.5);
    check_interval(iv.path.R, 13, 14);
}

TEST_CASE("ride error")
{
    CHECK(ride_error({0.1, 0.1}, true, 3.5) == 1.0);
    const std::vector<double> flat(600, 0.2);
    CHECK(ride_error(flat, false, 3.5) == 0.2 / 3.5);
    std::vector<double> head(600, 0.0);
    for (int i = 0; i < 120; ++i) head[i] = 3.0;
    CHECK(ride_error(head, false, 3.5) == 0.0);
    ValidationReport r;
    r.e = std::vector<double>(10, 0.2 / 3.5);
    finalize_report(r, 0.2 / 3.5);
    CHECK(r.fully_successful);
    r.e[3] = std::nextafter(0.2 / 3.5, 1.0);
    finalize_report(r, 0.2 / 3.5);
    CHECK_FALSE(r.fully_successful);
    r.e = {0.1, 0.2, 0.3, 1.0};
    finalize_report(r, 0.2 / 3.5);
    CHECK(r.mean == (0.1 + 0.2 + 0.3 + 1.0) / 4);
}

TEST_CASE("validation after a full episode with spacing")
{
    CurriculumController c;
    auto d = run(c, 1199);
    for (const auto& x : d) CHECK_FALSE(x.episode_end);
    Directives last = c.on_step(false);
    CHECK(last.episode_end);
    CHECK_FALSE(last.run_validation); // 1200 steps since start
    CHECK_FALSE(last.reset_env);
    d = run(c, 1200);
    CHECK(d.back().episode_end);
    CHECK(d.back().reset_env); // second consecutive full episode
    CHECK(d.back().truncated);
    CHECK_FALSE(d.back().run_validation);
    d = run(c, 1200);
    CHECK_FALSE(d.back().run_validation); // 3600
    d = run(c, 1200);
    CHECK(d.back().run_validation); // 4800
    CHECK(c.validation_pending());
    CHECK(c.tracker().last_validation == 4800);
    d = run(c, 1200);
    CHECK_FALSE(d.back().run_validation); // only 1200 since
}

TEST_CASE("breach before the minimum continues the episode")
{
    CurriculumController c;
    run(c, 500);
    Directives d = c.on_step(true);
    CHECK(d.reset_env);
    CHECK_FALSE(d.episode_end);
    CHECK(c.tracker().steps_in_episode == 501);
    run(c, 298);
    d = c.on_step(true);
    CHECK(d.reset_env);
    CHECK(d.episode_end);
    CHECK(c.tracker().episodes == 1);
}

TEST_CASE("advancement only on fully successful validation")
{
    CurriculumController c;
    run(c, 4800);
    CHECK(c.on_validation(report(false)).advance_curriculum == false);
    CHECK(c.state().part == 1);
    run(c, 4800);
    const Directives d = c.on_validation(report(true));
    CHECK(d.advance_curriculum);
    CHECK(c.state().part == 2);
    CHECK(c.state().expanding);

    // No validation while expanding, even after full episodes.
    bool any = false;
    for (long i = 0; i < 9999; ++i) any = any || c.on_step(false).run_validation;
    CHECK_FALSE(any);
    CHECK(c.state().expanding);
    CHECK(c.state().expansion_progress == doctest::Approx(0.9999));
    c.on_step(false);
    CHECK_FALSE(c.state().expanding);
    CHECK(c.state().expansion_progress == 0.0);
}

TEST_CASE("curriculum finishes in part four")
{
    CurriculumController c;
    for (int part = 1; part <= 3; ++part) {
        bool asked = false;
        for (int i = 0; i < 20000 && !asked; ++i) asked = c.on_step(false).run_validation;
        REQUIRE(asked);
        CHECK(c.on_validation(report(true)).advance_curriculum);
    }
    CHECK(c.state().part == 4);
    bool asked = false;
    for (int i = 0; i < 20000 && !asked; ++i) asked = c.on_step(false).run_validation;
    REQUIRE(asked);
    const Directives d = c.on_validation(report(true));
    CHECK(d.stop);
    CHECK_FALSE(d.advance_curriculum);
    CHECK(c.state().finished);
    CHECK(c.on_step(false).stop);
}

TEST_CASE("step budget and checkpoints")
{
    CurriculumConfig cfg;
    cfg.steps_tot = 9000;
    CurriculumController c(cfg);
    const auto d = run(c, 9000);
    int checkpoints = 0;
    for (const auto& x : d) checkpoints += x.checkpoint;
    CHECK(checkpoints == 2);
    CHECK(d.back().stop);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK_FALSE(d[i].stop);
}

TEST_CASE("directive stream is a pure function of the inputs")
{
    auto trace = [] {
        CurriculumController c;
        Rng rng(77);
        std::string out;
        for (int i = 0; i < 30000; ++i) {
            const Directives d = c.on_step(rng.uniform() < 0.001);
            out += directives_to_json(d);
            if (d.run_validation) out += directives_to_json(c.on_validation(report(rng.coin())));
        }
        return out;
    };
    CHECK(trace() == trace());
}

TEST_CASE("deployed checkpoint selection")
{
    CHECK(select_deployed_checkpoint({}) == -1);
    const std::vector<Checkpoint> log = {
        {4000, true, false}, {8000, true, true}, {12000, false, true}, {16000, true, true},
        {20000, false, true}};
    CHECK(select_deployed_checkpoint(log) == 3);
}

TEST_CASE("run log")
{
    std::ostringstream out;
    RunLog log(out);
    log.header(3, EnvSettings::named("alt4"), CurriculumConfig{});
    log.event(10, 1, "validation", report_to_json(report(true)));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    const auto h = nlohmann::json::parse(line);
    CHECK(h["seed"] == 3);
    CHECK(h["settings"]["reward_shape"] == "gaussian");
    std::getline(in, line);
    const auto e = nlohmann::json::parse(line);
    CHECK(e["payload"]["fully_successful"] == true);
    CHECK(e["payload"]["e"].size() == 10);
}
