#include "bikesim/curriculum.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace bikesim {

using json = nlohmann::json;

const std::array<CurriculumRow, 4>& curriculum_table()
{
    static const std::array<CurriculumRow, 4> rows = {{
        {{4.0, 4.0}, {14.0, 14.0}, {20.0, 22.0}, {2.0, 2.0}},
        {{2.0, 7.0}, {12.0, 14.0}, {18.0, 22.0}, {2.0, 4.0}},
        {{2.0, 7.0}, {10.0, 14.0}, {16.0, 22.0}, {2.0, 6.0}},
        {{2.0, 7.0}, {8.0, 14.0}, {14.0, 22.0}, {2.0, 8.0}},
    }};
    return rows;
}

namespace {

Interval lerp(const Interval& a, const Interval& b, double t)
{
    if (t <= 0.0) return a;
    if (t >= 1.0) return b;
    return {a.lo + t * (b.lo - a.lo), a.hi + t * (b.hi - a.hi)};
}

} // namespace

ResetIntervals active_intervals(const CurriculumState& cur, const ResetIntervals& base)
{
    const auto& rows = curriculum_table();
    const int idx = std::clamp(cur.part, 1, 4) - 1;
    CurriculumRow row = rows[idx];
    if (cur.expanding && idx > 0) {
        const auto& from = rows[idx - 1];
        const double t = cur.expansion_progress;
        row = {lerp(from.v, row.v, t), lerp(from.R, row.R, t), lerp(from.LP, row.LP, t),
               lerp(from.WP, row.WP, t)};
    }
    ResetIntervals iv = base;
    iv.v = row.v;
    iv.path.R = row.R;
    iv.path.LP = row.LP;
    iv.path.WP = row.WP;
    return iv;
}

double ride_error(const std::vector<double>& t0, bool breached, double eta_y)
{
    if (breached) return 1.0;
    if (t0.empty()) return 0.0;
    const std::size_t skip = t0.size() / 5;
    double mean = 0.0;
    std::size_t k = 0;
    for (std::size_t i = skip; i < t0.size(); ++i) {
        ++k;
        mean += (t0[i] - mean) / static_cast<double>(k);
    }
    return mean / eta_y;
}

void finalize_report(ValidationReport& r, double eta_e)
{
    double sum = 0.0;
    bool ok = !r.e.empty();
    for (double e : r.e) {
        sum += e;
        ok = ok && e <= eta_e;
    }
    r.mean = r.e.empty() ? 0.0 : sum / static_cast<double>(r.e.size());
    r.fully_successful = ok;
}

ValidationReport run_validation(const PolicyFn& policy, const BicycleParams& params,
                                const EnvSettings& settings, const ResetIntervals& iv, Rng& rng,
                                const CurriculumConfig& cfg, long step)
{
    ValidationReport r;
    r.step = step;
    Environment env(params, settings);
    std::vector<double> t0;
    for (int ride = 0; ride < cfg.validation_rides; ++ride) {
        const std::uint64_t seed = rng.next_u64();
        r.seeds.push_back(seed);
        Rng ride_rng(seed);
        std::vector<double> s = env.reset(ride_rng, iv);
        t0.clear();
        bool breached = false;
        for (int k = 0; k < cfg.ride_steps; ++k) {
            const StepOutcome o = env.step(policy(s));
            if (o.terminated) {
                breached = true;
                break;
            }
            t0.push_back(o.info.t0);
            s = o.state;
        }
        r.e.push_back(ride_error(t0, breached, settings.eta_y));
    }
    finalize_report(r, cfg.eta_e);
    return r;
}

CurriculumController::CurriculumController(CurriculumConfig cfg) : cfg_(std::move(cfg)) {}

Directives CurriculumController::on_step(bool breached)
{
    Directives d;
    if (stopped_) {
        d.stop = true;
        return d;
    }
    ++tr_.steps_total;
    ++tr_.steps_in_episode;

    if (cur_.expanding) {
        ++cur_.expansion_steps;
        cur_.expansion_progress =
            std::min(1.0, static_cast<double>(cur_.expansion_steps) / cfg_.steps_dec);
        if (cur_.expansion_steps >= cfg_.steps_dec) {
            cur_.expanding = false;
            cur_.expansion_progress = 0.0;
        }
    }
    if (cfg_.checkpoint_every > 0 && tr_.steps_total % cfg_.checkpoint_every == 0) {
        d.checkpoint = true;
    }

    if (breached) {
        d.reset_env = true;
        tr_.consecutive_full = 0;
        if (tr_.steps_in_episode >= cfg_.steps_min) {
            d.episode_end = true;
        }
    } else if (tr_.steps_in_episode >= cfg_.steps_max) {
        d.episode_end = true;
        if (++tr_.consecutive_full >= 2) {
            d.reset_env = true;
            d.truncated = true;
            tr_.consecutive_full = 0;
        }
        if (!cur_.expanding && tr_.steps_total - tr_.last_validation >= cfg_.validation_spacing) {
            d.run_validation = true;
            tr_.last_validation = tr_.steps_total;
            pending_ = true;
        }
    }
    if (d.episode_end) {
        ++tr_.episodes;
        tr_.steps_in_episode = 0;
    }
    if (tr_.steps_total >= cfg_.steps_tot) {
        d.stop = true;
        stopped_ = true;
    }
    return d;
}

Directives CurriculumController::on_validation(const ValidationReport& r)
{
    Directives d;
    pending_ = false;
    if (stopped_) {
        d.stop = true;
        return d;
    }
    if (r.fully_successful) {
        if (cur_.part >= 4) {
            cur_.finished = true;
            d.stop = true;
            stopped_ = true;
        } else {
            ++cur_.part;
            cur_.expanding = true;
            cur_.expansion_progress = 0.0;
            cur_.expansion_steps = 0;
            d.advance_curriculum = true;
        }
    }
    return d;
}

void RunLog::header(std::uint64_t seed, const EnvSettings& s, const CurriculumConfig& cfg)
{
    json j;
    j["event"] = "header";
    j["seed"] = seed;
    j["settings"] = {{"name", s.name},
                     {"state_form", to_string(s.state_form)},
                     {"preview_mode", to_string(s.preview_mode)},
                     {"t0_source", to_string(s.t0_source)},
                     {"reward_shape", to_string(s.reward_shape)},
                     {"chi1", s.chi1},
                     {"chi2", s.chi2}};
    j["curriculum"] = {{"steps_dec", cfg.steps_dec},       {"steps_max", cfg.steps_max},
                       {"steps_min", cfg.steps_min},       {"steps_tot", cfg.steps_tot},
                       {"validation_spacing", cfg.validation_spacing},
                       {"checkpoint_every", cfg.checkpoint_every}};
    out_ << j.dump() << '\n';
    out_.flush();
}

void RunLog::event(long step, long episode, const std::string& kind, const std::string& payload_json)
{
    json j;
    j["step"] = step;
    j["episode"] = episode;
    j["event"] = kind;
    j["payload"] = payload_json.empty() ? json::object() : json::parse(payload_json);
    out_ << j.dump() << '\n';
    out_.flush();
}

std::string report_to_json(const ValidationReport& r)
{
    json j;
    j["step"] = r.step;
    j["part"] = r.part;
    j["e"] = r.e;
    j["seeds"] = r.seeds;
    j["mean"] = r.mean;
    j["fully_successful"] = r.fully_successful;
    return j.dump();
}

std::string directives_to_json(const Directives& d)
{
    json j = {{"reset_env", d.reset_env},
              {"truncated", d.truncated},
              {"episode_end", d.episode_end},
              {"run_validation", d.run_validation},
              {"advance_curriculum", d.advance_curriculum},
              {"checkpoint", d.checkpoint},
              {"stop", d.stop}};
    return j.dump();
}

int select_deployed_checkpoint(const std::vector<Checkpoint>& log)
{
    int best = -1;
    for (int i = 0; i < static_cast<int>(log.size()); ++i) {
        const auto& c = log[i];
        if (c.validation_passed && c.curriculum_finished &&
            (best < 0 || c.step >= log[best].step)) {
            best = i;
        }
    }
    return best;
}

} // namespace bikesim
