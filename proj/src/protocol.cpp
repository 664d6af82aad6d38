#include "bikesim/protocol.hpp"

#include <cmath>

#include "bikesim/errors.hpp"

namespace bikesim {

using json = nlohmann::json;

namespace {

// Raised inside a handler; turned into an error reply.
struct ProtocolFault {
    std::string code;
    std::string message;
};

[[noreturn]] void fault(const std::string& code, const std::string& message)
{
    throw ProtocolFault{code, message};
}

double number(const json& req, const char* key)
{
    const auto it = req.find(key);
    if (it == req.end() || !it->is_number()) {
        fault("bad_argument", std::string("'") + key + "' must be a number");
    }
    return it->get<double>();
}

json vec(const std::vector<double>& v) { return json(v); }

} // namespace

std::string protocol_error(const std::string& code, const std::string& message)
{
    json j;
    j["protocol"] = kProtocolVersion;
    j["error"] = {{"code", code}, {"message", message}};
    return j.dump();
}

ProtocolSession::ProtocolSession(SessionConfig cfg)
    : cfg_(std::move(cfg)), rng_(cfg_.default_seed), val_rng_(rng_.fork())
{
    rebuild();
}

void ProtocolSession::rebuild()
{
    cfg_.settings.validate();
    env_ = std::make_unique<Environment>(cfg_.params, cfg_.settings);
    val_env_ = std::make_unique<Environment>(cfg_.params, cfg_.settings);
    controller_.reset();
    if (cfg_.curriculum) {
        CurriculumConfig cc = cfg_.curriculum_config;
        cc.base = cfg_.intervals;
        controller_ = std::make_unique<CurriculumController>(cc);
    }
    ride_ = -1;
    ride_active_ = false;
}

std::string ProtocolSession::handle(const std::string& line)
{
    if (closed_) {
        return protocol_error("closed", "session is closed");
    }
    json req;
    try {
        req = json::parse(line);
    } catch (const json::exception& e) {
        return protocol_error("parse_error", e.what());
    }
    try {
        if (!req.is_object()) fault("bad_request", "request must be a JSON object");
        const auto pv = req.find("protocol");
        if (pv == req.end() || !pv->is_number_integer() || pv->get<int>() != kProtocolVersion) {
            fault("bad_version", "request must carry \"protocol\": 1");
        }
        json reply = dispatch(req);
        reply["protocol"] = kProtocolVersion;
        return reply.dump();
    } catch (const ProtocolFault& f) {
        return protocol_error(f.code, f.message);
    } catch (const EpisodeFinished& e) {
        return protocol_error("episode_finished", e.what());
    } catch (const ConfigError& e) {
        return protocol_error("bad_config", e.what());
    } catch (const InvalidInput& e) {
        return protocol_error("bad_argument", e.what());
    } catch (const json::exception& e) {
        return protocol_error("bad_argument", e.what());
    } catch (const std::exception& e) {
        return protocol_error("internal", e.what());
    }
}

json ProtocolSession::dispatch(const json& req)
{
    const auto c = req.find("cmd");
    if (c == req.end() || !c->is_string()) fault("bad_request", "missing \"cmd\"");
    const std::string cmd = c->get<std::string>();
    if (cmd == "reset") return cmd_reset(req);
    if (cmd == "step") return cmd_step(req);
    if (cmd == "config") return cmd_config(req);
    if (cmd == "validate_reset") return cmd_validate_reset(req);
    if (cmd == "validate_step") return cmd_validate_step(req);
    if (cmd == "close") {
        closed_ = true;
        return {{"closed", true}};
    }
    fault("unknown_command", "unknown cmd '" + cmd + "'");
}

json ProtocolSession::outcome(const StepOutcome& o) const
{
    json j;
    j["state"] = vec(o.state);
    j["reward"] = o.reward;
    j["terminated"] = o.terminated;
    j["cause"] = to_string(o.cause);
    j["info"] = {{"t0", o.info.t0},
                 {"t0_rear", o.info.t0_rear},
                 {"phi", o.info.phi},
                 {"tau", o.info.tau},
                 {"delta_set", o.info.delta_set},
                 {"clipped", o.info.clipped},
                 {"s_star", o.info.s_star}};
    return j;
}

json ProtocolSession::curriculum_status() const
{
    const auto& st = controller_->state();
    const auto& tr = controller_->tracker();
    const ResetIntervals iv = controller_->intervals();
    return {{"part", st.part},
            {"expanding", st.expanding},
            {"expansion_progress", st.expansion_progress},
            {"finished", st.finished},
            {"steps_total", tr.steps_total},
            {"episodes", tr.episodes},
            {"validation_pending", controller_->validation_pending()},
            {"v", {iv.v.lo, iv.v.hi}},
            {"R", {iv.path.R.lo, iv.path.R.hi}},
            {"LP", {iv.path.LP.lo, iv.path.LP.hi}},
            {"WP", {iv.path.WP.lo, iv.path.WP.hi}}};
}

json ProtocolSession::cmd_reset(const json& req)
{
    if (const auto s = req.find("seed"); s != req.end()) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
            fault("bad_argument", "'seed' must be a non-negative integer");
        }
        rng_ = Rng(s->get<std::uint64_t>());
        val_rng_ = rng_.fork();
    }
    const ResetIntervals iv = controller_ ? controller_->intervals() : cfg_.intervals;
    StepOutcome o;
    o.state = env_->reset(rng_, iv);
    o.info.t0 = env_->t0();
    o.info.phi = env_->sim().q.phi;
    json j = outcome(o);
    j["info"]["v"] = env_->speed();
    if (controller_) j["curriculum"] = curriculum_status();
    return j;
}

json ProtocolSession::cmd_step(const json& req)
{
    if (!env_->active()) {
        fault(env_->terminated() ? "episode_finished" : "not_reset",
              "send reset before step");
    }
    if (controller_ && controller_->validation_pending()) {
        fault("validation_pending", "finish the requested validation first");
    }
    const double a = number(req, "action");
    const StepOutcome o = env_->step(a);
    json j = outcome(o);
    if (controller_) {
        const Directives d = controller_->on_step(o.terminated && o.cause != Cause::PathEnd);
        j["directives"] = json::parse(directives_to_json(d));
        j["truncated"] = d.truncated;
        if (d.run_validation) {
            report_ = ValidationReport{};
            report_.step = controller_->tracker().steps_total;
            report_.part = controller_->state().part;
            ride_ = 0;
            ride_active_ = false;
        }
        j["curriculum"] = curriculum_status();
    }
    return j;
}

json ProtocolSession::cmd_config(const json& req)
{
    EnvSettings s = cfg_.settings;
    if (const auto n = req.find("name"); n != req.end()) {
        s = EnvSettings::named(n->get<std::string>());
    }
    auto pick = [&](const char* key, auto fn) {
        if (const auto it = req.find(key); it != req.end()) fn(*it);
    };
    pick("state_form", [&](const json& v) {
        const auto t = v.get<std::string>();
        if (t == "q") s.state_form = StateForm::Q;
        else if (t == "q_prime") s.state_form = StateForm::QPrime;
        else fault("bad_argument", "state_form must be q or q_prime");
    });
    pick("preview_mode", [&](const json& v) {
        const auto t = v.get<std::string>();
        if (t == "fixed") s.preview_mode = PreviewMode::Fixed;
        else if (t == "speed_scaled") s.preview_mode = PreviewMode::SpeedScaled;
        else fault("bad_argument", "preview_mode must be fixed or speed_scaled");
    });
    pick("t0_source", [&](const json& v) {
        const auto t = v.get<std::string>();
        if (t == "rear") s.t0_source = T0Source::Rear;
        else if (t == "front") s.t0_source = T0Source::Front;
        else fault("bad_argument", "t0_source must be rear or front");
    });
    pick("reward_shape", [&](const json& v) {
        const auto t = v.get<std::string>();
        if (t == "linear") s.reward_shape = RewardShape::Linear;
        else if (t == "gaussian") s.reward_shape = RewardShape::Gaussian;
        else fault("bad_argument", "reward_shape must be linear or gaussian");
    });
    pick("chi1", [&](const json& v) { s.chi1 = v.get<double>(); });
    pick("chi2", [&](const json& v) { s.chi2 = v.get<double>(); });
    pick("curriculum", [&](const json& v) { cfg_.curriculum = v.get<bool>(); });
    pick("v", [&](const json& v) {
        const auto a = v.get<std::vector<double>>();
        if (a.size() != 2) fault("bad_argument", "v must be [lo, hi]");
        cfg_.intervals.v = {a[0], a[1]};
    });
    for (const auto& [key, _] : req.items()) {
        static const char* known[] = {"protocol",     "cmd",       "name",  "state_form",
                                      "preview_mode", "t0_source", "reward_shape", "chi1",
                                      "chi2",         "curriculum", "v"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) fault("bad_argument", "unknown config field '" + key + "'");
    }
    s.validate();
    cfg_.intervals.validate();
    cfg_.settings = s;
    rebuild();
    return {{"ok", true},
            {"settings",
             {{"name", s.name},
              {"state_form", to_string(s.state_form)},
              {"preview_mode", to_string(s.preview_mode)},
              {"t0_source", to_string(s.t0_source)},
              {"reward_shape", to_string(s.reward_shape)},
              {"chi1", s.chi1},
              {"chi2", s.chi2}}},
            {"state_size", s.state_size()},
            {"curriculum", cfg_.curriculum}};
}

json ProtocolSession::cmd_validate_reset(const json&)
{
    if (!controller_ || ride_ < 0) fault("no_validation", "no validation requested");
    const std::uint64_t seed = val_rng_.next_u64();
    report_.seeds.push_back(seed);
    Rng ride_rng(seed);
    StepOutcome o;
    o.state = val_env_->reset(ride_rng, controller_->intervals());
    o.info.t0 = val_env_->t0();
    ride_active_ = true;
    ride_steps_ = 0;
    ride_t0_.clear();
    json j = outcome(o);
    j["ride"] = ride_;
    j["seed"] = seed;
    return j;
}

json ProtocolSession::cmd_validate_step(const json& req)
{
    if (!controller_ || ride_ < 0 || !ride_active_) {
        fault("no_validation", "send validate_reset first");
    }
    const double a = number(req, "action");
    const StepOutcome o = val_env_->step(a);
    ++ride_steps_;
    if (!o.terminated) ride_t0_.push_back(o.info.t0);
    json j = outcome(o);
    j["ride"] = ride_;
    const CurriculumConfig& cc = controller_->config();
    if (o.terminated || ride_steps_ >= cc.ride_steps) {
        const double e = ride_error(ride_t0_, o.terminated, cfg_.settings.eta_y);
        report_.e.push_back(e);
        j["ride_done"] = true;
        j["ride_error"] = e;
        ride_active_ = false;
        if (++ride_ >= cc.validation_rides) {
            finalize_report(report_, cc.eta_e);
            const Directives d = controller_->on_validation(report_);
            j["report"] = json::parse(report_to_json(report_));
            j["directives"] = json::parse(directives_to_json(d));
            j["curriculum"] = curriculum_status();
            ride_ = -1;
        }
    } else {
        j["ride_done"] = false;
    }
    return j;
}

} // namespace bikesim
