#include "bikesim/environment.hpp"

#include <algorithm>
#include <cmath>

#include "bikesim/errors.hpp"

namespace bikesim {

using Eigen::Vector2d;

EnvSettings EnvSettings::named(const std::string& name)
{
    EnvSettings s;
    s.name = name;
    if (name == "prop") {
    } else if (name == "alt1") {
        s.state_form = StateForm::Q;
    } else if (name == "alt2") {
        s.preview_mode = PreviewMode::Fixed;
    } else if (name == "alt3") {
        s.t0_source = T0Source::Front;
    } else if (name == "alt4") {
        s.reward_shape = RewardShape::Gaussian;
    } else if (name == "alt5") {
        s.chi1 = 0.5;
        s.chi2 = 0.5;
    } else {
        throw ConfigError("unknown settings name '" + name + "'");
    }
    return s;
}

std::vector<std::string> EnvSettings::names()
{
    return {"prop", "alt1", "alt2", "alt3", "alt4", "alt5"};
}

void EnvSettings::validate() const
{
    auto bad = [](const std::string& m) { throw ConfigError("settings: " + m); };
    if (std::abs(chi1 + chi2 - 1.0) > 1e-12) bad("chi1 + chi2 must equal 1");
    if (chi1 < 0.0 || chi2 < 0.0) bad("reward weights must be >= 0");
    if (n_prev < 1) bad("n_prev must be >= 1");
    if (!(preview_ds > 0.0) || !(preview_time > 0.0)) bad("preview distance must be > 0");
    if (substeps < 1 || std::abs(h / substeps - kSubstepDt) > 1e-12) {
        bad("h / substeps must equal the solver step 0.005 s");
    }
    if (!(eta_y > 0.0) || !(eta_phi > 0.0)) bad("thresholds must be > 0");
    if (!(delta_limit > 0.0)) bad("delta_limit must be > 0");
}

std::string to_string(StateForm f) { return f == StateForm::Q ? "q" : "q_prime"; }
std::string to_string(PreviewMode m) { return m == PreviewMode::Fixed ? "fixed" : "speed_scaled"; }
std::string to_string(T0Source s) { return s == T0Source::Rear ? "rear" : "front"; }
std::string to_string(RewardShape r) { return r == RewardShape::Linear ? "linear" : "gaussian"; }

std::string to_string(Cause c)
{
    switch (c) {
    case Cause::None: return "none";
    case Cause::Roll: return "roll";
    case Cause::Distance: return "distance";
    case Cause::PathEnd: return "path_end";
    }
    return "none";
}

void ResetIntervals::validate() const
{
    const std::pair<const char*, const Interval*> all[] = {
        {"xP", &xP}, {"yP", &yP}, {"Psi", &Psi}, {"phi", &phi}, {"delta", &delta},
        {"thetaR", &thetaR}, {"thetaF", &thetaF}, {"phi_dot", &phi_dot},
        {"delta_dot", &delta_dot}, {"v", &v}, {"L", &path.L}, {"Phi", &path.Phi},
        {"R", &path.R}, {"LP", &path.LP}, {"WP", &path.WP}};
    for (const auto& [name, iv] : all) {
        if (!(iv->lo <= iv->hi)) {
            throw ConfigError(std::string("interval ") + name + " has lo > hi");
        }
    }
    if (!(path.L.lo > 0.0 && path.Phi.lo > 0.0 && path.R.lo > 0.0 && path.LP.lo > 0.0 &&
          path.WP.lo >= 0.0)) {
        throw ConfigError("path intervals must be positive");
    }
}

double reward(double t0, double phi, const EnvSettings& s)
{
    if (!(t0 >= 0.0) || t0 > s.eta_y) {
        throw InvalidInput("reward: t0 outside [0, eta_y]");
    }
    if (!(std::abs(phi) <= s.eta_phi)) {
        throw InvalidInput("reward: |phi| exceeds eta_phi");
    }
    const double rho_y = s.reward_shape == RewardShape::Linear ? (s.eta_y - t0) / s.eta_y
                                                               : std::exp(-0.5 * t0 * t0);
    const double rho_phi = (s.eta_phi - std::abs(phi)) / s.eta_phi;
    return s.chi1 * rho_y + s.chi2 * rho_phi;
}

std::vector<double> assemble_state(const MinimalCoords& q, const std::vector<double>& t_P,
                                   const EnvSettings& s)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(s.state_size()));
    if (s.state_form == StateForm::Q) {
        const auto a = q.to_array();
        out.assign(a.begin(), a.end());
    } else {
        const auto a = to_alt(q).to_array();
        out.assign(a.begin(), a.end());
    }
    out.insert(out.end(), t_P.begin(), t_P.end());
    return out;
}

double min_path_length(double v_max, const EnvSettings& s)
{
    return v_max * 2.0 * kStepsMax * s.h + s.n_prev * s.preview_distance(v_max) + 25.0;
}

Environment::Environment(BicycleParams params, EnvSettings settings)
    : params_(std::move(params)), settings_(std::move(settings))
{
    params_.validate();
    settings_.validate();
}

std::vector<double> Environment::reset(Rng& rng, const ResetIntervals& iv)
{
    iv.validate();
    MinimalCoords q;
    q.xP = rng.uniform(iv.xP.lo, iv.xP.hi);
    q.yP = rng.uniform(iv.yP.lo, iv.yP.hi);
    q.Psi = rng.uniform(iv.Psi.lo, iv.Psi.hi);
    q.phi = rng.uniform(iv.phi.lo, iv.phi.hi);
    q.delta = rng.uniform(iv.delta.lo, iv.delta.hi);
    q.thetaR = rng.uniform(iv.thetaR.lo, iv.thetaR.hi);
    q.thetaF = rng.uniform(iv.thetaF.lo, iv.thetaF.hi);
    q.phi_dot = rng.uniform(iv.phi_dot.lo, iv.phi_dot.hi);
    q.delta_dot = rng.uniform(iv.delta_dot.lo, iv.delta_dot.hi);
    const double v = rng.uniform(iv.v.lo, iv.v.hi);
    q.thetaF_dot = wheel_speed_from_forward(v, params_);

    path_ = random_path(rng, iv.path, Vector2d(q.xP, q.yP), q.Psi,
                        min_path_length(iv.v.hi, settings_));
    sim_ = make_state(q, params_);
    return start();
}

std::vector<double> Environment::reset_to(const MinimalCoords& q, Path path)
{
    path_ = std::move(path);
    sim_ = make_state(q, params_);
    return start();
}

std::vector<double> Environment::start()
{
    rear_cursor_ = PathCursor{};
    front_cursor_ = PathCursor{};
    steps_ = 0;
    terminated_ = false;
    active_ = true;
    const Measure m = measure();
    t0_ = m.t0;
    state_ = assemble_state(sim_.q, m.t_P, settings_);
    return state_;
}

Environment::Measure Environment::measure()
{
    Measure m;
    const Vector2d P(sim_.q.xP, sim_.q.yP);
    const NearestPoint rear = nearest_on_path(path_, rear_cursor_, P);
    m.t0_rear = rear.t0;
    m.s_star = rear.s_star;
    m.t0 = rear.t0;
    if (settings_.t0_source == T0Source::Front) {
        const Vector2d Q = front_contact_point(sim_.q, sim_.thetaB, params_);
        m.t0_front = nearest_on_path(path_, front_cursor_, Q).t0;
        m.t0 = m.t0_front;
    }
    m.t_P = preview_vector(path_, rear.s_star, P, sim_.q.Psi, settings_.preview_distance(speed()),
                           settings_.n_prev);
    return m;
}

StepOutcome Environment::step(double action)
{
    if (!active_) {
        throw EpisodeFinished("step called on a terminated or unreset environment");
    }
    StepOutcome out;
    out.info.action = action;
    if (!std::isfinite(action)) {
        throw InvalidInput("action must be finite");
    }
    const double applied = std::clamp(action, -settings_.delta_limit, settings_.delta_limit);
    out.info.clipped = applied != action;
    out.info.delta_set = applied;

    SteeringDrive drive;
    drive.P_gain = settings_.P_gain;
    drive.D_gain = settings_.D_gain;
    drive.delta_set = applied;
    out.info.tau = advance(sim_, drive, settings_.substeps, params_);
    ++steps_;
    out.info.phi = sim_.q.phi;

    Measure m;
    try {
        m = measure();
    } catch (const EndOfPath&) {
        out.terminated = true;
        out.cause = Cause::PathEnd;
        m.t0 = m.t0_rear = t0_;
        m.s_star = rear_cursor_.s_last;
        m.t_P.assign(static_cast<std::size_t>(settings_.n_prev) + 1, 0.0);
    }
    out.info.t0 = m.t0;
    out.info.t0_rear = m.t0_rear;
    out.info.s_star = m.s_star;
    t0_ = m.t0;

    if (!out.terminated) {
        if (std::abs(sim_.q.phi) > settings_.eta_phi) {
            out.cause = Cause::Roll;
        } else if (m.t0_rear > settings_.eta_y) {
            out.cause = Cause::Distance;
        } else if (settings_.t0_source == T0Source::Front && m.t0_front > settings_.eta_y) {
            out.cause = Cause::Distance;
        }
        out.terminated = out.cause != Cause::None;
    }
    out.reward = out.terminated ? 0.0 : reward(m.t0, sim_.q.phi, settings_);
    out.state = assemble_state(sim_.q, m.t_P, settings_);
    state_ = out.state;
    if (out.terminated) {
        terminated_ = true;
        active_ = false;
    }
    return out;
}

} // namespace bikesim
