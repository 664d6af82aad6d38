#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bikesim/dynamics.hpp"
#include "bikesim/kinematics.hpp"
#include "bikesim/params.hpp"
#include "bikesim/path.hpp"
#include "bikesim/rng.hpp"

namespace bikesim {

enum class StateForm { Q, QPrime };
enum class PreviewMode { Fixed, SpeedScaled };
enum class T0Source { Rear, Front };
enum class RewardShape { Linear, Gaussian };

struct EnvSettings {
    std::string name = "prop";
    StateForm state_form = StateForm::QPrime;
    PreviewMode preview_mode = PreviewMode::SpeedScaled;
    double preview_ds = 2.0;      // m, fixed mode
    double preview_time = 0.4;    // s, speed-scaled mode
    int n_prev = 4;
    T0Source t0_source = T0Source::Rear;
    RewardShape reward_shape = RewardShape::Linear;
    double chi1 = 1.0;
    double chi2 = 0.0;
    double h = 0.05;
    int substeps = 10;
    double eta_y = 3.5;
    double eta_phi = 0.7853981633974483;      // 45 deg
    double delta_limit = 1.2217304763960306;  // 70 deg
    double P_gain = 9.0;
    double D_gain = 1.6;

    // prop, alt1 .. alt5
    static EnvSettings named(const std::string& name);
    static std::vector<std::string> names();

    void validate() const;
    int state_size() const { return (state_form == StateForm::Q ? 10 : 11) + n_prev + 1; }
    double preview_distance(double v) const
    {
        return preview_mode == PreviewMode::Fixed ? preview_ds : v * preview_time;
    }
};

std::string to_string(StateForm f);
std::string to_string(PreviewMode m);
std::string to_string(T0Source s);
std::string to_string(RewardShape r);

struct ResetIntervals {
    Interval xP{-10.0, 10.0};
    Interval yP{-10.0, 10.0};
    Interval Psi{-3.141592653589793, 3.141592653589793};
    Interval phi{-0.01, 0.01};
    Interval delta{-0.01, 0.01};
    Interval thetaR{-3.141592653589793, 3.141592653589793};
    Interval thetaF{-3.141592653589793, 3.141592653589793};
    Interval phi_dot{-0.05, 0.05};
    Interval delta_dot{-0.01, 0.01};
    Interval v{2.0, 7.0};
    PathIntervals path;

    void validate() const;
};

// Reward of a non-terminal step. Throws InvalidInput when an input lies
// outside its threshold.
double reward(double t0, double phi, const EnvSettings& s);

std::vector<double> assemble_state(const MinimalCoords& q, const std::vector<double>& t_P,
                                   const EnvSettings& s);

enum class Cause { None, Roll, Distance, PathEnd };
std::string to_string(Cause c);

struct StepInfo {
    double t0 = 0.0;          // distance used for the reward
    double t0_rear = 0.0;
    double phi = 0.0;
    double tau = 0.0;
    double delta_set = 0.0;   // applied (after clipping)
    double action = 0.0;      // as requested
    bool clipped = false;
    double s_star = 0.0;
};

struct StepOutcome {
    std::vector<double> state;
    double reward = 0.0;
    bool terminated = false;
    Cause cause = Cause::None;
    StepInfo info;
};

constexpr int kStepsMax = 1200;

// Path length covering two full episodes at the given speed plus margin.
double min_path_length(double v_max, const EnvSettings& s);

class Environment {
public:
    Environment(BicycleParams params, EnvSettings settings);

    std::vector<double> reset(Rng& rng, const ResetIntervals& iv);
    // Starts from a given configuration on a given path.
    std::vector<double> reset_to(const MinimalCoords& q, Path path);

    StepOutcome step(double action);

    const SimState& sim() const { return sim_; }
    const Path& path() const { return path_; }
    const EnvSettings& settings() const { return settings_; }
    const BicycleParams& params() const { return params_; }
    bool terminated() const { return terminated_; }
    bool active() const { return active_; }
    long steps() const { return steps_; }
    double speed() const { return sim_.speed(params_); }
    const std::vector<double>& state() const { return state_; }
    double s_star() const { return rear_cursor_.s_last; }
    double t0() const { return t0_; }

private:
    struct Measure {
        double t0 = 0.0;
        double t0_rear = 0.0;
        double t0_front = 0.0;
        double s_star = 0.0;
        std::vector<double> t_P;
    };
    Measure measure();
    std::vector<double> start();

    BicycleParams params_;
    EnvSettings settings_;
    SimState sim_;
    Path path_;
    PathCursor rear_cursor_;
    PathCursor front_cursor_;
    std::vector<double> state_;
    double t0_ = 0.0;
    long steps_ = 0;
    bool terminated_ = false;
    bool active_ = false;
};

} // namespace bikesim
