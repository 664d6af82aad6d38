#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "bikesim/environment.hpp"

namespace bikesim {

struct CurriculumRow {
    Interval v, R, LP, WP;
};

// Rows for parts 1..4 (index 0..3).
const std::array<CurriculumRow, 4>& curriculum_table();

struct CurriculumConfig {
    long steps_dec = 10000;
    long steps_max = kStepsMax;
    long steps_min = 800;
    long steps_tot = 4000000;
    long validation_spacing = 4000;
    long checkpoint_every = 4000;
    int validation_rides = 10;
    int ride_steps = 600;             // 30 s at h = 0.05 s
    double eta_e = 0.2 / 3.5;
    ResetIntervals base;              // non-curriculum intervals
};

struct CurriculumState {
    int part = 1;
    double expansion_progress = 0.0;
    bool expanding = false;
    bool finished = false;
    long expansion_steps = 0;
};

ResetIntervals active_intervals(const CurriculumState& cur, const ResetIntervals& base = {});

struct EpisodeTracker {
    long steps_in_episode = 0;
    long steps_total = 0;
    long episodes = 0;
    int consecutive_full = 0;
    long last_validation = 0;
};

struct ValidationReport {
    std::vector<double> e;
    std::vector<std::uint64_t> seeds;
    double mean = 0.0;
    bool fully_successful = false;
    long step = 0;
    int part = 1;
};

// Ride score: 1 on a breach, else the mean t0 over the last
// 80 % of the ride divided by eta_y.
double ride_error(const std::vector<double>& t0, bool breached, double eta_y);

// Fills mean and fully_successful from e.
void finalize_report(ValidationReport& r, double eta_e);

using PolicyFn = std::function<double(const std::vector<double>&)>;

// Ten rides with fresh seeds from rng, each reset with the given intervals.
ValidationReport run_validation(const PolicyFn& policy, const BicycleParams& params,
                                const EnvSettings& settings, const ResetIntervals& iv, Rng& rng,
                                const CurriculumConfig& cfg = {}, long step = 0);

struct Directives {
    bool reset_env = false;
    bool truncated = false;      // reset forced without a breach
    bool episode_end = false;
    bool run_validation = false;
    bool advance_curriculum = false;
    bool checkpoint = false;
    bool stop = false;
};

class CurriculumController {
public:
    explicit CurriculumController(CurriculumConfig cfg = {});

    // Call once per learning step; breached is the environment's threshold
    // termination.
    Directives on_step(bool breached);
    Directives on_validation(const ValidationReport& r);

    const CurriculumState& state() const { return cur_; }
    const EpisodeTracker& tracker() const { return tr_; }
    const CurriculumConfig& config() const { return cfg_; }
    ResetIntervals intervals() const { return active_intervals(cur_, cfg_.base); }
    bool validation_pending() const { return pending_; }

private:
    CurriculumConfig cfg_;
    CurriculumState cur_;
    EpisodeTracker tr_;
    bool pending_ = false;
    bool stopped_ = false;
};

// Newline-delimited JSON run log, flushed after every event.
class RunLog {
public:
    explicit RunLog(std::ostream& out) : out_(out) {}

    void header(std::uint64_t seed, const EnvSettings& s, const CurriculumConfig& cfg);
    void event(long step, long episode, const std::string& kind, const std::string& payload_json);

private:
    std::ostream& out_;
};

std::string report_to_json(const ValidationReport& r);
std::string directives_to_json(const Directives& d);

struct Checkpoint {
    long step = 0;
    bool validation_passed = false;  // last validation before it fully successful
    bool curriculum_finished = false;
};

// Most recent checkpoint that passed all validation rides and finished the
// curriculum; -1 when none qualifies.
int select_deployed_checkpoint(const std::vector<Checkpoint>& log);

} // namespace bikesim
