#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bikesim/curriculum.hpp"
#include "bikesim/environment.hpp"
#include "bikesim/policy.hpp"
#include "bikesim/trajectory_log.hpp"

namespace bikesim {

struct RideOptions {
    double duration = 30.0;     // s, ignored when until_closure is set
    bool until_closure = false; // closed paths: stop back at the start
    double phi0 = 0.0;          // initial roll perturbation
    bool keep_trace = true;
};

struct RideResult {
    double t_bar = 0.0;
    double t_hat = 0.0;
    bool failed = false;
    Cause cause = Cause::None;
    long steps = 0;
    bool closed_loop = false;   // returned to the start point
    std::vector<TraceRow> trace;
};

// Starts in the reference configuration with P at the path start, aligned
// with the start tangent.
RideResult evaluate_ride(const Policy& policy, const BicycleParams& params,
                         const EnvSettings& settings, const Path& path, double v,
                         const RideOptions& opt = {});

std::vector<double> velocity_grid(double lo = 2.0, double hi = 7.0, double step = 0.25);

struct AgentPoint {
    double t_bar = 0.0;
    double t_hat = 0.0;
    bool failed = false;
};

struct PerformanceRow {
    double v = 0.0;
    double T = 0.0;                 // mean t_bar over agents
    std::vector<AgentPoint> agents; // in policy order
};

struct PerformanceReport {
    std::vector<PerformanceRow> rows;
};

// Every (policy, v, path) work item is an independent ride; per agent and
// speed t_bar is averaged and t_hat maximised over the paths.
PerformanceReport performance_sweep(const std::vector<Policy>& policies,
                                    const BicycleParams& params, const EnvSettings& settings,
                                    const std::vector<Path>& paths,
                                    const std::vector<double>& v_grid, const RideOptions& opt = {},
                                    int threads = 0);

void write_sweep_csv(std::ostream& out, const PerformanceReport& r);

// Trailing simple moving average; the first k-1 entries average what exists.
std::vector<double> sma(const std::vector<double>& series, int k = 20);

// True when the path has at least `run` consecutive arcs turning the same way.
bool has_full_circle(const Path& path, int run = 5);

double full_circle_probability(Rng& rng, const PathIntervals& iv, int n_paths,
                               double path_length = 120.0, int run = 5,
                               const ElementMix& mix = {});

struct TuneResult {
    BaselineGains gains;
    int fails = 0;
    double worst_t_bar = 0.0;
    double score = 0.0;  // 10 per failed ride plus the worst mean distance
    long candidates = 0;
};

// Coarse grid search over (k_phi, k_phi_dot, one preview gain) on straight
// rides at 4, 5 and 6 m/s with a 2 deg roll perturbation and on random
// part-1 curriculum paths at 4 m/s.
TuneResult tune_baseline(const BicycleParams& params, const EnvSettings& settings,
                         std::uint64_t seed = 7, int threads = 0);

} // namespace bikesim
