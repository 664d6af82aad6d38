#include "bikesim/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

#include "bikesim/errors.hpp"

namespace bikesim {

using Eigen::Vector2d;

RideResult evaluate_ride(const Policy& policy, const BicycleParams& params,
                         const EnvSettings& settings, const Path& path, double v,
                         const RideOptions& opt)
{
    Environment env(params, settings);
    MinimalCoords q;
    q.xP = path.start().x;
    q.yP = path.start().y;
    q.Psi = path.start().heading;
    q.phi = opt.phi0;
    q.thetaF_dot = wheel_speed_from_forward(v, params);
    std::vector<double> s = env.reset_to(q, path);

    const bool closure = opt.until_closure && path.closed();
    long max_steps = static_cast<long>(std::lround(opt.duration / settings.h));
    if (closure) {
        max_steps = static_cast<long>(std::ceil((1.5 * path.length() / v + 30.0) / settings.h));
    }
    const Vector2d start(path.start().x, path.start().y);

    RideResult r;
    double sum = 0.0;
    for (long k = 0; k < max_steps; ++k) {
        const StepOutcome o = env.step(policy.act(s, settings));
        ++r.steps;
        sum += o.info.t0;
        r.t_hat = std::max(r.t_hat, o.info.t0);
        if (opt.keep_trace) {
            const SimState& st = env.sim();
            r.trace.push_back({st.t, st.q.xP, st.q.yP, st.q.Psi, st.q.phi, st.q.delta, st.thetaB,
                               st.q.phi_dot, st.q.delta_dot, env.speed(), o.info.tau,
                               o.info.delta_set, o.info.t0, o.reward});
        }
        if (o.terminated) {
            r.failed = o.cause != Cause::PathEnd;
            r.cause = o.cause;
            break;
        }
        s = o.state;
        if (closure && env.s_star() >= 0.5 * path.length() &&
            (Vector2d(env.sim().q.xP, env.sim().q.yP) - start).norm() < 1.0) {
            r.closed_loop = true;
            break;
        }
    }
    r.t_bar = r.steps > 0 ? sum / static_cast<double>(r.steps) : 0.0;
    return r;
}

std::vector<double> velocity_grid(double lo, double hi, double step)
{
    std::vector<double> out;
    const long n = std::lround((hi - lo) / step);
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

PerformanceReport performance_sweep(const std::vector<Policy>& policies,
                                    const BicycleParams& params, const EnvSettings& settings,
                                    const std::vector<Path>& paths,
                                    const std::vector<double>& v_grid, const RideOptions& opt,
                                    int threads)
{
    if (policies.empty()) throw InvalidInput("performance_sweep: no policies");
    if (paths.empty()) throw InvalidInput("performance_sweep: no paths");

    const std::size_t nA = policies.size(), nV = v_grid.size(), nP = paths.size();
    std::vector<RideResult> results(nA * nV * nP);
    RideOptions ropt = opt;
    ropt.keep_trace = false;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < results.size(); i = next++) {
            const std::size_t a = i / (nV * nP);
            const std::size_t vi = (i / nP) % nV;
            const std::size_t p = i % nP;
            results[i] = evaluate_ride(policies[a], params, settings, paths[p], v_grid[vi], ropt);
        }
    };
    unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(results.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    PerformanceReport rep;
    for (std::size_t vi = 0; vi < nV; ++vi) {
        PerformanceRow row;
        row.v = v_grid[vi];
        double T = 0.0;
        for (std::size_t a = 0; a < nA; ++a) {
            AgentPoint ap;
            for (std::size_t p = 0; p < nP; ++p) {
                const RideResult& r = results[(a * nV + vi) * nP + p];
                ap.t_bar += r.t_bar / static_cast<double>(nP);
                ap.t_hat = std::max(ap.t_hat, r.t_hat);
                ap.failed = ap.failed || r.failed;
            }
            T += ap.t_bar;
            row.agents.push_back(ap);
        }
        row.T = T / static_cast<double>(nA);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

void write_sweep_csv(std::ostream& out, const PerformanceReport& r)
{
    out << "v,T";
    const std::size_t nA = r.rows.empty() ? 0 : r.rows.front().agents.size();
    for (std::size_t a = 0; a < nA; ++a) {
        out << ",t_bar_" << a << ",t_hat_" << a << ",failed_" << a;
    }
    out << '\n';
    char buf[64];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g", row.v, row.T);
        out << buf;
        for (const auto& ap : row.agents) {
            std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%d", ap.t_bar, ap.t_hat, ap.failed ? 1 : 0);
            out << buf;
        }
        out << '\n';
    }
}

std::vector<double> sma(const std::vector<double>& series, int k)
{
    if (k < 1) throw InvalidInput("sma: k must be >= 1");
    std::vector<double> out(series.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        sum += series[i];
        if (i >= static_cast<std::size_t>(k)) sum -= series[i - k];
        const std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(k));
        out[i] = sum / static_cast<double>(n);
    }
    return out;
}

bool has_full_circle(const Path& path, int run)
{
    int count = 0;
    int sign = 0;
    for (const auto& e : path.elements()) {
        if (e.type != ElementType::Arc) {
            count = 0;
            sign = 0;
            continue;
        }
        count = e.sign == sign ? count + 1 : 1;
        sign = e.sign;
        if (count >= run) return true;
    }
    return false;
}

double full_circle_probability(Rng& rng, const PathIntervals& iv, int n_paths, double path_length,
                               int run, const ElementMix& mix)
{
    if (n_paths <= 0) return 0.0;
    int hits = 0;
    for (int i = 0; i < n_paths; ++i) {
        const Path p = random_path(rng, iv, Vector2d::Zero(), 0.0, path_length, mix);
        if (has_full_circle(p, run)) ++hits;
    }
    return static_cast<double>(hits) / n_paths;
}

TuneResult tune_baseline(const BicycleParams& params, const EnvSettings& settings,
                         std::uint64_t seed, int threads)
{
    const Path straight({0.0, 0.0, 0.0}, {PathElement::line(400.0)});
    Rng rng(seed);
    const ResetIntervals part1 = active_intervals(CurriculumState{});
    std::vector<Path> curvy;
    for (int i = 0; i < 4; ++i) {
        curvy.push_back(random_path(rng, part1.path, Vector2d::Zero(), 0.0, 200.0));
    }

    struct Candidate {
        BaselineGains g;
        int fails = 0;
        double worst = 0.0;
    };
    std::vector<Candidate> grid;
    for (double kp = -1.5; kp >= -4.0 - 1e-9; kp -= 0.5) {
        for (double kd = -0.2; kd >= -1.4 - 1e-9; kd -= 0.2) {
            for (double kt = -0.1; kt >= -0.6 - 1e-9; kt -= 0.1) {
                for (int idx = 1; idx <= 4; ++idx) {
                    Candidate c;
                    c.g.k_phi = kp;
                    c.g.k_phi_dot = kd;
                    c.g.k_t.assign(static_cast<std::size_t>(settings.n_prev) + 1, 0.0);
                    c.g.k_t[static_cast<std::size_t>(idx)] = kt;
                    grid.push_back(c);
                }
            }
        }
    }

    RideOptions opt;
    opt.phi0 = 2.0 * std::numbers::pi / 180.0;
    opt.keep_trace = false;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            Candidate& c = grid[i];
            const Policy pol(c.g);
            auto score = [&](const RideResult& r) {
                c.fails += r.failed ? 1 : 0;
                c.worst = std::max(c.worst, r.t_bar);
            };
            for (double v : {4.0, 5.0, 6.0}) {
                score(evaluate_ride(pol, params, settings, straight, v, opt));
            }
            for (const auto& p : curvy) score(evaluate_ride(pol, params, settings, p, 4.0, opt));
        }
    };
    unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    TuneResult best;
    best.score = 1e300;
    for (const auto& c : grid) {
        const double s = 10.0 * c.fails + c.worst;
        if (s < best.score) {
            best.score = s;
            best.gains = c.g;
            best.fails = c.fails;
            best.worst_t_bar = c.worst;
        }
    }
    best.candidates = static_cast<long>(grid.size());
    return best;
}

} // namespace bikesim
