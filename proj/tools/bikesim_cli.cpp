#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bikesim/curriculum.hpp"
#include "bikesim/dynamics.hpp"
#include "bikesim/errors.hpp"
#include "bikesim/evaluation.hpp"
#include "bikesim/server.hpp"

using namespace bikesim;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::atomic<bool> g_stop{false};
int g_log_level = 1; // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg)
{
    if (g_log_level >= 1) std::cerr << "bikesim: " << msg << '\n';
}

BicycleParams load_bicycle(const std::string& file)
{
    return file.empty() ? BicycleParams::benchmark() : load_params(file);
}

Path make_path(const std::string& source, Rng& rng, double v_max, const EnvSettings& s)
{
    if (source == "benchmark") return benchmark_path();
    if (source == "random") {
        return random_path(rng, ResetIntervals{}.path, Eigen::Vector2d::Zero(), 0.0,
                           min_path_length(v_max, s));
    }
    if (source == "straight") return Path({0.0, 0.0, 0.0}, {PathElement::line(500.0)});
    return load_path(source);
}

std::ostream& open_out(const std::string& file, std::ofstream& holder)
{
    if (file.empty() || file == "-") return std::cout;
    holder.open(file);
    if (!holder) throw ConfigError("cannot write " + file);
    return holder;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Whipple bicycle simulation and path-following environment"};
    app.require_subcommand(1);

    std::string params_file;
    std::string settings_name = "prop";
    std::uint64_t seed = 1;
    app.add_option("--params", params_file, "bicycle parameter file (default: built-in benchmark)");
    app.add_option("--settings", settings_name, "named environment settings")
        ->check(CLI::IsMember(EnvSettings::names()));
    app.add_option("--seed", seed, "random seed");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one ride and write its trace");
    std::string sim_policy = "config/baseline_gains.json";
    std::string sim_path = "straight";
    std::string sim_out;
    double sim_v = 5.0, sim_phi0 = 2.0, sim_duration = 30.0;
    bool sim_closure = false;
    sim->add_option("--policy", sim_policy, "baseline gains or network weights JSON");
    sim->add_option("--path", sim_path, "straight | benchmark | random | path file");
    sim->add_option("--v", sim_v, "forward speed m/s")->check(CLI::Range(0.1, 20.0));
    sim->add_option("--phi0", sim_phi0, "initial roll perturbation, deg");
    sim->add_option("--duration", sim_duration, "ride duration, s");
    sim->add_flag("--until-closure", sim_closure, "ride a closed path once around");
    sim->add_option("--out", sim_out, "trace CSV (default stdout)");

    // sweep
    auto* sw = app.add_subcommand("sweep", "mean path distance over a speed grid");
    std::vector<std::string> sw_policies = {"config/baseline_gains.json"};
    std::string sw_path = "benchmark", sw_out;
    double sw_lo = 2.0, sw_hi = 7.0, sw_step = 0.25, sw_duration = 30.0;
    int sw_npaths = 1, sw_threads = 0;
    bool sw_closure = false;
    sw->add_option("--policy", sw_policies, "one or more policy files");
    sw->add_option("--path", sw_path, "straight | benchmark | random | path file");
    sw->add_option("--n-paths", sw_npaths, "number of random paths")->check(CLI::PositiveNumber);
    sw->add_option("--vmin", sw_lo);
    sw->add_option("--vmax", sw_hi);
    sw->add_option("--vstep", sw_step);
    sw->add_option("--duration", sw_duration, "ride duration, s");
    sw->add_flag("--until-closure", sw_closure, "closed paths: ride once around");
    sw->add_option("--threads", sw_threads);
    sw->add_option("--out", sw_out, "CSV output (default stdout)");

    // validate
    auto* val = app.add_subcommand("validate", "ten validation rides, JSON report");
    std::string val_policy = "config/baseline_gains.json", val_out;
    int val_part = 1;
    val->add_option("--policy", val_policy);
    val->add_option("--part", val_part, "curriculum part 1-4")->check(CLI::Range(1, 4));
    val->add_option("--out", val_out);

    // bench-path
    auto* bp = app.add_subcommand("bench-path", "write the benchmark path file");
    std::string bp_out;
    bp->add_option("--out", bp_out, "path file (default stdout)");

    // serve
    auto* srv = app.add_subcommand("serve", "environment server (NDJSON protocol)");
    bool srv_stdio = false, srv_curriculum = false;
    std::string srv_endpoint;
    std::string log_level;
    srv->add_flag("--stdio", srv_stdio, "serve one session on stdin/stdout");
    srv->add_option("--endpoint", srv_endpoint, "host:port")->envname("BIKESIM_ENDPOINT");
    srv->add_flag("--curriculum", srv_curriculum, "enable curriculum and validation directives");
    app.add_option("--log-level", log_level, "quiet | info | debug")
        ->envname("BIKESIM_LOG_LEVEL")
        ->check(CLI::IsMember({"quiet", "info", "debug"}));

    // step-response
    auto* sr = app.add_subcommand("step-response", "steer step response with gravity removed");
    double sr_P = 9.0, sr_D = 1.6, sr_target = 70.0, sr_duration = 3.0;
    std::string sr_out;
    sr->add_option("--P", sr_P);
    sr->add_option("--D", sr_D);
    sr->add_option("--target", sr_target, "deg");
    sr->add_option("--duration", sr_duration, "s");

    // eigen
    auto* eig = app.add_subcommand("eigen", "lateral eigenvalues over a speed grid (CSV)");
    double eig_lo = 0.5, eig_hi = 10.0, eig_step = 0.5;
    eig->add_option("--vmin", eig_lo);
    eig->add_option("--vmax", eig_hi);
    eig->add_option("--vstep", eig_step);

    // tune-baseline
    auto* tb = app.add_subcommand("tune-baseline", "grid search for baseline gains");
    std::string tb_out;
    int tb_threads = 0;
    tb->add_option("--out", tb_out, "gains JSON (default stdout)");
    tb->add_option("--threads", tb_threads);

    CLI11_PARSE(app, argc, argv);
    if (log_level == "quiet") g_log_level = 0;
    if (log_level == "debug") g_log_level = 2;

    try {
        const BicycleParams params = load_bicycle(params_file);
        params.validate();
        const EnvSettings settings = EnvSettings::named(settings_name);
        Rng rng(seed);

        if (*sim) {
            const Policy pol = load_policy(sim_policy);
            const Path path = make_path(sim_path, rng, sim_v, settings);
            RideOptions opt;
            opt.phi0 = sim_phi0 * kDeg;
            opt.duration = sim_duration;
            opt.until_closure = sim_closure;
            const RideResult r = evaluate_ride(pol, params, settings, path, sim_v, opt);
            std::ofstream f;
            write_trace_csv(open_out(sim_out, f), r.trace);
            log_info("t_bar=" + std::to_string(r.t_bar) + " t_hat=" + std::to_string(r.t_hat) +
                     " failed=" + (r.failed ? std::string("yes (") + to_string(r.cause) + ")" : "no") +
                     " steps=" + std::to_string(r.steps));
        } else if (*sw) {
            std::vector<Policy> pols;
            for (const auto& f : sw_policies) pols.push_back(load_policy(f));
            std::vector<Path> paths;
            const int n = sw_path == "random" ? sw_npaths : 1;
            for (int i = 0; i < n; ++i) paths.push_back(make_path(sw_path, rng, sw_hi, settings));
            RideOptions opt;
            opt.duration = sw_duration;
            opt.until_closure = sw_closure;
            const auto rep = performance_sweep(pols, params, settings, paths,
                                               velocity_grid(sw_lo, sw_hi, sw_step), opt, sw_threads);
            std::ofstream f;
            write_sweep_csv(open_out(sw_out, f), rep);
        } else if (*val) {
            const Policy pol = load_policy(val_policy);
            CurriculumState cur;
            cur.part = val_part;
            Rng vrng = rng.fork();
            ValidationReport rep = run_validation(
                [&](const std::vector<double>& s) { return pol.act(s, settings); }, params,
                settings, active_intervals(cur), vrng);
            rep.part = val_part;
            std::ofstream f;
            open_out(val_out, f) << report_to_json(rep) << '\n';
        } else if (*bp) {
            const Path p = benchmark_path();
            std::ofstream f;
            open_out(bp_out, f) << format_path(p);
            log_info("benchmark path length " + std::to_string(p.length()) + " m");
        } else if (*srv) {
            SessionConfig cfg;
            cfg.params = params;
            cfg.settings = settings;
            cfg.curriculum = srv_curriculum;
            cfg.default_seed = seed;
            if (srv_stdio || srv_endpoint.empty()) {
                serve_stream(std::cin, std::cout, cfg);
            } else {
                std::signal(SIGINT, [](int) { g_stop = true; });
                std::signal(SIGTERM, [](int) { g_stop = true; });
                const Endpoint ep = parse_endpoint(srv_endpoint);
                serve_tcp(ep, cfg, g_stop, [&](int port) {
                    log_info("listening on " + ep.host + ":" + std::to_string(port));
                });
            }
        } else if (*sr) {
            SteeringDrive d;
            d.P_gain = sr_P;
            d.D_gain = sr_D;
            const StepResponse r = step_response(params, d, sr_target * kDeg, sr_duration);
            nlohmann::json j = {{"P", sr_P},
                                {"D", sr_D},
                                {"target_deg", sr_target},
                                {"peak_deg", r.peak / kDeg},
                                {"peak_time", r.peak_time},
                                {"final_deg", r.final_value / kDeg},
                                {"overshoot", r.overshoot},
                                {"within_10_percent", r.overshoot <= 0.10}};
            std::cout << j.dump(1) << '\n';
        } else if (*eig) {
            std::printf("v,re1,im1,re2,im2,re3,im3,re4,im4\n");
            for (double v : velocity_grid(eig_lo, eig_hi, eig_step)) {
                const auto ev = lateral_eigenvalues(v, params);
                std::printf("%.9g", v);
                for (const auto& e : ev) std::printf(",%.9g,%.9g", e.real(), e.imag());
                std::printf("\n");
            }
        } else if (*tb) {
            const TuneResult r = tune_baseline(params, settings, seed, tb_threads);
            std::ofstream f;
            open_out(tb_out, f) << gains_to_json(r.gains) << '\n';
            log_info("candidates=" + std::to_string(r.candidates) +
                     " fails=" + std::to_string(r.fails) +
                     " worst_t_bar=" + std::to_string(r.worst_t_bar));
        }
    } catch (const Error& e) {
        std::cerr << "bikesim: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
