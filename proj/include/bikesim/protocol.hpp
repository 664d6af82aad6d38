#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bikesim/curriculum.hpp"
#include "bikesim/environment.hpp"

namespace bikesim {

constexpr int kProtocolVersion = 1;

struct SessionConfig {
    BicycleParams params = BicycleParams::benchmark();
    EnvSettings settings;
    bool curriculum = false;
    CurriculumConfig curriculum_config;
    ResetIntervals intervals;   // used when the curriculum is off
    std::uint64_t default_seed = 0;
};

// One client conversation over newline-delimited JSON. Every request and
// response carries "protocol": 1. Errors are answered with an "error"
// object and leave the session usable.
class ProtocolSession {
public:
    explicit ProtocolSession(SessionConfig cfg);

    // Handles one request line and returns one response line (no newline).
    std::string handle(const std::string& line);
    bool closed() const { return closed_; }

    const Environment& environment() const { return *env_; }
    const CurriculumController* curriculum() const { return controller_.get(); }

private:
    using json = nlohmann::json;

    json dispatch(const json& req);
    json cmd_reset(const json& req);
    json cmd_step(const json& req);
    json cmd_config(const json& req);
    json cmd_validate_reset(const json& req);
    json cmd_validate_step(const json& req);

    void rebuild();
    json outcome(const StepOutcome& o) const;
    json curriculum_status() const;

    SessionConfig cfg_;
    std::unique_ptr<Environment> env_;
    std::unique_ptr<Environment> val_env_;
    std::unique_ptr<CurriculumController> controller_;
    Rng rng_;
    Rng val_rng_;
    bool closed_ = false;

    // validation in progress
    ValidationReport report_;
    int ride_ = -1;
    int ride_steps_ = 0;
    bool ride_active_ = false;
    std::vector<double> ride_t0_;
};

std::string protocol_error(const std::string& code, const std::string& message);

} // namespace bikesim
