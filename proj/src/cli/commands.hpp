#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltest/error.hpp"
#include "ltest/simlab.hpp"

namespace ltest::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

/// Maps a library error code onto the CLI exit status.
int exit_code_for(ErrorCode code) noexcept;

/// Entry point shared by the executable and the tests. args excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SimulationConfig {
    std::vector<sim::ScenarioConfig> scenarios;
    std::vector<Method> methods;
    sim::SweepOptions options;
};

/// Reads the simulation schema; unknown keys and bad values raise
/// ConfigError naming the key path.
SimulationConfig parse_simulation_config(const nlohmann::json& doc);

/// CSV table of a sweep, one line per scenario x method.
std::string power_csv(const std::vector<sim::ScenarioConfig>& scenarios, const std::vector<sim::PowerRecord>& records,
                      bool timing);

}  // namespace ltest::cli
