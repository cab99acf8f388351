#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "margins/config.hpp"
#include "margins/margins.hpp"

namespace margins {

inline constexpr const char* kToolVersion = "1.0.0";

// Command-line state shared by the subcommands. Flags override the
// corresponding config values.
struct CliOptions {
  std::string config_path;
  std::string out_dir;
  bool csv = false;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::optional<double> tau;
  std::string delta_path;
  std::optional<int> grid_points;
};

// Margin report serialization (infinities as the string "infinity", NaN as
// null); includes the effective config echo.
nlohmann::ordered_json report_to_json(const MarginReport& report,
                                      const AnalysisConfig& config);

int cmd_analyze(const CliOptions& options);
int cmd_validate(const CliOptions& options);
int cmd_sweep(const CliOptions& options);

}  // namespace margins
