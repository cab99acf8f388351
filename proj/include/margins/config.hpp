#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "margins/margins.hpp"
#include "margins/model.hpp"
#include "margins/types.hpp"

namespace margins {

// One simulation request: either an input delay or a perturbation file
// (path resolved relative to the config file's directory).
struct SimScenario {
  std::optional<double> tau;
  std::string delta_path;
  std::optional<Mat> x0;
  double horizon = 60.0;
  double dt = 1e-3;
};

struct AnalysisConfig {
  AgentModel model;
  std::optional<Mat> adjacency;
  std::optional<Mat> laplacian;
  MarginConfig margins;
  std::vector<SimScenario> simulate;
  double sim_horizon = 60.0;  // defaults for flag-driven scenarios
  double sim_dt = 1e-3;
  std::string out_dir;
  bool write_csv = false;
};

AnalysisConfig config_from_json(const nlohmann::ordered_json& j);
AnalysisConfig load_config(const std::string& path);

// Effective-value echo; re-parsing it yields an equivalent config.
nlohmann::ordered_json config_to_json(const AnalysisConfig& cfg);

NetworkGraph graph_from_config(const AnalysisConfig& cfg);

// Complex matrix file: object with "re" (and optional "im") row-major
// arrays of arrays.
CMat load_complex_matrix(const std::string& path);

}  // namespace margins
