#include "margins/config.hpp"

#include <fstream>

#include "margins/errors.hpp"

namespace margins {

namespace {

using nlohmann::ordered_json;

Mat parse_matrix(const ordered_json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    fail(ErrorCode::ConfigParse, name + " must be an array of row arrays");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.front().size());
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      fail(ErrorCode::ConfigParse, name + " rows must have equal length");
    for (int k = 0; k < cols; ++k) {
      if (!row.at(k).is_number())
        fail(ErrorCode::ConfigParse, name + " entries must be numeric");
      M(i, k) = row.at(k).get<double>();
    }
  }
  return M;
}

ordered_json matrix_to_json(const Mat& M) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < M.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(row);
  }
  return rows;
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

AnalysisConfig config_from_json(const ordered_json& j) {
  AnalysisConfig cfg;
  if (!j.is_object() || !j.contains("model"))
    fail(ErrorCode::ConfigParse, "config must be an object with a model");

  const auto& m = j.at("model");
  for (const char* key : {"A", "B", "K", "c"})
    if (!m.contains(key))
      fail(ErrorCode::ConfigParse, std::string("model.") + key + " missing");
  cfg.model.A = parse_matrix(m.at("A"), "model.A");
  cfg.model.B = parse_matrix(m.at("B"), "model.B");
  cfg.model.K = parse_matrix(m.at("K"), "model.K");
  cfg.model.c = m.at("c").get<double>();
  const int n = cfg.model.n();
  if (cfg.model.A.cols() != n)
    fail(ErrorCode::ConfigParse, "model.A must be square");
  if (cfg.model.B.rows() != n)
    fail(ErrorCode::ConfigParse, "model.B must have one row per state");
  if (cfg.model.K.cols() != n || cfg.model.K.rows() != cfg.model.B.cols())
    fail(ErrorCode::ConfigParse,
         "model.K must be inputs x states, matching model.B");
  if (!(cfg.model.c > 0.0))
    fail(ErrorCode::ConfigParse, "model.c must be positive");

  if (!j.contains("graph") || !j.at("graph").is_object())
    fail(ErrorCode::ConfigParse, "config.graph missing");
  const auto& g = j.at("graph");
  const bool has_adj = g.contains("adjacency");
  const bool has_lap = g.contains("laplacian");
  if (has_adj == has_lap)
    fail(ErrorCode::ConfigParse,
         "graph must contain exactly one of adjacency/laplacian");
  if (has_adj) cfg.adjacency = parse_matrix(g.at("adjacency"), "adjacency");
  if (has_lap) cfg.laplacian = parse_matrix(g.at("laplacian"), "laplacian");

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    read_field(s, "grid_points", cfg.margins.sweep.grid_points);
    read_field(s, "omega_min", cfg.margins.sweep.omega_min);
    read_field(s, "omega_max", cfg.margins.sweep.omega_max);
    read_field(s, "bisection_tol", cfg.margins.sweep.bisection_tol);
    read_field(s, "refinement_max_iter",
               cfg.margins.sweep.refinement_max_iter);
    read_field(s, "max_rel_jump", cfg.margins.sweep.max_rel_jump);
    read_field(s, "parallel", cfg.margins.sweep.parallel);
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    read_field(o, "starts", cfg.margins.optimizer.starts);
    read_field(o, "newton_tol", cfg.margins.optimizer.newton_tol);
    read_field(o, "max_iter", cfg.margins.optimizer.max_iter);
    read_field(o, "sufficiency_tol", cfg.margins.optimizer.sufficiency_tol);
    read_field(o, "oracle_resolution",
               cfg.margins.optimizer.oracle_resolution);
    read_field(o, "seed", cfg.margins.optimizer.seed);
  }
  read_field(j, "golden_iters", cfg.margins.golden_iters);

  if (j.contains("simulate")) {
    if (!j.at("simulate").is_array())
      fail(ErrorCode::ConfigParse, "simulate must be an array of scenarios");
    for (const auto& sc : j.at("simulate")) {
      SimScenario scenario;
      if (sc.contains("tau")) scenario.tau = sc.at("tau").get<double>();
      read_field(sc, "delta", scenario.delta_path);
      if (sc.contains("x0"))
        scenario.x0 = parse_matrix(sc.at("x0"), "simulate.x0");
      read_field(sc, "horizon", scenario.horizon);
      read_field(sc, "dt", scenario.dt);
      if (!scenario.tau && scenario.delta_path.empty())
        fail(ErrorCode::ConfigParse,
             "each simulate scenario needs tau or delta");
      cfg.simulate.push_back(std::move(scenario));
    }
  }
  if (j.contains("simulate_defaults")) {
    const auto& d = j.at("simulate_defaults");
    read_field(d, "horizon", cfg.sim_horizon);
    read_field(d, "dt", cfg.sim_dt);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    read_field(o, "dir", cfg.out_dir);
    read_field(o, "csv", cfg.write_csv);
  }
  return cfg;
}

AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::ConfigParse,
         "config is not valid JSON (" + path + "): " + e.what());
  }
  return config_from_json(j);
}

nlohmann::ordered_json config_to_json(const AnalysisConfig& cfg) {
  ordered_json j;
  j["model"] = {{"A", matrix_to_json(cfg.model.A)},
                {"B", matrix_to_json(cfg.model.B)},
                {"K", matrix_to_json(cfg.model.K)},
                {"c", cfg.model.c}};
  ordered_json g;
  if (cfg.adjacency) g["adjacency"] = matrix_to_json(*cfg.adjacency);
  if (cfg.laplacian) g["laplacian"] = matrix_to_json(*cfg.laplacian);
  j["graph"] = g;
  j["sweep"] = {{"grid_points", cfg.margins.sweep.grid_points},
                {"omega_min", cfg.margins.sweep.omega_min},
                {"omega_max", cfg.margins.sweep.omega_max},
                {"bisection_tol", cfg.margins.sweep.bisection_tol},
                {"refinement_max_iter", cfg.margins.sweep.refinement_max_iter},
                {"max_rel_jump", cfg.margins.sweep.max_rel_jump},
                {"parallel", cfg.margins.sweep.parallel}};
  j["optimizer"] = {
      {"starts", cfg.margins.optimizer.starts},
      {"newton_tol", cfg.margins.optimizer.newton_tol},
      {"max_iter", cfg.margins.optimizer.max_iter},
      {"sufficiency_tol", cfg.margins.optimizer.sufficiency_tol},
      {"oracle_resolution", cfg.margins.optimizer.oracle_resolution},
      {"seed", cfg.margins.optimizer.seed}};
  j["golden_iters"] = cfg.margins.golden_iters;
  if (!cfg.simulate.empty()) {
    ordered_json arr = ordered_json::array();
    for (const auto& sc : cfg.simulate) {
      ordered_json s;
      if (sc.tau) s["tau"] = *sc.tau;
      if (!sc.delta_path.empty()) s["delta"] = sc.delta_path;
      if (sc.x0) s["x0"] = matrix_to_json(*sc.x0);
      s["horizon"] = sc.horizon;
      s["dt"] = sc.dt;
      arr.push_back(s);
    }
    j["simulate"] = arr;
  }
  j["simulate_defaults"] = {{"horizon", cfg.sim_horizon}, {"dt", cfg.sim_dt}};
  ordered_json out;
  if (!cfg.out_dir.empty()) out["dir"] = cfg.out_dir;
  out["csv"] = cfg.write_csv;
  j["output"] = out;
  return j;
}

NetworkGraph graph_from_config(const AnalysisConfig& cfg) {
  if (cfg.adjacency) return build_laplacian(*cfg.adjacency);
  return graph_from_laplacian(*cfg.laplacian);
}

CMat load_complex_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open matrix file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::ConfigParse,
         "matrix file is not valid JSON (" + path + "): " + e.what());
  }
  if (!j.contains("re"))
    fail(ErrorCode::ConfigParse, "matrix file needs a \"re\" block: " + path);
  const Mat re = parse_matrix(j.at("re"), "re");
  Mat im = Mat::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = parse_matrix(j.at("im"), "im");
    if (im.rows() != re.rows() || im.cols() != re.cols())
      fail(ErrorCode::ConfigParse, "re/im blocks must have equal shape");
  }
  CMat M(re.rows(), re.cols());
  M.real() = re;
  M.imag() = im;
  return M;
}

}  // namespace margins
