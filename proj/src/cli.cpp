#include "margins/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "margins/errors.hpp"
#include "margins/perturb.hpp"
#include "margins/sweep.hpp"
#include "margins/verify.hpp"

namespace margins {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ordered_json json_num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "infinity" : "-infinity";
  return x;
}

std::string csv_num(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

AnalysisConfig load_effective_config(const CliOptions& options) {
  AnalysisConfig cfg = load_config(options.config_path);
  if (options.seed) cfg.margins.optimizer.seed = *options.seed;
  if (options.grid_points) cfg.margins.sweep.grid_points = *options.grid_points;
  if (!options.out_dir.empty()) cfg.out_dir = options.out_dir;
  if (options.csv) cfg.write_csv = true;
  return cfg;
}

fs::path ensure_out_dir(const AnalysisConfig& cfg) {
  const fs::path dir =
      cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory " + dir.string());
  return dir;
}

fs::path resolve_near_config(const std::string& path,
                             const std::string& config_path) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  const fs::path base = fs::path(config_path).parent_path();
  if (!base.empty() && fs::exists(base / p)) return base / p;
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

// Builds the transformed loops, mapping an assumption failure onto exit
// code 2 with the offending loop named on stderr.
bool checked_loops(const AnalysisConfig& cfg, NetworkGraph& graph,
                   std::vector<TransformedLoop>& loops) {
  graph = graph_from_config(cfg);
  try {
    loops = transformed_loops(cfg.model, graph);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AssumptionViolation) {
      std::cerr << "assumption failure: " << e.what() << "\n";
      return false;
    }
    throw;
  }
  return true;
}

void write_margin_csv(const fs::path& path, const MarginReport& report) {
  std::string csv = "p,omega,sigma_max,sigma_min,phi,g,tau_candidate\n";
  for (const PerLoopDetail& d : report.per_loop) {
    for (const PerLoopGridRow& row : d.grid_rows) {
      csv += std::to_string(d.p) + "," + csv_num(row.omega) + "," +
             csv_num(row.sigma_max) + "," + csv_num(row.sigma_min) + "," +
             csv_num(row.phi) + "," + csv_num(row.g) + "," +
             csv_num(row.tau_candidate) + "\n";
    }
  }
  write_text(path, csv);
}

void write_trajectory_csv(const fs::path& path, const SimResult& sim) {
  if (sim.states.empty()) {
    write_text(path, "time,agent\n");
    return;
  }
  const int n = static_cast<int>(sim.states.front().cols());
  std::string csv = "time,agent";
  for (int k = 0; k < n; ++k) {
    csv += ",x" + std::to_string(k + 1) + "_re";
    csv += ",x" + std::to_string(k + 1) + "_im";
  }
  csv += "\n";
  for (std::size_t s = 0; s < sim.states.size(); ++s) {
    const CMat& X = sim.states[s];
    for (int i = 0; i < X.rows(); ++i) {
      csv += csv_num(sim.times[s]) + "," + std::to_string(i);
      for (int k = 0; k < n; ++k) {
        csv += "," + csv_num(X(i, k).real());
        csv += "," + csv_num(X(i, k).imag());
      }
      csv += "\n";
    }
  }
  write_text(path, csv);
}

const char* verdict_name(SimVerdict v) {
  switch (v) {
    case SimVerdict::Converged:
      return "Converged";
    case SimVerdict::Diverged:
      return "Diverged";
    case SimVerdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

}  // namespace

ordered_json report_to_json(const MarginReport& report,
                            const AnalysisConfig& config) {
  ordered_json j;
  j["tool_version"] = kToolVersion;
  j["phase_margin_rad"] = json_num(report.phase_margin_rad);
  j["phase_interval"] = ordered_json::array(
      {json_num(report.phase_interval.first),
       json_num(report.phase_interval.second)});
  j["gain_margin"] = json_num(report.gain_margin);
  j["gain_sv_interval"] = ordered_json::array(
      {json_num(report.gain_sv_interval.first),
       json_num(report.gain_sv_interval.second)});
  j["delay_margin_s"] = json_num(report.delay_margin_s);
  j["phase_independent"] = report.phase_independent;
  j["gain_independent"] = report.gain_independent;
  j["delay_independent"] = report.delay_independent;
  j["critical"] = {
      {"phase",
       {{"p", report.phase_p}, {"omega", json_num(report.phase_omega)}}},
      {"gain", {{"p", report.gain_p}, {"omega", json_num(report.gain_omega)}}},
      {"delay",
       {{"p", report.delay_p}, {"omega", json_num(report.delay_omega)}}}};

  ordered_json loops = ordered_json::array();
  for (const PerLoopDetail& d : report.per_loop) {
    ordered_json jd;
    jd["p"] = d.p;
    jd["lambda_re"] = d.lambda_p.real();
    jd["lambda_im"] = d.lambda_p.imag();
    const auto intervals_json = [](const auto& ivs) {
      ordered_json arr = ordered_json::array();
      for (const auto& [lo, hi] : ivs)
        arr.push_back(ordered_json::array({json_num(lo), json_num(hi)}));
      return arr;
    };
    const auto roots_json = [](const std::vector<double>& rs) {
      ordered_json arr = ordered_json::array();
      for (double r : rs) arr.push_back(json_num(r));
      return arr;
    };
    jd["phase_intervals"] = intervals_json(d.phase_intervals);
    jd["gain_intervals"] = intervals_json(d.gain_intervals);
    jd["phase_boundary_roots"] = roots_json(d.phase_boundary_roots);
    jd["gain_boundary_roots"] = roots_json(d.gain_boundary_roots);
    jd["phi_star"] = json_num(d.phi_star);
    jd["phi_omega"] = json_num(d.phi_omega);
    jd["tau_star"] = json_num(d.tau_star);
    jd["tau_omega"] = json_num(d.tau_omega);
    jd["g_star"] = json_num(d.g_star);
    jd["g_omega"] = json_num(d.g_omega);
    jd["phase_certified"] = d.phase_certified;
    jd["gain_certified"] = d.gain_certified;
    ordered_json rows = ordered_json::array();
    for (const PerLoopGridRow& row : d.grid_rows) {
      rows.push_back({{"omega", json_num(row.omega)},
                      {"sigma_max", json_num(row.sigma_max)},
                      {"sigma_min", json_num(row.sigma_min)},
                      {"phi", json_num(row.phi)},
                      {"g", json_num(row.g)},
                      {"tau_candidate", json_num(row.tau_candidate)}});
    }
    jd["grid"] = rows;
    loops.push_back(jd);
  }
  j["per_loop"] = loops;

  ordered_json warnings = ordered_json::array();
  for (const std::string& w : report.warnings) warnings.push_back(w);
  j["warnings"] = warnings;
  j["config_echo"] = config_to_json(config);
  return j;
}

int cmd_analyze(const CliOptions& options) {
  const AnalysisConfig cfg = load_effective_config(options);
  NetworkGraph graph;
  std::vector<TransformedLoop> loops;
  if (!checked_loops(cfg, graph, loops)) return 2;

  const MarginReport report = compute_margins(loops, cfg.margins);
  const fs::path dir = ensure_out_dir(cfg);
  write_text(dir / "report.json", report_to_json(report, cfg).dump(2) + "\n");
  if (cfg.write_csv) write_margin_csv(dir / "sweep.csv", report);

  std::cout << "phase_margin_rad: "
            << (report.phase_independent ? "infinity"
                                         : csv_num(report.phase_margin_rad))
            << "\n"
            << "gain_margin: "
            << (report.gain_independent ? "infinity"
                                        : csv_num(report.gain_margin))
            << "\n"
            << "delay_margin_s: "
            << (std::isinf(report.delay_margin_s)
                    ? "infinity"
                    : csv_num(report.delay_margin_s))
            << "\n"
            << "warnings: " << report.warnings.size() << "\n"
            << "report: " << (dir / "report.json").string() << "\n";

  if (options.strict && !report.warnings.empty()) return 3;
  return 0;
}

int cmd_validate(const CliOptions& options) {
  const AnalysisConfig cfg = load_effective_config(options);
  NetworkGraph graph;
  std::vector<TransformedLoop> loops;
  if (!checked_loops(cfg, graph, loops)) return 2;
  const fs::path dir = ensure_out_dir(cfg);

  std::vector<SimScenario> scenarios = cfg.simulate;
  if (options.tau) {
    SimScenario s;
    s.tau = *options.tau;
    s.horizon = cfg.sim_horizon;
    s.dt = cfg.sim_dt;
    scenarios.push_back(s);
  }
  if (!options.delta_path.empty()) {
    SimScenario s;
    s.delta_path = options.delta_path;
    s.horizon = cfg.sim_horizon;
    s.dt = cfg.sim_dt;
    scenarios.push_back(s);
  }
  if (scenarios.empty()) {
    std::cout << "nothing to validate: no scenarios in config and no --tau or "
                 "--delta given\n";
    return 0;
  }

  for (std::size_t idx = 0; idx < scenarios.size(); ++idx) {
    const SimScenario& sc = scenarios[idx];
    const Mat x0 =
        sc.x0 ? *sc.x0 : default_initial_states(graph.size(), cfg.model.n());
    SimResult sim;
    std::string label;
    if (!sc.delta_path.empty()) {
      const CMat M = load_complex_matrix(
          resolve_near_config(sc.delta_path, options.config_path).string());
      const Perturbation delta = polar_decompose(M);
      std::cout << "scenario " << idx << ": delta file " << sc.delta_path
                << " (gain " << csv_num(delta.gain) << ", phase "
                << csv_num(delta.phase) << ")\n";
      for (const TransformedLoop& loop : loops) {
        const auto [stable, abscissa] = perturbed_loop_stable(loop, delta);
        std::cout << "  p=" << loop.p << " perturbed loop "
                  << (stable ? "stable" : "unstable") << " (abscissa "
                  << csv_num(abscissa) << ")\n";
      }
      sim = simulate_perturbed_consensus(cfg.model, graph, delta, x0,
                                         sc.horizon, sc.dt);
      label = "delta" + std::to_string(idx);
    } else {
      const double tau = *sc.tau;
      const double dt = tau > 0.0 ? std::min(sc.dt, tau / 10.0) : sc.dt;
      std::cout << "scenario " << idx << ": input delay tau=" << csv_num(tau)
                << " s\n";
      sim = simulate_delayed_consensus(cfg.model, graph, tau, x0, sc.horizon,
                                       dt);
      label = "tau" + std::to_string(idx);
    }
    std::cout << "  verdict: " << verdict_name(sim.verdict)
              << " (final disagreement " << csv_num(sim.disagreement.back())
              << " at t=" << csv_num(sim.times.back()) << ")\n";
    write_trajectory_csv(dir / ("trajectory_" + label + ".csv"), sim);
  }
  return 0;
}

int cmd_sweep(const CliOptions& options) {
  const AnalysisConfig cfg = load_effective_config(options);
  const NetworkGraph graph = graph_from_config(cfg);
  // Diagnostic path: sweeps are useful outside the validated envelope, so
  // the loops are built without the assumption gate.
  const std::vector<TransformedLoop> loops =
      transformed_loops_unchecked(cfg.model, graph);
  const fs::path dir = ensure_out_dir(cfg);

  const int n = cfg.model.n();
  std::string csv = "p,omega";
  for (int k = 0; k < n; ++k) csv += ",sigma_" + std::to_string(k + 1);
  csv += ",lam_min_sym,det_y_proxy,in_phase_set,in_gain_set\n";

  for (const TransformedLoop& loop : loops) {
    const std::vector<double> grid = build_grid(loop, cfg.margins.sweep);
    const std::vector<SweepSample> samples =
        sweep_loop(loop, grid, cfg.margins.sweep);
    for (const SweepSample& s : samples) {
      csv += std::to_string(loop.p) + "," + csv_num(s.omega);
      for (int k = 0; k < n; ++k)
        csv += "," + (s.near_pole ? std::string()
                                  : csv_num(s.singular_values(k)));
      csv += "," + csv_num(s.lam_min_sym) + "," + csv_num(s.y_small_signed);
      csv += std::string(",") + (phase_qualifies(s) ? "1" : "0");
      csv += std::string(",") + (gain_qualifies(s) ? "1" : "0");
      csv += "\n";
    }
  }
  const fs::path path = dir / "response.csv";
  write_text(path, csv);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace margins
