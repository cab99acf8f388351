#pragma once

#include <string>
#include <utility>
#include <vector>

#include "margins/model.hpp"
#include "margins/optimizer.hpp"
#include "margins/sweep.hpp"
#include "margins/types.hpp"

namespace margins {

struct MarginConfig {
  SweepConfig sweep;
  OptimizerConfig optimizer;
  int golden_iters = 60;
};

// One optimizer evaluation on the frequency grid of a loop. Fields are NaN
// where the corresponding problem is undefined or did not converge.
struct PerLoopGridRow {
  double omega = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double phi = 0.0;
  double g = 0.0;
  double tau_candidate = 0.0;
};

struct PerLoopDetail {
  int p = 0;
  Complex lambda_p;
  std::vector<std::pair<double, double>> phase_intervals;
  std::vector<std::pair<double, double>> gain_intervals;
  std::vector<double> phase_boundary_roots;
  std::vector<double> gain_boundary_roots;
  double phi_star = 0.0;  // +inf when the loop imposes no phase constraint
  double phi_omega = 0.0;
  double tau_star = 0.0;
  double tau_omega = 0.0;
  double g_star = 0.0;
  double g_omega = 0.0;
  bool phase_certified = false;
  bool gain_certified = false;
  CVec z_phase;  // optimizer minimizers at the refined frequencies
  CVec z_gain;
  std::vector<PerLoopGridRow> grid_rows;
};

struct MarginReport {
  double phase_margin_rad = 0.0;
  std::pair<double, double> phase_interval;     // [-phi*, phi*]
  double gain_margin = 0.0;                     // log radius g*
  std::pair<double, double> gain_sv_interval;   // [exp(-g*), exp(g*)]
  double delay_margin_s = 0.0;
  bool phase_independent = false;
  bool gain_independent = false;
  bool delay_independent = false;
  int phase_p = 0;  // loop attaining each margin (0 when independent)
  int gain_p = 0;
  int delay_p = 0;
  double phase_omega = 0.0;
  double gain_omega = 0.0;
  double delay_omega = 0.0;
  std::vector<PerLoopDetail> per_loop;
  std::vector<std::string> warnings;
};

// Margin of a single loop's phase problem objective: phi = acos(-obj / 2),
// with the argument clamped to [-1, 1]. Clamp overshoot is reported so the
// caller can warn when it exceeds 1e-9.
double phase_of_objective(double objective, double* clamp_overshoot = nullptr);

// Margin of the gain problem objective: g = acosh(max(obj / 2, 1)).
double gain_of_objective(double objective);

// Full margin analysis over precomputed loops (assumptions are the caller's
// responsibility on this overload).
MarginReport compute_margins(const std::vector<TransformedLoop>& loops,
                             const MarginConfig& config = {});

// Checks assumptions, builds the transformed loops, and analyzes them.
MarginReport compute_margins(const AgentModel& model, const NetworkGraph& graph,
                             const MarginConfig& config = {});

}  // namespace margins
