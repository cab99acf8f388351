#pragma once

#include <utility>
#include <vector>

#include "margins/freqresp.hpp"
#include "margins/model.hpp"
#include "margins/types.hpp"

namespace margins {

// Frequency-sweep configuration. omega_min/omega_max <= 0 selects the
// automatic log-spaced window [1e-4 * rho, 1e4 * rho] where rho scales with
// the spectral radii of the open- and closed-loop dynamics.
struct SweepConfig {
  int grid_points = 2000;
  double omega_min = 0.0;
  double omega_max = 0.0;
  double bisection_tol = 1e-10;
  int refinement_max_iter = 200;
  double max_rel_jump = 5.0;
  bool parallel = true;
};

// One evaluated grid point of a loop's frequency response.
struct SweepSample {
  double omega = 0.0;
  Vec singular_values;     // descending; empty when near_pole
  double lam_min_sym = 0;  // smallest eigenvalue of G + G*
  double y_min_eig = 0.0;  // eigenvalue extremes of Y = -j/2 (G - G*)
  double y_max_eig = 0.0;
  double y_small_signed = 0.0;  // signed eigenvalue of Y of least magnitude
  bool near_pole = false;
};

enum class CriticalKind { Phase, Gain };

// Frequencies at which a loop can be driven to the stability boundary by the
// corresponding perturbation class. `intervals` are half-open (lo, hi] runs
// of qualifying grid points, `grid` the frequencies to hand to the
// optimizer, and `boundary_roots` the bisected crossing frequencies.
struct CriticalSet {
  int p = 0;
  CriticalKind kind = CriticalKind::Phase;
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> grid;
  std::vector<double> boundary_roots;
  bool empty() const { return intervals.empty() && boundary_roots.empty(); }
};

// Log-spaced frequency grid for the loop (includes omega = 0 only when A is
// nonsingular, where the response has a finite DC limit).
std::vector<double> build_grid(const TransformedLoop& loop,
                               const SweepConfig& config);

// Evaluates the response at every grid frequency. The parallel variant
// fans out across frequencies with OpenMP; the serial variant is the
// reference implementation and must produce identical output.
std::vector<SweepSample> sweep_loop(const TransformedLoop& loop,
                                    const std::vector<double>& grid,
                                    const SweepConfig& config);
std::vector<SweepSample> sweep_loop_serial(const TransformedLoop& loop,
                                           const std::vector<double>& grid);

// Frequencies where the unit circle meets the singular-value band
// (sigma_min <= 1 <= sigma_max): the phase problem is feasible there.
CriticalSet phase_critical_set(const TransformedLoop& loop,
                               const SweepConfig& config);

// Candidate frequencies for the gain problem: the numerical-range condition
// lam_min(Y) * lam_max(Y) <= 0 together with lam_min(G + G*) < 0. Final
// confirmation is delegated to optimizer feasibility.
CriticalSet gain_critical_candidates(const TransformedLoop& loop,
                                     const SweepConfig& config);

// Shared classification path on precomputed samples (used by the sweep CSV
// writer so the dump matches the critical sets exactly).
CriticalSet classify_samples(const TransformedLoop& loop,
                             const std::vector<SweepSample>& samples,
                             CriticalKind kind, const SweepConfig& config);

// Pointwise membership predicates behind the classification.
bool phase_qualifies(const SweepSample& sample);
bool gain_qualifies(const SweepSample& sample);

}  // namespace margins
