#pragma once

#include <utility>
#include <vector>

#include "margins/model.hpp"
#include "margins/perturb.hpp"
#include "margins/types.hpp"

namespace margins {

enum class SimVerdict { Converged, Diverged, Inconclusive };

// Trajectory record of a consensus simulation. Long runs are stored at a
// uniform stride (at most ~20000 snapshots); `disagreement` is sampled at
// the same times as `states`.
struct SimResult {
  std::vector<double> times;
  std::vector<CMat> states;  // per snapshot: N x n agent states
  std::vector<double> disagreement;
  SimVerdict verdict = SimVerdict::Inconclusive;
  CVec final_consensus_value;  // mean agent state when Converged
};

struct SimTolerances {
  double consensus_tol = 0.0;  // <= 0: defaults to 1e-6 * (1 + ||x0||)
  double divergence_factor = 1e3;
};

constexpr double kDefaultHorizon = 60.0;
constexpr double kDefaultDt = 1e-3;

// Spectral stability of the perturbed transformed loop
// A - c lambda_p B K Delta: returns (stable, spectral abscissa).
std::pair<bool, double> perturbed_loop_stable(const TransformedLoop& loop,
                                              const Perturbation& delta);

// sigma_min(I + G_p(j omega) Delta): zero exactly when Delta is
// destabilizing at omega.
double destabilization_residual(const TransformedLoop& loop, double omega,
                                const Perturbation& delta);

// Fixed-step 4th-order integration of the consensus network with input
// delay tau; the history is constant at x0 on [-tau, 0] and delayed states
// are linearly interpolated. x0 has one row per agent.
SimResult simulate_delayed_consensus(const AgentModel& model,
                                     const NetworkGraph& graph, double tau,
                                     const Mat& x0,
                                     double horizon = kDefaultHorizon,
                                     double dt = kDefaultDt,
                                     const SimTolerances& tol = {});

// Delay-free complex-coefficient simulation of the network with feedback
// perturbation Delta applied in every loop.
SimResult simulate_perturbed_consensus(const AgentModel& model,
                                       const NetworkGraph& graph,
                                       const Perturbation& delta,
                                       const Mat& x0,
                                       double horizon = kDefaultHorizon,
                                       double dt = kDefaultDt,
                                       const SimTolerances& tol = {});

// Deterministic default initial condition used by the CLI when a config
// does not supply one.
Mat default_initial_states(int agents, int n);

}  // namespace margins
