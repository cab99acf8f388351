#include "margins/margins.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>

#include "margins/errors.hpp"
#include "margins/freqresp.hpp"

namespace margins {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointEval {
  bool ok = false;
  double value = kInf;  // phi (rad) or g (log radius)
  bool certified = false;
  CVec z;
  double clamp_overshoot = 0.0;
};

PointEval eval_phase_point(const TransformedLoop& loop, double omega,
                           const OptimizerConfig& cfg, std::uint64_t seed,
                           const CVec* warm) {
  PointEval out;
  try {
    const LoopResponse r = eval_loop(loop, omega);
    const EmbeddedProblem prob = embed_phase(r.G);
    const auto sol = solve_kkt(prob, r.G, cfg, seed, warm);
    if (!sol || !sol->converged) return out;
    out.ok = true;
    out.value = phase_of_objective(sol->objective, &out.clamp_overshoot);
    out.certified = sol->certified;
    out.z = sol->z;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NearPole) throw;
  }
  return out;
}

PointEval eval_gain_point(const TransformedLoop& loop, double omega,
                          const OptimizerConfig& cfg, std::uint64_t seed,
                          const CVec* warm) {
  PointEval out;
  try {
    const LoopResponse r = eval_loop(loop, omega);
    const EmbeddedProblem prob = embed_gain(r.G);
    const auto sol = solve_kkt(prob, r.G, cfg, seed, warm);
    if (!sol || !sol->converged) return out;
    out.ok = true;
    out.value = gain_of_objective(sol->objective);
    out.certified = sol->certified;
    out.z = sol->z;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NearPole) throw;
  }
  return out;
}

std::uint64_t omega_seed(std::uint64_t tag, int p, double omega) {
  return derive_seed(tag, static_cast<std::uint64_t>(p),
                     std::bit_cast<std::uint64_t>(omega), 0);
}

struct Refined {
  double omega = kNaN;
  double score = kInf;
  PointEval eval;
};

// Golden-section minimization of `score(eval(omega), omega)` over [lo, hi],
// warm-starting each optimizer call from the best z seen so far.
Refined golden_refine(
    double lo, double hi, int iters,
    const std::function<PointEval(double, const CVec*)>& ev,
    const std::function<double(const PointEval&, double)>& score) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  CVec warm;
  bool have_warm = false;
  const auto probe = [&](double w) {
    PointEval e = ev(w, have_warm ? &warm : nullptr);
    if (e.ok && e.z.size() > 0) {
      warm = e.z;
      have_warm = true;
    }
    const double s = e.ok ? score(e, w) : kInf;
    return std::make_pair(s, e);
  };
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  auto [f1, e1] = probe(x1);
  auto [f2, e2] = probe(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      e2 = e1;
      x1 = hi - gr * (hi - lo);
      std::tie(f1, e1) = probe(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      e1 = e2;
      x2 = lo + gr * (hi - lo);
      std::tie(f2, e2) = probe(x2);
    }
  }
  Refined r;
  if (f1 <= f2) {
    r.omega = x1;
    r.score = f1;
    r.eval = e1;
  } else {
    r.omega = x2;
    r.score = f2;
    r.eval = e2;
  }
  return r;
}

// Groups optimizer-grid indices into runs belonging to one interval each;
// isolated boundary roots become singleton groups.
std::vector<std::vector<int>> group_grid(const CriticalSet& cs) {
  std::vector<std::vector<int>> groups;
  std::vector<char> used(cs.grid.size(), 0);
  for (const auto& [lo, hi] : cs.intervals) {
    std::vector<int> g;
    for (int k = 0; k < static_cast<int>(cs.grid.size()); ++k) {
      const double w = cs.grid[k];
      const double eps = 1e-9 * (1.0 + std::abs(w));
      if (!used[k] && w >= lo - eps && w <= hi + eps) {
        g.push_back(k);
        used[k] = 1;
      }
    }
    if (!g.empty()) groups.push_back(std::move(g));
  }
  for (int k = 0; k < static_cast<int>(cs.grid.size()); ++k)
    if (!used[k]) groups.push_back({k});
  return groups;
}

struct LoopMinimum {
  bool found = false;
  double omega = kNaN;
  double score = kInf;
  PointEval eval;
};

// Scans grouped grid evaluations for local minima of `score` and refines
// each with golden sections; returns the loop-global minimum.
LoopMinimum minimize_over_grid(
    const CriticalSet& cs, const std::vector<PointEval>& evals, int iters,
    const std::function<PointEval(double, const CVec*)>& ev,
    const std::function<double(const PointEval&, double)>& score) {
  LoopMinimum best;
  const auto consider = [&](const Refined& r) {
    if (!r.eval.ok) return;
    if (!best.found || r.score < best.score) {
      best.found = true;
      best.omega = r.omega;
      best.score = r.score;
      best.eval = r.eval;
    }
  };

  for (const auto& group : group_grid(cs)) {
    for (std::size_t gi = 0; gi < group.size(); ++gi) {
      const int k = group[gi];
      if (!evals[k].ok) continue;
      const double sk = score(evals[k], cs.grid[k]);
      const double sl =
          gi > 0 && evals[group[gi - 1]].ok
              ? score(evals[group[gi - 1]], cs.grid[group[gi - 1]])
              : kInf;
      const double sr =
          gi + 1 < group.size() && evals[group[gi + 1]].ok
              ? score(evals[group[gi + 1]], cs.grid[group[gi + 1]])
              : kInf;
      if (sk > sl || sk > sr) continue;  // not a local minimum

      const double lo = gi > 0 ? cs.grid[group[gi - 1]] : cs.grid[k];
      const double hi =
          gi + 1 < group.size() ? cs.grid[group[gi + 1]] : cs.grid[k];
      if (hi - lo <= 1e-12 * (1.0 + std::abs(lo))) {
        Refined r;
        r.omega = cs.grid[k];
        r.score = sk;
        r.eval = evals[k];
        consider(r);
      } else {
        consider(golden_refine(lo, hi, iters, ev, score));
        // Keep the grid point itself as a fallback candidate in case the
        // refinement wandered onto an infeasible patch.
        Refined r;
        r.omega = cs.grid[k];
        r.score = sk;
        r.eval = evals[k];
        consider(r);
      }
    }
  }
  return best;
}

void append_rows(std::vector<PerLoopGridRow>& rows, const TransformedLoop& loop,
                 const CriticalSet& cs, const std::vector<PointEval>& evals,
                 bool is_phase) {
  for (std::size_t k = 0; k < cs.grid.size(); ++k) {
    const double w = cs.grid[k];
    PerLoopGridRow* row = nullptr;
    for (auto& r : rows) {
      if (std::abs(r.omega - w) <= 1e-12 * (1.0 + std::abs(w))) {
        row = &r;
        break;
      }
    }
    if (!row) {
      rows.push_back(PerLoopGridRow{w, kNaN, kNaN, kNaN, kNaN, kNaN});
      row = &rows.back();
      try {
        const LoopResponse resp = eval_loop(loop, w);
        row->sigma_max = resp.sigma_max();
        row->sigma_min = resp.sigma_min();
      } catch (const Error&) {
      }
    }
    if (is_phase) {
      row->phi = evals[k].ok ? evals[k].value : kNaN;
      row->tau_candidate =
          evals[k].ok && w > 0.0 ? evals[k].value / w : kNaN;
    } else {
      row->g = evals[k].ok ? evals[k].value : kNaN;
    }
  }
}

PerLoopDetail analyze_loop(const TransformedLoop& loop,
                           const MarginConfig& cfg,
                           std::vector<std::string>& warnings) {
  PerLoopDetail d;
  d.p = loop.p;
  d.lambda_p = loop.lambda_p;
  d.phi_star = kInf;
  d.phi_omega = kNaN;
  d.tau_star = kInf;
  d.tau_omega = kNaN;
  d.g_star = kInf;
  d.g_omega = kNaN;

  const std::vector<double> grid = build_grid(loop, cfg.sweep);
  const std::vector<SweepSample> samples = sweep_loop(loop, grid, cfg.sweep);
  const CriticalSet pcs =
      classify_samples(loop, samples, CriticalKind::Phase, cfg.sweep);
  const CriticalSet gcs =
      classify_samples(loop, samples, CriticalKind::Gain, cfg.sweep);
  d.phase_intervals = pcs.intervals;
  d.gain_intervals = gcs.intervals;
  d.phase_boundary_roots = pcs.boundary_roots;
  d.gain_boundary_roots = gcs.boundary_roots;

  // Optimizer fan-out across the critical grids.
  std::vector<PointEval> pe(pcs.grid.size()), ge(gcs.grid.size());
  {
    const int np = static_cast<int>(pcs.grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.sweep.parallel)
#endif
    for (int i = 0; i < np; ++i)
      pe[i] = eval_phase_point(loop, pcs.grid[i], cfg.optimizer,
                               omega_seed(101, loop.p, pcs.grid[i]), nullptr);
    const int ng = static_cast<int>(gcs.grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.sweep.parallel)
#endif
    for (int i = 0; i < ng; ++i)
      ge[i] = eval_gain_point(loop, gcs.grid[i], cfg.optimizer,
                              omega_seed(202, loop.p, gcs.grid[i]), nullptr);
  }

  double max_clamp = 0.0;
  for (const auto& e : pe) max_clamp = std::max(max_clamp, e.clamp_overshoot);

  const auto phase_ev = [&](double w, const CVec* warm) {
    PointEval e = eval_phase_point(loop, w, cfg.optimizer,
                                   omega_seed(303, loop.p, w), warm);
    max_clamp = std::max(max_clamp, e.clamp_overshoot);
    return e;
  };
  const auto gain_ev = [&](double w, const CVec* warm) {
    return eval_gain_point(loop, w, cfg.optimizer,
                           omega_seed(404, loop.p, w), warm);
  };
  const auto phi_score = [](const PointEval& e, double) { return e.value; };
  const auto tau_score = [](const PointEval& e, double w) {
    return w > 0.0 ? e.value / w : kInf;
  };
  const auto g_score = [](const PointEval& e, double) { return e.value; };

  const LoopMinimum phi_min =
      minimize_over_grid(pcs, pe, cfg.golden_iters, phase_ev, phi_score);
  const LoopMinimum tau_min =
      minimize_over_grid(pcs, pe, cfg.golden_iters, phase_ev, tau_score);
  const LoopMinimum g_min =
      minimize_over_grid(gcs, ge, cfg.golden_iters, gain_ev, g_score);

  if (phi_min.found) {
    d.phi_star = phi_min.eval.value;
    d.phi_omega = phi_min.omega;
    d.phase_certified = phi_min.eval.certified;
    d.z_phase = phi_min.eval.z;
    if (!phi_min.eval.certified) {
      std::ostringstream os;
      os << "p=" << loop.p << " omega=" << phi_min.omega
         << ": no certified global phase optimum; using best converged value";
      warnings.push_back(os.str());
    }
  }
  if (tau_min.found && std::isfinite(tau_min.score)) {
    d.tau_star = tau_min.score;
    d.tau_omega = tau_min.omega;
  }
  if (g_min.found) {
    d.g_star = g_min.eval.value;
    d.g_omega = g_min.omega;
    d.gain_certified = g_min.eval.certified;
    d.z_gain = g_min.eval.z;
    if (!g_min.eval.certified) {
      std::ostringstream os;
      os << "p=" << loop.p << " omega=" << g_min.omega
         << ": no certified global gain optimum; using best converged value";
      warnings.push_back(os.str());
    }
  }
  if (max_clamp > 1e-9) {
    std::ostringstream os;
    os << "p=" << loop.p << ": acos argument clamped by " << max_clamp;
    warnings.push_back(os.str());
  }
  if (!pcs.empty() && !phi_min.found) {
    std::ostringstream os;
    os << "p=" << loop.p
       << ": phase feasibility detected on the grid but no optimizer run "
          "converged";
    warnings.push_back(os.str());
  }

  append_rows(d.grid_rows, loop, pcs, pe, /*is_phase=*/true);
  append_rows(d.grid_rows, loop, gcs, ge, /*is_phase=*/false);
  std::sort(d.grid_rows.begin(), d.grid_rows.end(),
            [](const PerLoopGridRow& a, const PerLoopGridRow& b) {
              return a.omega < b.omega;
            });
  return d;
}

}  // namespace

double phase_of_objective(double objective, double* clamp_overshoot) {
  double c = -objective / 2.0;
  double overshoot = 0.0;
  if (c > 1.0) {
    overshoot = c - 1.0;
    c = 1.0;
  } else if (c < -1.0) {
    overshoot = -1.0 - c;
    c = -1.0;
  }
  if (clamp_overshoot) *clamp_overshoot = overshoot;
  return std::acos(c);
}

double gain_of_objective(double objective) {
  return std::acosh(std::max(objective / 2.0, 1.0));
}

MarginReport compute_margins(const std::vector<TransformedLoop>& loops,
                             const MarginConfig& config) {
  MarginReport r;
  r.phase_margin_rad = kInf;
  r.gain_margin = kInf;
  r.delay_margin_s = kInf;
  r.phase_omega = kNaN;
  r.gain_omega = kNaN;
  r.delay_omega = kNaN;

  if (loops.empty()) {
    r.phase_independent = true;
    r.gain_independent = true;
    r.delay_independent = true;
    r.phase_interval = {-kPi, kPi};
    r.gain_sv_interval = {0.0, kInf};
    r.warnings.push_back(
        "network has no consensus loops (single agent); all margins are "
        "unbounded");
    return r;
  }

  for (const TransformedLoop& loop : loops)
    r.per_loop.push_back(analyze_loop(loop, config, r.warnings));

  bool any_phase_set = false;
  bool any_gain_confirmed = false;
  for (const PerLoopDetail& d : r.per_loop) {
    if (!d.phase_intervals.empty() || !d.phase_boundary_roots.empty())
      any_phase_set = true;
    if (std::isfinite(d.g_star)) any_gain_confirmed = true;

    if (d.phi_star < r.phase_margin_rad) {
      r.phase_margin_rad = d.phi_star;
      r.phase_p = d.p;
      r.phase_omega = d.phi_omega;
    }
    if (d.tau_star < r.delay_margin_s) {
      r.delay_margin_s = d.tau_star;
      r.delay_p = d.p;
      r.delay_omega = d.tau_omega;
    }
    if (d.g_star < r.gain_margin) {
      r.gain_margin = d.g_star;
      r.gain_p = d.p;
      r.gain_omega = d.g_omega;
    }
  }

  r.phase_independent = !any_phase_set;
  r.gain_independent = !any_gain_confirmed;
  const bool a_hurwitz = is_hurwitz(loops.front().model.A.cast<Complex>());
  r.delay_independent = r.phase_independent && a_hurwitz;

  if (std::isfinite(r.phase_margin_rad)) {
    r.phase_interval = {-r.phase_margin_rad, r.phase_margin_rad};
  } else {
    r.phase_interval = {-kPi, kPi};
  }
  if (std::isfinite(r.gain_margin)) {
    r.gain_sv_interval = {std::exp(-r.gain_margin), std::exp(r.gain_margin)};
  } else {
    r.gain_sv_interval = {0.0, kInf};
  }
  return r;
}

MarginReport compute_margins(const AgentModel& model, const NetworkGraph& graph,
                             const MarginConfig& config) {
  return compute_margins(transformed_loops(model, graph), config);
}

}  // namespace margins
