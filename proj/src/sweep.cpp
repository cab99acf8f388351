#include "margins/sweep.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "margins/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace margins {

namespace {

double spectral_radius(const CMat& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::ComplexEigenSolver<CMat> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SweepSample eval_sample(const TransformedLoop& loop, double omega) {
  SweepSample s;
  s.omega = omega;
  try {
    const LoopResponse r = eval_loop(loop, omega);
    s.singular_values = r.singular_values;
    Eigen::SelfAdjointEigenSolver<CMat> es_sym(r.G + r.G.adjoint());
    s.lam_min_sym = es_sym.eigenvalues()(0);
    Eigen::SelfAdjointEigenSolver<CMat> es_y(r.Y);
    const Vec ye = es_y.eigenvalues();
    s.y_min_eig = ye(0);
    s.y_max_eig = ye(ye.size() - 1);
    int small = 0;
    for (int i = 1; i < ye.size(); ++i)
      if (std::abs(ye(i)) < std::abs(ye(small))) small = i;
    s.y_small_signed = ye(small);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NearPole) throw;
    s.near_pole = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.lam_min_sym = nan;
    s.y_min_eig = nan;
    s.y_max_eig = nan;
    s.y_small_signed = nan;
  }
  return s;
}

bool qualifies(const SweepSample& s, CriticalKind kind) {
  return kind == CriticalKind::Phase ? phase_qualifies(s) : gain_qualifies(s);
}

// Scalar boundary function whose sign change brackets a set boundary.
//   Phase: sigma_max - 1 or sigma_min - 1 (whichever flipped).
//   Gain: signed smallest-magnitude eigenvalue of Y (det Y root).
enum class BoundaryFn { SigmaMax, SigmaMin, DetY };

bool boundary_value(const TransformedLoop& loop, double omega, BoundaryFn fn,
                    double& value) {
  try {
    const LoopResponse r = eval_loop(loop, omega);
    switch (fn) {
      case BoundaryFn::SigmaMax:
        value = r.sigma_max() - 1.0;
        return true;
      case BoundaryFn::SigmaMin:
        value = r.sigma_min() - 1.0;
        return true;
      case BoundaryFn::DetY: {
        Eigen::SelfAdjointEigenSolver<CMat> es(r.Y);
        const Vec ye = es.eigenvalues();
        int small = 0;
        for (int i = 1; i < ye.size(); ++i)
          if (std::abs(ye(i)) < std::abs(ye(small))) small = i;
        value = ye(small);
        return true;
      }
    }
  } catch (const Error&) {
  }
  return false;
}

double bisect_boundary(const TransformedLoop& loop, double lo, double hi,
                       BoundaryFn fn, const SweepConfig& cfg) {
  double flo;
  if (!boundary_value(loop, lo, fn, flo)) return 0.5 * (lo + hi);
  for (int it = 0; it < cfg.refinement_max_iter && hi - lo > cfg.bisection_tol;
       ++it) {
    const double mid = 0.5 * (lo + hi);
    double fm;
    if (!boundary_value(loop, mid, fn, fm)) break;
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Picks the boundary function that changed qualification between two
// adjacent phase samples.
BoundaryFn phase_crossing_fn(const SweepSample& a, const SweepSample& b) {
  if (a.near_pole || b.near_pole) return BoundaryFn::SigmaMax;
  const double amax = a.singular_values(0);
  const double bmax = b.singular_values(0);
  if ((amax - 1.0 <= 0.0) != (bmax - 1.0 <= 0.0)) return BoundaryFn::SigmaMax;
  return BoundaryFn::SigmaMin;
}

}  // namespace

std::vector<double> build_grid(const TransformedLoop& loop,
                               const SweepConfig& config) {
  if (config.grid_points < 2)
    fail(ErrorCode::GridTooCoarse, "grid_points must be at least 2");
  const AgentModel& m = loop.model;
  const CMat closed =
      m.A.cast<Complex>() - loop.sigma() * (m.B * m.K).cast<Complex>();
  const double rho = std::max(
      {1.0, spectral_radius(m.A.cast<Complex>()), spectral_radius(closed)});
  double lo = config.omega_min > 0.0 ? config.omega_min : 1e-4 * rho;
  double hi = config.omega_max > 0.0 ? config.omega_max : 1e4 * rho;
  if (!(hi > lo))
    fail(ErrorCode::GridTooCoarse, "empty frequency window requested");

  std::vector<double> grid;
  grid.reserve(config.grid_points + 1);
  if (resolvent_condition(m.A, 0.0) < 1e12) grid.push_back(0.0);
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (int i = 0; i < config.grid_points; ++i) {
    const double t = static_cast<double>(i) / (config.grid_points - 1);
    grid.push_back(std::pow(10.0, llo + t * (lhi - llo)));
  }
  return grid;
}

std::vector<SweepSample> sweep_loop_serial(const TransformedLoop& loop,
                                           const std::vector<double>& grid) {
  std::vector<SweepSample> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[i] = eval_sample(loop, grid[i]);
  return out;
}

std::vector<SweepSample> sweep_loop(const TransformedLoop& loop,
                                    const std::vector<double>& grid,
                                    const SweepConfig& config) {
  if (!config.parallel) return sweep_loop_serial(loop, grid);
  std::vector<SweepSample> out(grid.size());
  const int m = static_cast<int>(grid.size());
  bool failed = false;
  std::string failure;
  ErrorCode failure_code = ErrorCode::Io;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < m; ++i) {
    try {
      out[i] = eval_sample(loop, grid[i]);
    } catch (const Error& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (!failed) {
          failed = true;
          failure = e.what();
          failure_code = e.code();
        }
      }
    }
  }
  if (failed) fail(failure_code, failure);
  return out;
}

CriticalSet classify_samples(const TransformedLoop& loop,
                             const std::vector<SweepSample>& samples,
                             CriticalKind kind, const SweepConfig& config) {
  CriticalSet cs;
  cs.p = loop.p;
  cs.kind = kind;
  const int m = static_cast<int>(samples.size());
  if (m == 0) return cs;

  // Guard against undersampling: the top singular value must not jump by
  // more than max_rel_jump between adjacent finite samples.
  for (int i = 1; i < m; ++i) {
    if (samples[i].near_pole || samples[i - 1].near_pole) continue;
    const double a = samples[i - 1].singular_values(0);
    const double b = samples[i].singular_values(0);
    if (a > 1e-300 && b > 1e-300) {
      const double ratio = a > b ? a / b : b / a;
      if (ratio > config.max_rel_jump)
        fail(ErrorCode::GridTooCoarse,
             "singular-value jump ratio " + std::to_string(ratio) +
                 " between omega=" + std::to_string(samples[i - 1].omega) +
                 " and omega=" + std::to_string(samples[i].omega) +
                 " exceeds max_rel_jump; increase grid_points");
    }
  }

  std::vector<char> q(m);
  for (int i = 0; i < m; ++i) q[i] = qualifies(samples[i], kind) ? 1 : 0;

  // Exact-touch roots at sample points.
  for (int i = 0; i < m; ++i) {
    if (samples[i].near_pole) continue;
    if (kind == CriticalKind::Phase) {
      const Vec& sv = samples[i].singular_values;
      for (int k = 0; k < sv.size(); ++k)
        if (std::abs(sv(k) - 1.0) <= 1e-10)
          cs.boundary_roots.push_back(samples[i].omega);
    } else if (std::abs(samples[i].y_small_signed) <= 1e-14 &&
               samples[i].lam_min_sym < 0.0) {
      cs.boundary_roots.push_back(samples[i].omega);
    }
  }

  int i = 0;
  while (i < m) {
    if (!q[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < m && q[j + 1]) ++j;

    double lo, hi;
    if (i == 0) {
      lo = 0.0;  // the set reaches the lower edge of the window
    } else if (kind == CriticalKind::Phase) {
      lo = bisect_boundary(loop, samples[i - 1].omega, samples[i].omega,
                           phase_crossing_fn(samples[i - 1], samples[i]),
                           config);
      cs.boundary_roots.push_back(lo);
    } else {
      lo = samples[i - 1].omega;
    }
    if (j == m - 1) {
      hi = samples[j].omega;
    } else if (kind == CriticalKind::Phase) {
      hi = bisect_boundary(loop, samples[j].omega, samples[j + 1].omega,
                           phase_crossing_fn(samples[j], samples[j + 1]),
                           config);
      cs.boundary_roots.push_back(hi);
    } else {
      hi = samples[j + 1].omega;
    }
    cs.intervals.emplace_back(lo, hi);

    for (int k = i; k <= j; ++k)
      if (!samples[k].near_pole) cs.grid.push_back(samples[k].omega);
    i = j + 1;
  }

  // Phase boundary roots, independent of the interval scan above: any
  // crossing of an extreme singular value through 1 lies in the critical
  // set's closure (sigma_min <= 1 <= sigma_max holds at the crossing), even
  // when no sample in between qualifies -- e.g. a 1 x 1 response, whose
  // band degenerates to a point the grid never hits. Re-bisections of
  // interval endpoints land on identical values and are deduplicated below.
  if (kind == CriticalKind::Phase) {
    for (int k = 1; k < m; ++k) {
      if (samples[k].near_pole || samples[k - 1].near_pole) continue;
      const Vec& sa = samples[k - 1].singular_values;
      const Vec& sb = samples[k].singular_values;
      if ((sa(0) - 1.0 <= 0.0) != (sb(0) - 1.0 <= 0.0))
        cs.boundary_roots.push_back(
            bisect_boundary(loop, samples[k - 1].omega, samples[k].omega,
                            BoundaryFn::SigmaMax, config));
      const double amin = sa(sa.size() - 1) - 1.0;
      const double bmin = sb(sb.size() - 1) - 1.0;
      if ((amin <= 0.0) != (bmin <= 0.0))
        cs.boundary_roots.push_back(
            bisect_boundary(loop, samples[k - 1].omega, samples[k].omega,
                            BoundaryFn::SigmaMin, config));
    }
  }

  // Gain boundary roots: sign changes of the smallest-magnitude eigenvalue
  // of Y across adjacent samples where the Hermitian part dips negative.
  if (kind == CriticalKind::Gain) {
    for (int k = 1; k < m; ++k) {
      if (samples[k].near_pole || samples[k - 1].near_pole) continue;
      const double a = samples[k - 1].y_small_signed;
      const double b = samples[k].y_small_signed;
      if ((a <= 0.0) != (b <= 0.0) &&
          (samples[k - 1].lam_min_sym < 0.0 || samples[k].lam_min_sym < 0.0)) {
        cs.boundary_roots.push_back(bisect_boundary(loop, samples[k - 1].omega,
                                                    samples[k].omega,
                                                    BoundaryFn::DetY, config));
      }
    }
  }

  std::sort(cs.boundary_roots.begin(), cs.boundary_roots.end());
  cs.boundary_roots.erase(
      std::unique(cs.boundary_roots.begin(), cs.boundary_roots.end(),
                  [](double a, double b) {
                    return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a));
                  }),
      cs.boundary_roots.end());

  // Boundary roots always join the optimization grid.
  for (double r : cs.boundary_roots) cs.grid.push_back(r);
  std::sort(cs.grid.begin(), cs.grid.end());
  cs.grid.erase(std::unique(cs.grid.begin(), cs.grid.end(),
                            [](double a, double b) {
                              return std::abs(a - b) <=
                                     1e-12 * (1.0 + std::abs(a));
                            }),
                cs.grid.end());
  return cs;
}

bool phase_qualifies(const SweepSample& s) {
  if (s.near_pole) return true;  // response unbounded: inside the set
  const double smax = s.singular_values(0);
  const double smin = s.singular_values(s.singular_values.size() - 1);
  return smin <= 1.0 && smax >= 1.0;
}

bool gain_qualifies(const SweepSample& s) {
  if (s.near_pole) return true;
  return s.y_min_eig * s.y_max_eig <= 0.0 && s.lam_min_sym < 0.0;
}

CriticalSet phase_critical_set(const TransformedLoop& loop,
                               const SweepConfig& config) {
  const std::vector<double> grid = build_grid(loop, config);
  const std::vector<SweepSample> samples = sweep_loop(loop, grid, config);
  return classify_samples(loop, samples, CriticalKind::Phase, config);
}

CriticalSet gain_critical_candidates(const TransformedLoop& loop,
                                     const SweepConfig& config) {
  const std::vector<double> grid = build_grid(loop, config);
  const std::vector<SweepSample> samples = sweep_loop(loop, grid, config);
  return classify_samples(loop, samples, CriticalKind::Gain, config);
}

}  // namespace margins
