#include "margins/optimizer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace margins {

namespace {

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97f4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Lexicographic order on (Re z_0, Im z_0, Re z_1, ...) for deterministic
// tie-breaking among equal-objective solutions.
bool lex_less(const CVec& a, const CVec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

struct ConstraintSet {
  Mat C1, C2;
  double t1 = 1.0, t2 = 1.0;
  bool c2_active = true;  // false when C2 vanishes identically
};

ConstraintSet constraints_for(const EmbeddedProblem& problem) {
  ConstraintSet cs;
  const int d = static_cast<int>(problem.Qmat.rows());
  if (problem.kind == ProblemKind::Phase) {
    cs.C1 = Mat::Identity(d, d);
    cs.C2 = sym(problem.Rmat);
    cs.t1 = 1.0;
    cs.t2 = 1.0;
  } else {
    cs.C1 = sym(problem.Rmat);
    cs.C2 = sym(problem.Jmat * problem.Rmat);
    cs.t1 = -1.0;
    cs.t2 = 0.0;
  }
  // A structurally zero second constraint (e.g. scalar real loops, where
  // Im(z* G z) vanishes identically) would make the KKT Jacobian singular;
  // drop it and pin mu2 = 0 instead.
  if (cs.C2.norm() <= 1e-13 * (1.0 + cs.C1.norm())) cs.c2_active = false;
  return cs;
}

struct NewtonOutcome {
  bool converged = false;
  Vec y;
  double mu1 = 0.0, mu2 = 0.0;
};

NewtonOutcome run_newton(const Mat& Q, const ConstraintSet& cs, Vec y,
                         const OptimizerConfig& cfg) {
  const int d = static_cast<int>(Q.rows());
  const int nc = cs.c2_active ? 2 : 1;
  const int dim = d + nc;

  // Multiplier warm start by least squares on the stationarity equation.
  Mat A(d, nc);
  A.col(0) = cs.C1 * y;
  if (cs.c2_active) A.col(1) = cs.C2 * y;
  Vec mu = Vec::Zero(nc);
  const Mat AtA = A.transpose() * A;
  if (AtA.determinant() > 1e-18) {
    mu = AtA.ldlt().solve(-A.transpose() * (Q * y));
  }

  Vec x(dim);
  x.head(d) = y;
  x.tail(nc) = mu;

  const auto eval_residual = [&](const Vec& xx, Vec& F) {
    const Vec yy = xx.head(d);
    const double m1 = xx(d);
    const double m2 = cs.c2_active ? xx(d + 1) : 0.0;
    Mat W = Q + m1 * cs.C1;
    if (cs.c2_active) W += m2 * cs.C2;
    F.resize(dim);
    F.head(d) = W * yy;
    F(d) = yy.dot(cs.C1 * yy) - cs.t1;
    if (cs.c2_active) F(d + 1) = yy.dot(cs.C2 * yy) - cs.t2;
  };

  Vec F;
  eval_residual(x, F);
  double fnorm = F.norm();

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    if (F.lpNorm<Eigen::Infinity>() < cfg.newton_tol) break;

    const Vec yy = x.head(d);
    const double m1 = x(d);
    const double m2 = cs.c2_active ? x(d + 1) : 0.0;
    Mat W = Q + m1 * cs.C1;
    if (cs.c2_active) W += m2 * cs.C2;

    Mat J = Mat::Zero(dim, dim);
    J.topLeftCorner(d, d) = W;
    J.block(0, d, d, 1) = cs.C1 * yy;
    J.row(d).head(d) = 2.0 * (cs.C1 * yy).transpose();
    if (cs.c2_active) {
      J.block(0, d + 1, d, 1) = cs.C2 * yy;
      J.row(d + 1).head(d) = 2.0 * (cs.C2 * yy).transpose();
    }

    // The system is gauge-degenerate: multiplying z by a unit phase leaves
    // objective and constraints unchanged, so J carries a structural null
    // direction at (and near) feasible stationary points. A minimum-norm
    // least-squares step ignores that direction instead of blowing up
    // along it; where J is regular this is the plain Newton step. The rank
    // threshold must be in place before compute(): it decides which trailing
    // block the Z factor annihilates.
    Eigen::CompleteOrthogonalDecomposition<Mat> cod;
    cod.setThreshold(1e-10);
    cod.compute(J);
    const Vec dx = cod.solve(-F);
    if (!dx.allFinite() || dx.norm() == 0.0) break;

    // Backtracking line search on the residual norm.
    double alpha = 1.0;
    Vec x_new, F_new;
    double f_new = fnorm;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + alpha * dx;
      eval_residual(x_new, F_new);
      f_new = F_new.norm();
      if (f_new < (1.0 - 1e-4 * alpha) * fnorm) {
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      // Accept a full step once in a while to escape flat merit regions;
      // otherwise give up on this start.
      if (f_new < fnorm) {
        x = x_new;
        F = F_new;
        fnorm = f_new;
        continue;
      }
      break;
    }
    x = x_new;
    F = F_new;
    fnorm = f_new;
  }

  NewtonOutcome out;
  eval_residual(x, F);
  out.y = x.head(d);
  out.mu1 = x(d);
  out.mu2 = cs.c2_active ? x(d + 1) : 0.0;
  const double stat = F.head(d).lpNorm<Eigen::Infinity>();
  const double feas1 = std::abs(F(d));
  const double feas2 = cs.c2_active ? std::abs(F(d + 1)) : 0.0;
  out.converged = stat <= 1e-8 && feas1 <= 1e-9 && feas2 <= 1e-9;
  return out;
}

// Exact feasible sample of the phase constraint set {||z|| = 1, ||Gz|| = 1}
// built from the singular triplet structure, with randomized phases and a
// randomized interior weight profile for n > 2.
CVec phase_feasible_start(const CMat& G, std::mt19937_64& rng) {
  const int n = static_cast<int>(G.cols());
  Eigen::JacobiSVD<CMat> svd(G, Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vec w = Vec::Zero(n);  // |c_i|^2 weights over right singular vectors
  const double smax2 = s(0) * s(0);
  const double smin2 = s(n - 1) * s(n - 1);
  double a2;
  if (smax2 - smin2 > 1e-14)
    a2 = std::clamp((1.0 - smin2) / (smax2 - smin2), 0.0, 1.0);
  else
    a2 = 1.0;
  w(0) = a2;
  w(n - 1) += 1.0 - a2;

  if (n > 2) {
    // Blend toward a random simplex point while keeping sum w = 1 and
    // sum s_i^2 w = 1 (solve the blend parameter in closed form).
    Vec r(n);
    for (int i = 0; i < n; ++i) r(i) = std::abs(normal(rng));
    r /= r.sum();
    const double Sw = (s.array().square() * w.array()).sum();
    const double Sr = (s.array().square() * r.array()).sum();
    if (std::abs(Sr - Sw) > 1e-14) {
      const double t = (1.0 - Sw) / (Sr - Sw);
      if (t > 0.0 && t < 1.0) w = (1.0 - t) * w + t * r;
    }
  }

  CVec z = CVec::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double th = angle(rng);
    z += std::sqrt(std::max(0.0, w(i))) * Complex(std::cos(th), std::sin(th)) *
         svd.matrixV().col(i);
  }
  const double nz = z.norm();
  if (nz > 0.0) z /= nz;
  return z;
}

CVec gain_start(const CMat& G, std::mt19937_64& rng, bool use_xmin) {
  const int n = static_cast<int>(G.cols());
  std::normal_distribution<double> normal(0.0, 1.0);
  CVec z(n);
  if (use_xmin) {
    // Most negative direction of the Hermitian part: guarantees
    // Re(z* G z) < 0 whenever the constraint is reachable at all.
    const CMat X = 0.5 * (G + G.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(X);
    z = es.eigenvectors().col(0);
    if (es.eigenvalues()(0) >= 0.0) return CVec();  // infeasible frequency
  } else {
    for (int tries = 0; tries < 16; ++tries) {
      for (int i = 0; i < n; ++i) z(i) = Complex(normal(rng), normal(rng));
      z.normalize();
      if ((z.dot(G * z)).real() < -1e-12) break;
    }
    if ((z.dot(G * z)).real() >= -1e-12) return CVec();
  }
  const double re = (z.dot(G * z)).real();
  if (re >= -1e-15) return CVec();
  return z / std::sqrt(-re);  // scale so Re(z* G z) = -1
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(base ^ splitmix64(a)) ^
                               splitmix64(b)) ^
                    splitmix64(c));
}

Mat embed_matrix(const CMat& M) {
  const int n = static_cast<int>(M.rows());
  const int m = static_cast<int>(M.cols());
  Mat E(2 * n, 2 * m);
  E.topLeftCorner(n, m) = M.real();
  E.topRightCorner(n, m) = -M.imag();
  E.bottomLeftCorner(n, m) = M.imag();
  E.bottomRightCorner(n, m) = M.real();
  return E;
}

Mat embed_identity_j(int n) {
  return embed_matrix(Complex(0.0, 1.0) * CMat::Identity(n, n));
}

Vec embed_vector(const CVec& z) {
  const int n = static_cast<int>(z.size());
  Vec y(2 * n);
  y.head(n) = z.real();
  y.tail(n) = z.imag();
  return y;
}

CVec unembed_vector(const Vec& y) {
  const int n = static_cast<int>(y.size()) / 2;
  CVec z(n);
  for (int i = 0; i < n; ++i) z(i) = Complex(y(i), y(n + i));
  return z;
}

CVec canonicalize_phase(const CVec& z) {
  int best = 0;
  double best_mag = -1.0;
  for (int i = 0; i < z.size(); ++i) {
    const double mag = std::abs(z(i));
    if (mag > best_mag + 1e-10) {
      best_mag = mag;
      best = i;
    }
  }
  if (best_mag <= 0.0) return z;
  const Complex pivot = z(best);
  if (std::abs(pivot) == 0.0) return z;
  return z * (std::conj(pivot) / std::abs(pivot));
}

EmbeddedProblem embed_phase(const CMat& G) {
  EmbeddedProblem p;
  p.kind = ProblemKind::Phase;
  p.n = static_cast<int>(G.rows());
  p.Qmat = embed_matrix(G + G.adjoint());
  p.Rmat = embed_matrix(G.adjoint() * G);
  p.Jmat = embed_identity_j(p.n);
  return p;
}

EmbeddedProblem embed_gain(const CMat& G) {
  EmbeddedProblem p;
  p.kind = ProblemKind::Gain;
  p.n = static_cast<int>(G.rows());
  p.Qmat = embed_matrix(G.adjoint() * G + CMat::Identity(p.n, p.n));
  p.Rmat = embed_matrix(G);  // kept raw; solve_kkt symmetrizes on use
  p.Jmat = embed_identity_j(p.n);
  return p;
}

std::optional<KktSolution> solve_kkt(const EmbeddedProblem& problem,
                                     const CMat& G,
                                     const OptimizerConfig& cfg,
                                     std::uint64_t instance_seed,
                                     const CVec* warm_start) {
  const int n = problem.n;
  const ConstraintSet cs = constraints_for(problem);
  const Mat& Q = problem.Qmat;

  // Degenerate phase instance: a unitary G makes both constraints coincide
  // on the unit sphere and the KKT system rank-deficient. The problem
  // collapses to a Hermitian eigenvalue problem; solve it directly.
  if (problem.kind == ProblemKind::Phase) {
    Eigen::JacobiSVD<CMat> svd(G);
    const Vec s = svd.singularValues();
    if ((s.array() - 1.0).abs().maxCoeff() <= 1e-9) {
      const CMat H2 = G + G.adjoint();
      Eigen::SelfAdjointEigenSolver<CMat> es(H2);
      KktSolution sol;
      sol.z = canonicalize_phase(es.eigenvectors().col(0).normalized());
      sol.v = -G * sol.z;
      sol.y = embed_vector(sol.z);
      sol.objective = es.eigenvalues()(0);
      sol.mu1 = -sol.objective;
      sol.mu2 = 0.0;
      sol.feasibility_residuals[0] = std::abs(sol.y.dot(sol.y) - 1.0);
      sol.feasibility_residuals[1] =
          std::abs(sol.y.dot(cs.C2 * sol.y) - cs.t2);
      sol.stationarity_residual =
          ((Q + sol.mu1 * cs.C1 + sol.mu2 * cs.C2) * sol.y)
              .lpNorm<Eigen::Infinity>();
      Eigen::SelfAdjointEigenSolver<Mat> suff(Q + sol.mu1 * cs.C1 +
                                              sol.mu2 * cs.C2);
      sol.sufficiency_mineig = suff.eigenvalues()(0);
      sol.converged = true;
      sol.certified = sol.sufficiency_mineig >= -cfg.sufficiency_tol;
      return sol;
    }
  }

  std::optional<KktSolution> best_certified;
  std::optional<KktSolution> best_converged;

  const int total_starts = cfg.starts + (warm_start ? 1 : 0);
  for (int sidx = 0; sidx < total_starts; ++sidx) {
    CVec z0;
    if (warm_start && sidx == 0) {
      z0 = *warm_start;
    } else {
      std::mt19937_64 rng(derive_seed(cfg.seed, instance_seed, sidx,
                                      problem.kind == ProblemKind::Phase ? 0
                                                                         : 1));
      if (problem.kind == ProblemKind::Phase) {
        z0 = phase_feasible_start(G, rng);
      } else {
        z0 = gain_start(G, rng, /*use_xmin=*/sidx % 4 == 1);
        if (z0.size() == 0) continue;
      }
    }

    NewtonOutcome out = run_newton(Q, cs, embed_vector(z0), cfg);
    if (!out.converged) continue;

    KktSolution sol;
    sol.z = canonicalize_phase(unembed_vector(out.y));
    sol.y = embed_vector(sol.z);
    sol.v = -G * sol.z;
    sol.mu1 = out.mu1;
    sol.mu2 = out.mu2;
    sol.objective = sol.y.dot(Q * sol.y);
    sol.feasibility_residuals[0] = std::abs(sol.y.dot(cs.C1 * sol.y) - cs.t1);
    sol.feasibility_residuals[1] =
        cs.c2_active ? std::abs(sol.y.dot(cs.C2 * sol.y) - cs.t2) : 0.0;
    const Mat W = Q + sol.mu1 * cs.C1 + sol.mu2 * cs.C2;
    sol.stationarity_residual = (W * sol.y).lpNorm<Eigen::Infinity>();
    Eigen::SelfAdjointEigenSolver<Mat> suff(W);
    sol.sufficiency_mineig = suff.eigenvalues()(0);
    sol.converged = true;
    sol.certified = sol.sufficiency_mineig >= -cfg.sufficiency_tol;

    const auto better = [](const KktSolution& a, const KktSolution& b) {
      if (std::abs(a.objective - b.objective) > 1e-10)
        return a.objective < b.objective;
      return lex_less(a.z, b.z);
    };
    if (sol.certified) {
      if (!best_certified || better(sol, *best_certified)) best_certified = sol;
      // The sufficiency certificate already proves global optimality, so
      // further starts could only rediscover the same objective value.
      break;
    }
    if (!best_converged || better(sol, *best_converged)) best_converged = sol;
  }

  if (best_certified) return best_certified;
  return best_converged;  // nullopt when nothing converged (infeasible)
}

namespace {

double phase_objective(const CMat& G, const CVec& z) {
  return (z.dot((G + G.adjoint()) * z)).real();
}

// Bisects ||G zhat(a, b)|| = 1 in a over a bracketing cell.
double bisect_phase_a(const CMat& G, double b, double alo, double ahi) {
  const auto f = [&](double a) {
    CVec z(2);
    z << Complex(std::cos(a), 0.0),
        std::sin(a) * Complex(std::cos(b), std::sin(b));
    return (G * z).norm() - 1.0;
  };
  double flo = f(alo);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (alo + ahi);
    const double fm = f(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      alo = mid;
      flo = fm;
    } else {
      ahi = mid;
    }
  }
  return 0.5 * (alo + ahi);
}

// Minimal feasible objective over the relative-phase circle at fixed b.
bool phase_best_at_b(const CMat& G, int res, double b, double& obj,
                     CVec& zbest) {
  const auto norm_at = [&](double a) {
    CVec z(2);
    z << Complex(std::cos(a), 0.0),
        std::sin(a) * Complex(std::cos(b), std::sin(b));
    return (G * z).norm();
  };
  bool found = false;
  double prev_a = 0.0;
  double prev_f = norm_at(0.0) - 1.0;
  for (int ia = 1; ia <= res; ++ia) {
    const double a = (kPi / 2.0) * ia / res;
    const double fa = norm_at(a) - 1.0;
    if ((prev_f <= 0.0) != (fa <= 0.0) || std::abs(fa) < 1e-12) {
      const double astar =
          std::abs(fa) < 1e-12 ? a : bisect_phase_a(G, b, prev_a, a);
      CVec z(2);
      z << Complex(std::cos(astar), 0.0),
          std::sin(astar) * Complex(std::cos(b), std::sin(b));
      const double o = phase_objective(G, z);
      if (!found || o < obj) {
        obj = o;
        zbest = z;
        found = true;
      }
    }
    prev_a = a;
    prev_f = fa;
  }
  return found;
}

OracleResult phase_oracle_2(const CMat& G, int res) {
  OracleResult best;
  double best_b = 0.0;
  for (int ib = 0; ib < res; ++ib) {
    const double b = 2.0 * kPi * ib / res;
    double obj;
    CVec z;
    if (phase_best_at_b(G, res, b, obj, z)) {
      if (!best.feasible || obj < best.objective) {
        best.feasible = true;
        best.objective = obj;
        best.z = z;
        best_b = b;
      }
    }
  }
  if (!best.feasible) return best;

  // Golden-section polish of the outer angle.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_b - 2.0 * kPi / res;
  double hi = best_b + 2.0 * kPi / res;
  const auto h = [&](double b) {
    double obj;
    CVec z;
    if (!phase_best_at_b(G, res, b, obj, z))
      return std::numeric_limits<double>::infinity();
    return obj;
  };
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = h(x1), f2 = h(x2);
  for (int it = 0; it < 50; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = h(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = h(x2);
    }
  }
  const double bb = 0.5 * (lo + hi);
  double obj;
  CVec z;
  if (phase_best_at_b(G, res, bb, obj, z) && obj < best.objective) {
    best.objective = obj;
    best.z = z;
  }
  best.z = canonicalize_phase(best.z);
  return best;
}

// Scaled objective of the gain problem at a feasible direction.
bool gain_candidate(const CMat& G, const CVec& zhat, double& obj, CVec& z) {
  const Complex w = zhat.dot(G * zhat);
  if (w.real() >= -1e-14) return false;
  const double t2 = 1.0 / (-w.real());
  obj = t2 * ((G * zhat).squaredNorm() + zhat.squaredNorm());
  z = std::sqrt(t2) * zhat;
  return true;
}

bool gain_best_at_a(const CMat& G, int res, double a, double& obj, CVec& zb) {
  const auto zdir = [&](double b) {
    CVec z(2);
    z << Complex(std::cos(a), 0.0),
        std::sin(a) * Complex(std::cos(b), std::sin(b));
    return z;
  };
  const auto im_part = [&](double b) {
    const CVec z = zdir(b);
    return (z.dot(G * z)).imag();
  };
  bool found = false;
  double prev_b = 0.0;
  double prev_f = im_part(0.0);
  const double scale = G.norm() + 1.0;
  for (int ib = 1; ib <= res; ++ib) {
    const double b = 2.0 * kPi * ib / res;
    const double fb = im_part(b);
    CVec cand;
    bool have = false;
    if (std::abs(fb) < 1e-13 * scale) {
      cand = zdir(b);
      have = true;
    } else if ((prev_f <= 0.0) != (fb <= 0.0)) {
      double lo = prev_b, hi = b, flo = prev_f;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = im_part(mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      cand = zdir(0.5 * (lo + hi));
      have = true;
    }
    if (have) {
      double o;
      CVec z;
      if (gain_candidate(G, cand, o, z) && (!found || o < obj)) {
        obj = o;
        zb = z;
        found = true;
      }
    }
    prev_b = b;
    prev_f = fb;
  }
  return found;
}

OracleResult gain_oracle_2(const CMat& G, int res) {
  OracleResult best;
  double best_a = 0.0;
  for (int ia = 0; ia <= res; ++ia) {
    const double a = (kPi / 2.0) * ia / res;
    double obj;
    CVec z;
    if (gain_best_at_a(G, res, a, obj, z)) {
      if (!best.feasible || obj < best.objective) {
        best.feasible = true;
        best.objective = obj;
        best.z = z;
        best_a = a;
      }
    }
  }
  if (!best.feasible) return best;

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(0.0, best_a - 0.5 * kPi / res);
  double hi = std::min(0.5 * kPi, best_a + 0.5 * kPi / res);
  const auto h = [&](double a) {
    double obj;
    CVec z;
    if (!gain_best_at_a(G, res, a, obj, z))
      return std::numeric_limits<double>::infinity();
    return obj;
  };
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = h(x1), f2 = h(x2);
  for (int it = 0; it < 50; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = h(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = h(x2);
    }
  }
  const double aa = 0.5 * (lo + hi);
  double obj;
  CVec z;
  if (gain_best_at_a(G, res, aa, obj, z) && obj < best.objective) {
    best.objective = obj;
    best.z = z;
  }
  best.z = canonicalize_phase(best.z);
  return best;
}

}  // namespace

OracleResult brute_force_oracle(const CMat& G, ProblemKind kind,
                                int resolution) {
  const int n = static_cast<int>(G.rows());
  if (n > 2)
    fail(ErrorCode::UnsupportedDimension,
         "brute-force oracle supports n <= 2 only");

  OracleResult result;
  if (n == 1) {
    const Complex g = G(0, 0);
    if (kind == ProblemKind::Phase) {
      if (std::abs(std::abs(g) - 1.0) <= 1e-6 * (1.0 + std::abs(g))) {
        result.feasible = true;
        result.objective = 2.0 * g.real();
        result.z = CVec::Ones(1);
      }
      return result;
    }
    if (std::abs(g.imag()) <= 1e-9 * (1.0 + std::abs(g)) && g.real() < 0.0) {
      result.feasible = true;
      const double t2 = 1.0 / (-g.real());
      result.objective = t2 * (std::norm(g) + 1.0);
      result.z = CVec::Ones(1) * std::sqrt(t2);
    }
    return result;
  }

  return kind == ProblemKind::Phase ? phase_oracle_2(G, resolution)
                                    : gain_oracle_2(G, resolution);
}

}  // namespace margins
