#pragma once

#include <cstdint>
#include <optional>

#include "margins/errors.hpp"
#include "margins/types.hpp"

namespace margins {

enum class ProblemKind { Phase, Gain };

// Real 2n x 2n embedding of a complex n x n matrix M:
//   E(M) = [[Re M, -Im M], [Im M, Re M]].
// With y = [Re z; Im z] this satisfies  y^T E(M) y = Re(z* M z)  and is an
// algebra homomorphism (E(MN) = E(M) E(N)), so every embedded matrix
// commutes with E(jI).
Mat embed_matrix(const CMat& M);
Mat embed_identity_j(int n);        // E(jI)
Vec embed_vector(const CVec& z);    // [Re z; Im z]
CVec unembed_vector(const Vec& y);

// One per-frequency optimization instance in embedded real form.
//
// Phase kind: minimize y^T Qmat y  s.t.  y^T y = 1,  y^T Rmat y = 1,
//   with Qmat = E(G + G*), Rmat = E(G* G).
// Gain kind: minimize y^T Qmat y  s.t.  y^T sym(Rmat) y = -1,
//   y^T sym(Jmat Rmat) y = 0, with Qmat = E(G* G + I) and Rmat = E(G) kept
//   unsymmetrized (its skew part carries the second constraint).
struct EmbeddedProblem {
  ProblemKind kind = ProblemKind::Phase;
  Mat Qmat;
  Mat Rmat;
  Mat Jmat;
  int n = 0;
};

struct KktSolution {
  Vec y;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double objective = 0.0;
  double feasibility_residuals[2] = {0.0, 0.0};
  double stationarity_residual = 0.0;
  // Smallest eigenvalue of Qobj + mu1 C1 + mu2 C2; nonnegative (within
  // tolerance) certifies the solution as a global minimizer.
  double sufficiency_mineig = 0.0;
  bool converged = false;
  bool certified = false;

  // Complex-side recovery, canonicalized so the largest-magnitude component
  // of z is real positive.
  CVec z;
  CVec v;  // -G z
};

struct OptimizerConfig {
  int starts = 32;
  double newton_tol = 1e-10;
  int max_iter = 100;
  double sufficiency_tol = 1e-8;
  int oracle_resolution = 400;
  std::uint64_t seed = 42;
};

EmbeddedProblem embed_phase(const CMat& G);
EmbeddedProblem embed_gain(const CMat& G);

// Multi-start Newton on the KKT system of `problem`. Returns the best
// certified solution (smallest objective; ties broken by canonical-z
// lexicographic order). When solutions converge but none passes the
// sufficiency check, the best converged one is returned with
// certified = false (the caller surfaces a NoCertifiedGlobal warning).
// Returns nullopt when no start converges to a feasible point; for the gain
// kind that means the frequency is infeasible and leaves the critical set.
//
// `G` is the original complex matrix (used for the complex-side recovery and
// for exact-feasible start generation); `instance_seed` decorrelates starts
// across (p, omega) instances while keeping runs reproducible.
std::optional<KktSolution> solve_kkt(const EmbeddedProblem& problem,
                                     const CMat& G,
                                     const OptimizerConfig& cfg,
                                     std::uint64_t instance_seed = 0,
                                     const CVec* warm_start = nullptr);

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;
  CVec z;
};

// Exhaustive small-dimension check of the same optimization, parametrizing
// the feasible set directly (n = 1: closed form; n = 2: angle grid with
// bisection onto the constraint manifold). Throws UnsupportedDimension for
// n > 2.
OracleResult brute_force_oracle(const CMat& G, ProblemKind kind,
                                int resolution);

// Canonical phase rotation: scales z by a unit complex number so its
// largest-magnitude entry becomes real positive (deterministic tie-break on
// the lowest index).
CVec canonicalize_phase(const CVec& z);

// Deterministic per-instance seed derivation (splitmix64 over the tuple).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

}  // namespace margins
