#pragma once

#include "margins/model.hpp"

namespace margins {

// Frequency response of one transformed loop at a single omega, together
// with the Hermitian/skew-Hermitian split G = X + jY used by the gain
// analysis. X and Y are both Hermitian.
struct LoopResponse {
  double omega = 0.0;
  CMat G;
  Vec singular_values;  // descending
  CMat X;               // (G + G*) / 2
  CMat Y;               // -j (G - G*) / 2

  double sigma_max() const { return singular_values(0); }
  double sigma_min() const {
    return singular_values(singular_values.size() - 1);
  }
};

// Evaluates G_p(j omega) = (j omega I - A)^{-1} B c lambda_p K by linear
// solve (never an explicit inverse). Throws NearPole when j omega sits too
// close to an eigenvalue of A (resolvent condition number above 1e12).
LoopResponse eval_loop(const TransformedLoop& loop, double omega);

// Condition estimate used by the NearPole gate; exposed so sweeps can probe
// without handling exceptions.
double resolvent_condition(const Mat& A, double omega);

// det(I_{nN} + H_hat(j omega) L_hat) with H = (j omega I - A)^{-1} B K and
// L_hat = c (L kron I_n). Assembled directly on the Kronecker form; used to
// cross-check the per-loop determinant factorization.
Complex networked_determinant(const AgentModel& model,
                              const NetworkGraph& graph, double omega);

}  // namespace margins
