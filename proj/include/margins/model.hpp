#pragma once

#include <vector>

#include "margins/errors.hpp"
#include "margins/types.hpp"

namespace margins {

// Homogeneous agent dynamics xdot_i = A x_i + B u_i with relative-state
// feedback u_i = c K sum_k a_ik (x_k - x_i). All agents share (A, B, K, c).
struct AgentModel {
  Mat A;     // n x n state matrix
  Mat B;     // n x m input matrix
  Mat K;     // m x n feedback gain
  double c;  // positive coupling gain

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
};

// Weighted digraph of the interconnection. adjacency(i, k) is the weight
// agent i places on information received from agent k (edge k -> i).
struct NetworkGraph {
  Mat adjacency;                  // N x N, nonnegative, zero diagonal
  Mat laplacian;                  // N x N, zero row sums
  std::vector<Complex> spectrum;  // eigenvalues sorted by (Re, Im) ascending

  int size() const { return static_cast<int>(laplacian.rows()); }
};

// One decoupled loop of the interconnected system: G_p(s) =
// (sI - A)^{-1} B c lambda_p K. Margins of the network are minima over these.
struct TransformedLoop {
  int p = 0;          // loop index in 2..N
  Complex lambda_p;   // the attached Laplacian eigenvalue
  AgentModel model;   // owning copy; immutable after construction

  Complex sigma() const { return model.c * lambda_p; }
};

struct LoopHurwitzFlag {
  int p = 0;
  Complex lambda_p;
  bool hurwitz = false;
  double max_real_part = 0.0;
};

// Validation summary for a (model, graph) pair. `pass` covers the conditions
// the margin theory needs; strong connectivity is reported for information
// only (a graph can carry a directed spanning tree without it, e.g. when the
// root has no in-edges).
struct AssumptionReport {
  bool spanning_tree = false;
  bool strongly_connected = false;
  bool ab_stabilizable = false;
  bool a_minus_bk_hurwitz = false;
  std::vector<LoopHurwitzFlag> per_loop;
  bool pass = false;

  // Smallest failing loop index, or 0 when every per-loop flag holds.
  int first_failing_p() const;
};

// Search controls for max_coupling_gain: scan (lo, hi] at `scan_points`
// resolution for the first stability loss, then bisect to `tol`.
struct GainSearch {
  double lo = 0.0;
  double hi = 10.0;
  int scan_points = 2000;
  double tol = 1e-4;
};

// Builds the Laplacian l_ii = sum_{k != i} a_ik, l_ik = -a_ik and its sorted
// spectrum. Throws NonSquare, NegativeWeight, NonzeroDiagonal.
NetworkGraph build_laplacian(const Mat& adjacency);

// Accepts a Laplacian directly (zero row sums, nonpositive off-diagonal),
// recovering the adjacency as its negated off-diagonal part.
NetworkGraph graph_from_laplacian(const Mat& laplacian);

// True iff some node reaches every node along directed edges. Purely
// structural (breadth-first search), no spectral shortcut.
bool has_directed_spanning_tree(const NetworkGraph& graph);

// True iff every node reaches every other node.
bool is_strongly_connected(const NetworkGraph& graph);

bool is_hurwitz(const CMat& M, double tol = kHurwitzTol);

AssumptionReport check_assumptions(const AgentModel& model,
                                   const NetworkGraph& graph);

// Largest c* such that A - c lambda_p B K is Hurwitz for all p >= 2 and all
// c in (0, c*), up to the bisection tolerance. Throws NoStabilizingGain when
// no scanned c stabilizes every loop.
double max_coupling_gain(const AgentModel& model, const NetworkGraph& graph,
                         const GainSearch& search = {});

// The N-1 loops for p = 2..N. Throws AssumptionViolation unless
// check_assumptions passes.
std::vector<TransformedLoop> transformed_loops(const AgentModel& model,
                                               const NetworkGraph& graph);

// Same loop construction without the validation gate. Diagnostic path: lets
// sweeps and reports be produced for configurations that fail the stability
// assumptions (the margin quantities remain well defined frequency-wise).
std::vector<TransformedLoop> transformed_loops_unchecked(
    const AgentModel& model, const NetworkGraph& graph);

}  // namespace margins
