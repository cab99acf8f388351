#include "margins/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace margins {

namespace {

std::vector<Complex> sorted_spectrum(const Mat& M) {
  Eigen::EigenSolver<Mat> es(M);
  std::vector<Complex> ev(M.rows());
  for (int i = 0; i < M.rows(); ++i) ev[i] = es.eigenvalues()(i);
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return ev;
}

// Reachable-set expansion along directed edges k -> i (adjacency(i, k) > 0).
std::vector<bool> reachable_from(const Mat& adjacency, int root) {
  const int N = static_cast<int>(adjacency.rows());
  std::vector<bool> seen(N, false);
  std::vector<int> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    for (int i = 0; i < N; ++i) {
      if (!seen[i] && adjacency(i, k) > 0.0) {
        seen[i] = true;
        stack.push_back(i);
      }
    }
  }
  return seen;
}

void check_model_dims(const AgentModel& model) {
  const int n = model.n();
  const int m = model.m();
  if (model.A.rows() != model.A.cols())
    fail(ErrorCode::DimensionMismatch, "state matrix A must be square");
  if (model.B.rows() != n)
    fail(ErrorCode::DimensionMismatch, "B must have as many rows as A");
  if (model.K.rows() != m || model.K.cols() != n)
    fail(ErrorCode::DimensionMismatch, "K must be m x n");
  if (!(model.c > 0.0))
    fail(ErrorCode::DimensionMismatch, "coupling gain c must be positive");
}

// Index of the (required) single near-zero Laplacian eigenvalue; -1 when the
// count is not exactly one.
int zero_eigenvalue_index(const NetworkGraph& graph) {
  const double scale =
      1e-9 * (1.0 + graph.laplacian.cwiseAbs().rowwise().sum().maxCoeff());
  int idx = -1;
  int count = 0;
  for (int i = 0; i < static_cast<int>(graph.spectrum.size()); ++i) {
    if (std::abs(graph.spectrum[i]) <= scale) {
      idx = i;
      ++count;
    }
  }
  return count == 1 ? idx : -1;
}

}  // namespace

int AssumptionReport::first_failing_p() const {
  for (const auto& flag : per_loop)
    if (!flag.hurwitz) return flag.p;
  return 0;
}

NetworkGraph build_laplacian(const Mat& adjacency) {
  if (adjacency.rows() != adjacency.cols())
    fail(ErrorCode::NonSquare, "adjacency matrix must be square");
  const int N = static_cast<int>(adjacency.rows());
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < N; ++k) {
      if (adjacency(i, k) < 0.0) {
        std::ostringstream os;
        os << "adjacency(" << i << ", " << k << ") = " << adjacency(i, k);
        fail(ErrorCode::NegativeWeight, os.str());
      }
    }
    if (adjacency(i, i) != 0.0) {
      std::ostringstream os;
      os << "adjacency(" << i << ", " << i << ") = " << adjacency(i, i);
      fail(ErrorCode::NonzeroDiagonal, os.str());
    }
  }

  NetworkGraph graph;
  graph.adjacency = adjacency;
  graph.laplacian = Mat::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    double degree = 0.0;
    for (int k = 0; k < N; ++k) {
      if (k == i) continue;
      degree += adjacency(i, k);
      graph.laplacian(i, k) = -adjacency(i, k);
    }
    graph.laplacian(i, i) = degree;
  }
  graph.spectrum = sorted_spectrum(graph.laplacian);
  return graph;
}

NetworkGraph graph_from_laplacian(const Mat& laplacian) {
  if (laplacian.rows() != laplacian.cols())
    fail(ErrorCode::NonSquare, "laplacian matrix must be square");
  const int N = static_cast<int>(laplacian.rows());
  const double scale = 1.0 + laplacian.cwiseAbs().maxCoeff();
  Mat adjacency = Mat::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    double row_sum = 0.0;
    for (int k = 0; k < N; ++k) {
      row_sum += laplacian(i, k);
      if (k == i) continue;
      if (laplacian(i, k) > 1e-12 * scale) {
        std::ostringstream os;
        os << "laplacian(" << i << ", " << k
           << ") > 0 implies a negative edge weight";
        fail(ErrorCode::NegativeWeight, os.str());
      }
      adjacency(i, k) = std::max(0.0, -laplacian(i, k));
    }
    if (std::abs(row_sum) > 1e-9 * scale) {
      std::ostringstream os;
      os << "row " << i << " of the laplacian sums to " << row_sum;
      fail(ErrorCode::NonzeroDiagonal, os.str());
    }
  }
  NetworkGraph graph = build_laplacian(adjacency);
  // Keep the caller's matrix verbatim; the rebuilt one may differ by the
  // tolerance slack used above.
  graph.laplacian = laplacian;
  graph.spectrum = sorted_spectrum(laplacian);
  return graph;
}

bool has_directed_spanning_tree(const NetworkGraph& graph) {
  const int N = graph.size();
  for (int root = 0; root < N; ++root) {
    const auto seen = reachable_from(graph.adjacency, root);
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
      return true;
  }
  return false;
}

bool is_strongly_connected(const NetworkGraph& graph) {
  const int N = graph.size();
  for (int root = 0; root < N; ++root) {
    const auto seen = reachable_from(graph.adjacency, root);
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
      return false;
  }
  return true;
}

bool is_hurwitz(const CMat& M, double tol) {
  Eigen::ComplexEigenSolver<CMat> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff() < -tol;
}

AssumptionReport check_assumptions(const AgentModel& model,
                                   const NetworkGraph& graph) {
  check_model_dims(model);
  AssumptionReport report;
  report.spanning_tree = has_directed_spanning_tree(graph);
  report.strongly_connected = is_strongly_connected(graph);

  // Stabilizability by the rank test rank[lambda I - A, B] = n at every
  // eigenvalue of A in the closed right half plane, with a scale-aware
  // singular-value threshold.
  const int n = model.n();
  const int m = model.m();
  report.ab_stabilizable = true;
  Eigen::ComplexEigenSolver<CMat> es_a(model.A.cast<Complex>(), false);
  for (int i = 0; i < n; ++i) {
    const Complex lambda = es_a.eigenvalues()(i);
    if (lambda.real() < -kHurwitzTol) continue;
    CMat pencil(n, n + m);
    pencil << lambda * CMat::Identity(n, n) - model.A.cast<Complex>(),
        model.B.cast<Complex>();
    Eigen::JacobiSVD<CMat> svd(pencil);
    const double smax = svd.singularValues()(0);
    int rank = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
      if (svd.singularValues()(k) > 1e-9 * smax) ++rank;
    if (rank < n) {
      report.ab_stabilizable = false;
      break;
    }
  }

  // Stability of the coupled nominal loop A - c B K (the lambda = 1 member
  // of the transformed family; literal A - B K is the special case c = 1).
  report.a_minus_bk_hurwitz =
      is_hurwitz((model.A - model.c * model.B * model.K).cast<Complex>());

  const int zero_idx = zero_eigenvalue_index(graph);
  for (int i = 0; i < graph.size(); ++i) {
    if (i == zero_idx) continue;
    LoopHurwitzFlag flag;
    flag.lambda_p = graph.spectrum[i];
    flag.p = static_cast<int>(report.per_loop.size()) + 2;
    const CMat closed =
        model.A.cast<Complex>() -
        model.c * flag.lambda_p * (model.B * model.K).cast<Complex>();
    Eigen::ComplexEigenSolver<CMat> es(closed, false);
    flag.max_real_part = es.eigenvalues().real().maxCoeff();
    flag.hurwitz = flag.max_real_part < -kHurwitzTol;
    report.per_loop.push_back(flag);
  }

  bool all_loops = zero_idx >= 0;
  for (const auto& flag : report.per_loop) all_loops = all_loops && flag.hurwitz;
  report.pass = report.spanning_tree && report.ab_stabilizable &&
                report.a_minus_bk_hurwitz && all_loops;
  return report;
}

double max_coupling_gain(const AgentModel& model, const NetworkGraph& graph,
                         const GainSearch& search) {
  check_model_dims(model);
  if (!has_directed_spanning_tree(graph))
    fail(ErrorCode::AssumptionViolation,
         "graph has no directed spanning tree; consensus is unreachable");

  std::vector<Complex> nonzero;
  const double zero_scale =
      1e-9 * (1.0 + graph.laplacian.cwiseAbs().rowwise().sum().maxCoeff());
  for (const Complex& l : graph.spectrum)
    if (std::abs(l) > zero_scale) nonzero.push_back(l);
  if (nonzero.empty()) return search.hi;  // single agent: any gain works

  const Mat BK = model.B * model.K;
  const auto all_stable = [&](double c) {
    for (const Complex& l : nonzero) {
      const CMat closed = model.A.cast<Complex>() - c * l * BK.cast<Complex>();
      if (!is_hurwitz(closed)) return false;
    }
    return true;
  };

  // Scan for the first loss of stability, then bisect the bracketing cell.
  const double step = (search.hi - search.lo) / search.scan_points;
  double last_good = -1.0;
  double first_bad = -1.0;
  for (int k = 1; k <= search.scan_points; ++k) {
    const double c = search.lo + step * k;
    if (all_stable(c)) {
      if (first_bad < 0.0) last_good = c;
    } else if (last_good >= 0.0) {
      first_bad = c;
      break;
    } else if (k == search.scan_points) {
      fail(ErrorCode::NoStabilizingGain,
           "no coupling gain in the search interval stabilizes every loop");
    }
  }
  if (last_good < 0.0)
    fail(ErrorCode::NoStabilizingGain,
         "no coupling gain in the search interval stabilizes every loop");
  if (first_bad < 0.0) return search.hi;

  double lo = last_good, hi = first_bad;
  while (hi - lo > search.tol) {
    const double mid = 0.5 * (lo + hi);
    if (all_stable(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<TransformedLoop> transformed_loops_unchecked(
    const AgentModel& model, const NetworkGraph& graph) {
  check_model_dims(model);
  const int zero_idx = zero_eigenvalue_index(graph);
  if (zero_idx < 0)
    fail(ErrorCode::AssumptionViolation,
         "laplacian spectrum does not contain exactly one zero eigenvalue");
  std::vector<TransformedLoop> loops;
  int p = 2;
  for (int i = 0; i < graph.size(); ++i) {
    if (i == zero_idx) continue;
    TransformedLoop loop;
    loop.p = p++;
    loop.lambda_p = graph.spectrum[i];
    loop.model = model;
    loops.push_back(loop);
  }
  return loops;
}

std::vector<TransformedLoop> transformed_loops(const AgentModel& model,
                                               const NetworkGraph& graph) {
  const AssumptionReport report = check_assumptions(model, graph);
  if (!report.pass) {
    std::ostringstream os;
    os << "assumption check failed";
    if (const int p = report.first_failing_p())
      os << ": loop p=" << p << " (lambda = " << report.per_loop[p - 2].lambda_p
         << ") is not Hurwitz at c = " << model.c;
    else if (!report.spanning_tree)
      os << ": no directed spanning tree";
    else if (!report.ab_stabilizable)
      os << ": (A, B) is not stabilizable";
    else if (!report.a_minus_bk_hurwitz)
      os << ": A - B K is not Hurwitz";
    fail(ErrorCode::AssumptionViolation, os.str());
  }
  return transformed_loops_unchecked(model, graph);
}

}  // namespace margins
