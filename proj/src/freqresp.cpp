#include "margins/freqresp.hpp"

#include <Eigen/SVD>
#include <limits>
#include <sstream>

namespace margins {

double resolvent_condition(const Mat& A, double omega) {
  const int n = static_cast<int>(A.rows());
  CMat M = Complex(0.0, omega) * CMat::Identity(n, n) - A.cast<Complex>();
  Eigen::JacobiSVD<CMat> svd(M);
  const double smin = svd.singularValues()(n - 1);
  const double smax = svd.singularValues()(0);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

LoopResponse eval_loop(const TransformedLoop& loop, double omega) {
  const AgentModel& model = loop.model;
  const int n = model.n();
  const CMat M =
      Complex(0.0, omega) * CMat::Identity(n, n) - model.A.cast<Complex>();

  Eigen::JacobiSVD<CMat> msvd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = msvd.singularValues()(n - 1);
  const double smax = msvd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > 1e12) {
    std::ostringstream os;
    os << "j*omega with omega = " << omega
       << " is within resolvent condition 1e12 of an eigenvalue of A";
    fail(ErrorCode::NearPole, os.str());
  }

  LoopResponse r;
  r.omega = omega;
  const CMat rhs = model.B.cast<Complex>();
  const CMat resolvent_B = M.partialPivLu().solve(rhs);
  r.G = resolvent_B * (loop.sigma() * model.K.cast<Complex>());

  Eigen::JacobiSVD<CMat> gsvd(r.G);
  r.singular_values = gsvd.singularValues();

  r.X = 0.5 * (r.G + r.G.adjoint());
  r.Y = Complex(0.0, -0.5) * (r.G - r.G.adjoint());
  return r;
}

Complex networked_determinant(const AgentModel& model,
                              const NetworkGraph& graph, double omega) {
  const int n = model.n();
  const int N = graph.size();
  const CMat M =
      Complex(0.0, omega) * CMat::Identity(n, n) - model.A.cast<Complex>();
  Eigen::JacobiSVD<CMat> msvd(M);
  const double smin = msvd.singularValues()(n - 1);
  if (!(smin > 0.0) || msvd.singularValues()(0) / smin > 1e12)
    fail(ErrorCode::NearPole, "resolvent nearly singular at this omega");

  const CMat H = M.partialPivLu().solve(model.B.cast<Complex>()) *
                 model.K.cast<Complex>();

  // (I_N kron H) (c L kron I_n) collapses to c (L kron H).
  CMat big = CMat::Identity(n * N, n * N);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k)
      big.block(i * n, k * n, n, n) += model.c * graph.laplacian(i, k) * H;
  return big.determinant();
}

}  // namespace margins
