#include "margins/perturb.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "margins/errors.hpp"

namespace margins {

namespace {

double max_eig_phase(const CMat& U) {
  Eigen::ComplexEigenSolver<CMat> es(U, /*computeEigenvectors=*/false);
  double worst = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    worst = std::max(worst, std::abs(wrap_phase(std::arg(es.eigenvalues()(i)))));
  return worst;
}

void require_square(const CMat& M, const char* what) {
  if (M.rows() != M.cols() || M.rows() == 0)
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + " must be a nonempty square matrix");
}

}  // namespace

double wrap_phase(double theta) {
  double w = theta - 2.0 * kPi * std::floor((theta + kPi) / (2.0 * kPi));
  if (w <= -kPi + 1e-12) w = kPi;
  return w;
}

Perturbation polar_decompose(const CMat& M) {
  require_square(M, "polar_decompose input");
  Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * s(0))
    fail(ErrorCode::SingularInput,
         "polar_decompose requires a nonsingular matrix (sigma_min/sigma_max="
         + std::to_string(s(s.size() - 1) / std::max(s(0), 1e-300)) + ")");
  Perturbation d;
  d.matrix = M;
  d.U = svd.matrixU() * svd.matrixV().adjoint();
  d.R = svd.matrixU() * s.asDiagonal() * svd.matrixU().adjoint();
  d.R = 0.5 * (d.R + d.R.adjoint().eval());
  d.phase = max_eig_phase(d.U);
  d.gain = matrix_log_gain(d.R);
  return d;
}

Perturbation unitary_from_phases(const CMat& P,
                                 const std::vector<double>& phases) {
  require_square(P, "unitary_from_phases basis");
  const int n = static_cast<int>(P.rows());
  if (static_cast<int>(phases.size()) != n)
    fail(ErrorCode::DimensionMismatch,
         "unitary_from_phases needs one phase per basis column");
  const double defect =
      (P * P.adjoint() - CMat::Identity(n, n)).cwiseAbs().maxCoeff();
  if (defect > 1e-10)
    fail(ErrorCode::NonUnitaryBasis,
         "basis is not unitary (max |PP* - I| = " + std::to_string(defect) +
             ")");
  CVec diag(n);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = wrap_phase(phases[i]);
    worst = std::max(worst, std::abs(w));
    diag(i) = Complex(std::cos(w), std::sin(w));
  }
  Perturbation d;
  d.U = P * diag.asDiagonal() * P.adjoint();
  d.R = CMat::Identity(n, n);
  d.matrix = d.U;
  d.phase = worst;
  d.gain = 0.0;
  return d;
}

Perturbation plane_rotation_unitary(const CVec& v, const CVec& z) {
  const int n = static_cast<int>(v.size());
  if (n == 0 || z.size() != n)
    fail(ErrorCode::DimensionMismatch,
         "plane_rotation_unitary needs two vectors of equal dimension");
  if (std::abs(v.norm() - 1.0) > 1e-10 || std::abs(z.norm() - 1.0) > 1e-10)
    fail(ErrorCode::DegenerateSpan,
         "plane_rotation_unitary requires unit vectors");

  const Complex c = v.dot(z);  // <v, z> with v conjugated
  const CVec residual = z - c * v;
  const double s = residual.norm();

  Perturbation d;
  d.R = CMat::Identity(n, n);
  d.gain = 0.0;

  if (s <= 1e-12) {
    // z is a phase multiple of v.
    if (c.real() <= -1.0 + 1e-12 && std::abs(c.imag()) <= 1e-12 && n > 1) {
      // Antipodal pair: a half turn needs a second axis; take the first
      // coordinate direction with a healthy component orthogonal to v.
      CVec w;
      for (int k = 0; k < n; ++k) {
        CVec cand = CVec::Zero(n);
        cand(k) = 1.0;
        cand -= v.dot(cand) * v;
        if (cand.norm() > 1e-6) {
          w = cand.normalized();
          break;
        }
      }
      d.U = CMat::Identity(n, n) - 2.0 * (v * v.adjoint()) -
            2.0 * (w * w.adjoint());
    } else {
      d.U = CMat::Identity(n, n) + (c - 1.0) * (v * v.adjoint());
    }
  } else {
    const CVec w = residual / s;
    CMat basis(n, 2);
    basis.col(0) = v;
    basis.col(1) = w;
    CMat rot(2, 2);
    rot << c, Complex(-s, 0.0), Complex(s, 0.0), std::conj(c);
    d.U = basis * rot * basis.adjoint() + CMat::Identity(n, n) -
          v * v.adjoint() - w * w.adjoint();
  }
  d.matrix = d.U;
  d.phase = max_eig_phase(d.U);
  return d;
}

Perturbation pd_hermitian_map(const CVec& v, const CVec& z,
                              double p22_override) {
  const int n = static_cast<int>(v.size());
  if (n == 0 || z.size() != n)
    fail(ErrorCode::DimensionMismatch,
         "pd_hermitian_map needs two vectors of equal dimension");
  const Complex ip = v.dot(z);
  const double scale = std::max(1.0, std::abs(ip));
  if (std::abs(ip.imag()) > 1e-9 * scale)
    fail(ErrorCode::InnerProductNotReal,
         "v* z must be real (Im = " + std::to_string(ip.imag()) + ")");
  if (ip.real() <= 0.0)
    fail(ErrorCode::InnerProductNotPositive,
         "v* z must be positive (Re = " + std::to_string(ip.real()) + ")");

  const double gamma = v.norm();
  const CVec q1 = v / gamma;
  const double alpha = q1.dot(z).real();
  const CVec residual = z - alpha * q1;
  const double beta = residual.norm();
  const bool split = beta > 1e-12 * std::max(1.0, z.norm());

  // Orthonormal frame: q1, the z-residual direction (when present), then
  // coordinate-axis fill-ins in index order, skipping near-dependent ones.
  CMat Q(n, n);
  int cols = 0;
  Q.col(cols++) = q1;
  if (split && n >= 2) Q.col(cols++) = residual / beta;
  for (int k = 0; k < n && cols < n; ++k) {
    CVec cand = CVec::Zero(n);
    cand(k) = 1.0;
    for (int j = 0; j < cols; ++j) cand -= Q.col(j).dot(cand) * Q.col(j);
    const double nrm = cand.norm();
    if (nrm <= 1e-8) continue;
    Q.col(cols++) = cand / nrm;
  }
  if (cols < n)
    fail(ErrorCode::DegenerateSpan,
         "could not complete an orthonormal frame for pd_hermitian_map");

  const double p22_floor = split ? beta * beta / (gamma * alpha) : 0.0;
  double p22 = p22_override > 0.0 ? p22_override : p22_floor + 1.0;
  if (p22 <= p22_floor)
    fail(ErrorCode::NotPositiveDefinite,
         "p22 must exceed beta^2 / (gamma alpha) = " +
             std::to_string(p22_floor));

  Mat P = Mat::Identity(n, n);
  P(0, 0) = alpha / gamma;
  if (n >= 2) {
    P(1, 1) = p22;
    if (split) {
      P(0, 1) = beta / gamma;
      P(1, 0) = beta / gamma;
    }
  }

  Perturbation d;
  d.R = Q * P * Q.adjoint();
  d.R = 0.5 * (d.R + d.R.adjoint().eval());
  d.U = CMat::Identity(n, n);
  d.matrix = d.R;
  d.phase = 0.0;
  d.gain = matrix_log_gain(d.R);
  return d;
}

double matrix_log_gain(const CMat& R) {
  require_square(R, "matrix_log_gain input");
  const double hdefect = (R - R.adjoint()).norm();
  if (hdefect > 1e-10 * std::max(1.0, R.norm()))
    fail(ErrorCode::NotPositiveDefinite,
         "matrix_log_gain input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> es(R);
  double worst = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 0.0)
      fail(ErrorCode::NotPositiveDefinite,
           "matrix_log_gain input has eigenvalue " + std::to_string(lam));
    worst = std::max(worst, std::abs(std::log(lam)));
  }
  return worst;
}

}  // namespace margins
