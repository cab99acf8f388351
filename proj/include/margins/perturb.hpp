#pragma once

#include <vector>

#include "margins/types.hpp"

namespace margins {

// A feedback perturbation Delta = R * U with its polar factors and the
// scalar measures used by the margin definitions: phase is the largest
// eigenvalue argument of U (in [0, pi]), gain the largest |ln| of an
// eigenvalue of R.
struct Perturbation {
  CMat matrix;  // = R * U, nonsingular
  CMat R;       // Hermitian positive definite factor
  CMat U;       // unitary factor
  double phase = 0.0;
  double gain = 0.0;
};

// Wraps an angle into (-pi, pi]; values within 1e-12 of -pi map to +pi.
double wrap_phase(double theta);

// Polar factorization M = R U via the singular-value decomposition
// (M = W S V* gives U = W V*, R = W S W*).
Perturbation polar_decompose(const CMat& M);

// U = P diag(exp(j phi_k)) P* over a unitary basis P.
Perturbation unitary_from_phases(const CMat& P,
                                 const std::vector<double>& phases);

// Unitary U with U v = z acting as the identity on the orthogonal
// complement of span{v, z}; its phase is acos(Re<v, z>). The antipodal case
// v = -z uses a deterministic complement axis for the half-turn plane.
Perturbation plane_rotation_unitary(const CVec& v, const CVec& z);

// Hermitian positive definite R with R v = z (requires v* z real positive).
// Built on the orthonormal frame {v / ||v||, z-residual, coordinate
// fill-ins}; the free block entry defaults to p22 = beta^2 / (gamma alpha) + 1
// and may be overridden with any value above beta^2 / (gamma alpha)
// (p22_override <= 0 selects the default).
Perturbation pd_hermitian_map(const CVec& v, const CVec& z,
                              double p22_override = 0.0);

// max_k |ln lambda_k(R)| for Hermitian positive definite R.
double matrix_log_gain(const CMat& R);

}  // namespace margins
