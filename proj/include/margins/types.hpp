#pragma once

#include <Eigen/Dense>
#include <complex>

namespace margins {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

constexpr double kPi = 3.14159265358979323846;

// Uniform eigenvalue-sign threshold: a mode counts as stable only if its real
// part is strictly below -kHurwitzTol, so behavior at the margin is
// deterministic instead of rounding-dependent.
constexpr double kHurwitzTol = 1e-9;

}  // namespace margins
