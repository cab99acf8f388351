#include "margins/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "margins/errors.hpp"
#include "margins/freqresp.hpp"

namespace margins {

namespace {

double disagreement_of(const CMat& X) {
  const CVec mean = X.colwise().mean().transpose();
  double worst = 0.0;
  for (int i = 0; i < X.rows(); ++i)
    worst = std::max(worst, (X.row(i).transpose() - mean).norm());
  return worst;
}

// Window-max monotonicity of the disagreement tail: the last 20% of the
// stored trace is split into four windows whose maxima must not increase.
bool tail_monotone(const std::vector<double>& d) {
  const std::size_t m = d.size();
  if (m < 8) return true;
  const std::size_t start = m - std::max<std::size_t>(m / 5, 4);
  const std::size_t span = m - start;
  constexpr std::size_t kWindows = 4;
  double prev = -1.0;
  for (std::size_t w = 0; w < kWindows; ++w) {
    const std::size_t a = start + w * span / kWindows;
    const std::size_t b = start + (w + 1) * span / kWindows;
    double mx = 0.0;
    for (std::size_t i = a; i < b; ++i) mx = std::max(mx, d[i]);
    if (w > 0 && mx > prev + 1e-9 * (1.0 + prev)) return false;
    prev = mx;
  }
  return true;
}

struct Recorder {
  explicit Recorder(long long total_steps) {
    stride = std::max<long long>(1, total_steps / 20000);
  }
  long long stride = 1;
  SimResult result;

  void record(long long step, double t, const CMat& X, double d) {
    if (step % stride != 0) return;
    result.times.push_back(t);
    result.states.push_back(X);
    result.disagreement.push_back(d);
  }
  void record_final(double t, const CMat& X, double d) {
    if (!result.times.empty() && result.times.back() == t) return;
    result.times.push_back(t);
    result.states.push_back(X);
    result.disagreement.push_back(d);
  }
};

void finish_verdict(SimResult& r, bool diverged, double tol) {
  if (diverged) {
    r.verdict = SimVerdict::Diverged;
    return;
  }
  const double final_d = r.disagreement.back();
  if (final_d <= tol && tail_monotone(r.disagreement)) {
    r.verdict = SimVerdict::Converged;
    const CMat& X = r.states.back();
    r.final_consensus_value = X.colwise().mean().transpose();
  } else {
    r.verdict = SimVerdict::Inconclusive;
  }
}

void check_sim_args(const AgentModel& model, const NetworkGraph& graph,
                    const Mat& x0, double horizon, double dt) {
  if (dt <= 0.0) fail(ErrorCode::StepTooLarge, "dt must be positive");
  if (horizon < 50.0 * dt)
    fail(ErrorCode::HorizonTooShort,
         "horizon must cover at least 50 steps (horizon=" +
             std::to_string(horizon) + ", dt=" + std::to_string(dt) + ")");
  if (x0.rows() != graph.size() || x0.cols() != model.n())
    fail(ErrorCode::DimensionMismatch,
         "x0 must be agents x state dimension (" +
             std::to_string(graph.size()) + " x " + std::to_string(model.n()) +
             ")");
}

}  // namespace

std::pair<bool, double> perturbed_loop_stable(const TransformedLoop& loop,
                                              const Perturbation& delta) {
  const AgentModel& m = loop.model;
  const CMat closed = m.A.cast<Complex>() -
                      loop.sigma() * (m.B * m.K).cast<Complex>() * delta.matrix;
  Eigen::ComplexEigenSolver<CMat> es(closed, /*computeEigenvectors=*/false);
  const double abscissa = es.eigenvalues().real().maxCoeff();
  return {abscissa < -kHurwitzTol, abscissa};
}

double destabilization_residual(const TransformedLoop& loop, double omega,
                                const Perturbation& delta) {
  const LoopResponse r = eval_loop(loop, omega);
  const CMat M =
      CMat::Identity(r.G.rows(), r.G.cols()) + r.G * delta.matrix;
  Eigen::JacobiSVD<CMat> svd(M);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

SimResult simulate_delayed_consensus(const AgentModel& model,
                                     const NetworkGraph& graph, double tau,
                                     const Mat& x0, double horizon, double dt,
                                     const SimTolerances& tol) {
  if (tau < 0.0) fail(ErrorCode::StepTooLarge, "tau must be nonnegative");
  if (tau > 0.0 && dt > tau / 10.0 + 1e-15)
    fail(ErrorCode::StepTooLarge,
         "dt must be at most tau/10 (dt=" + std::to_string(dt) +
             ", tau=" + std::to_string(tau) + ")");
  check_sim_args(model, graph, x0, horizon, dt);

  const Mat At = model.A.transpose();
  const Mat BKt = (model.B * model.K).transpose();
  const Mat& L = graph.laplacian;
  const double c = model.c;

  const long long steps = std::llround(horizon / dt);
  const double consensus_tol =
      tol.consensus_tol > 0.0 ? tol.consensus_tol : 1e-6 * (1.0 + x0.norm());

  // Full-resolution history for delayed-state interpolation.
  std::vector<Mat> hist;
  hist.reserve(static_cast<std::size_t>(steps) + 1);
  hist.push_back(x0);

  const auto delayed = [&](double t) -> Mat {
    if (t <= 0.0) return x0;
    const double pos = t / dt;
    const auto k = static_cast<long long>(pos);
    if (k + 1 >= static_cast<long long>(hist.size())) return hist.back();
    const double theta = pos - static_cast<double>(k);
    return (1.0 - theta) * hist[static_cast<std::size_t>(k)] +
           theta * hist[static_cast<std::size_t>(k) + 1];
  };
  const auto deriv = [&](const Mat& X, double t_delayed) -> Mat {
    if (tau == 0.0) return X * At - c * (L * X) * BKt;
    const Mat Xd = delayed(t_delayed);
    return X * At - c * (L * Xd) * BKt;
  };

  Recorder rec(steps);
  Mat X = x0;
  const double d0 = disagreement_of(X.cast<Complex>());
  double d = d0;
  rec.record(0, 0.0, X.cast<Complex>(), d);
  bool diverged = false;
  long long done = 0;

  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Mat k1 = deriv(X, t - tau);
    const Mat k2 = deriv(X + 0.5 * dt * k1, t + 0.5 * dt - tau);
    const Mat k3 = deriv(X + 0.5 * dt * k2, t + 0.5 * dt - tau);
    const Mat k4 = deriv(X + dt * k3, t + dt - tau);
    X += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    hist.push_back(X);
    done = k + 1;

    d = disagreement_of(X.cast<Complex>());
    rec.record(done, static_cast<double>(done) * dt, X.cast<Complex>(), d);
    if (d0 > 0.0 && d > tol.divergence_factor * d0) {
      diverged = true;
      break;
    }
    if (!std::isfinite(d)) {
      diverged = true;
      break;
    }
  }
  rec.record_final(static_cast<double>(done) * dt, X.cast<Complex>(), d);

  SimResult result = std::move(rec.result);
  finish_verdict(result, diverged, consensus_tol);
  return result;
}

SimResult simulate_perturbed_consensus(const AgentModel& model,
                                       const NetworkGraph& graph,
                                       const Perturbation& delta,
                                       const Mat& x0, double horizon,
                                       double dt, const SimTolerances& tol) {
  check_sim_args(model, graph, x0, horizon, dt);
  Eigen::JacobiSVD<CMat> svd(delta.matrix);
  const Vec sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-12 * sv(0))
    fail(ErrorCode::SingularInput, "perturbation must be nonsingular");

  const CMat At = model.A.transpose().cast<Complex>();
  const CMat BKDt =
      ((model.B * model.K).cast<Complex>() * delta.matrix).transpose();
  const CMat L = graph.laplacian.cast<Complex>();
  const Complex c(model.c, 0.0);

  const long long steps = std::llround(horizon / dt);
  const double consensus_tol =
      tol.consensus_tol > 0.0 ? tol.consensus_tol : 1e-6 * (1.0 + x0.norm());

  const auto deriv = [&](const CMat& X) -> CMat {
    return X * At - c * (L * X) * BKDt;
  };

  Recorder rec(steps);
  CMat X = x0.cast<Complex>();
  const double d0 = disagreement_of(X);
  double d = d0;
  rec.record(0, 0.0, X, d);
  bool diverged = false;
  long long done = 0;

  for (long long k = 0; k < steps; ++k) {
    const CMat k1 = deriv(X);
    const CMat k2 = deriv(X + 0.5 * dt * k1);
    const CMat k3 = deriv(X + 0.5 * dt * k2);
    const CMat k4 = deriv(X + dt * k3);
    X += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    done = k + 1;

    d = disagreement_of(X);
    rec.record(done, static_cast<double>(done) * dt, X, d);
    if (d0 > 0.0 && d > tol.divergence_factor * d0) {
      diverged = true;
      break;
    }
    if (!std::isfinite(d)) {
      diverged = true;
      break;
    }
  }
  rec.record_final(static_cast<double>(done) * dt, X, d);

  SimResult result = std::move(rec.result);
  finish_verdict(result, diverged, consensus_tol);
  return result;
}

Mat default_initial_states(int agents, int n) {
  Mat x0(agents, n);
  for (int i = 0; i < agents; ++i)
    for (int k = 0; k < n; ++k)
      x0(i, k) = std::sin(1.7 * static_cast<double>(i * n + k) + 0.3);
  return x0;
}

}  // namespace margins
