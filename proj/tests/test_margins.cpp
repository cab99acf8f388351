#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "margins/margins.hpp"

using namespace margins;

namespace {

AgentModel reference_model(double c = 0.15) {
  AgentModel m;
  m.A.resize(2, 2);
  m.A << -2, 2, -1, 1;
  m.B.resize(2, 1);
  m.B << 1, 0;
  m.K.resize(1, 2);
  m.K << -2, -0.5;
  m.c = c;
  return m;
}

NetworkGraph line3_graph() {
  Mat adj = Mat::Zero(3, 3);
  adj(1, 0) = 1.0;
  adj(1, 2) = 1.0;
  adj(2, 1) = 1.0;
  return build_laplacian(adj);
}

// Dense-enough grid to locate every lobe, few enough starts to stay quick;
// the golden refinement is grid-independent so margin values are unaffected.
MarginConfig fast_config() {
  MarginConfig cfg;
  cfg.sweep.grid_points = 600;
  cfg.optimizer.starts = 8;
  return cfg;
}

TransformedLoop single_loop(const AgentModel& m, Complex lambda) {
  TransformedLoop loop;
  loop.p = 2;
  loop.lambda_p = lambda;
  loop.model = m;
  return loop;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("reference network margins") {
  const MarginReport r =
      compute_margins(reference_model(), line3_graph(), fast_config());

  // Phase margin, attained on the fast loop at an interior frequency.
  CHECK(std::abs(r.phase_margin_rad - 0.182015060) < 1e-6);
  CHECK(r.phase_p == 3);
  CHECK(std::abs(r.phase_omega - 0.919913) < 1e-3);
  CHECK_FALSE(r.phase_independent);

  // Delay margin: min over loops and frequencies of phi(omega) / omega.
  CHECK(std::abs(r.delay_margin_s - 0.197453867) < 1e-6);
  CHECK(r.delay_p == 3);
  CHECK(std::abs(r.delay_omega - 0.923666) < 1e-3);
  CHECK_FALSE(r.delay_independent);

  // Gain margin (log radius).
  CHECK(std::abs(r.gain_margin - 0.201837398) < 1e-6);
  CHECK(r.gain_p == 3);
  CHECK(std::abs(r.gain_omega - 1.076023) < 1e-3);
  CHECK_FALSE(r.gain_independent);

  // Reported intervals are symmetric around the identity perturbation.
  CHECK(r.phase_interval.first == -r.phase_margin_rad);
  CHECK(r.phase_interval.second == r.phase_margin_rad);
  CHECK(std::abs(r.gain_sv_interval.first * r.gain_sv_interval.second - 1.0) <
        1e-12);
  CHECK(std::abs(r.gain_sv_interval.second - std::exp(r.gain_margin)) < 1e-12);

  CHECK(r.warnings.empty());

  REQUIRE(r.per_loop.size() == 2);
  CHECK(r.per_loop[0].p == 2);
  CHECK(r.per_loop[1].p == 3);
  CHECK(r.per_loop[0].lambda_p.real() == doctest::Approx(0.381966).epsilon(1e-4));
  CHECK(r.per_loop[1].lambda_p.real() == doctest::Approx(2.618034).epsilon(1e-4));

  // Optima carry sufficiency certificates and minimizers.
  for (const PerLoopDetail& d : r.per_loop) {
    CHECK(d.phase_certified);
    CHECK(d.gain_certified);
    CHECK(d.z_phase.size() == 2);
    CHECK(d.z_gain.size() == 2);
  }

  // The slow loop's own margins sit well above the system margins.
  CHECK(std::abs(r.per_loop[0].phi_star - 1.030377) < 2e-3);
  CHECK(std::abs(r.per_loop[0].tau_star - 7.440017) < 5e-2);
  CHECK(std::abs(r.per_loop[0].g_star - 1.283796) < 2e-3);
  CHECK(std::abs(r.per_loop[1].phi_star - 0.182015060) < 1e-6);
  CHECK(std::abs(r.per_loop[1].g_star - 0.201837398) < 1e-6);

  // The fast loop's phase set is the single DC-anchored interval.
  REQUIRE(r.per_loop[1].phase_intervals.size() == 1);
  CHECK(r.per_loop[1].phase_intervals[0].first == 0.0);
  CHECK(std::abs(r.per_loop[1].phase_intervals[0].second - 0.9927357) < 1e-4);
}

TEST_CASE("grid rows bracket the refined optimum") {
  const MarginReport r =
      compute_margins(reference_model(), line3_graph(), fast_config());
  const PerLoopDetail& d = r.per_loop[1];
  REQUIRE(!d.grid_rows.empty());

  double min_phi = kInf;
  double prev = -1.0;
  bool sorted = true;
  for (const PerLoopGridRow& row : d.grid_rows) {
    if (row.omega < prev) sorted = false;
    prev = row.omega;
    if (std::isfinite(row.phi)) min_phi = std::min(min_phi, row.phi);
    if (std::isfinite(row.sigma_max) && std::isfinite(row.sigma_min))
      CHECK(row.sigma_max >= row.sigma_min);
    if (std::isfinite(row.tau_candidate) && row.omega > 0.0 &&
        std::isfinite(row.phi))
      CHECK(row.tau_candidate ==
            doctest::Approx(row.phi / row.omega).epsilon(1e-12));
  }
  CHECK(sorted);
  // Grid evaluations can only sit at or above the refined minimum, and the
  // grid is dense enough that the best row lands close to it.
  CHECK(min_phi >= d.phi_star - 1e-9);
  CHECK(min_phi <= d.phi_star + 0.02);
}

TEST_CASE("a single agent constrains nothing") {
  const MarginReport r = compute_margins(std::vector<TransformedLoop>{});
  CHECK(r.phase_independent);
  CHECK(r.gain_independent);
  CHECK(r.delay_independent);
  CHECK(r.phase_margin_rad == kInf);
  CHECK(r.gain_margin == kInf);
  CHECK(r.delay_margin_s == kInf);
  CHECK(r.phase_interval.first == -kPi);
  CHECK(r.phase_interval.second == kPi);
  CHECK(r.gain_sv_interval.first == 0.0);
  CHECK(r.gain_sv_interval.second == kInf);
  CHECK(r.per_loop.empty());
  REQUIRE(r.per_loop.size() == 0);
  REQUIRE(!r.warnings.empty());
  CHECK(r.warnings[0].find("single agent") != std::string::npos);
}

TEST_CASE("weak coupling with a stable plant unbinds phase but not gain") {
  // Invertible Hurwitz A keeps the response bounded at DC; at c = 0.01 the
  // unit circle never meets the singular-value band, so no phase-only
  // perturbation can destabilize and the delay margin is unbounded too.
  // The gain constraint z* G z = -1 carries no normalization, though: as
  // long as the field of values crosses the negative reals somewhere, a
  // large enough z reaches it at any coupling strength, so the gain margin
  // stays finite - just very large (a ~e^3.9 = 49x amplification).
  AgentModel m = reference_model(0.01);
  m.A << -2, 2, -1, -1;
  MarginConfig cfg = fast_config();
  const MarginReport r =
      compute_margins({single_loop(m, Complex(2.618034, 0.0))}, cfg);
  CHECK(r.phase_independent);
  CHECK(r.delay_independent);
  CHECK(r.phase_margin_rad == kInf);
  CHECK(r.delay_margin_s == kInf);
  CHECK(r.phase_interval.first == -kPi);
  CHECK(r.phase_interval.second == kPi);
  REQUIRE(r.per_loop.size() == 1);
  CHECK(r.per_loop[0].phase_intervals.empty());
  CHECK(r.per_loop[0].phi_star == kInf);

  CHECK_FALSE(r.gain_independent);
  CHECK(std::isfinite(r.gain_margin));
  CHECK(r.gain_margin > 3.0);
  CHECK(std::abs(r.gain_margin - 3.89379) < 1e-3);
}

TEST_CASE("delay stays dependent when the plant itself is unstable") {
  // Same weak coupling, but A keeps its zero eigenvalue: the DC band makes
  // the phase problem feasible, so nothing is independent here.
  MarginConfig cfg = fast_config();
  const MarginReport r =
      compute_margins({single_loop(reference_model(0.01),
                                   Complex(2.618034, 0.0))},
                      cfg);
  CHECK_FALSE(r.phase_independent);
  CHECK(std::isfinite(r.phase_margin_rad));
}

TEST_CASE("objective-to-margin maps") {
  double over = -1.0;
  CHECK(phase_of_objective(-2.0, &over) == doctest::Approx(0.0));
  CHECK(over == 0.0);
  CHECK(phase_of_objective(0.0) == doctest::Approx(kPi / 2.0));
  CHECK(phase_of_objective(2.0) == doctest::Approx(kPi));
  CHECK(phase_of_objective(-1.9669619) == doctest::Approx(0.182015).epsilon(1e-4));

  phase_of_objective(-2.2, &over);
  CHECK(over == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(phase_of_objective(-2.2) == 0.0);
  phase_of_objective(2.4, &over);
  CHECK(over == doctest::Approx(0.2).epsilon(1e-12));

  CHECK(gain_of_objective(2.0) == 0.0);
  CHECK(gain_of_objective(2.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(gain_of_objective(1.8) == 0.0);  // below the reachable floor
  CHECK(gain_of_objective(2.0 * std::cosh(0.7)) ==
        doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("margin analysis is deterministic") {
  MarginConfig cfg = fast_config();
  cfg.sweep.grid_points = 300;
  const std::vector<TransformedLoop> loops =
      transformed_loops(reference_model(), line3_graph());
  const MarginReport a = compute_margins(loops, cfg);
  const MarginReport b = compute_margins(loops, cfg);
  CHECK(a.phase_margin_rad == b.phase_margin_rad);
  CHECK(a.gain_margin == b.gain_margin);
  CHECK(a.delay_margin_s == b.delay_margin_s);
  CHECK(a.phase_omega == b.phase_omega);
  CHECK(a.gain_omega == b.gain_omega);
  REQUIRE(a.per_loop.size() == b.per_loop.size());
  for (std::size_t i = 0; i < a.per_loop.size(); ++i) {
    CHECK(a.per_loop[i].phi_star == b.per_loop[i].phi_star);
    CHECK(a.per_loop[i].g_star == b.per_loop[i].g_star);
    CHECK(a.per_loop[i].tau_star == b.per_loop[i].tau_star);
    for (int k = 0; k < a.per_loop[i].z_phase.size(); ++k) {
      CHECK(a.per_loop[i].z_phase(k).real() == b.per_loop[i].z_phase(k).real());
      CHECK(a.per_loop[i].z_phase(k).imag() == b.per_loop[i].z_phase(k).imag());
    }
  }
}

TEST_CASE("model-plus-graph overload checks assumptions first") {
  // c = 0.25 pushes the fast loop outside the consensus region.
  CHECK_THROWS_AS(
      compute_margins(reference_model(0.25), line3_graph(), fast_config()),
      Error);
}
