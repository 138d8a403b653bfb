#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mvhvi/gallery.hpp"
#include "mvhvi/hypotheses.hpp"
#include "mvhvi/solver.hpp"
#include "mvhvi/verify.hpp"

using namespace mvhvi;

namespace {

Vec v1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

ProblemInstance kink_with_f(double f) {
  ProblemInstance inst = make_gallery_instance("kink-multiplier");
  inst.f[0] = f;
  return inst;
}

ProblemInstance lcp_with_f(double f) {
  ProblemInstance inst = make_gallery_instance("scalar-lcp");
  inst.f[0] = f;
  return inst;
}

} // namespace

TEST_CASE("inner solve: linear case") {
  ProblemInstance inst = lcp_with_f(4.0);
  SolverConfig cfg;
  const Vec u = inner_solve_u(inst, Vec::Zero(1), Vec::Zero(1), cfg);
  CHECK(u[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("inner solve: kink branch") {
  ProblemInstance inst = kink_with_f(-2.0);
  SolverConfig cfg;
  const Vec u = inner_solve_u(inst, Vec::Zero(1), Vec::Zero(1), cfg);
  CHECK(u[0] == doctest::Approx(-2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("inner solve: interval membership at the kink") {
  ProblemInstance inst = kink_with_f(0.0);
  SolverConfig cfg;
  // -0.5 lies in the subgradient interval [-1, 1] at 0, so u = 0 closes the
  // inclusion; from 0 and from a warm start away from the kink.
  const Vec from0 = inner_solve_u(inst, v1(0.5), Vec::Zero(1), cfg);
  CHECK(from0[0] == 0.0);
  const Vec from1 = inner_solve_u(inst, v1(0.5), v1(1.0), cfg);
  CHECK(std::fabs(from1[0]) <= 1e-8);
}

TEST_CASE("solve: kink-multiplier load 3") {
  const ProblemInstance inst = kink_with_f(3.0);
  SolverConfig cfg;
  auto [pair, trace] = solve(inst, cfg);
  CHECK(std::fabs(pair.u[0]) <= 1e-8);
  CHECK(pair.lambda[0] >= 2.0 - 1e-6);
  CHECK(pair.lambda[0] <= 4.0 + 1e-6);
  CHECK(pair.residuals.max() <= 1e-8);
  CHECK(trace.termination == "converged");
}

TEST_CASE("solve: kink-multiplier load -2") {
  const ProblemInstance inst = kink_with_f(-2.0);
  SolverConfig cfg;
  auto [pair, trace] = solve(inst, cfg);
  (void)trace;
  CHECK(pair.u[0] == doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
  CHECK(std::fabs(pair.lambda[0]) <= 1e-8);
}

TEST_CASE("solve: scalar complementarity closed forms") {
  {
    auto [pair, trace] = solve(lcp_with_f(-2.0), SolverConfig{});
    (void)trace;
    CHECK(pair.u[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::fabs(pair.lambda[0]) <= 1e-8);
  }
  {
    auto [pair, trace] = solve(lcp_with_f(3.0), SolverConfig{});
    (void)trace;
    CHECK(std::fabs(pair.u[0]) <= 1e-8);
    CHECK(pair.lambda[0] == doctest::Approx(3.0).epsilon(1e-7));
  }
}

TEST_CASE("complementarity residual examples") {
  const ProblemInstance inst = lcp_with_f(0.0);
  // B u = -1, lambda = 0: feasible and complementary.
  CHECK(complementarity_residual(inst, v1(-1.0), v1(0.0)) == 0.0);
  // B u = 0.5: infeasibility dominates.
  CHECK(complementarity_residual(inst, v1(0.5), v1(0.0)) >= 0.5);
  // B u = -1, lambda = 2: complementarity gap |lambda B u| = 2.
  CHECK(complementarity_residual(inst, v1(-1.0), v1(2.0)) ==
        doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("complementarity residual for box and polyhedron") {
  ProblemInstance box = lcp_with_f(0.0);
  box.Lambda = LambdaSet::box(Vec::Constant(1, 2.0));
  // B u = 1 > 0: box maximizer rho* = 2, residual (2 - 0.5) * 1.
  CHECK(complementarity_residual(box, v1(1.0), v1(0.5)) ==
        doctest::Approx(1.5).epsilon(1e-14));

  ProblemInstance poly = lcp_with_f(0.0);
  Mat C(2, 1);
  C << -1.0, 1.0;
  Vec d(2);
  d << 0.0, 2.0;
  poly.Lambda = LambdaSet::polyhedron(C, d);
  CHECK(complementarity_residual(poly, v1(1.0), v1(0.5)) ==
        doctest::Approx(1.5).epsilon(1e-12));
  CHECK(complementarity_residual(poly, v1(-1.0), v1(0.0)) <= 1e-12);
}

TEST_CASE("multi-start: multiplier interval, unique state") {
  const ProblemInstance inst = kink_with_f(3.0);
  SolverConfig cfg;
  cfg.restarts = 20;
  cfg.certify.count = 500;
  const UniquenessReport rep = multi_start(inst, cfg, 2024);
  CHECK(rep.applicable);
  CHECK(rep.consistent);
  CHECK(rep.u_spread <= 1e-7);
  CHECK(rep.lambda_spread >= 0.5); // multiplier set is {0} x [2, 4]
}

TEST_CASE("multi-start: strictly monotone linear instance") {
  const ProblemInstance inst = lcp_with_f(-2.0);
  SolverConfig cfg;
  cfg.restarts = 12;
  cfg.certify.count = 500;
  const UniquenessReport rep = multi_start(inst, cfg, 2025);
  CHECK(rep.applicable);
  CHECK(rep.u_spread <= 1e-7);
  CHECK(rep.lambda_spread <= 1e-7);
}

TEST_CASE("multi-start gates on the power form of h") {
  ProblemInstance inst = lcp_with_f(-2.0);
  inst.h = HFunctionSpec::zero();
  SolverConfig cfg;
  cfg.restarts = 3;
  const UniquenessReport rep = multi_start(inst, cfg, 2026);
  CHECK(!rep.applicable);
}

TEST_CASE("uzawa matches the dual projected-gradient trajectory and the "
          "QP oracle") {
  std::mt19937_64 rng(311);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    GeneratorOptions opts;
    opts.zero_J = true;
    opts.orthant_only = true;
    opts.max_dim = 4;
    ProblemInstance inst = random_audited_instance(400 + trial, opts);
    inst.A.power.reset();
    const Mat sym = 0.5 * (inst.A.P + inst.A.P.transpose());
    inst.A.P = sym; // SPD for the QP view
    inst.A.declared_m_A = std::max(inst.A.sym_eigmin() - 1e-9, 0.0);

    SolverConfig cfg;
    cfg.skip_audits = true;
    cfg.radii_schedule = {{512.0, 512.0}};
    cfg.certify.count = 500;
    // A step inside the dual-ascent stability region, so neither run needs
    // the divergence backoff and the trajectories stay comparable.
    const double bnorm = inst.b.spectral_norm();
    const double t = 0.9 * inst.h.c_h / std::max(bnorm * bnorm, 1e-12);
    cfg.outer_step = t;
    auto [pair, trace] = solve(inst, cfg);

    // Replay the trajectory: dual projected gradient with exact inner
    // solves, the same step and the same number of multiplier updates.
    Eigen::LLT<Mat> llt(inst.A.P);
    Vec lam = Vec::Zero(inst.dims.m_E);
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
      const Vec u = llt.solve(inst.f - inst.b.B.transpose() * lam);
      lam = (lam + t * (inst.b.B * u)).cwiseMax(0.0);
    }
    CHECK((pair.lambda - lam).norm() <= 1e-6 * std::max(1.0, lam.norm()));

    const auto [u_ref, lam_ref] = lcp_active_set_solve(inst);
    CHECK((pair.u - u_ref).norm() <= 1e-8);
    CHECK((pair.lambda - lam_ref).norm() <= 1e-6);
  }
}

TEST_CASE("ball-schedule soundness") {
  const ProblemInstance inst = kink_with_f(3.0);
  SolverConfig cfg;
  auto [pair, trace] = solve(inst, cfg);
  SolverConfig resumed = cfg;
  resumed.schedule_start = trace.final_schedule_index;
  auto [pair2, trace2] = solve(inst, resumed);
  (void)trace2;
  CHECK((pair.u - pair2.u).norm() <= 1e-8);
}

TEST_CASE("schedule exhausts when no interior solution exists") {
  // A == 0 with a positive load: the inclusion 1 - lambda in {0} never
  // closes at finite u; iterates drift to every ball boundary.
  ProblemInstance inst = lcp_with_f(1.0);
  inst.A.P.setZero();
  inst.A.declared_m_A = 0.0;
  inst.h = HFunctionSpec::zero();
  SolverConfig cfg;
  cfg.skip_audits = true;
  cfg.max_inner = 300;
  cfg.radii_schedule = {{1.0, 1.0}, {2.0, 2.0}, {4.0, 4.0}};
  CHECK_THROWS_AS(solve(inst, cfg), ScheduleExhausted);
}

TEST_CASE("inner divergence is reported") {
  ProblemInstance inst = lcp_with_f(1.0);
  inst.A.P = Mat::Constant(1, 1, -2.0); // anti-monotone
  inst.A.declared_m_A = 0.0;
  inst.h = HFunctionSpec::zero();
  SolverConfig cfg;
  cfg.skip_audits = true;
  cfg.max_inner = 2000;
  CHECK_THROWS_AS(
      inner_solve_u(inst, Vec::Zero(1), Vec::Constant(1, 0.5), cfg),
      InnerDivergence);
}

TEST_CASE("solve gates on hypothesis audits") {
  ProblemInstance inst = kink_with_f(3.0);
  inst.b.B.setZero(); // LBB fails
  SolverConfig cfg;
  CHECK_THROWS_AS(solve(inst, cfg), HypothesisGate);
  cfg.skip_audits = true; // explicit override reaches the iteration
  CHECK_NOTHROW(solve(inst, cfg));
}

TEST_CASE("solver output certifies against the verifier grid") {
  for (std::uint64_t seed : {901ULL, 902ULL, 903ULL}) {
    const ProblemInstance inst = random_audited_instance(seed);
    SolverConfig cfg;
    cfg.skip_audits = true;
    auto [pair, trace] = solve(inst, cfg);
    (void)trace;
    CHECK(pair.residuals.max() <= 10.0 * cfg.tol_outer);
  }
}
