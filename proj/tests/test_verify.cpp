#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mvhvi/gallery.hpp"
#include "mvhvi/oracle.hpp"
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

ProbeConfig probes(long count, std::uint64_t seed, bool refine = true) {
  ProbeConfig pc;
  pc.count = count;
  pc.seed = seed;
  pc.refine = refine;
  return pc;
}

} // namespace

TEST_CASE("certified pair scores zero on all formulations") {
  const ProblemInstance inst = kink_with_f(3.0);
  // (0, 3) solves: 3 - lambda = 0 lies in [-1, 1] and B u = 0.
  const ResidualReport rep =
      full_report(inst, v1(0.0), v1(3.0), probes(4000, 1));
  CHECK(rep.r_original <= 1e-12);
  CHECK(rep.r_minty <= 1e-12);
  CHECK(rep.r_combined <= 1e-12);
  CHECK(rep.r_minty_combined <= 1e-12);
}

TEST_CASE("non-solution is rejected with a positive violation") {
  const ProblemInstance inst = kink_with_f(3.0);
  const FormulationResidual r =
      residual(inst, v1(1.0), v1(0.0), Formulation::Original, probes(4000, 2));
  CHECK(r.violation > 0.5);
}

TEST_CASE("exact complementarity solutions score zero") {
  const ProblemInstance inst = make_gallery_instance("scalar-lcp"); // f = -2
  const ResidualReport rep =
      full_report(inst, v1(-1.0), v1(0.0), probes(4000, 3));
  CHECK(rep.max() <= 1e-12);
}

TEST_CASE("equivalence check agrees on members and non-members") {
  const ProblemInstance inst = kink_with_f(3.0);
  CHECK(equivalence_check(inst, v1(0.0), v1(3.0), 1e-8));
  CHECK(equivalence_check(inst, v1(4.0), v1(7.0), 1e-8));
}

TEST_CASE("convexity probe along the multiplier interval") {
  const ProblemInstance inst = kink_with_f(3.0);
  SolutionPair s1, s2;
  s1.u = v1(0.0);
  s1.lambda = v1(2.0);
  s2.u = v1(0.0);
  s2.lambda = v1(4.0);
  const std::vector<double> grid = {0.25, 0.5, 0.75};
  CHECK(convexity_probe(inst, s1, s2, grid, probes(2000, 4)) <= 1e-9);
  CHECK(convexity_probe(inst, s1, s1, grid, probes(2000, 5)) <= 1e-9);

  SolutionPair bad1, bad2;
  bad1.u = v1(1.0);
  bad1.lambda = v1(0.0);
  bad2.u = v1(2.0);
  bad2.lambda = v1(0.5);
  CHECK_THROWS_AS(convexity_probe(inst, bad1, bad2, grid, probes(2000, 6)),
                  HypothesisGate);
}

TEST_CASE("a-priori bound gaps are nonnegative on certified pairs") {
  const ProblemInstance inst = kink_with_f(3.0);
  CHECK(multiplier_bound_gap(inst, v1(0.0), v1(3.0)) >= 0.0);
  CHECK(coercivity_chain_gap(inst, v1(0.0)) >= 0.0);
  const ProblemInstance lcp = make_gallery_instance("scalar-lcp");
  CHECK(multiplier_bound_gap(lcp, v1(-1.0), v1(0.0)) >= 0.0);
  CHECK(coercivity_chain_gap(lcp, v1(-1.0)) >= 0.0);
}

TEST_CASE("boundedness probe on the scalar family") {
  const ProblemInstance inst = make_gallery_instance("scalar-lcp");
  SolverConfig cfg;
  cfg.certify.count = 400;
  const SolutionSetProbe probe = boundedness_probe(inst, 5.0, 60, cfg, 77);
  // Closed forms: u = f/2 for f <= 0 (|u| <= 2.5), lambda = f for f > 0.
  CHECK(probe.sup_u <= 2.5 + 1e-9);
  CHECK(probe.sup_lambda <= 5.0 + 1e-9);
  CHECK(probe.sup_u >= 1.0);
  CHECK(probe.sup_lambda >= 1.5);
  CHECK(probe.chain_bound_ok);
  CHECK(probe.multiplier_bound_ok);
}

TEST_CASE("zero data solves to zero") {
  ProblemInstance inst = make_gallery_instance("scalar-lcp");
  inst.f[0] = 0.0;
  SolverConfig cfg;
  auto [pair, trace] = solve(inst, cfg);
  (void)trace;
  CHECK(std::fabs(pair.u[0]) <= 1e-10);
  CHECK(std::fabs(pair.lambda[0]) <= 1e-10);
}

TEST_CASE("stability check: closed-form loads") {
  const ProblemInstance inst = make_gallery_instance("kink-multiplier");
  SolverConfig cfg;
  cfg.certify.count = 800;
  const auto [lhs, rhs] = stability_check(inst, v1(3.0), v1(-2.0), cfg);
  CHECK(lhs == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
  CHECK(rhs == doctest::Approx(5.0 / 1.5).epsilon(1e-9));
  CHECK(lhs <= rhs * (1.0 + 1e-8));

  const auto [lhs0, rhs0] = stability_check(inst, v1(1.0), v1(1.0), cfg);
  CHECK(lhs0 <= 1e-9);
  CHECK(rhs0 == 0.0);
}

TEST_CASE("stability check gates on the power form") {
  ProblemInstance inst = make_gallery_instance("scalar-lcp");
  inst.h = HFunctionSpec::zero();
  SolverConfig cfg;
  CHECK_THROWS_AS(stability_check(inst, v1(1.0), v1(2.0), cfg),
                  HypothesisGate);
}

TEST_CASE("usc probe: residuals decay along converging loads") {
  const ProblemInstance inst = kink_with_f(3.0);
  SolverConfig cfg;
  cfg.certify.count = 400;
  const UscReport rep = usc_probe(inst, v1(3.0), 1.0, 10, cfg);
  REQUIRE(rep.residuals.size() == 10);
  CHECK(rep.decayed);
  CHECK(rep.residuals.back() <= 1e-8);

  const UscReport flat = usc_probe(inst, v1(3.0), 0.0, 4, cfg);
  CHECK(flat.decayed);
}

TEST_CASE("special case: scalar complementarity crosscheck") {
  SolverConfig cfg;
  cfg.skip_audits = true;
  cfg.certify.count = 400;
  {
    const ProblemInstance inst = make_gallery_instance("scalar-lcp"); // f=-2
    const CrosscheckReport rep = special_case_crosscheck(inst, cfg);
    CHECK(rep.applicable);
    CHECK(rep.mode == "lcp");
    CHECK(rep.reference_u[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::fabs(rep.reference_lambda[0]) <= 1e-12);
    CHECK(rep.u_gap <= 1e-8);
    CHECK(rep.residual <= 1e-10);
  }
  {
    ProblemInstance inst = make_gallery_instance("scalar-lcp");
    inst.f[0] = 3.0;
    const CrosscheckReport rep = special_case_crosscheck(inst, cfg);
    CHECK(rep.reference_u[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.reference_lambda[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(rep.u_gap <= 1e-8);
  }
}

TEST_CASE("special case: pure state inequality with B = 0") {
  SolverConfig cfg;
  cfg.skip_audits = true;
  {
    ProblemInstance inst = kink_with_f(-2.0);
    inst.b.B.setZero();
    const CrosscheckReport rep = special_case_crosscheck(inst, cfg);
    CHECK(rep.applicable);
    CHECK(rep.mode == "pure-hvi");
    CHECK(rep.reference_u[0] == doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
    CHECK(rep.u_gap <= 1e-8);
    CHECK(rep.residual <= 1e-8);
  }
  {
    // J == 0 and B == 0 reduce to the plain linear solve u = P^{-1} f.
    ProblemInstance inst = make_gallery_instance("scalar-lcp");
    inst.b.B.setZero();
    inst.f[0] = 5.0;
    const CrosscheckReport rep = special_case_crosscheck(inst, cfg);
    CHECK(rep.mode == "pure-hvi");
    CHECK(rep.reference_u[0] == doctest::Approx(2.5).epsilon(1e-9));
  }
}

TEST_CASE("oracle: kink instance clusters") {
  {
    const ProblemInstance inst = kink_with_f(3.0);
    const OracleResult res = brute_force_oracle(inst, 5.0, 5.0, 0.01, 0.05);
    REQUIRE(!res.hits.empty());
    CHECK(!res.truncated);
    for (const auto& h : res.hits) {
      CHECK(std::fabs(h.u[0]) <= 0.016);
      CHECK(h.lambda[0] >= 1.95);
      CHECK(h.lambda[0] <= 4.05);
    }
    CHECK(res.nearest_u(v1(0.0)) <= 1e-12); // the kink sits on the lattice
    double best = 1e300;
    for (const auto& h : res.hits) {
      best = std::min(best, std::fabs(h.lambda[0] - 3.0));
    }
    CHECK(best <= 0.011);
  }
  {
    const ProblemInstance inst = kink_with_f(-2.0);
    const OracleResult res = brute_force_oracle(inst, 5.0, 5.0, 0.01, 0.05);
    REQUIRE(!res.hits.empty());
    CHECK(res.nearest_u(v1(-2.0 / 3.0)) <= 0.011);
    for (const auto& h : res.hits) {
      CHECK(h.u[0] <= -0.5);
      CHECK(h.u[0] >= -0.8);
      CHECK(h.lambda[0] <= 0.05);
    }
  }
}

TEST_CASE("oracle budget is enforced") {
  GeneratorOptions opts;
  opts.force_n = 2;
  opts.force_m = 1;
  opts.orthant_only = true;
  const ProblemInstance inst = random_audited_instance(99, opts);
  CHECK_THROWS_AS(brute_force_oracle(inst, 5.0, 5.0, 0.01, 0.05),
                  BudgetExceeded);
}

TEST_CASE("oracle agrees with the solver on a coarse 2-D sweep") {
  GeneratorOptions opts;
  opts.force_n = 2;
  opts.force_m = 1;
  opts.force_k = 1;
  opts.orthant_only = true;
  opts.kinks_at_zero_only = true;
  opts.f_scale = 0.8;
  int done = 0;
  for (std::uint64_t seed = 1234; seed < 1264 && done < 3; ++seed) {
    const ProblemInstance inst = random_audited_instance(seed, opts);
    SolverConfig cfg;
    cfg.skip_audits = true;
    cfg.certify.count = 400;
    SolutionPair pair;
    try {
      pair = solve(inst, cfg).first;
    } catch (const Error&) {
      continue;
    }
    if (pair.u.norm() > 1.5 || pair.lambda.norm() > 1.5) continue;
    const double delta = 0.05;
    const double tol = oracle_default_tol(inst, 2.0, 2.0, delta);
    const OracleResult res = brute_force_oracle(inst, 2.0, 2.0, delta, tol);
    CHECK(res.nearest_u(pair.u) <= delta + 1e-6);
    ++done;
  }
  CHECK(done == 3);
}

TEST_CASE("violation landscape file is written") {
  const ProblemInstance inst = kink_with_f(3.0);
  const std::string path = "landscape_test.dat";
  write_violation_landscape(inst, v1(3.0), 2.0, 41, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("# ", 0) == 0);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 41);
  std::remove(path.c_str());
}
