#include "mvhvi/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "mvhvi/gallery.hpp"
#include "mvhvi/hypotheses.hpp"
#include "mvhvi/oracle.hpp"
#include "mvhvi/solver.hpp"
#include "mvhvi/verify.hpp"

namespace mvhvi {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Independent route for the inf-sup check: cyclic Jacobi eigensolver on
/// B B^T, no library decomposition involved.
double jacobi_min_singular_of_Bt(const Mat& B) {
  if (B.rows() > B.cols()) return 0.0;
  Mat S = B * B.transpose();
  const int n = static_cast<int>(S.rows());
  if (n == 1) return std::sqrt(std::max(0.0, S(0, 0)));
  for (int sweep = 0; sweep < 128; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(S(p, q)));
    }
    const double scale = std::max(1.0, S.diagonal().cwiseAbs().maxCoeff());
    if (off <= 1e-16 * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(S(p, q)) <= 1e-18 * scale) continue;
        const double theta = 0.5 * std::atan2(2.0 * S(p, q), S(q, q) - S(p, p));
        const double c = std::cos(theta), s = std::sin(theta);
        for (int i = 0; i < n; ++i) {
          const double sip = S(i, p), siq = S(i, q);
          S(i, p) = c * sip - s * siq;
          S(i, q) = s * sip + c * siq;
        }
        for (int i = 0; i < n; ++i) {
          const double spi = S(p, i), sqi = S(q, i);
          S(p, i) = c * spi - s * sqi;
          S(q, i) = s * spi + c * sqi;
        }
      }
    }
  }
  return std::sqrt(std::max(0.0, S.diagonal().minCoeff()));
}

struct Suite {
  std::uint64_t seed;
  std::ostream& log;
  std::vector<CriterionResult> results;

  // Certified pairs harvested by criterion 1, reused by criterion 6.
  std::vector<std::pair<ProblemInstance, SolutionPair>> certified;

  void record(int id, const std::string& name, bool passed,
              const std::string& detail, double secs) {
    results.push_back({id, name, passed, detail, secs});
    log << (passed ? "[PASS] " : "[FAIL] ") << id << ". " << name << " ("
        << detail << ", " << secs << "s)\n";
    log.flush();
  }

  // --- 1. Formulation equivalence -------------------------------------
  void formulation_equivalence() {
    const auto t0 = Clock::now();
    constexpr double kTol = 1e-7;
    int solved = 0;
    double worst = 0.0;
    bool ok = true;
    std::string fail;
    for (int i = 0; i < 50 && ok; ++i) {
      const ProblemInstance inst = random_audited_instance(seed + 1000 + i);
      const AuditReport audits = audit_instance(inst, 400, seed + i);
      if (!audits.all_pass()) {
        ok = false;
        fail = "instance " + std::to_string(i) + " failed audits";
        break;
      }
      SolverConfig cfg;
      cfg.seed = seed + i;
      cfg.skip_audits = true; // just audited above
      auto [pair, trace] = solve(inst, cfg);
      (void)trace;
      ProbeConfig probes;
      probes.count = 10000;
      probes.seed = seed + 40000 + i;
      probes.refine = true;
      const ResidualReport rep = full_report(inst, pair.u, pair.lambda, probes);
      worst = std::max(worst, rep.max());
      if (rep.max() > kTol) {
        ok = false;
        fail = "instance " + std::to_string(i) + " residual " +
               std::to_string(rep.max());
      }
      certified.emplace_back(inst, pair);
      ++solved;
    }
    std::ostringstream det;
    det << solved << " instances, worst residual " << worst;
    if (!ok) det << "; " << fail;
    record(1, "formulation-equivalence", ok, det.str(), elapsed(t0));
  }

  // --- 2. Oracle agreement ---------------------------------------------
  void oracle_agreement() {
    const auto t0 = Clock::now();
    constexpr double kDelta = 0.01;
    constexpr double kR = 5.0;
    bool ok = true;
    std::string fail;
    int done = 0;
    double worst_dist = 0.0;
    std::uint64_t s = seed + 2000;
    while (done < 20 && ok) {
      GeneratorOptions opts;
      opts.force_n = 1;
      opts.force_m = 1;
      opts.force_k = 1;
      opts.orthant_only = true;
      opts.kinks_at_zero_only = true;
      opts.f_scale = 1.0;
      const ProblemInstance inst = random_audited_instance(s++, opts);
      SolverConfig cfg;
      cfg.seed = s;
      cfg.skip_audits = true;
      SolutionPair pair;
      try {
        pair = solve(inst, cfg).first;
      } catch (const Error&) {
        continue;
      }
      if (pair.u.norm() > 3.5 || pair.lambda.norm() > 4.0) continue;
      const double tol = oracle_default_tol(inst, kR, kR, kDelta);
      const OracleResult oracle = brute_force_oracle(inst, kR, kR, kDelta, tol);
      const double dist = oracle.nearest_u(pair.u);
      worst_dist = std::max(worst_dist, dist);
      if (!(dist <= kDelta + 1e-6)) {
        ok = false;
        fail = "solver u misses the oracle cluster by " + std::to_string(dist);
      }
      ++done;
    }
    std::ostringstream det;
    det << done << " instances, worst cluster distance " << worst_dist;
    if (!ok) det << "; " << fail;
    record(2, "oracle-agreement", ok, det.str(), elapsed(t0));
  }

  // --- 3. First-component uniqueness ------------------------------------
  void uniqueness() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string fail;
    double worst_spread = 0.0;
    for (int i = 0; i < 20 && ok; ++i) {
      GeneratorOptions opts;
      opts.max_dim = 4;
      const ProblemInstance inst =
          random_audited_instance(seed + 3000 + i, opts);
      SolverConfig cfg;
      cfg.restarts = 20;
      cfg.skip_audits = true;
      cfg.certify.count = 500; // residuals rechecked in criterion 1 style
      const UniquenessReport rep = multi_start(inst, cfg, seed + 3500 + i);
      worst_spread = std::max(worst_spread, rep.u_spread);
      if (!rep.applicable || rep.u_spread > 1e-7) {
        ok = false;
        fail = "instance " + std::to_string(i) + " u-spread " +
               std::to_string(rep.u_spread);
      }
    }
    double lam_spread = 0.0;
    if (ok) {
      const ProblemInstance kink = make_gallery_instance("kink-multiplier");
      SolverConfig cfg;
      cfg.restarts = 20;
      cfg.skip_audits = true;
      cfg.certify.count = 500;
      const UniquenessReport rep = multi_start(kink, cfg, seed + 3999);
      lam_spread = rep.lambda_spread;
      if (rep.u_spread > 1e-7 || rep.lambda_spread < 0.5) {
        ok = false;
        fail = "kink-multiplier spreads u=" + std::to_string(rep.u_spread) +
               " lambda=" + std::to_string(rep.lambda_spread);
      }
    }
    std::ostringstream det;
    det << "worst u-spread " << worst_spread << ", kink lambda-spread "
        << lam_spread;
    if (!ok) det << "; " << fail;
    record(3, "first-component-uniqueness", ok, det.str(), elapsed(t0));
  }

  // --- 4. Hoelder stability ---------------------------------------------
  void stability() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string fail;
    std::mt19937_64 rng(seed + 4000);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst_ratio = 0.0;
    for (int i = 0; i < 10 && ok; ++i) {
      GeneratorOptions opts;
      opts.max_dim = 4;
      const ProblemInstance inst =
          random_audited_instance(seed + 4100 + i, opts);
      SolverConfig cfg;
      cfg.skip_audits = true;
      cfg.certify.count = 800;
      for (int p = 0; p < 100 && ok; ++p) {
        Vec f1(inst.dims.n_V), f2(inst.dims.n_V);
        for (int c = 0; c < f1.size(); ++c) {
          f1[c] = 1.5 * g(rng);
          f2[c] = f1[c] + 0.2 + 0.8 * std::fabs(g(rng));
        }
        const auto [lhs, rhs] = stability_check(inst, f1, f2, cfg);
        worst_ratio = std::max(worst_ratio, lhs / rhs);
        if (!(lhs <= rhs * (1.0 + 1e-8))) {
          ok = false;
          fail = "instance " + std::to_string(i) + " lhs " +
                 std::to_string(lhs) + " rhs " + std::to_string(rhs);
        }
      }
    }
    double equality_gap = 0.0;
    if (ok) {
      // Equality case: A = m_A I, J == 0, Lambda = {0}.
      ProblemInstance inst;
      inst.dims = {2, 1, 2};
      inst.A.P = 2.0 * Mat::Identity(2, 2);
      inst.A.declared_m_A = 2.0;
      inst.J = PiecewiseC1Spec::zero(2);
      inst.gamma = GammaSpec::from_matrix(Mat::Identity(2, 2));
      inst.b.B = Mat::Ones(1, 2);
      inst.Lambda = LambdaSet::box(Vec::Zero(1));
      inst.f = Vec::Zero(2);
      inst.h = derive_h_from_constants(2.0, 0.0, 1.0);
      inst.profile.theta = ConstantInfo::declared(1.0);
      inst.profile.alpha_J = ConstantInfo::declared(0.0);
      inst.profile.beta_J = ConstantInfo::declared(1e-9);
      inst.profile.m_J = ConstantInfo::declared(0.0);
      inst.profile.alpha_b = ConstantInfo::estimated(infsup_constant(inst.b), 0);
      inst.validate();
      SolverConfig cfg;
      cfg.skip_audits = true;
      cfg.certify.count = 800;
      Vec f1(2), f2(2);
      f1 << 1.0, -2.0;
      f2 << -0.5, 1.5;
      const auto [lhs, rhs] = stability_check(inst, f1, f2, cfg);
      equality_gap = std::fabs(lhs - rhs) / rhs;
      if (equality_gap > 1e-8) {
        ok = false;
        fail = "equality case off by " + std::to_string(equality_gap);
      }
    }
    std::ostringstream det;
    det << "worst lhs/rhs " << worst_ratio << ", equality-case gap "
        << equality_gap;
    if (!ok) det << "; " << fail;
    record(4, "hoelder-stability", ok, det.str(), elapsed(t0));
  }

  // --- 5. Solution-set convexity -----------------------------------------
  void convexity() {
    const auto t0 = Clock::now();
    constexpr double kTol = 1e-7;
    const ProblemInstance kink = make_gallery_instance("kink-multiplier");
    bool ok = true;
    std::string fail;
    std::vector<SolutionPair> sols;
    for (int i = 0; i < 10; ++i) {
      SolverConfig cfg;
      cfg.skip_audits = true;
      Vec lam0(1);
      lam0[0] = 0.5 * i;
      cfg.lambda0 = lam0;
      cfg.certify.count = 2000;
      sols.push_back(solve(kink, cfg).first);
    }
    const std::vector<double> t_grid = {0.1, 0.2, 0.3, 0.4, 0.5,
                                        0.6, 0.7, 0.8, 0.9};
    ProbeConfig probes;
    probes.count = 2000;
    probes.seed = seed + 5000;
    double worst = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i + 1 < sols.size() && ok; ++i) {
      const double v =
          convexity_probe(kink, sols[i], sols[i + 1], t_grid, probes);
      worst = std::max(worst, v);
      ++pairs;
      if (v > kTol) {
        ok = false;
        fail = "segment violation " + std::to_string(v);
      }
    }
    if (ok) {
      const double v =
          convexity_probe(kink, sols.front(), sols.back(), t_grid, probes);
      worst = std::max(worst, v);
      ++pairs;
      if (v > kTol) ok = false;
    }
    std::ostringstream det;
    det << pairs << " pairs, worst segment violation " << worst;
    if (!ok) det << "; " << fail;
    record(5, "solution-set-convexity", ok, det.str(), elapsed(t0));
  }

  // --- 6. A-priori bounds --------------------------------------------------
  void a_priori_bounds() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string fail;
    double worst_mult = 1e300, worst_chain = 1e300;
    for (const auto& [inst, pair] : certified) {
      const double mg = multiplier_bound_gap(inst, pair.u, pair.lambda);
      const double cg = coercivity_chain_gap(inst, pair.u);
      worst_mult = std::min(worst_mult, mg);
      worst_chain = std::min(worst_chain, cg);
      if (mg < -1e-8 || cg < -1e-8) {
        ok = false;
        fail = "bound violated: multiplier gap " + std::to_string(mg) +
               ", chain gap " + std::to_string(cg);
      }
    }
    double sup_u = 0.0, sup_l = 0.0;
    if (ok) {
      for (int i = 0; i < 3; ++i) {
        GeneratorOptions opts;
        opts.max_dim = 3;
        const ProblemInstance inst =
            random_audited_instance(seed + 6000 + i, opts);
        SolverConfig cfg;
        cfg.skip_audits = true;
        cfg.certify.count = 400;
        const SolutionSetProbe probe =
            boundedness_probe(inst, 5.0, 100, cfg, seed + 6100 + i);
        sup_u = std::max(sup_u, probe.sup_u);
        sup_l = std::max(sup_l, probe.sup_lambda);
        if (!probe.chain_bound_ok || !probe.multiplier_bound_ok ||
            !std::isfinite(probe.sup_u) || !std::isfinite(probe.sup_lambda) ||
            probe.sup_u > 1e6 || probe.sup_lambda > 1e6) {
          ok = false;
          fail = "boundedness probe failed on instance " + std::to_string(i);
        }
      }
    }
    std::ostringstream det;
    det << certified.size() << " certified pairs, worst gaps ("
        << worst_mult << ", " << worst_chain << "), sup norms (" << sup_u
        << ", " << sup_l << ")";
    if (!ok) det << "; " << fail;
    record(6, "a-priori-bounds", ok, det.str(), elapsed(t0));
  }

  // --- 7. Clarke calculus ---------------------------------------------------
  void clarke_calculus() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string fail;
    std::vector<std::pair<std::string, PiecewiseC1Spec>> gallery;
    gallery.emplace_back("kink-multiplier",
                         make_gallery_instance("kink-multiplier").J);
    gallery.emplace_back("contact-rod-10",
                         make_gallery_instance("contact-rod-10").J);
    gallery.emplace_back("scalar-lcp", make_gallery_instance("scalar-lcp").J);
    {
      GeneratorOptions opts;
      opts.force_k = 3;
      gallery.emplace_back("random-3d",
                           random_audited_instance(seed + 7000, opts).J);
    }
    for (const auto& [name, J] : gallery) {
      try {
        check_prop_2_3(J, 10000, seed + 7100);
      } catch (const PropertyViolation& e) {
        ok = false;
        fail = name + ": " + e.witness;
        break;
      }
    }
    // Smooth-point consistency at 1e-12.
    double worst_smooth = 0.0;
    if (ok) {
      std::vector<PieceDesc> sq(1);
      sq[0].kind = PieceDesc::Kind::Quad;
      sq[0].q = 2.0; // x^2
      PiecewiseC1Spec smooth(
          std::vector<CoordinatePieces>{make_coordinate({}, sq)});
      std::mt19937_64 rng(seed + 7200);
      std::normal_distribution<double> g(0.0, 3.0);
      for (int i = 0; i < 10000; ++i) {
        Vec x(1), d(1);
        x[0] = g(rng);
        d[0] = g(rng);
        const double got = smooth.clarke_dir(x, d);
        const double want = 2.0 * x[0] * d[0];
        worst_smooth = std::max(
            worst_smooth,
            std::fabs(got - want) / std::max(1.0, std::fabs(want)));
      }
      if (worst_smooth > 1e-12) {
        ok = false;
        fail = "smooth-point defect " + std::to_string(worst_smooth);
      }
    }
    std::ostringstream det;
    det << gallery.size() << " kernels x 10^4 samples, smooth defect "
        << worst_smooth;
    if (!ok) det << "; " << fail;
    record(7, "clarke-calculus", ok, det.str(), elapsed(t0));
  }

  // --- 8. Inf-sup estimator -------------------------------------------------
  void infsup_estimator() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string fail;
    std::mt19937_64 rng(seed + 8000);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst_rel = 0.0, worst_scale = 0.0;
    for (int i = 0; i < 100 && ok; ++i) {
      const int m = 1 + static_cast<int>(rng() % 5);
      const int n = 1 + static_cast<int>(rng() % 5);
      BilinearFormSpec b;
      b.B = Mat(m, n);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) b.B(r, c) = g(rng);
      }
      if (i % 5 == 1 && m >= 2) b.B.row(m - 1).setZero();           // rank gap
      if (i % 5 == 3 && m >= 2) b.B.row(m - 1) = 2.0 * b.B.row(0);  // dup row
      const double got = infsup_constant(b);
      const double want = jacobi_min_singular_of_Bt(b.B);
      const double rel = std::fabs(got - want) / std::max(1.0, want);
      worst_rel = std::max(worst_rel, rel);
      if (rel > 1e-10) {
        ok = false;
        fail = "estimator off by " + std::to_string(rel);
        break;
      }
      // Scaling law: power-of-two factors scale every intermediate exactly.
      {
        BilinearFormSpec sb;
        sb.B = 8.0 * b.B;
        const double scaled = infsup_constant(sb);
        const double defect =
            std::fabs(scaled - 8.0 * got) / std::max(1e-30, 8.0 * got);
        worst_scale = std::max(worst_scale, defect);
        if (got > 0.0 && defect > 1e-14) {
          ok = false;
          fail = "pow2 scaling defect " + std::to_string(defect);
          break;
        }
      }
      {
        const double c = 0.1 + 3.0 * u01(rng);
        BilinearFormSpec sb;
        sb.B = c * b.B;
        const double scaled = infsup_constant(sb);
        if (got > 1e-12 &&
            std::fabs(scaled - c * got) > 1e-12 * std::max(1.0, c * got)) {
          ok = false;
          fail = "general scaling defect at c=" + std::to_string(c);
          break;
        }
      }
    }
    std::ostringstream det;
    det << "100 matrices, worst oracle mismatch " << worst_rel
        << ", worst pow2 scaling defect " << worst_scale;
    if (!ok) det << "; " << fail;
    record(8, "infsup-estimator", ok, det.str(), elapsed(t0));
  }

  // --- 9. Special-case crosschecks -------------------------------------------
  void crosschecks() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string fail;
    double worst_gap = 0.0;
    for (int i = 0; i < 10 && ok; ++i) {
      GeneratorOptions opts;
      opts.zero_J = true;
      opts.orthant_only = true;
      opts.max_dim = 4;
      ProblemInstance inst = random_audited_instance(seed + 9000 + i, opts);
      inst.A.power.reset();
      SolverConfig cfg;
      cfg.skip_audits = true;
      const CrosscheckReport rep = special_case_crosscheck(inst, cfg);
      worst_gap = std::max(worst_gap, rep.u_gap);
      if (!rep.applicable || rep.mode != "lcp" || rep.u_gap > 1e-8 ||
          rep.residual > 1e-8) {
        ok = false;
        fail = "lcp crosscheck " + std::to_string(i) + " gap " +
               std::to_string(rep.u_gap);
      }
    }
    if (ok) {
      for (int i = 0; i < 5 && ok; ++i) {
        GeneratorOptions opts;
        opts.zero_B = true;
        opts.max_dim = 3;
        const ProblemInstance inst =
            random_audited_instance(seed + 9500 + i, opts);
        SolverConfig cfg;
        cfg.skip_audits = true;
        const CrosscheckReport rep = special_case_crosscheck(inst, cfg);
        worst_gap = std::max(worst_gap, rep.u_gap);
        if (!rep.applicable || rep.mode != "pure-hvi" || rep.u_gap > 1e-8 ||
            rep.residual > 1e-8) {
          ok = false;
          fail = "pure-hvi crosscheck " + std::to_string(i) + " gap " +
                 std::to_string(rep.u_gap);
        }
      }
    }
    if (ok) {
      // Closed form: B = 0, A = 2u, j = |x| - x^2/4, f = -2 gives u = -2/3.
      ProblemInstance inst = make_gallery_instance("kink-multiplier");
      inst.b.B.setZero();
      inst.f[0] = -2.0;
      inst.profile.alpha_b = ConstantInfo::estimated(0.0, 0);
      SolverConfig cfg;
      cfg.skip_audits = true;
      const CrosscheckReport rep = special_case_crosscheck(inst, cfg);
      const double err = std::fabs(rep.reference_u[0] + 2.0 / 3.0);
      worst_gap = std::max(worst_gap, err);
      if (err > 1e-8) {
        ok = false;
        fail = "closed-form inclusion off by " + std::to_string(err);
      }
    }
    std::ostringstream det;
    det << "worst route gap " << worst_gap;
    if (!ok) det << "; " << fail;
    record(9, "special-case-crosschecks", ok, det.str(), elapsed(t0));
  }
};

} // namespace

std::vector<CriterionResult> run_acceptance_suite(std::uint64_t seed,
                                                  std::ostream& log) {
  Suite suite{seed, log, {}, {}};
  const std::pair<const char*, void (Suite::*)()> criteria[] = {
      {"formulation-equivalence", &Suite::formulation_equivalence},
      {"oracle-agreement", &Suite::oracle_agreement},
      {"first-component-uniqueness", &Suite::uniqueness},
      {"hoelder-stability", &Suite::stability},
      {"solution-set-convexity", &Suite::convexity},
      {"a-priori-bounds", &Suite::a_priori_bounds},
      {"clarke-calculus", &Suite::clarke_calculus},
      {"infsup-estimator", &Suite::infsup_estimator},
      {"special-case-crosschecks", &Suite::crosschecks},
  };
  int id = 0;
  for (const auto& [name, method] : criteria) {
    ++id;
    const auto t0 = Clock::now();
    try {
      (suite.*method)();
    } catch (const std::exception& e) {
      suite.record(id, name, false, std::string("exception: ") + e.what(),
                   elapsed(t0));
    }
  }
  return suite.results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

} // namespace mvhvi
