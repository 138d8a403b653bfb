#include "mvhvi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>

#include "mvhvi/hypotheses.hpp"
#include "mvhvi/verify.hpp"

namespace mvhvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Strong-monotonicity constant available for step heuristics.
double strong_mono_estimate(const ProblemInstance& inst) {
  if (inst.h.is_power() && inst.h.tau == 2.0) return inst.h.c_h;
  const double floor = inst.J.relaxed_monotonicity_floor();
  if (std::isinf(floor)) return 0.0;
  const double g = inst.gamma.operator_norm;
  return std::max(0.0, inst.A.sym_eigmin() - floor * g * g);
}

Vec clamp_box(const Vec& x, const SubgradientBox& box) {
  return x.cwiseMax(box.lo).cwiseMin(box.hi);
}

/// Box element whose gamma^T image is closest to the inclusion target:
/// componentwise median/clamp projection, refined by projected gradient when
/// gamma is not orthogonal.
struct XiSelector {
  const Mat& G;
  Eigen::CompleteOrthogonalDecomposition<Mat> lsq; // of G^T
  double step;
  bool one_shot; // G G^T diagonal: a single clamp is exact

  explicit XiSelector(const GammaSpec& gamma)
      : G(gamma.G), lsq(Mat(gamma.G.transpose())) {
    const double n2 = gamma.operator_norm * gamma.operator_norm;
    step = n2 > 0.0 ? 1.0 / n2 : 1.0;
    Mat GGt = G * G.transpose();
    one_shot = true;
    for (int r = 0; r < GGt.rows() && one_shot; ++r) {
      for (int c = 0; c < GGt.cols(); ++c) {
        if (r != c && std::fabs(GGt(r, c)) > 1e-14) {
          one_shot = false;
          break;
        }
      }
    }
  }

  Vec select(const SubgradientBox& box, const Vec& target) const {
    Vec xi = clamp_box(lsq.solve(target), box);
    if (one_shot) return xi;
    for (int it = 0; it < 128; ++it) {
      const Vec grad = G * (G.transpose() * xi - target);
      const Vec nxt = clamp_box(xi - step * grad, box);
      const double move = (nxt - xi).norm();
      xi = nxt;
      if (move <= 1e-15 * std::max(1.0, xi.norm())) break;
    }
    return xi;
  }
};

struct InclusionEval {
  Vec F;         // A(u) + G^T xi + B^T lambda - f
  double res;    // ||F||
};

InclusionEval eval_inclusion(const ProblemInstance& inst,
                             const XiSelector& sel, const Vec& btl,
                             const Vec& u) {
  const Vec gu = inst.gamma.G * u;
  const SubgradientBox box = inst.J.subgradient_box(gu);
  const Vec g = inst.f - inst.A.apply(u) - btl;
  const Vec xi = sel.select(box, g);
  InclusionEval ev;
  ev.F = inst.gamma.G.transpose() * xi - g;
  ev.res = ev.F.norm();
  return ev;
}

} // namespace

std::pair<double, double> default_steps(const ProblemInstance& inst,
                                        double ball_radius) {
  const double R = std::max(ball_radius, 1.0);
  const double gnorm = inst.gamma.operator_norm;
  const double slope = inst.J.lipschitz_on_ball(gnorm * R + 1.0);
  double L = inst.A.lipschitz_on_ball(R) + gnorm * gnorm * slope;
  L = std::max(L, 1e-8);
  const double m = strong_mono_estimate(inst);
  double eta = m > 0.0 ? 0.5 * m / (L * L) : 0.5 / L;
  eta = std::min(eta, 1.0 / L);
  const double alpha_b = infsup_constant(inst.b);
  const double denom = 2.0 * std::max(m, 1e-8);
  double t = alpha_b > 1e-12 ? alpha_b * alpha_b / denom : 0.1;
  // Clamp into the dual-ascent stability range: the multiplier map has
  // curvature at most ||B||^2 / m, so steps must scale like m / ||B||^2.
  const double bnorm = inst.b.spectral_norm();
  if (bnorm > 1e-12 && m > 0.0) {
    const double t_ref = m / (bnorm * bnorm);
    t = std::min(std::max(t, 0.25 * t_ref), 1.5 * t_ref);
  }
  return {t, eta};
}

namespace {

/// One-shot kink polish: if a gamma coordinate sits within `window` of a
/// breakpoint, try the exact landing (selector rows by lossless division)
/// and keep it when it does not worsen the inclusion residual.  Iterations
/// contract towards kinks geometrically but never reach them; the box only
/// widens on exact equality.
Vec snap_polish(const ProblemInstance& inst, const XiSelector& sel,
                const Vec& btl,
                const Eigen::CompleteOrthogonalDecomposition<Mat>& g_pinv,
                Vec u, double window, double* res_io) {
  Vec gu = inst.gamma.G * u;
  Vec gu_target = gu;
  bool snapped = false;
  for (int i = 0; i < inst.dims.k_X; ++i) {
    for (double bp : inst.J.coords()[i].breakpoints) {
      if (gu[i] != bp && std::fabs(gu[i] - bp) <= window * (1.0 + std::fabs(bp))) {
        gu_target[i] = bp;
        snapped = true;
      }
    }
  }
  if (!snapped) return u;
  Vec u_snap = u + g_pinv.solve(Vec(gu_target - gu));
  for (int i = 0; i < inst.dims.k_X; ++i) {
    if (gu_target[i] == gu[i]) continue;
    int nz = -1;
    bool selector = true;
    for (int c = 0; c < inst.dims.n_V; ++c) {
      if (inst.gamma.G(i, c) != 0.0) {
        if (nz >= 0) {
          selector = false;
          break;
        }
        nz = c;
      }
    }
    if (selector && nz >= 0) u_snap[nz] = gu_target[i] / inst.gamma.G(i, nz);
  }
  const InclusionEval ev = eval_inclusion(inst, sel, btl, u_snap);
  if (ev.res <= *res_io * (1.0 + 1e-9) + 1e-15) {
    *res_io = ev.res;
    return u_snap;
  }
  return u;
}

/// Damped iteration restricted to the affine slice that pins the snapped
/// kink columns: there the subgradient interval is constant, the jump
/// discontinuity is gone, and the restricted operator stays strongly
/// monotone.  Frozen coordinates are never touched, so their images stay
/// exactly on the breakpoints.
Vec masked_kink_solve(const ProblemInstance& inst, const XiSelector& sel,
                      const Vec& btl, Vec u, const std::vector<int>& frozen,
                      double eta0, double tol, long budget, long* spent) {
  double eta = eta0;
  double prev = std::numeric_limits<double>::infinity();
  for (long it = 0; it < budget; ++it) {
    const InclusionEval ev = eval_inclusion(inst, sel, btl, u);
    Vec F = ev.F;
    for (int c : frozen) F[c] = 0.0;
    const double res = F.norm();
    if (spent) ++(*spent);
    if (res <= 0.25 * tol) break;
    if (res > prev * (1.0 + 1e-12)) eta = std::max(0.5 * eta, 1e-9 * eta0);
    prev = res;
    u -= eta * F;
  }
  return u;
}

} // namespace

Vec inner_solve_u(const ProblemInstance& inst, const Vec& lambda,
                  const Vec& u0, const SolverConfig& cfg, double ball_radius,
                  long* iterations) {
  if (u0.size() != inst.dims.n_V) throw ShapeError("inner start dimension");
  if (lambda.size() != inst.dims.m_E) throw ShapeError("multiplier dimension");

  const XiSelector sel(inst.gamma);
  const Vec btl = inst.b.B.transpose() * lambda;
  const double R =
      ball_radius > 0.0 ? ball_radius : std::max(8.0, 2.0 * u0.norm() + 2.0);
  double eta = cfg.inner_step > 0.0 ? cfg.inner_step
                                    : default_steps(inst, R).second;
  const double eta0 = eta;

  // Breakpoints of each gamma coordinate, for exact kink landing.
  Eigen::CompleteOrthogonalDecomposition<Mat> g_pinv(inst.gamma.G);

  Vec u = u0;
  InclusionEval ev = eval_inclusion(inst, sel, btl, u);
  double best_res = ev.res;
  Vec best_u = u;
  int plateau = 0;
  int snap_cooldown = 0;
  long it = 0;
  for (; it < cfg.max_inner; ++it) {
    if (ev.res <= cfg.tol_u) break;

    const Vec step = eta * ev.F;
    Vec u_next = u - step;

    // If a gamma coordinate sits within the step window of a breakpoint,
    // try the exact kink: there the subgradient interval widens and the
    // inclusion may close.  Selector rows land exactly by direct division
    // (power-of-two coefficients make that lossless); general rows get a
    // least-squares pullback accepted only when it meets the tolerance.
    const double window =
        4.0 * inst.gamma.operator_norm * step.norm() + 1e-9;
    Vec gu_next = inst.gamma.G * u_next;
    Vec gu_target = gu_next;
    bool snapped = false;
    for (int i = 0; i < inst.dims.k_X; ++i) {
      for (double bp : inst.J.coords()[i].breakpoints) {
        if (std::fabs(gu_next[i] - bp) <= window * (1.0 + std::fabs(bp))) {
          gu_target[i] = bp;
          snapped = true;
        }
      }
    }
    if (snapped && snap_cooldown == 0) {
      Vec u_snap = u_next + g_pinv.solve(Vec(gu_target - gu_next));
      std::vector<int> frozen;
      for (int i = 0; i < inst.dims.k_X; ++i) {
        if (gu_target[i] == gu_next[i]) continue;
        int nz = -1;
        bool selector = true;
        for (int c = 0; c < inst.dims.n_V; ++c) {
          if (inst.gamma.G(i, c) != 0.0) {
            if (nz >= 0) {
              selector = false;
              break;
            }
            nz = c;
          }
        }
        if (selector && nz >= 0) {
          u_snap[nz] = gu_target[i] / inst.gamma.G(i, nz);
          frozen.push_back(nz);
        }
      }
      InclusionEval ev_snap = eval_inclusion(inst, sel, btl, u_snap);
      if (ev_snap.res > cfg.tol_u && !frozen.empty()) {
        // Resolve the remaining coordinates on the kink slice.
        long spent = 0;
        u_snap = masked_kink_solve(inst, sel, btl, u_snap, frozen, eta0,
                                   cfg.tol_u,
                                   std::min<long>(4000, cfg.max_inner),
                                   &spent);
        if (iterations) *iterations += spent;
        ev_snap = eval_inclusion(inst, sel, btl, u_snap);
      }
      if (ev_snap.res <= cfg.tol_u) {
        if (iterations) *iterations += it + 1;
        return u_snap;
      }
      snap_cooldown = 256; // wrong active set; let the main iteration move
    }
    if (snap_cooldown > 0) --snap_cooldown;

    const InclusionEval ev_next = eval_inclusion(inst, sel, btl, u_next);
    if (ev_next.res > ev.res * (1.0 + 1e-12)) {
      eta = std::max(0.5 * eta, 1e-9 * eta0);
    } else {
      // The default step is conservative; creep back up while improving
      // (the contraction range extends to four times the default).
      eta = std::min(1.05 * eta, 3.0 * eta0);
    }
    u = u_next;
    ev = ev_next;
    if (ev.res < best_res * (1.0 - 1e-9)) {
      best_res = ev.res;
      plateau = 0;
    } else if (++plateau >= 4000) {
      // Limit cycle around a fixed point the lattice of floats cannot
      // express (a kink off every representable image).  Return the best
      // point seen; certification adjudicates.
      ++it;
      break;
    }
    if (ev.res <= best_res) {
      best_res = ev.res;
      best_u = u;
    }

    // Stagnation: the update amplitude collapsed without meeting the
    // tolerance.
    if (step.norm() <= 1e-4 * cfg.tol_u * std::max(1.0, u.norm())) {
      ++it;
      break;
    }
  }
  if (iterations) *iterations += it;
  if (it >= cfg.max_inner && ev.res > cfg.tol_u &&
      ev.res > 2.0 * best_res + 1e-12) {
    std::ostringstream os;
    os << "inner iteration diverged: residual " << ev.res << " after "
       << it << " steps (best " << best_res << ")";
    throw InnerDivergence(os.str());
  }
  Vec out = ev.res <= best_res ? u : best_u;
  double out_res = std::min(ev.res, best_res);
  out = snap_polish(inst, sel, btl, g_pinv, out, 1e-6, &out_res);
  return out;
}

double complementarity_residual(const ProblemInstance& inst, const Vec& u,
                                const Vec& lambda, double s_ball) {
  if (!inst.Lambda.contains(lambda, 1e-9)) {
    throw HypothesisGate("complementarity residual requires lambda in Lambda");
  }
  const Vec Bu = inst.b.B * u;
  switch (inst.Lambda.kind()) {
    case LambdaSet::Kind::NonnegativeOrthant: {
      const double feas = Bu.size() > 0 ? Bu.maxCoeff() : 0.0;
      return std::max(feas, std::fabs(lambda.dot(Bu)));
    }
    case LambdaSet::Kind::Box: {
      Vec rho_star(Bu.size());
      for (int i = 0; i < Bu.size(); ++i) {
        rho_star[i] = Bu[i] > 0.0 ? inst.Lambda.upper()[i] : 0.0;
      }
      return std::max(0.0, (rho_star - lambda).dot(Bu));
    }
    case LambdaSet::Kind::Polyhedron: {
      const double s =
          s_ball > 0.0 ? s_ball : std::max(8.0, 2.0 * (lambda.norm() + 1.0));
      const double sup = inst.Lambda.support_in_ball(Bu, s);
      return std::max(0.0, sup - lambda.dot(Bu));
    }
  }
  return 0.0;
}

std::pair<SolutionPair, SolveTrace> solve(const ProblemInstance& inst,
                                          const SolverConfig& cfg) {
  if (!cfg.skip_audits) {
    const AuditReport audits =
        audit_instance(inst, cfg.audit_samples, cfg.seed ^ 0xa0d17ULL);
    if (!audits.all_pass()) {
      std::string failed;
      for (const auto& e : audits.entries) {
        if (e.status == AuditStatus::Violated) {
          if (!failed.empty()) failed += ", ";
          failed += e.name;
        }
      }
      throw HypothesisGate("hypothesis audits failed: " + failed +
                           " (set skip_audits to override)");
    }
  }

  std::vector<std::pair<double, double>> schedule = cfg.radii_schedule;
  if (schedule.empty()) {
    for (int j = 0; j <= 20; ++j) {
      const double r = std::pow(2.0, j);
      schedule.emplace_back(r, r);
    }
  }
  for (std::size_t j = 1; j < schedule.size(); ++j) {
    if (!(schedule[j].first > schedule[j - 1].first) ||
        !(schedule[j].second > schedule[j - 1].second)) {
      throw HypothesisError("radii schedule must be strictly increasing");
    }
  }

  int sched = std::min<int>(std::max(cfg.schedule_start, 0),
                            static_cast<int>(schedule.size()) - 1);

  Vec u = cfg.u0.value_or(Vec::Zero(inst.dims.n_V));
  Vec lambda = cfg.lambda0 ? inst.Lambda.project(*cfg.lambda0)
                           : Vec::Zero(inst.dims.m_E);
  if (u.size() != inst.dims.n_V || lambda.size() != inst.dims.m_E) {
    throw ShapeError("starting point dimension mismatch");
  }
  // Start inside the first ball that contains the starting point, so random
  // restarts are not clamped towards the origin.
  while (sched + 1 < static_cast<int>(schedule.size()) &&
         (u.norm() >= schedule[sched].first ||
          lambda.norm() >= schedule[sched].second)) {
    ++sched;
  }
  double r = schedule[sched].first;
  double s = schedule[sched].second;

  auto [t, eta_unused] = default_steps(inst, r);
  (void)eta_unused;
  if (cfg.outer_step > 0.0) t = cfg.outer_step;
  const double t0 = t;

  SolveTrace trace;
  SolverConfig work = cfg;
  long iter = 0;
  double last_cres = kInf;

  // The outer loop reruns with tightened tolerances until the returned pair
  // certifies on the verifier grid (probe rays scale with the iterate, so a
  // fixed multiplier tolerance alone does not bound the worst violation).
  for (int round = 0;; ++round) {
    int boundary_hits = 0;
    double best_cres = kInf;
    int stall = 0;
    bool converged = false;

    for (; iter < cfg.max_outer; ++iter) {
      // Early multiplier iterates do not need the final inner precision.
      SolverConfig inner_cfg = work;
      // Track the multiplier residual three decades down so inner noise
      // stays far below the outer tolerance (its amplification into the
      // residual is ~ ||B|| / c_h).
      inner_cfg.tol_u = std::min(
          std::max(1e-3 * std::min(last_cres, 1.0),
                   std::max(1e-14, 0.01 * work.tol_u)),
          5e-2);
      Vec u_new = inner_solve_u(inst, lambda, u, inner_cfg, r,
                                &trace.inner_iterations);
      bool touched = false;
      const double un = u_new.norm();
      if (un > r) {
        u_new *= r / un;
        touched = true;
      }
      Vec lambda_new = inst.Lambda.project(lambda + t * (inst.b.B * u_new));
      const double ln = lambda_new.norm();
      if (ln > s) {
        // Radial shrink stays inside Lambda (0 is a member, the set convex).
        lambda_new *= s / ln;
        touched = true;
      }

      const double u_update = (u_new - u).norm();
      const double compl_res =
          complementarity_residual(inst, u_new, lambda_new, s);
      trace.rows.push_back({iter, r, s, u_update, compl_res});
      if (iter % 500 == 0 && std::getenv("MVHVI_DEBUG_SOLVE")) {
        std::fprintf(stderr,
                     "[solve] iter %ld r %g cres %.3e du %.3e t %.3e itol %.1e\n",
                     iter, r, compl_res, u_update, t, inner_cfg.tol_u);
      }

      u = u_new;
      lambda = lambda_new;

      if (!touched && compl_res <= work.tol_outer &&
          u_update <= work.tol_outer) {
        converged = true;
        break;
      }

      // Outer step backoff: an overshooting step saturates into a limit
      // cycle whose residual stops improving; halve t when a whole window
      // passes with no measurable progress.
      last_cres = compl_res;
      if (compl_res < best_cres * (1.0 - 1e-3)) {
        best_cres = compl_res;
        stall = 0;
      } else if (++stall >= 300) {
        // A saturated cycle far from the tolerance makes no measurable
        // progress over a whole window; near convergence residual jitter is
        // normal and halving would only freeze the multiplier.
        if (compl_res > 1e4 * work.tol_outer) {
          t = std::max(0.5 * t, 1e-6 * t0);
        }
        stall = 0;
      }

      if (touched) {
        if (++boundary_hits >= 2) {
          ++sched;
          if (sched >= static_cast<int>(schedule.size())) {
            throw ScheduleExhausted(
                "no interior solution up to the largest ball; coercivity "
                "likely violated");
          }
          r = schedule[sched].first;
          s = schedule[sched].second;
          boundary_hits = 0;
        }
      } else {
        boundary_hits = 0;
      }
    }
    trace.final_schedule_index = sched;
    if (!converged) {
      throw InnerDivergence("outer iteration budget exhausted before the "
                            "multiplier residual met the tolerance");
    }

    SolutionPair pair;
    pair.u = u;
    pair.lambda = lambda;
    pair.residuals = full_report(inst, u, lambda, cfg.certify);
    if (std::getenv("MVHVI_DEBUG_SOLVE")) {
      std::fprintf(stderr,
                   "[solve] round %d iter %ld res %.3e (o %.3e m %.3e c %.3e "
                   "mc %.3e) tol %.1e\n",
                   round, iter, pair.residuals.max(), pair.residuals.r_original,
                   pair.residuals.r_minty, pair.residuals.r_combined,
                   pair.residuals.r_minty_combined, work.tol_outer);
    }
    if (pair.residuals.max() <= 10.0 * cfg.tol_outer) {
      trace.termination = "converged";
      return {pair, trace};
    }
    if (round >= 3 || work.tol_outer <= 1e-13) {
      throw InnerDivergence(
          "iteration converged but the pair does not certify: worst "
          "formulation violation " +
          std::to_string(pair.residuals.max()));
    }
    work.tol_outer = std::max(0.05 * work.tol_outer, 1e-13);
    work.tol_u = std::max(0.05 * work.tol_u, 1e-14);
  }
}

UniquenessReport multi_start(const ProblemInstance& inst,
                             const SolverConfig& cfg, std::uint64_t seed) {
  UniquenessReport rep;
  if (!inst.h.is_power()) {
    rep.applicable = false;
    return rep;
  }
  rep.applicable = true;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const double m = std::max(strong_mono_estimate(inst), 0.25);
  const double u_scale = std::max(1.0, 2.0 * inst.f.norm() / m);
  const double l_scale = std::max(2.0, 2.0 * inst.f.norm());

  for (int run = 0; run < std::max(cfg.restarts, 1); ++run) {
    SolverConfig rcfg = cfg;
    Vec u0(inst.dims.n_V);
    for (int i = 0; i < u0.size(); ++i) u0[i] = u_scale * g(rng);
    Vec l0(inst.dims.m_E);
    for (int i = 0; i < l0.size(); ++i) l0[i] = l_scale * g(rng);
    rcfg.u0 = u0;
    rcfg.lambda0 = inst.Lambda.project(l0);
    rcfg.seed = seed + 7919ULL * (run + 1);
    rep.runs.push_back(solve(inst, rcfg).first);
  }
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.runs.size(); ++j) {
      rep.u_spread = std::max(
          rep.u_spread, (rep.runs[i].u - rep.runs[j].u).norm());
      rep.lambda_spread = std::max(
          rep.lambda_spread,
          (rep.runs[i].lambda - rep.runs[j].lambda).norm());
    }
  }
  rep.consistent = rep.u_spread <= 10.0 * cfg.tol_outer;
  return rep;
}

} // namespace mvhvi
