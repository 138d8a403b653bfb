#include "mvhvi/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "mvhvi/batch.hpp"
#include "mvhvi/hypotheses.hpp"
#include "mvhvi/simd/kernels.hpp"

namespace mvhvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RowMat {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> M;
  explicit RowMat(const Mat& src) : M(src) {}
  const double* data() const { return M.data(); }
};

/// Random-ball + coordinate-ray + reflection probe block for the state.
Block build_v_probes(const ProblemInstance& inst, const Vec& u,
                     const ProbeConfig& cfg, std::mt19937_64& rng) {
  const int n = inst.dims.n_V;
  const double R = 2.0 * (u.norm() + 1.0);
  std::vector<Vec> probes;
  probes.reserve(cfg.count + 8 * n + 8);

  // Deterministic rays: coordinate directions at several scales, the
  // origin, and the far pole.
  probes.push_back(Vec::Zero(n));
  for (int i = 0; i < n; ++i) {
    for (double d : {1e-3, 1.0, 0.5 * R}) {
      Vec e = Vec::Zero(n);
      e[i] = d;
      probes.push_back(u + e);
      probes.push_back(u - e);
    }
  }

  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  const long n_random = std::max<long>(cfg.count - static_cast<long>(probes.size()), 8);
  for (long s = 0; s < n_random; ++s) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    const double nv = v.norm();
    if (nv > 0.0) {
      v *= R * std::pow(ur(rng), 1.0 / n) / nv;
    }
    probes.push_back(v);
    // Reflected ray through u covers the -(v-u) direction.
    if ((s & 1) == 0) probes.push_back(2.0 * u - v);
  }

  Block V(n, static_cast<long>(probes.size()));
  for (long s = 0; s < V.count; ++s) V.set_column(s, probes[s]);
  return V;
}

std::vector<Vec> build_rho_probes(const ProblemInstance& inst,
                                  const Vec& lambda, const ProbeConfig& cfg,
                                  std::mt19937_64& rng) {
  const int m = inst.dims.m_E;
  std::vector<Vec> probes;
  probes.push_back(Vec::Zero(m));
  probes.push_back(lambda);
  probes.push_back(inst.Lambda.project(2.0 * lambda));
  probes.push_back(inst.Lambda.project(0.5 * lambda));
  std::normal_distribution<double> g(0.0, 1.0);
  const long n_random = std::max<long>(cfg.count / 10, 64);
  for (long s = 0; s < n_random; ++s) {
    const double scale = (s % 3 == 0) ? 0.1 : (s % 3 == 1 ? 1.0 : 10.0);
    Vec z(m);
    for (int i = 0; i < m; ++i) z[i] = lambda[i] + scale * g(rng);
    probes.push_back(inst.Lambda.project(z));
  }
  return probes;
}

struct VPartEval {
  const ProblemInstance& inst;
  const Vec& u;
  const Vec& lambda;
  Formulation form;
  Vec Au;
  Vec Btl;
  SubgradientBox box_u;
  Vec gu;

  VPartEval(const ProblemInstance& i, const Vec& u_, const Vec& l_,
            Formulation f)
      : inst(i), u(u_), lambda(l_), form(f) {
    Au = inst.A.apply(u);
    Btl = inst.b.B.transpose() * lambda;
    gu = inst.gamma.G * u;
    box_u = inst.J.subgradient_box(gu);
  }

  bool minty() const {
    return form == Formulation::Minty || form == Formulation::MintyCombined;
  }
  bool combined() const {
    return form == Formulation::Combined ||
           form == Formulation::MintyCombined;
  }

  /// Violation contribution of the state inequality at one test point.
  double at(const Vec& v) const {
    const Vec d = v - u;
    double viol = inst.f.dot(d);
    if (minty()) {
      viol += inst.h.eval(d);
      viol -= inst.A.apply(v).dot(d);
      viol -= inst.J.clarke_dir(inst.gamma.G * v, inst.gamma.G * d);
    } else {
      viol -= Au.dot(d);
      viol -= inst.J.clarke_dir(gu, inst.gamma.G * d);
    }
    viol -= combined() ? Btl.dot(v) : Btl.dot(d);
    return viol;
  }

  /// Batched violations over an SoA block; returns reduce_max over samples.
  simd::MaxResult batch(const Block& V, std::vector<double>& viol) const {
    const auto& kr = simd::active_kernels();
    const int n = inst.dims.n_V;
    const int k = inst.dims.k_X;
    const long N = V.count;
    viol.assign(N, 0.0);

    Block D(n, N);
    for (int r = 0; r < n; ++r) {
      const double ur_ = u[r];
      const double* vr = V.row(r);
      double* dr = D.row(r);
      for (long s = 0; s < N; ++s) dr[s] = vr[s] - ur_;
    }

    std::vector<double> tmp(N);
    // <f, v-u>
    kr.matvec(inst.f.data(), 1, n, D.data(), N, tmp.data());
    for (long s = 0; s < N; ++s) viol[s] += tmp[s];

    if (minty()) {
      // + h(v-u) - <A(v), v-u>
      std::vector<double> dn2(N);
      kr.dot_cols(D.data(), D.data(), n, N, dn2.data());
      for (long s = 0; s < N; ++s) {
        viol[s] += inst.h.eval_norm(std::sqrt(dn2[s]));
      }
      Block AV(n, N);
      inst.A.apply_batch(V.data(), N, AV.data());
      kr.dot_cols(AV.data(), D.data(), n, N, tmp.data());
      for (long s = 0; s < N; ++s) viol[s] -= tmp[s];
    } else {
      // - <A(u), v-u>
      kr.matvec(Au.data(), 1, n, D.data(), N, tmp.data());
      for (long s = 0; s < N; ++s) viol[s] -= tmp[s];
    }

    // - b(., lambda): the combined family tests b(v, lambda), the plain
    // family b(v-u, lambda).
    kr.matvec(Btl.data(), 1, n, combined() ? V.data() : D.data(), N,
              tmp.data());
    for (long s = 0; s < N; ++s) viol[s] -= tmp[s];

    // - J0 term.
    RowMat Gr(inst.gamma.G);
    Block W(k, N);
    kr.matvec(Gr.data(), k, n, D.data(), N, W.data());
    std::vector<double> sup(N, 0.0);
    if (minty()) {
      Block GV(k, N), val(k, N), lo(k, N), hi(k, N);
      kr.matvec(Gr.data(), k, n, V.data(), N, GV.data());
      inst.J.eval_batch(GV.data(), N, val.data(), lo.data(), hi.data());
      inst.J.support_batch(lo.data(), hi.data(), W.data(), N, sup.data(),
                           false);
    } else {
      kr.support_fixed(box_u.lo.data(), box_u.hi.data(), k, W.data(), N,
                       sup.data(), 0);
    }
    for (long s = 0; s < N; ++s) viol[s] -= sup[s];

    return kr.reduce_max(viol.data(), N);
  }

  /// Local pattern search sharpening the worst probe.
  Vec refine(Vec v, double radius) const {
    const int n = inst.dims.n_V;
    double step = std::max(radius / 8.0, 1e-6);
    double best = at(v);
    for (int it = 0; it < 48 && step > 1e-12; ++it) {
      bool improved = false;
      for (int i = 0; i < n; ++i) {
        for (double sgn : {1.0, -1.0}) {
          Vec cand = v;
          cand[i] += sgn * step;
          const double cn = cand.norm();
          if (cn > radius) cand *= radius / cn;
          const double val = at(cand);
          if (val > best + 1e-16) {
            best = val;
            v = cand;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return v;
  }
};

/// Multiplier-side violation of the chosen formulation.
///   Original/Minty: max_rho b(u, rho - lambda);
///   Combined family: max_rho b(u, rho) (the -b(u, lambda) sits in the
///   v-part at v = u, maxima add up across the separable product).
double rho_part_max(const ProblemInstance& inst, const Vec& u,
                    const Vec& lambda, bool combined,
                    const std::vector<Vec>& probes, Vec* worst) {
  const Vec Bu = inst.b.B * u;
  const double base = combined ? 0.0 : lambda.dot(Bu);
  double best = -kInf;
  Vec arg = lambda;
  for (const Vec& rho : probes) {
    const double val = rho.dot(Bu) - base;
    if (val > best) {
      best = val;
      arg = rho;
    }
  }
  // Exact maximizer over Lambda within a ball (enumeration may refuse large
  // polyhedra; sampled probes stand in that case).
  try {
    Vec exact;
    const double s = std::max(8.0, 2.0 * (lambda.norm() + 1.0));
    const double val = inst.Lambda.support_in_ball(Bu, s, &exact) - base;
    if (val > best) {
      best = val;
      arg = exact;
    }
  } catch (const DimensionLimit&) {
  }
  if (worst) *worst = arg;
  return best;
}

} // namespace

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::Original:
      return "original";
    case Formulation::Minty:
      return "minty";
    case Formulation::Combined:
      return "combined";
    case Formulation::MintyCombined:
      return "minty-combined";
  }
  return "?";
}

FormulationResidual residual(const ProblemInstance& inst, const Vec& u,
                             const Vec& lambda, Formulation f,
                             const ProbeConfig& probes) {
  if (!inst.Lambda.contains(lambda, 1e-9)) {
    throw HypothesisGate("residual requires lambda in Lambda");
  }
  std::mt19937_64 rng(probes.seed + 0x101u * static_cast<unsigned>(f));

  FormulationResidual out;
  out.formulation = f;

  VPartEval ev(inst, u, lambda, f);
  const Block V = build_v_probes(inst, u, probes, rng);
  std::vector<double> viol;
  simd::MaxResult vmax = ev.batch(V, viol);
  Vec worst_v = V.column(vmax.index);
  double v_part = vmax.value;
  if (probes.refine) {
    const double R = 2.0 * (u.norm() + 1.0);
    worst_v = ev.refine(worst_v, R);
    v_part = std::max(v_part, ev.at(worst_v));
  }

  const std::vector<Vec> rho_probes = build_rho_probes(inst, lambda, probes, rng);
  Vec worst_rho;
  const double r_part =
      rho_part_max(inst, u, lambda, ev.combined(), rho_probes, &worst_rho);

  double total;
  if (ev.combined()) {
    total = v_part + r_part;
  } else {
    total = std::max(v_part, r_part);
  }
  out.violation = std::max(0.0, total);
  out.worst_v = worst_v;
  out.worst_rho = worst_rho;
  return out;
}

ResidualReport full_report(const ProblemInstance& inst, const Vec& u,
                           const Vec& lambda, const ProbeConfig& probes) {
  ResidualReport rep;
  rep.sampling = probes;
  rep.r_original =
      residual(inst, u, lambda, Formulation::Original, probes).violation;
  rep.r_minty = residual(inst, u, lambda, Formulation::Minty, probes).violation;
  rep.r_combined =
      residual(inst, u, lambda, Formulation::Combined, probes).violation;
  rep.r_minty_combined =
      residual(inst, u, lambda, Formulation::MintyCombined, probes).violation;
  return rep;
}

bool equivalence_check(const ProblemInstance& inst, const Vec& u,
                       const Vec& lambda, double tol, ResidualReport* out) {
  const ResidualReport rep = full_report(inst, u, lambda, ProbeConfig{});
  if (out) *out = rep;
  const bool all_in = rep.max() <= tol;
  const bool all_out = rep.r_original > tol && rep.r_minty > tol &&
                       rep.r_combined > tol && rep.r_minty_combined > tol;
  return all_in || all_out;
}

double convexity_probe(const ProblemInstance& inst, const SolutionPair& s1,
                       const SolutionPair& s2,
                       const std::vector<double>& t_grid,
                       const ProbeConfig& probes) {
  if (!inst.h.convex()) {
    throw HypothesisGate("convexity probe requires convex h");
  }
  constexpr double kCertTol = 1e-6;
  const double c1 =
      residual(inst, s1.u, s1.lambda, Formulation::Combined, probes).violation;
  const double c2 =
      residual(inst, s2.u, s2.lambda, Formulation::Combined, probes).violation;
  if (c1 > kCertTol || c2 > kCertTol) {
    throw HypothesisGate("convexity probe requires certified endpoints");
  }
  double worst = 0.0;
  for (double t : t_grid) {
    const Vec u = t * s1.u + (1.0 - t) * s2.u;
    const Vec lam = t * s1.lambda + (1.0 - t) * s2.lambda;
    worst = std::max(
        worst,
        residual(inst, u, lam, Formulation::Combined, probes).violation);
  }
  return worst;
}

double multiplier_bound_gap(const ProblemInstance& inst, const Vec& u,
                            const Vec& lambda) {
  const double alpha_b = infsup_constant(inst.b);
  const Vec gu = inst.gamma.G * u;
  const SubgradientBox box = inst.J.subgradient_box(gu);
  // sup over the box of ||G^T xi||: a convex max, vertex-attained; enumerate
  // for small boxes, otherwise use the norm product upper estimate (which
  // only loosens the certified inequality).
  double set_norm;
  const int k = static_cast<int>(box.lo.size());
  if (k <= 12) {
    set_norm = 0.0;
    for (long mask = 0; mask < (1L << k); ++mask) {
      Vec xi(k);
      for (int i = 0; i < k; ++i) {
        xi[i] = (mask >> i) & 1 ? box.hi[i] : box.lo[i];
      }
      set_norm = std::max(set_norm, (inst.gamma.G.transpose() * xi).norm());
    }
  } else {
    set_norm = inst.gamma.operator_norm * box.max_norm();
  }
  const double rhs = inst.A.apply(u).norm() + set_norm + inst.f.norm();
  return rhs - alpha_b * lambda.norm();
}

double coercivity_chain_gap(const ProblemInstance& inst, const Vec& u) {
  const double theta = inst.profile.theta.value;
  const double alpha_J = inst.profile.alpha_J.value;
  const double beta_J = inst.profile.beta_J.value;
  const double lhs = inst.A.apply(u).dot(u);
  const double rhs =
      alpha_J +
      beta_J * std::pow(inst.gamma.operator_norm, theta) *
          std::pow(u.norm(), theta) +
      inst.f.norm() * u.norm();
  return rhs - lhs;
}

SolutionSetProbe boundedness_probe(const ProblemInstance& inst,
                                   double f_ball_radius, int samples,
                                   const SolverConfig& cfg,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  SolutionSetProbe probe;
  for (int s = 0; s < samples; ++s) {
    ProblemInstance shifted = inst;
    Vec f(inst.dims.n_V);
    for (int i = 0; i < f.size(); ++i) f[i] = g(rng);
    const double nf = f.norm();
    if (nf > 0.0) f *= f_ball_radius * std::pow(ur(rng), 1.0 / f.size()) / nf;
    shifted.f = f;
    SolverConfig scfg = cfg;
    scfg.skip_audits = true;
    scfg.seed = seed + 31ULL * s;
    auto [pair, trace] = solve(shifted, scfg);
    (void)trace;
    probe.sup_u = std::max(probe.sup_u, pair.u.norm());
    probe.sup_lambda = std::max(probe.sup_lambda, pair.lambda.norm());
    if (multiplier_bound_gap(shifted, pair.u, pair.lambda) < -1e-8) {
      probe.multiplier_bound_ok = false;
    }
    if (coercivity_chain_gap(shifted, pair.u) < -1e-8) {
      probe.chain_bound_ok = false;
    }
    probe.solutions.push_back(std::move(pair));
  }
  for (std::size_t i = 0; i < probe.solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < probe.solutions.size(); ++j) {
      probe.diameter_u =
          std::max(probe.diameter_u,
                   (probe.solutions[i].u - probe.solutions[j].u).norm());
      probe.diameter_lambda = std::max(
          probe.diameter_lambda,
          (probe.solutions[i].lambda - probe.solutions[j].lambda).norm());
    }
  }
  return probe;
}

std::pair<double, double> stability_check(const ProblemInstance& inst,
                                          const Vec& f1, const Vec& f2,
                                          const SolverConfig& cfg) {
  if (!inst.h.is_power()) {
    throw HypothesisGate("stability bound requires the power form of h");
  }
  ProblemInstance i1 = inst;
  i1.f = f1;
  ProblemInstance i2 = inst;
  i2.f = f2;
  SolverConfig scfg = cfg;
  scfg.skip_audits = true;
  auto [p1, t1] = solve(i1, scfg);
  auto [p2, t2] = solve(i2, scfg);
  (void)t1;
  (void)t2;
  constexpr double kCertTol = 1e-6;
  if (p1.residuals.max() > kCertTol || p2.residuals.max() > kCertTol) {
    throw HypothesisGate("stability check requires certified solves");
  }
  const double lhs = (p1.u - p2.u).norm();
  const double rhs =
      std::pow((f1 - f2).norm() / inst.h.c_h, 1.0 / (inst.h.tau - 1.0));
  return {lhs, rhs};
}

UscReport usc_probe(const ProblemInstance& inst, const Vec& f,
                    double perturbation_scale, int steps,
                    const SolverConfig& cfg) {
  UscReport rep;
  ProblemInstance base = inst;
  base.f = f;
  ProbeConfig probes;
  probes.count = 2000;
  for (int nstep = 1; nstep <= steps; ++nstep) {
    ProblemInstance pert = inst;
    Vec fn = f;
    fn[0] += perturbation_scale * std::pow(2.0, -nstep);
    pert.f = fn;
    SolverConfig scfg = cfg;
    scfg.skip_audits = true;
    auto [pair, trace] = solve(pert, scfg);
    (void)trace;
    rep.residuals.push_back(
        residual(base, pair.u, pair.lambda, Formulation::Combined, probes)
            .violation);
  }
  rep.decayed = !rep.residuals.empty() &&
                rep.residuals.back() <= 1e-8 &&
                rep.residuals.back() <= rep.residuals.front() + 1e-12;
  return rep;
}

std::pair<Vec, Vec> lcp_active_set_solve(const ProblemInstance& inst) {
  if (!inst.J.is_zero() || inst.A.power.has_value()) {
    throw HypothesisGate("active-set route requires J == 0 and linear A");
  }
  if (inst.Lambda.kind() != LambdaSet::Kind::NonnegativeOrthant) {
    throw HypothesisGate("active-set route requires the orthant multiplier "
                         "set");
  }
  const int n = inst.dims.n_V;
  const int m = inst.dims.m_E;
  if (m > 8) {
    throw DimensionLimit("active-set enumeration supports at most 8 "
                         "multipliers");
  }
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    const int na = __builtin_popcount(mask);
    Mat K(n + na, n + na);
    Vec rhs = Vec::Zero(n + na);
    K.setZero();
    K.topLeftCorner(n, n) = inst.A.P;
    int row = 0;
    for (int i = 0; i < m; ++i) {
      if (!(mask & (1u << i))) continue;
      K.block(n + row, 0, 1, n) = inst.b.B.row(i);
      K.block(0, n + row, n, 1) = inst.b.B.row(i).transpose();
      ++row;
    }
    rhs.head(n) = inst.f;
    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(rhs);
    const Vec u = sol.head(n);
    Vec lambda = Vec::Zero(m);
    row = 0;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) lambda[i] = sol[n + row++];
    }
    const Vec Bu = inst.b.B * u;
    if ((Bu.array() <= 1e-9).all() && (lambda.array() >= -1e-9).all()) {
      return {u, lambda.cwiseMax(0.0)};
    }
  }
  throw InnerDivergence("active-set enumeration found no KKT point");
}

CrosscheckReport special_case_crosscheck(const ProblemInstance& inst,
                                         const SolverConfig& cfg) {
  CrosscheckReport rep;
  ProbeConfig probes;
  probes.count = 4000;
  if (inst.b.is_zero()) {
    // Pure state inequality: the multiplier drops out; the state must be
    // independent of every multiplier trial.
    rep.applicable = true;
    rep.mode = "pure-hvi";
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Vec u_ref;
    double gap = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      Vec lam = Vec::Zero(inst.dims.m_E);
      if (trial > 0) {
        for (int i = 0; i < lam.size(); ++i) lam[i] = 4.0 * g(rng);
        lam = inst.Lambda.project(lam);
      }
      Vec u0 = Vec::Zero(inst.dims.n_V);
      if (trial > 1) {
        for (int i = 0; i < u0.size(); ++i) u0[i] = 2.0 * g(rng);
      }
      const Vec u = inner_solve_u(inst, lam, u0, cfg);
      if (trial == 0) {
        u_ref = u;
      } else {
        gap = std::max(gap, (u - u_ref).norm());
      }
    }
    rep.reference_u = u_ref;
    rep.reference_lambda = Vec::Zero(inst.dims.m_E);
    rep.u_gap = gap;
    rep.residual = residual(inst, u_ref, rep.reference_lambda,
                            Formulation::Original, probes)
                       .violation;
    return rep;
  }
  if (inst.J.is_zero() && !inst.A.power.has_value() &&
      inst.Lambda.kind() == LambdaSet::Kind::NonnegativeOrthant) {
    rep.applicable = true;
    rep.mode = "lcp";
    auto [u_ref, lam_ref] = lcp_active_set_solve(inst);
    rep.reference_u = u_ref;
    rep.reference_lambda = lam_ref;
    SolverConfig scfg = cfg;
    scfg.skip_audits = true;
    auto [pair, trace] = solve(inst, scfg);
    (void)trace;
    rep.u_gap = (pair.u - u_ref).norm();
    rep.residual =
        residual(inst, u_ref, lam_ref, Formulation::Original, probes)
            .violation;
    return rep;
  }
  rep.applicable = false;
  return rep;
}

void write_violation_landscape(const ProblemInstance& inst, const Vec& lambda,
                               double r, int steps, const std::string& path) {
  const int n = inst.dims.n_V;
  if (n > 2) {
    throw DimensionLimit("violation landscape requires a 1-D or 2-D state");
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open landscape file: " + path);
  out.precision(12);
  ProbeConfig probes;
  probes.count = 400;
  probes.refine = false;
  const int N = std::max(steps, 2);
  auto viol_at = [&](const Vec& u) {
    return residual(inst, u, lambda, Formulation::Combined, probes).violation;
  };
  if (n == 1) {
    out << "# u violation\n";
    for (int i = 0; i < N; ++i) {
      Vec u(1);
      u[0] = -r + 2.0 * r * i / (N - 1);
      out << u[0] << " " << viol_at(u) << "\n";
    }
  } else {
    out << "# x y violation\n";
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        Vec u(2);
        u[0] = -r + 2.0 * r * i / (N - 1);
        u[1] = -r + 2.0 * r * j / (N - 1);
        out << u[0] << " " << u[1] << " " << viol_at(u) << "\n";
      }
      out << "\n";
    }
  }
}

} // namespace mvhvi
