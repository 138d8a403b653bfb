#include "mvhvi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvhvi/batch.hpp"
#include "mvhvi/simd/kernels.hpp"

namespace mvhvi {

namespace {

constexpr long kCandidateBudget = 100000000L; // 1e8
constexpr long kHitCap = 500000L;

std::vector<double> symmetric_axis(double r, double delta) {
  const long K = static_cast<long>(std::floor(r / delta + 1e-9));
  std::vector<double> v;
  v.reserve(2 * K + 1);
  for (long j = -K; j <= K; ++j) v.push_back(delta * static_cast<double>(j));
  return v;
}

std::vector<double> nonneg_axis(double cap, double delta) {
  const long K = static_cast<long>(std::floor(cap / delta + 1e-9));
  std::vector<double> v;
  v.reserve(K + 1);
  for (long j = 0; j <= K; ++j) v.push_back(delta * static_cast<double>(j));
  return v;
}

/// Cartesian product of per-axis values filtered to the r-ball (and the set
/// membership test when given), stored SoA.
Block product_grid(const std::vector<std::vector<double>>& axes, double r,
                   const LambdaSet* member) {
  const int dim = static_cast<int>(axes.size());
  std::vector<Vec> pts;
  std::vector<int> idx(dim, 0);
  Vec x(dim);
  while (true) {
    for (int i = 0; i < dim; ++i) x[i] = axes[i][idx[i]];
    if (x.norm() <= r + 1e-12 &&
        (member == nullptr || member->contains(x, 1e-9))) {
      pts.push_back(x);
    }
    int c = dim - 1;
    while (c >= 0) {
      if (++idx[c] < static_cast<int>(axes[c].size())) break;
      idx[c] = 0;
      --c;
    }
    if (c < 0) break;
  }
  Block out(dim, static_cast<long>(pts.size()));
  for (long s = 0; s < out.count; ++s) out.set_column(s, pts[s]);
  return out;
}

} // namespace

double OracleResult::nearest_u(const Vec& u) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : hits) best = std::min(best, (h.u - u).norm());
  return best;
}

double oracle_default_tol(const ProblemInstance& inst, double r, double s,
                          double delta) {
  const double g = inst.gamma.operator_norm;
  const double bnorm = inst.b.spectral_norm();
  const double slope = inst.J.lipschitz_on_ball(g * r + 1.0);
  const double curv = inst.J.max_curvature();
  const double L_u = inst.A.lipschitz_on_ball(r) * 2.0 * r + inst.f.norm() +
                     inst.A.bound_on_ball(r) + bnorm * s +
                     g * g * (2.0 * r * curv + slope) + g * slope;
  const double L_l = bnorm * (2.0 * r + s);
  // Full-step slack: the nearest same-side lattice neighbour of a solution
  // sits within delta, not delta/2, when a kink separates the half steps.
  return (L_u + L_l) * delta * 1.5;
}

OracleResult brute_force_oracle(const ProblemInstance& inst, double r,
                                double s, double delta, double tol) {
  if (inst.dims.n_V + inst.dims.m_E > 4) {
    throw DimensionLimit("oracle sweep requires n_V + m_E <= 4");
  }
  if (!(delta > 0.0)) throw HypothesisError("grid step must be positive");

  const int n = inst.dims.n_V;
  const int m = inst.dims.m_E;
  const int k = inst.dims.k_X;
  const auto& kr = simd::active_kernels();

  std::vector<std::vector<double>> u_axes(n, symmetric_axis(r, delta));
  std::vector<std::vector<double>> l_axes;
  switch (inst.Lambda.kind()) {
    case LambdaSet::Kind::NonnegativeOrthant:
      l_axes.assign(m, nonneg_axis(s, delta));
      break;
    case LambdaSet::Kind::Box:
      for (int i = 0; i < m; ++i) {
        l_axes.push_back(
            nonneg_axis(std::min(s, inst.Lambda.upper()[i]), delta));
      }
      break;
    case LambdaSet::Kind::Polyhedron:
      l_axes.assign(m, symmetric_axis(s, delta));
      break;
  }
  long raw_u = 1, raw_l = 1;
  for (const auto& a : u_axes) raw_u *= static_cast<long>(a.size());
  for (const auto& a : l_axes) raw_l *= static_cast<long>(a.size());
  if (raw_u > kCandidateBudget || raw_l > kCandidateBudget ||
      raw_u > kCandidateBudget / std::max(raw_l, 1L)) {
    throw BudgetExceeded("candidate grid exceeds the 1e8 point budget");
  }

  const Block Ug = product_grid(u_axes, r, nullptr);
  const Block Lg = product_grid(
      l_axes, s,
      inst.Lambda.kind() == LambdaSet::Kind::Polyhedron ? &inst.Lambda
                                                        : nullptr);
  const long Nu = Ug.count;
  const long Nl = Lg.count;

  OracleResult result;
  result.tol = tol;
  result.delta = delta;
  result.candidates = Nu * Nl;

  // Test grids coincide with the candidate grids.  The Combined violation
  // separates into a state part and a multiplier part, so the sweep is
  //   max_v [ <f - Au, v-u> - (B^T l)^T v - J0(gu; g(v-u)) ] + max_rho rho^T Bu.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Gr =
      inst.gamma.G;
  Block GV(k, Nu);
  kr.matvec(Gr.data(), k, n, Ug.data(), Nu, GV.data());

  std::vector<double> q(Nu), sup(Nu), zeros(Nl, 0.0);
  Block W(k, Nu);
  Vec c_neg(n);

  for (long cu = 0; cu < Nu; ++cu) {
    const Vec u = Ug.column(cu);
    const Vec Au = inst.A.apply(u);
    const Vec c0 = inst.f - Au;
    const Vec gu = inst.gamma.G * u;
    const SubgradientBox box = inst.J.subgradient_box(gu);

    kr.matvec(c0.data(), 1, n, Ug.data(), Nu, q.data());
    const double shift = c0.dot(u);
    for (long v = 0; v < Nu; ++v) q[v] -= shift;
    for (int i = 0; i < k; ++i) {
      const double gui = gu[i];
      const double* gv = GV.row(i);
      double* w = W.row(i);
      for (long v = 0; v < Nu; ++v) w[v] = gv[v] - gui;
    }
    kr.support_fixed(box.lo.data(), box.hi.data(), k, W.data(), Nu,
                     sup.data(), 0);
    for (long v = 0; v < Nu; ++v) q[v] -= sup[v];

    const Vec Bu = inst.b.B * u;
    const double rho_max =
        Nl > 0 ? kr.score_max(zeros.data(), Bu.data(), Lg.data(), m, Nl).value
               : 0.0;

    for (long cl = 0; cl < Nl; ++cl) {
      const Vec lam = Lg.column(cl);
      c_neg = -(inst.b.B.transpose() * lam);
      const double vmax =
          kr.score_max(q.data(), c_neg.data(), Ug.data(), n, Nu).value;
      const double viol = vmax + rho_max;
      if (viol <= tol) {
        if (static_cast<long>(result.hits.size()) >= kHitCap) {
          result.truncated = true;
          return result;
        }
        result.hits.push_back({u, lam, std::max(0.0, viol)});
        if (u.norm() >= r - delta) result.boundary_touching = true;
      }
    }
  }
  return result;
}

} // namespace mvhvi
