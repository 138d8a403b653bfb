#include "mvhvi/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mvhvi/batch.hpp"
#include "mvhvi/piecewise.hpp"
#include "mvhvi/simd/kernels.hpp"

namespace mvhvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string vec_str(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ")";
  return os.str();
}

} // namespace

const char* to_string(AuditStatus s) {
  switch (s) {
    case AuditStatus::Verified:
      return "Verified";
    case AuditStatus::Estimated:
      return "Estimated";
    case AuditStatus::Violated:
      return "Violated";
  }
  return "?";
}

bool AuditReport::all_pass() const {
  for (const auto& e : entries) {
    if (e.status == AuditStatus::Violated) return false;
  }
  return true;
}

const HypothesisAudit* AuditReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

double infsup_constant(const BilinearFormSpec& b) {
  const int m = static_cast<int>(b.B.rows());
  const int n = static_cast<int>(b.B.cols());
  if (m > n) return 0.0; // B^T has a nontrivial kernel on E
  Eigen::JacobiSVD<Mat> svd(b.B);
  const auto& sv = svd.singularValues();
  return sv[sv.size() - 1];
}

HypothesisAudit audit_relaxed_monotonicity(const ProblemInstance& inst,
                                           long samples, std::uint64_t seed) {
  const int n = inst.dims.n_V;
  const int k = inst.dims.k_X;
  const auto& kr = simd::active_kernels();

  std::mt19937_64 rng(seed);
  HypothesisAudit audit;
  audit.name = "H(A)-relaxed-monotonicity";
  audit.seed = seed;

  double worst = kInf;
  Vec worst_u, worst_v;

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Gr =
      inst.gamma.G;

  const long chunk = 2048;
  long left = std::max<long>(samples, 1);
  // Mixed scales so both kink-local and far-field pairs appear.
  const double scales[] = {0.05, 0.5, 2.0, 8.0};
  int scale_idx = 0;
  while (left > 0) {
    const long c = std::min(chunk, left);
    left -= c;
    Block U(n, c), V(n, c), D(n, c);
    fill_gaussian(U, rng, scales[scale_idx % 4]);
    fill_gaussian(V, rng, scales[scale_idx % 4]);
    ++scale_idx;
    for (long s = 0; s < c; ++s) {
      for (int r = 0; r < n; ++r) D.row(r)[s] = U.row(r)[s] - V.row(r)[s];
    }
    Block AU(n, c), AV(n, c);
    inst.A.apply_batch(U.data(), c, AU.data());
    inst.A.apply_batch(V.data(), c, AV.data());
    Block dA(n, c);
    for (long s = 0; s < c; ++s) {
      for (int r = 0; r < n; ++r) dA.row(r)[s] = AU.row(r)[s] - AV.row(r)[s];
    }
    std::vector<double> margin(c);
    kr.dot_cols(dA.data(), D.data(), n, c, margin.data());

    // gamma-image blocks and per-sample boxes.
    Block GU(k, c), GV(k, c), W(k, c), Wm(k, c);
    kr.matvec(Gr.data(), k, n, U.data(), c, GU.data());
    kr.matvec(Gr.data(), k, n, V.data(), c, GV.data());
    kr.matvec(Gr.data(), k, n, D.data(), c, W.data());
    for (long i = 0; i < static_cast<long>(W.buf.size()); ++i) {
      Wm.buf[i] = -W.buf[i];
    }
    Block valU(k, c), loU(k, c), hiU(k, c);
    Block valV(k, c), loV(k, c), hiV(k, c);
    inst.J.eval_batch(GU.data(), c, valU.data(), loU.data(), hiU.data());
    inst.J.eval_batch(GV.data(), c, valV.data(), loV.data(), hiV.data());
    // Adversarial box terms: -J0(gu; -w) - J0(gv; w).
    std::vector<double> sup(c, 0.0);
    kr.support_var(loU.data(), hiU.data(), Wm.data(), k, c, sup.data(), 0);
    kr.support_var(loV.data(), hiV.data(), W.data(), k, c, sup.data(), 1);

    std::vector<double> dn2(c);
    kr.dot_cols(D.data(), D.data(), n, c, dn2.data());
    for (long s = 0; s < c; ++s) {
      const double hval = inst.h.eval_norm(std::sqrt(dn2[s]));
      const double m = margin[s] - sup[s] - hval;
      if (m < worst) {
        worst = m;
        worst_u = U.column(s);
        worst_v = V.column(s);
      }
    }
  }

  audit.margin = worst;
  if (worst >= -1e-10) {
    audit.status = AuditStatus::Verified;
  } else {
    audit.status = AuditStatus::Violated;
    audit.witness = "u=" + vec_str(worst_u) + " v=" + vec_str(worst_v);
  }
  return audit;
}

std::vector<double> default_coercivity_radii(const ProblemInstance& inst) {
  const double target = 8.0 * (inst.f.norm() + 1.0);
  std::vector<double> radii;
  double r = 1.0;
  while (radii.size() < 4 || r < target) {
    radii.push_back(r);
    r *= 2.0;
    if (r > 1e6) break;
  }
  return radii;
}

HypothesisAudit audit_coercivity(const ProblemInstance& inst,
                                 const std::vector<double>& radii,
                                 long samples_per_radius,
                                 std::uint64_t seed) {
  if (radii.empty()) throw HypothesisError("coercivity radii must be nonempty");
  const int n = inst.dims.n_V;
  const double theta = inst.profile.theta.value;
  const double exponent = std::max(theta, 1.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);

  HypothesisAudit audit;
  audit.name = "H(A)-coercivity";
  audit.seed = seed;

  std::vector<double> ratio_seq, combined_seq;
  for (double r : radii) {
    double ratio_min = kInf, combined_min = kInf;
    for (long s = 0; s < std::max<long>(samples_per_radius, 1); ++s) {
      Vec v(n);
      for (int i = 0; i < n; ++i) v[i] = g(rng);
      const double nv = v.norm();
      if (nv == 0.0) continue;
      v *= r / nv;
      const Vec Av = inst.A.apply(v);
      const double avv = Av.dot(v);
      ratio_min = std::min(ratio_min, avv / std::pow(r, exponent));
      const Vec gv = inst.gamma.G * v;
      const double combined = (avv - inst.J.clarke_dir(gv, -gv)) / r;
      combined_min = std::min(combined_min, combined);
    }
    ratio_seq.push_back(ratio_min);
    combined_seq.push_back(combined_min);
  }

  bool nondecreasing = true;
  for (std::size_t i = 1; i < combined_seq.size(); ++i) {
    if (combined_seq[i] < combined_seq[i - 1] - 1e-9) nondecreasing = false;
  }
  const double threshold = inst.f.norm() + 1.0;
  const double last = combined_seq.back();
  audit.margin = last - threshold;

  std::ostringstream os;
  os << "combined=[";
  for (std::size_t i = 0; i < combined_seq.size(); ++i) {
    if (i) os << ", ";
    os << combined_seq[i];
  }
  os << "] ratio=[";
  for (std::size_t i = 0; i < ratio_seq.size(); ++i) {
    if (i) os << ", ";
    os << ratio_seq[i];
  }
  os << "]";
  audit.witness = os.str();

  // Finitely many spheres only estimate the limit statement.
  audit.status = (nondecreasing && last > threshold) ? AuditStatus::Estimated
                                                     : AuditStatus::Violated;
  return audit;
}

HFunctionSpec derive_h_from_constants(double m_A, double m_J,
                                      double gamma_norm) {
  const double gap = m_A - m_J * gamma_norm * gamma_norm;
  if (!(gap > 0.0)) {
    std::ostringstream os;
    os << "m_J*||gamma||^2 = " << m_J * gamma_norm * gamma_norm
       << " must be < m_A = " << m_A;
    throw ConstantGapError(os.str());
  }
  return HFunctionSpec::power(gap, 2.0);
}

AuditReport audit_instance(const ProblemInstance& inst, long samples,
                           std::uint64_t seed,
                           HypothesisProfile* demoted_profile) {
  AuditReport rep;
  HypothesisProfile profile = inst.profile;
  const long n_samples = std::max<long>(samples, 16);

  // H(h): structural for both admitted forms.
  {
    HypothesisAudit a;
    a.name = "H(h)";
    a.status = AuditStatus::Verified;
    a.margin = inst.h.is_power() ? inst.h.c_h : 0.0;
    if (!inst.h.is_power()) {
      a.witness = "h == 0: (i)-(ii) hold, (iii) does not; uniqueness and "
                  "stability checks are gated off";
    }
    rep.entries.push_back(a);
  }

  // H(J)(i)+(iii): piecewise-quadratic coordinates are locally Lipschitz
  // with bounded subgradient boxes on bounded sets.
  {
    HypothesisAudit a;
    a.name = "H(J)-lipschitz-bounded";
    a.status = AuditStatus::Verified;
    a.margin = inst.J.lipschitz_on_ball(8.0);
    rep.entries.push_back(a);
  }

  // H(J)(ii): declared growth constants must cover sampled J0(v; -v).
  {
    HypothesisAudit a;
    a.name = "H(J)-growth";
    a.seed = seed;
    std::mt19937_64 rng(seed ^ 0x9e37u);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    const double radius = 8.0 * std::max(1.0, inst.gamma.operator_norm);
    const double theta = profile.theta.value;
    double worst = -kInf;
    for (long s = 0; s < n_samples; ++s) {
      Vec v(inst.dims.k_X);
      for (int i = 0; i < v.size(); ++i) v[i] = g(rng);
      const double nv = v.norm();
      if (nv == 0.0) continue;
      const double r = radius * std::sqrt(ur(rng));
      v *= r / nv;
      const double y = inst.J.clarke_dir(v, -v);
      const double bound =
          profile.alpha_J.value + profile.beta_J.value * std::pow(r, theta);
      worst = std::max(worst, y - bound);
    }
    a.margin = -worst;
    if (worst <= 1e-9) {
      a.status = AuditStatus::Verified;
    } else {
      a.status = AuditStatus::Violated;
      a.witness = "declared (alpha_J, beta_J) miss sampled growth by " +
                  std::to_string(worst);
      try {
        const GrowthFit fit =
            estimate_growth(inst.J, theta, radius, n_samples, seed ^ 0x51u);
        profile.alpha_J = ConstantInfo::estimated(fit.alpha_J, n_samples);
        profile.beta_J = ConstantInfo::estimated(fit.beta_J, n_samples);
      } catch (const GrowthFitError&) {
        // Leave declared values; theta itself is too small.
      }
    }
    rep.entries.push_back(a);
  }

  // Declared m_A against the symmetric-part eigenvalue (exact).
  {
    HypothesisAudit a;
    a.name = "m_A-declared";
    const double eigmin = inst.A.sym_eigmin();
    a.margin = eigmin - inst.A.declared_m_A;
    a.status = a.margin >= -1e-9 ? AuditStatus::Verified
                                 : AuditStatus::Violated;
    rep.entries.push_back(a);
  }

  // Declared m_J against the exact structural constant of the box map.
  {
    HypothesisAudit a;
    a.name = "m_J-declared";
    const double floor = inst.J.relaxed_monotonicity_floor();
    if (std::isinf(floor)) {
      a.status = AuditStatus::Violated;
      a.margin = -kInf;
      a.witness = "a downward derivative jump makes the subgradient map "
                  "fail relaxed monotonicity for every finite constant";
    } else {
      a.margin = profile.m_J.value - floor;
      if (a.margin >= -1e-12) {
        a.status = AuditStatus::Verified;
      } else {
        a.status = AuditStatus::Violated;
        a.witness = "required constant " + std::to_string(floor);
        profile.m_J = ConstantInfo::estimated(floor, 0);
      }
    }
    rep.entries.push_back(a);
  }

  // H(A)(i)/(iv): the matrix + componentwise power family is continuous and
  // bounded on bounded sets by construction.
  {
    HypothesisAudit a;
    a.name = "H(A)-hemicontinuity-bounded";
    a.status = AuditStatus::Verified;
    a.margin = inst.A.bound_on_ball(1.0);
    rep.entries.push_back(a);
  }

  rep.entries.push_back(audit_relaxed_monotonicity(inst, n_samples, seed));
  rep.entries.push_back(audit_coercivity(
      inst, default_coercivity_radii(inst), std::max<long>(n_samples / 16, 8),
      seed ^ 0xc0e3u));

  // H(b): LBB constant.
  {
    HypothesisAudit a;
    a.name = "H(b)-LBB";
    const double alpha_b = infsup_constant(inst.b);
    a.margin = alpha_b;
    a.status = alpha_b > 1e-12 ? AuditStatus::Verified : AuditStatus::Violated;
    if (a.status == AuditStatus::Violated) {
      a.witness = "B is row-rank-deficient (alpha_b = 0)";
    }
    profile.alpha_b = ConstantInfo::estimated(alpha_b, 0);
    rep.entries.push_back(a);
  }

  // H(gamma) and 0 in Lambda were validated at construction.
  {
    HypothesisAudit a;
    a.name = "H(gamma)";
    a.status = AuditStatus::Verified;
    a.margin = inst.gamma.operator_norm;
    rep.entries.push_back(a);
  }
  {
    HypothesisAudit a;
    a.name = "Lambda-contains-0";
    a.status = AuditStatus::Verified;
    rep.entries.push_back(a);
  }

  if (demoted_profile) *demoted_profile = profile;
  return rep;
}

} // namespace mvhvi
