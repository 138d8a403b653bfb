#include "mvhvi/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mvhvi/hypotheses.hpp"

namespace mvhvi {

namespace {

/// j(x) = w |x| - q x^2 / 2 as two quadratic pieces split at the kink.
CoordinatePieces friction_coordinate(double w, double q) {
  PieceDesc left;
  left.kind = PieceDesc::Kind::Quad;
  left.q = -q;
  left.a = -w;
  left.b = 0.0;
  PieceDesc right = left;
  right.a = w;
  return make_coordinate({0.0}, {left, right});
}

/// Pointwise growth bound: per coordinate |j'(x)| <= |d0_p| + |d1_p| |x|
/// on every piece, so J0(v; -v) <= sum_i (s0_i |v_i| + curv_i v_i^2)
/// <= sum_i s0_i^2 / 2 + (max curv + 1/2) ||v||^2.
std::pair<double, double> growth_constants(const PiecewiseC1Spec& J) {
  double alpha = 0.0;
  double curv = 0.0;
  for (const auto& c : J.coords()) {
    double s0 = 0.0;
    for (std::size_t p = 0; p < c.d0.size(); ++p) {
      s0 = std::max(s0, std::fabs(c.d0[p]));
      curv = std::max(curv, std::fabs(c.d1[p]));
    }
    alpha += 0.5 * s0 * s0;
  }
  return {alpha, curv + 0.5};
}

void fill_profile(ProblemInstance& inst) {
  const auto [alpha, beta] = growth_constants(inst.J);
  inst.profile.theta = ConstantInfo::declared(2.0);
  inst.profile.alpha_J = ConstantInfo::declared(alpha);
  inst.profile.beta_J = ConstantInfo::declared(std::max(beta, 1e-9));
  inst.profile.m_J =
      ConstantInfo::declared(inst.J.relaxed_monotonicity_floor());
  inst.profile.alpha_b = ConstantInfo::estimated(infsup_constant(inst.b), 0);
}

Mat random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  }
  return Eigen::HouseholderQR<Mat>(A).householderQ();
}

} // namespace

ProblemInstance build_contact_rod(int nodes, const FrictionParams& friction,
                                  double stiffness, double load) {
  if (nodes < 2) throw ShapeError("rod needs at least 2 nodes");
  if (!(stiffness > 0.0)) throw HypothesisError("stiffness must be positive");
  const int n = nodes - 1;

  ProblemInstance inst;
  inst.dims = {n, 1, 1};
  inst.A.P = Mat::Zero(n, n);
  for (int e = 0; e < n; ++e) {
    // Element between node e and e+1; dof i corresponds to node i+1.
    if (e > 0) {
      inst.A.P(e - 1, e - 1) += stiffness;
      inst.A.P(e - 1, e) -= stiffness;
      inst.A.P(e, e - 1) -= stiffness;
    }
    inst.A.P(e, e) += stiffness;
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(inst.A.P);
  const double m_A = es.eigenvalues()[0];
  inst.A.declared_m_A = m_A * (1.0 - 1e-12);

  std::vector<CoordinatePieces> coords;
  coords.push_back(friction_coordinate(friction.w, friction.q));
  inst.J = PiecewiseC1Spec(std::move(coords));

  Mat G = Mat::Zero(1, n);
  G(0, n - 1) = 1.0;
  inst.gamma = GammaSpec::from_matrix(G);
  inst.b.B = G;
  inst.Lambda = LambdaSet::orthant(1);
  inst.f = Vec::Zero(n);
  inst.f[n - 1] = load;

  const double m_J = std::max(friction.q, 0.0);
  inst.h = derive_h_from_constants(inst.A.declared_m_A, m_J,
                                   inst.gamma.operator_norm);
  fill_profile(inst);
  inst.validate();
  return inst;
}

ProblemInstance make_gallery_instance(const std::string& name) {
  if (name == "kink-multiplier") {
    return build_contact_rod(2, FrictionParams{1.0, 0.5}, 2.0, 3.0);
  }
  if (name == "scalar-lcp") {
    ProblemInstance inst;
    inst.dims = {1, 1, 1};
    inst.A.P = Mat::Constant(1, 1, 2.0);
    inst.A.declared_m_A = 2.0;
    inst.J = PiecewiseC1Spec::zero(1);
    inst.gamma = GammaSpec::from_matrix(Mat::Identity(1, 1));
    inst.b.B = Mat::Identity(1, 1);
    inst.Lambda = LambdaSet::orthant(1);
    inst.f = Vec::Constant(1, -2.0);
    inst.h = derive_h_from_constants(2.0, 0.0, 1.0);
    fill_profile(inst);
    inst.validate();
    return inst;
  }
  if (name.rfind("contact-rod-", 0) == 0) {
    const std::string tail = name.substr(std::string("contact-rod-").size());
    int nodes = 0;
    try {
      nodes = std::stoi(tail);
    } catch (...) {
      throw ParseError("bad rod size in gallery name: " + name);
    }
    return build_contact_rod(nodes, FrictionParams{1.0, 0.25}, 100.0, 3.0);
  }
  throw ParseError("unknown gallery instance: " + name);
}

std::vector<std::string> gallery_names() {
  return {"scalar-lcp", "kink-multiplier", "contact-rod-4", "contact-rod-10"};
}

bool is_gallery_name(const std::string& name) {
  if (name == "scalar-lcp" || name == "kink-multiplier") return true;
  return name.rfind("contact-rod-", 0) == 0;
}

ProblemInstance random_audited_instance(std::uint64_t seed,
                                        const GeneratorOptions& opts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto dim = [&](int forced) {
    return forced > 0 ? forced
                      : 1 + static_cast<int>(rng() % std::max(opts.max_dim, 1));
  };

  ProblemInstance inst;
  const int n = dim(opts.force_n);
  int m = dim(opts.force_m);
  m = std::min(m, n); // full row rank of B needs m <= n
  const int k = dim(opts.force_k);
  inst.dims = {n, m, k};

  // Operator: symmetric part with prescribed smallest eigenvalue plus a
  // random skew part (which never hurts monotonicity).
  const double m_A = 0.8 + 1.7 * u01(rng);
  {
    const Mat Q = random_orthogonal(n, rng);
    Vec eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = m_A * (1.0 + 1.2 * u01(rng));
    eigs[0] = m_A;
    Mat S = Q * eigs.asDiagonal() * Q.transpose();
    Mat R(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) R(i, j) = g(rng);
    }
    inst.A.P = S + 0.3 * (R - R.transpose());
  }
  inst.A.declared_m_A = m_A - 1e-9;
  if (u01(rng) < 0.3) {
    PowerTerm t;
    t.exponent = (rng() & 1) ? 3.0 : 4.0;
    t.coeff = 0.5 * u01(rng);
    inst.A.power = t;
  }

  // Separable J with upward derivative jumps and bounded curvature.
  if (opts.zero_J) {
    inst.J = PiecewiseC1Spec::zero(k);
  } else {
    std::vector<CoordinatePieces> coords;
    for (int c = 0; c < k; ++c) {
      int nbp = static_cast<int>(rng() % 3);
      std::vector<double> bps;
      if (opts.kinks_at_zero_only) {
        nbp = std::min(nbp, 1);
        if (nbp == 1) bps = {0.0};
      } else {
        for (int j = 0; j < nbp; ++j) bps.push_back(-2.0 + 4.0 * u01(rng));
        std::sort(bps.begin(), bps.end());
        for (std::size_t j = 1; j < bps.size(); ++j) {
          if (bps[j] - bps[j - 1] < 1e-3) bps[j] = bps[j - 1] + 0.25;
        }
      }
      std::vector<PieceDesc> pieces;
      double q0 = -0.4 + 1.0 * u01(rng);
      double a0 = -1.0 + 2.0 * u01(rng);
      double b0 = 0.0;
      PieceDesc p0;
      p0.kind = PieceDesc::Kind::Quad;
      p0.q = q0;
      p0.a = a0;
      p0.b = b0;
      pieces.push_back(p0);
      double prev_q = q0, prev_a = a0, prev_b = b0;
      for (double bp : bps) {
        const double val_left = 0.5 * prev_q * bp * bp + prev_a * bp + prev_b;
        const double d_left = prev_q * bp + prev_a;
        const double jump = 2.0 * u01(rng); // upward keeps relaxed monotone
        const double q_next = -0.4 + 1.0 * u01(rng);
        const double a_next = d_left + jump - q_next * bp;
        const double b_next =
            val_left - (0.5 * q_next * bp * bp + a_next * bp);
        PieceDesc p;
        p.kind = PieceDesc::Kind::Quad;
        p.q = q_next;
        p.a = a_next;
        p.b = b_next;
        pieces.push_back(p);
        prev_q = q_next;
        prev_a = a_next;
        prev_b = b_next;
      }
      coords.push_back(make_coordinate(bps, pieces));
    }
    inst.J = PiecewiseC1Spec(std::move(coords));
  }

  // Gamma rows are signed power-of-two selectors (trace-operator style).
  // Power-of-two coefficients keep the kink pullback u_j = bp / G(i,j)
  // lossless in floating point, so solutions attained at breakpoints are
  // representable.  The scale keeps the gap m_J ||gamma||^2 < m_A strict.
  {
    Mat G = Mat::Zero(k, n);
    for (int i = 0; i < k; ++i) {
      const int col = static_cast<int>(rng() % n);
      const int expo = static_cast<int>(rng() % 3) - 1; // 2^-1 .. 2^1
      const double sign = (rng() & 1) ? 1.0 : -1.0;
      G(i, col) = sign * std::ldexp(1.0, expo);
    }
    GammaSpec gamma = GammaSpec::from_matrix(G);
    const double m_J = inst.J.relaxed_monotonicity_floor();
    double cap = 2.0;
    if (m_J > 0.0) {
      cap = std::min(cap, std::sqrt(0.6 * inst.A.declared_m_A / m_J));
    }
    while (gamma.operator_norm > cap) {
      G *= 0.5; // exact
      gamma = GammaSpec::from_matrix(G);
    }
    inst.gamma = gamma;
  }

  // B with bounded conditioning: the dual ascent contraction rate scales
  // with sigma_min(B)^2 / ||B||^2, so both ends are controlled.
  if (opts.zero_B) {
    inst.b.B = Mat::Zero(m, n);
  } else {
    Mat B(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) B(i, j) = g(rng);
    }
    inst.b.B = B;
    for (int pass = 0; pass < 4; ++pass) {
      const double norm = inst.b.spectral_norm();
      if (norm > 2.5) inst.b.B *= 2.5 / norm;
      if (infsup_constant(inst.b) >= 0.4) break;
      for (int i = 0; i < m; ++i) inst.b.B(i, i) += 0.8;
    }
  }

  const double which = u01(rng);
  if (opts.orthant_only || which < 0.7 || m > 4) {
    inst.Lambda = LambdaSet::orthant(m);
  } else if (which < 0.9) {
    Vec upper(m);
    for (int i = 0; i < m; ++i) upper[i] = 0.5 + 2.5 * u01(rng);
    inst.Lambda = LambdaSet::box(std::move(upper));
  } else {
    Mat C(m + 1, m);
    C.topRows(m) = -Mat::Identity(m, m);
    C.bottomRows(1).setOnes();
    Vec d = Vec::Zero(m + 1);
    d[m] = 1.0 + 3.0 * u01(rng);
    inst.Lambda = LambdaSet::polyhedron(std::move(C), std::move(d));
  }

  inst.f = Vec(n);
  for (int i = 0; i < n; ++i) inst.f[i] = opts.f_scale * g(rng);

  const double m_J = inst.J.relaxed_monotonicity_floor();
  inst.h = derive_h_from_constants(inst.A.declared_m_A, m_J,
                                   inst.gamma.operator_norm);
  fill_profile(inst);
  inst.validate();
  return inst;
}

} // namespace mvhvi
