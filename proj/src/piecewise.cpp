#include "mvhvi/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace mvhvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_vec(const Vec& v) {
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

simd::CoordPiecesView CoordinatePieces::view() const {
  simd::CoordPiecesView v;
  v.bps = breakpoints.data();
  v.nbp = static_cast<int>(breakpoints.size());
  v.v2 = v2.data();
  v.v1 = v1.data();
  v.v0 = v0.data();
  v.d1 = d1.data();
  v.d0 = d0.data();
  return v;
}

double CoordinatePieces::value(double x) const {
  double val, lo, hi;
  simd::scalar_kernels().piecewise_eval(view(), &x, 1, &val, &lo, &hi);
  return val;
}

void CoordinatePieces::deriv_box(double x, double& lo, double& hi) const {
  double val;
  simd::scalar_kernels().piecewise_eval(view(), &x, 1, &val, &lo, &hi);
}

double CoordinatePieces::max_abs_deriv(double a, double b) const {
  // |d1*x + d0| on each piece-interval intersection is maximal at an
  // endpoint.  Breakpoints inside [a, b] contribute both one-sided values.
  double best = 0.0;
  auto consider = [&](double x, int p) {
    const double d = d1[p] * x + d0[p];
    best = std::max(best, std::fabs(d));
  };
  const int nbp = static_cast<int>(breakpoints.size());
  for (int p = 0; p <= nbp; ++p) {
    const double lo = (p == 0) ? a : std::max(a, breakpoints[p - 1]);
    const double hi = (p == nbp) ? b : std::min(b, breakpoints[p]);
    if (lo > hi) continue;
    consider(lo, p);
    consider(hi, p);
  }
  return best;
}

double CoordinatePieces::min_curvature() const {
  double m = kInf;
  for (double q : d1) m = std::min(m, q);
  return m;
}

double CoordinatePieces::max_downward_jump() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < breakpoints.size(); ++j) {
    const double x = breakpoints[j];
    const double dl = d1[j] * x + d0[j];
    const double dr = d1[j + 1] * x + d0[j + 1];
    worst = std::max(worst, dl - dr);
  }
  return worst;
}

CoordinatePieces make_coordinate(std::vector<double> breakpoints,
                                 const std::vector<PieceDesc>& pieces) {
  if (pieces.size() != breakpoints.size() + 1) {
    throw ShapeError("pieces.length must equal breakpoints.length + 1");
  }
  for (std::size_t j = 1; j < breakpoints.size(); ++j) {
    if (!(breakpoints[j - 1] < breakpoints[j])) {
      throw HypothesisError("breakpoints must be strictly increasing");
    }
  }
  CoordinatePieces c;
  c.breakpoints = std::move(breakpoints);
  const int np = static_cast<int>(pieces.size());
  const int nbp = np - 1;
  c.v2.resize(np);
  c.v1.resize(np);
  c.v0.resize(np);
  c.d1.resize(np);
  c.d0.resize(np);
  for (int p = 0; p < np; ++p) {
    const PieceDesc& d = pieces[p];
    const double lo = (p == 0) ? -kInf : c.breakpoints[p - 1];
    const double hi = (p == nbp) ? kInf : c.breakpoints[p];
    switch (d.kind) {
      case PieceDesc::Kind::Affine:
        c.v2[p] = 0.0;
        c.v1[p] = d.a;
        c.v0[p] = d.b;
        break;
      case PieceDesc::Kind::Quad:
        c.v2[p] = 0.5 * d.q;
        c.v1[p] = d.a;
        c.v0[p] = d.b;
        break;
      case PieceDesc::Kind::Abs: {
        // w|x| is affine on a piece that does not straddle zero; the kink
        // must sit on a breakpoint.
        if (lo < 0.0 && hi > 0.0) {
          throw HypothesisError(
              "abs piece straddles 0; the kink must coincide with a "
              "breakpoint");
        }
        const double sign = (hi <= 0.0) ? -1.0 : 1.0;
        c.v2[p] = 0.0;
        c.v1[p] = sign * d.w;
        c.v0[p] = 0.0;
        break;
      }
    }
    c.d1[p] = 2.0 * c.v2[p];
    c.d0[p] = c.v1[p];
  }
  // Continuity across breakpoints, with a scale-aware tolerance.
  for (int j = 0; j < nbp; ++j) {
    const double x = c.breakpoints[j];
    const double vl = (c.v2[j] * x + c.v1[j]) * x + c.v0[j];
    const double vr = (c.v2[j + 1] * x + c.v1[j + 1]) * x + c.v0[j + 1];
    const double scale = std::max({1.0, std::fabs(vl), std::fabs(vr)});
    if (std::fabs(vl - vr) > 1e-9 * scale) {
      throw HypothesisError("coordinate function discontinuous at breakpoint " +
                            std::to_string(x));
    }
  }
  return c;
}

double SubgradientBox::max_norm() const {
  double acc = 0.0;
  for (int i = 0; i < lo.size(); ++i) {
    const double m = std::max(std::fabs(lo[i]), std::fabs(hi[i]));
    acc += m * m;
  }
  return std::sqrt(acc);
}

Vec SubgradientBox::support_vertex(const Vec& d) const {
  Vec v(lo.size());
  for (int i = 0; i < lo.size(); ++i) {
    v[i] = (lo[i] * d[i] > hi[i] * d[i]) ? lo[i] : hi[i];
  }
  return v;
}

PiecewiseC1Spec PiecewiseC1Spec::zero(int dim) {
  std::vector<CoordinatePieces> coords;
  coords.reserve(dim);
  for (int i = 0; i < dim; ++i) {
    coords.push_back(make_coordinate({}, {PieceDesc{}}));
  }
  return PiecewiseC1Spec(std::move(coords));
}

bool PiecewiseC1Spec::is_zero() const {
  for (const auto& c : coords_) {
    for (std::size_t p = 0; p < c.v2.size(); ++p) {
      if (c.v2[p] != 0.0 || c.v1[p] != 0.0 || c.v0[p] != 0.0) return false;
    }
  }
  return true;
}

double PiecewiseC1Spec::eval(const Vec& x) const {
  double acc = 0.0;
  for (int i = 0; i < dim(); ++i) acc += coords_[i].value(x[i]);
  return acc;
}

SubgradientBox PiecewiseC1Spec::subgradient_box(const Vec& x) const {
  SubgradientBox box;
  box.lo.resize(dim());
  box.hi.resize(dim());
  for (int i = 0; i < dim(); ++i) {
    coords_[i].deriv_box(x[i], box.lo[i], box.hi[i]);
  }
  return box;
}

double PiecewiseC1Spec::clarke_dir(const Vec& x, const Vec& d) const {
  double acc = 0.0;
  for (int i = 0; i < dim(); ++i) {
    double lo, hi;
    coords_[i].deriv_box(x[i], lo, hi);
    acc += std::max(lo * d[i], hi * d[i]);
  }
  return acc;
}

void PiecewiseC1Spec::eval_batch(const double* X, long n, double* val_rows,
                                 double* dlo, double* dhi) const {
  const auto& k = simd::active_kernels();
  for (int i = 0; i < dim(); ++i) {
    const long off = static_cast<long>(i) * n;
    k.piecewise_eval(coords_[i].view(), X + off, n, val_rows + off, dlo + off,
                     dhi + off);
  }
}

void PiecewiseC1Spec::support_batch(const double* dlo, const double* dhi,
                                    const double* D, long n, double* out,
                                    bool accumulate) const {
  simd::active_kernels().support_var(dlo, dhi, D, dim(), n, out,
                                     accumulate ? 1 : 0);
}

double PiecewiseC1Spec::local_lipschitz(const Vec& x, double radius) const {
  double acc = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double m = coords_[i].max_abs_deriv(x[i] - radius, x[i] + radius);
    acc += m * m;
  }
  return std::sqrt(acc);
}

double PiecewiseC1Spec::lipschitz_on_ball(double radius) const {
  double acc = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double m = coords_[i].max_abs_deriv(-radius, radius);
    acc += m * m;
  }
  return std::sqrt(acc);
}

double PiecewiseC1Spec::max_curvature() const {
  double m = 0.0;
  for (const auto& c : coords_) {
    for (double q : c.d1) m = std::max(m, std::fabs(q));
  }
  return m;
}

double PiecewiseC1Spec::relaxed_monotonicity_floor() const {
  double m = 0.0;
  for (const auto& c : coords_) {
    if (c.max_downward_jump() > 0.0) return kInf;
    m = std::max(m, std::max(0.0, -c.min_curvature()));
  }
  return m;
}

namespace {

struct PropChecker {
  const PiecewiseC1Spec& J;
  const std::function<double(const Vec&, const Vec&)>& j0;
  std::mt19937_64 rng;
  PropertyReport rep;

  Vec random_vec(double scale) {
    std::normal_distribution<double> g(0.0, scale);
    Vec v(J.dim());
    for (int i = 0; i < v.size(); ++i) v[i] = g(rng);
    return v;
  }

  void fail(const char* prop, const Vec& x, const Vec& d, double defect) {
    std::ostringstream os;
    os << prop << " defect " << defect << " at x=" << format_vec(x)
       << " d=" << format_vec(d);
    throw PropertyViolation(std::string("Clarke property violated: ") + prop,
                            os.str());
  }

  void run_one() {
    std::uniform_real_distribution<double> ut(0.05, 20.0);
    Vec x = random_vec(2.0);
    // Half the time park some coordinates exactly on breakpoints so the
    // multivalued branch is exercised.
    if ((rng() & 1u) != 0u) {
      for (int i = 0; i < x.size(); ++i) {
        const auto& bps = J.coords()[i].breakpoints;
        if (!bps.empty() && (rng() & 1u) != 0u) {
          x[i] = bps[rng() % bps.size()];
        }
      }
    }
    const Vec d = random_vec(1.0);
    const Vec d2 = random_vec(1.0);
    const double t = ut(rng);

    const double jd = j0(x, d);

    // Positive homogeneity.
    {
      const double lhs = j0(x, t * d);
      const double rhs = t * jd;
      const double defect =
          std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs));
      rep.homogeneity_defect = std::max(rep.homogeneity_defect, defect);
      if (defect > 1e-9) fail("positive homogeneity", x, d, defect);
    }
    // Subadditivity.
    {
      const double lhs = j0(x, d + d2);
      const double rhs = jd + j0(x, d2);
      const double defect = (lhs - rhs) / std::max(1.0, std::fabs(rhs));
      rep.subadditivity_defect = std::max(rep.subadditivity_defect, defect);
      if (defect > 1e-9) fail("subadditivity", x, d, defect);
    }
    // Max formula: J0(x; d) >= <xi, d> for box samples, equality at the
    // support vertex.
    {
      const SubgradientBox box = J.subgradient_box(x);
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      double worst = -kInf;
      for (int trial = 0; trial < 100; ++trial) {
        Vec xi(box.lo.size());
        for (int i = 0; i < xi.size(); ++i) {
          xi[i] = box.lo[i] + u01(rng) * (box.hi[i] - box.lo[i]);
        }
        worst = std::max(worst, xi.dot(d) - jd);
      }
      const Vec vtx = box.support_vertex(d);
      const double at_vertex = vtx.dot(d);
      const double gap = std::fabs(at_vertex - jd);
      const double defect =
          std::max(worst, gap) / std::max(1.0, std::fabs(jd));
      rep.max_formula_defect = std::max(rep.max_formula_defect, defect);
      if (defect > 1e-9) fail("max formula", x, d, defect);
    }
    // Lipschitz bound with the local estimate.
    {
      const double L = J.local_lipschitz(x, 1e-6);
      const double defect = std::fabs(jd) - L * d.norm();
      rep.lipschitz_defect = std::max(rep.lipschitz_defect, defect);
      if (defect > 1e-9 * std::max(1.0, L * d.norm())) {
        fail("Lipschitz bound", x, d, defect);
      }
    }
    ++rep.samples;
  }
};

} // namespace

PropertyReport check_prop_2_3_against(
    const PiecewiseC1Spec& J, long samples, std::uint64_t seed,
    const std::function<double(const Vec&, const Vec&)>& j0) {
  PropChecker checker{J, j0, std::mt19937_64(seed), PropertyReport{}};
  for (long i = 0; i < samples; ++i) checker.run_one();
  return checker.rep;
}

PropertyReport check_prop_2_3(const PiecewiseC1Spec& J, long samples,
                              std::uint64_t seed) {
  return check_prop_2_3_against(
      J, samples, seed,
      [&J](const Vec& x, const Vec& d) { return J.clarke_dir(x, d); });
}

namespace {

constexpr double kBetaFloor = 1e-12;

struct GrowthCover {
  double alpha;
  double beta;
};

// Smallest (alpha, beta) with y <= alpha + beta * r^theta over the samples
// with r <= rmax.  The outer half fixes the slope, the rest fixes alpha.
GrowthCover cover_samples(const std::vector<std::pair<double, double>>& pts,
                          double theta, double rmax) {
  double beta = kBetaFloor;
  for (const auto& [r, y] : pts) {
    if (r > rmax || r <= 0.5 * rmax) continue;
    const double x = std::pow(r, theta);
    if (x > 0.0) beta = std::max(beta, y / x);
  }
  double alpha = 0.0; // J0(0; 0) = 0 pins alpha >= 0
  for (const auto& [r, y] : pts) {
    if (r > rmax) continue;
    alpha = std::max(alpha, y - beta * std::pow(r, theta));
  }
  double beta2 = kBetaFloor;
  for (const auto& [r, y] : pts) {
    if (r > rmax) continue;
    const double x = std::pow(r, theta);
    if (x > 1e-12) beta2 = std::max(beta2, (y - alpha) / x);
  }
  return GrowthCover{alpha, std::min(beta, std::max(kBetaFloor, beta2))};
}

} // namespace

GrowthFit estimate_growth(const PiecewiseC1Spec& J, double theta,
                          double radius, long samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw HypothesisError("growth radius must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> ur(0.0, 1.0);

  std::vector<std::pair<double, double>> pts; // (||v||, J0(v; -v))
  pts.reserve(samples);
  for (long i = 0; i < samples; ++i) {
    Vec v(J.dim());
    for (int c = 0; c < v.size(); ++c) v[c] = g(rng);
    const double nv = v.norm();
    if (nv == 0.0) continue;
    // Radii biased towards the boundary where growth shows.
    const double r = radius * std::sqrt(ur(rng));
    v *= r / nv;
    pts.emplace_back(r, J.clarke_dir(v, -v));
  }

  // If the slope required at the full radius clearly exceeds the slope
  // required at half radius, the data outgrows r^theta and no finite fit
  // extends beyond the sampled ball: theta is too small.
  const GrowthCover half = cover_samples(pts, theta, 0.5 * radius);
  const GrowthCover full = cover_samples(pts, theta, radius);
  if (full.beta > 1.8 * half.beta + 0.1) {
    std::ostringstream os;
    os << "required growth slope rises from " << half.beta << " at radius "
       << 0.5 * radius << " to " << full.beta << " at radius " << radius
       << "; theta=" << theta << " is too small";
    throw GrowthFitError(os.str());
  }

  GrowthFit fit;
  fit.samples = samples;
  fit.alpha_J = full.alpha;
  fit.beta_J = full.beta;
  return fit;
}

} // namespace mvhvi
