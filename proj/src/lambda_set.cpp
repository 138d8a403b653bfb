#include "mvhvi/lambda_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mvhvi {

namespace {

constexpr double kFeasTol = 1e-10;

// Enumerates subsets of constraint rows as bitmasks, smallest first.
struct SubsetIter {
  int rows;
  int max_size;
  unsigned mask = 0;
  bool done = false;

  bool next(unsigned& out) {
    while (!done) {
      out = mask;
      if (mask == (1u << rows) - 1u) {
        done = true;
      } else {
        ++mask;
      }
      if (__builtin_popcount(out) <= max_size) return true;
    }
    return false;
  }
};

Mat select_rows(const Mat& C, unsigned mask) {
  const int m = static_cast<int>(C.cols());
  Mat S(__builtin_popcount(mask), m);
  int r = 0;
  for (int i = 0; i < C.rows(); ++i) {
    if (mask & (1u << i)) S.row(r++) = C.row(i);
  }
  return S;
}

Vec select_entries(const Vec& d, unsigned mask) {
  Vec s(__builtin_popcount(mask));
  int r = 0;
  for (int i = 0; i < d.size(); ++i) {
    if (mask & (1u << i)) s[r++] = d[i];
  }
  return s;
}

} // namespace

LambdaSet LambdaSet::orthant(int m) {
  if (m < 1) throw ShapeError("multiplier dimension must be >= 1");
  LambdaSet L;
  L.kind_ = Kind::NonnegativeOrthant;
  L.dim_ = m;
  return L;
}

LambdaSet LambdaSet::box(Vec upper) {
  if (upper.size() < 1) throw ShapeError("box upper bound must be nonempty");
  for (int i = 0; i < upper.size(); ++i) {
    if (!(upper[i] >= 0.0)) {
      throw HypothesisError("box upper bound must be componentwise >= 0 so "
                            "that 0 is a member");
    }
  }
  LambdaSet L;
  L.kind_ = Kind::Box;
  L.dim_ = static_cast<int>(upper.size());
  L.upper_ = std::move(upper);
  return L;
}

LambdaSet LambdaSet::polyhedron(Mat C, Vec d) {
  if (C.rows() != d.size()) throw ShapeError("polyhedron rows mismatch");
  if (C.cols() < 1) throw ShapeError("multiplier dimension must be >= 1");
  if (C.rows() > 16) {
    throw DimensionLimit("polyhedron enumeration supports at most 16 rows");
  }
  for (int i = 0; i < d.size(); ++i) {
    if (!(d[i] >= 0.0)) {
      throw HypothesisError("polyhedron must contain 0: require d >= 0");
    }
  }
  LambdaSet L;
  L.kind_ = Kind::Polyhedron;
  L.dim_ = static_cast<int>(C.cols());
  L.C_ = std::move(C);
  L.d_ = std::move(d);
  return L;
}

Vec LambdaSet::project(const Vec& rho) const {
  if (rho.size() != dim_) throw ShapeError("projection argument dimension");
  switch (kind_) {
    case Kind::NonnegativeOrthant:
      return rho.cwiseMax(0.0);
    case Kind::Box:
      return rho.cwiseMax(0.0).cwiseMin(upper_);
    case Kind::Polyhedron:
      break;
  }
  // Active-set enumeration: the projection's KKT point uses an independent
  // subset of active rows, so scanning all independent subsets and keeping
  // the closest feasible candidate is exact.
  if (contains(rho, kFeasTol)) return rho;
  double best_dist = std::numeric_limits<double>::infinity();
  Vec best;
  SubsetIter it{static_cast<int>(C_.rows()), dim_};
  unsigned mask;
  while (it.next(mask)) {
    Vec cand;
    if (mask == 0) {
      cand = rho;
    } else {
      const Mat S = select_rows(C_, mask);
      const Vec ds = select_entries(d_, mask);
      Eigen::ColPivHouseholderQR<Mat> qr(S * S.transpose());
      if (qr.rank() < S.rows()) continue;
      const Vec mu = qr.solve(S * rho - ds);
      cand = rho - S.transpose() * mu;
    }
    if (!contains(cand, kFeasTol)) continue;
    const double dist = (cand - rho).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = cand;
    }
  }
  if (best.size() == 0) {
    throw InfeasiblePolyhedron("no feasible projection candidate found");
  }
  return best;
}

bool LambdaSet::contains(const Vec& rho, double tol) const {
  if (rho.size() != dim_) return false;
  switch (kind_) {
    case Kind::NonnegativeOrthant:
      return (rho.array() >= -tol).all();
    case Kind::Box:
      return (rho.array() >= -tol).all() &&
             ((upper_ - rho).array() >= -tol).all();
    case Kind::Polyhedron:
      return ((d_ - C_ * rho).array() >= -tol).all();
  }
  return false;
}

double LambdaSet::support_in_ball(const Vec& c, double s, Vec* argmax) const {
  if (c.size() != dim_) throw ShapeError("support argument dimension");
  switch (kind_) {
    case Kind::NonnegativeOrthant: {
      const Vec cp = c.cwiseMax(0.0);
      const double n = cp.norm();
      Vec arg = Vec::Zero(dim_);
      if (n > 0.0 && s > 0.0) arg = (s / n) * cp;
      if (argmax) *argmax = arg;
      return c.dot(arg);
    }
    case Kind::Box: {
      // Componentwise maximizer over the box; the box is compact so the
      // ball cap only matters when the maximizer pokes outside it.
      Vec arg(dim_);
      for (int i = 0; i < dim_; ++i) arg[i] = c[i] > 0.0 ? upper_[i] : 0.0;
      if (arg.norm() <= s || s <= 0.0) {
        if (argmax) *argmax = arg;
        return c.dot(arg);
      }
      LambdaSet as_poly;
      {
        Mat C(2 * dim_, dim_);
        C.topRows(dim_) = -Mat::Identity(dim_, dim_);
        C.bottomRows(dim_) = Mat::Identity(dim_, dim_);
        Vec d(2 * dim_);
        d.head(dim_).setZero();
        d.tail(dim_) = upper_;
        as_poly = polyhedron(std::move(C), std::move(d));
      }
      return as_poly.support_in_ball(c, s, argmax);
    }
    case Kind::Polyhedron:
      break;
  }
  if (dim_ > 8) {
    throw DimensionLimit(
        "polyhedron support enumeration supports at most 8 multipliers");
  }
  // KKT candidates of max <c, rho> over {C rho <= d} and the centered ball:
  // for every independent active set S, the sphere-active point of the
  // affine slice plus, for full-rank S, the vertex itself.
  double best = 0.0; // rho = 0 is always feasible
  Vec best_arg = Vec::Zero(dim_);
  auto consider = [&](const Vec& cand) {
    if (cand.size() == 0) return;
    if (!contains(cand, kFeasTol)) return;
    if (cand.norm() > s + kFeasTol) return;
    const double val = c.dot(cand);
    if (val > best) {
      best = val;
      best_arg = cand;
    }
  };
  SubsetIter it{static_cast<int>(C_.rows()), dim_};
  unsigned mask;
  while (it.next(mask)) {
    const int size = __builtin_popcount(mask);
    if (mask == 0) {
      const double n = c.norm();
      if (n > 0.0) consider(Vec((s / n) * c));
      continue;
    }
    const Mat S = select_rows(C_, mask);
    const Vec ds = select_entries(d_, mask);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(S);
    if (cod.rank() < S.rows()) continue;
    const Vec rho0 = cod.solve(ds); // min-norm point of the slice
    if (size == dim_) {
      consider(rho0);
      continue;
    }
    // Orthonormal null-space basis via full QR of S^T.
    Eigen::HouseholderQR<Mat> qr(S.transpose());
    const Mat Q = qr.householderQ();
    const Mat Z = Q.rightCols(dim_ - size);
    const Vec zc = Z.transpose() * c;
    const double r2 = s * s - rho0.squaredNorm();
    if (zc.norm() > 1e-14) {
      if (r2 >= 0.0) {
        consider(Vec(rho0 + std::sqrt(r2) / zc.norm() * (Z * zc)));
      }
    } else {
      consider(rho0);
    }
  }
  if (argmax) *argmax = best_arg;
  return best;
}

std::string LambdaSet::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::NonnegativeOrthant:
      os << "orthant(" << dim_ << ")";
      break;
    case Kind::Box:
      os << "box(" << dim_ << ")";
      break;
    case Kind::Polyhedron:
      os << "polyhedron(" << dim_ << ", rows=" << C_.rows() << ")";
      break;
  }
  return os.str();
}

} // namespace mvhvi
