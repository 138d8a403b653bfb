#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "mvhvi/errors.hpp"

namespace mvhvi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Closed convex multiplier set containing 0, restricted to families with an
/// exact Euclidean projection: the nonnegative orthant, boxes [0, g], and
/// small polyhedra { rho : C rho <= d } handled by active-set enumeration.
class LambdaSet {
public:
  enum class Kind { NonnegativeOrthant, Box, Polyhedron };

  static LambdaSet orthant(int m);
  static LambdaSet box(Vec upper);
  static LambdaSet polyhedron(Mat C, Vec d);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec& upper() const { return upper_; }
  const Mat& C() const { return C_; }
  const Vec& d() const { return d_; }

  /// Euclidean projection; idempotent and nonexpansive.
  Vec project(const Vec& rho) const;
  bool contains(const Vec& rho, double tol = 1e-12) const;

  /// max over Lambda intersected with the centered ball of radius s of
  /// <c, rho>, with the maximizer.  Exact for orthant and box (box tighter
  /// than any practical ball); polyhedra enumerate KKT candidates and are
  /// limited to dim <= 8.
  double support_in_ball(const Vec& c, double s, Vec* argmax = nullptr) const;

  std::string describe() const;

private:
  LambdaSet() = default;
  Kind kind_ = Kind::NonnegativeOrthant;
  int dim_ = 0;
  Vec upper_; // Box
  Mat C_;     // Polyhedron rows
  Vec d_;
};

} // namespace mvhvi
