#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mvhvi/errors.hpp"
#include "mvhvi/simd/kernels.hpp"

// Exact Clarke calculus for separable piecewise-C1 functions
// J(x) = sum_i j_i(x_i).  Each coordinate j_i is continuous and piecewise
// quadratic, so at every point the set of limiting derivatives is finite and
// its convex hull is an interval.  The generalized gradient is represented
// by the product box of those intervals and the generalized directional
// derivative by the box's support function.  The box contains the Clarke
// gradient, so every inequality certified against it remains valid.

namespace mvhvi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Input description of one smooth piece.
struct PieceDesc {
  enum class Kind { Affine, Quad, Abs };
  Kind kind = Kind::Affine;
  double a = 0.0; // slope (affine) / linear coefficient (quad)
  double b = 0.0; // constant offset
  double q = 0.0; // quadratic term q*x^2/2
  double w = 0.0; // |x| coefficient for Abs
};

/// One coordinate function in canonical form: piece p active on
/// [bps[p-1], bps[p]), value (v2*x + v1)*x + v0, derivative d1*x + d0.
struct CoordinatePieces {
  std::vector<double> breakpoints;
  std::vector<double> v2, v1, v0, d1, d0;

  int piece_count() const { return static_cast<int>(v2.size()); }
  simd::CoordPiecesView view() const;

  double value(double x) const;
  /// Interval hull of one-sided derivatives at x (a point off breakpoints).
  void deriv_box(double x, double& lo, double& hi) const;

  /// max |one-sided derivative| over [a, b].
  double max_abs_deriv(double a, double b) const;
  /// min over pieces of the second derivative (the q coefficient).
  double min_curvature() const;
  /// Largest downward derivative jump across breakpoints (0 if none).
  /// A positive value means the coordinate is not relaxed monotone for any
  /// finite constant.
  double max_downward_jump() const;
};

/// Builds the canonical form, checking breakpoint ordering, continuity, and
/// that Abs pieces do not straddle 0 away from a breakpoint.
CoordinatePieces make_coordinate(std::vector<double> breakpoints,
                                 const std::vector<PieceDesc>& pieces);

struct SubgradientBox {
  Vec lo;
  Vec hi;

  /// sup over the box of the Euclidean norm (attained componentwise).
  double max_norm() const;
  /// Vertex attaining the support function in direction d.
  Vec support_vertex(const Vec& d) const;
};

class PiecewiseC1Spec {
public:
  PiecewiseC1Spec() = default;
  explicit PiecewiseC1Spec(std::vector<CoordinatePieces> coords)
      : coords_(std::move(coords)) {}

  static PiecewiseC1Spec zero(int dim);

  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<CoordinatePieces>& coords() const { return coords_; }
  bool is_zero() const;

  double eval(const Vec& x) const;
  SubgradientBox subgradient_box(const Vec& x) const;
  /// Support function of the subgradient box in direction d; coincides with
  /// <grad, d> wherever the function is differentiable.
  double clarke_dir(const Vec& x, const Vec& d) const;

  /// Batched variants over SoA sample blocks (see simd/kernels.hpp).
  /// X is dim() x n; each output array holds dim() x n or n values.
  void eval_batch(const double* X, long n, double* val_rows, double* dlo,
                  double* dhi) const;
  /// out[s] (+)= sum_i max(lo_i D[i][s], hi_i D[i][s]) with per-sample boxes.
  void support_batch(const double* dlo, const double* dhi, const double* D,
                     long n, double* out, bool accumulate) const;

  /// Local Lipschitz estimate near x: Euclidean norm of the vector of
  /// per-coordinate maxima of |derivative| over [x_i - radius, x_i + radius].
  double local_lipschitz(const Vec& x, double radius) const;
  /// sup over |x_i| <= radius of per-coordinate |derivative|, worst norm.
  double lipschitz_on_ball(double radius) const;
  /// max over coordinates and pieces of |second derivative|.
  double max_curvature() const;
  /// Smallest m >= 0 such that the subgradient map is relaxed monotone with
  /// constant m, infinity when a downward derivative jump makes every finite
  /// constant fail.
  double relaxed_monotonicity_floor() const;

private:
  std::vector<CoordinatePieces> coords_;
};

struct PropertyReport {
  long samples = 0;
  double homogeneity_defect = 0.0;
  double subadditivity_defect = 0.0;
  double max_formula_defect = 0.0;
  double lipschitz_defect = 0.0;
};

/// Samples random (x, d, d', t > 0) and verifies positive homogeneity,
/// subadditivity, the max formula (with vertex attainment), and the
/// |J0(x; d)| <= L_x ||d|| bound.  Throws PropertyViolation with a witness
/// on failure.
PropertyReport check_prop_2_3(const PiecewiseC1Spec& J, long samples,
                              std::uint64_t seed);

/// Test hook: same checks against an arbitrary J0 oracle.
PropertyReport check_prop_2_3_against(
    const PiecewiseC1Spec& J, long samples, std::uint64_t seed,
    const std::function<double(const Vec&, const Vec&)>& j0);

struct GrowthFit {
  double alpha_J = 0.0;
  double beta_J = 0.0;
  long samples = 0;
};

/// Smallest (alpha_J, beta_J) covering J0(v; -v) <= alpha_J + beta_J
/// ||v||^theta over sampled v with ||v|| <= radius.  Throws GrowthFitError
/// when the required slope keeps growing towards the boundary, i.e. theta is
/// too small for the function's growth.
GrowthFit estimate_growth(const PiecewiseC1Spec& J, double theta,
                          double radius, long samples,
                          std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

} // namespace mvhvi
