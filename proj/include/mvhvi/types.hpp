#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

#include "mvhvi/errors.hpp"
#include "mvhvi/lambda_set.hpp"
#include "mvhvi/piecewise.hpp"

// Domain model for one mixed variational-hemivariational inequality on
// Euclidean spaces: find (u, lambda) in V x Lambda with
//   <A(u), v-u> + b(v-u, lambda) + J0(Gu; Gv - Gu) >= <f, v-u>   for all v,
//   b(u, rho - lambda) <= 0                                      for all rho,
// where b(v, rho) = rho^T B v and J0 is the box support function from the
// piecewise module.  All data is immutable after construction.

namespace mvhvi {

struct SpaceDims {
  int n_V = 0; // state space
  int m_E = 0; // multiplier space
  int k_X = 0; // image space of gamma

  void validate() const {
    if (n_V < 1 || m_E < 1 || k_X < 1) {
      throw ShapeError("all dimensions must be >= 1");
    }
  }
};

struct PowerTerm {
  double exponent = 2.0; // p >= 2
  double coeff = 0.0;    // c_p >= 0, term c_p |u_i|^(p-2) u_i
};

/// A(u) = P u + componentwise power term.
struct OperatorSpec {
  Mat P;
  std::optional<PowerTerm> power;
  double declared_m_A = 0.0;

  Vec apply(const Vec& u) const;
  /// Batched A over an SoA block (n rows x count samples).
  void apply_batch(const double* X, long count, double* Y) const;

  double spectral_norm() const;
  /// Smallest eigenvalue of the symmetric part of P.
  double sym_eigmin() const;
  /// Lipschitz bound of A on the centered ball of the given radius.
  double lipschitz_on_ball(double radius) const;
  /// sup ||A(u)|| over the centered ball.
  double bound_on_ball(double radius) const;

  void validate(int n) const;
};

/// b(v, rho) = rho^T B v with B an m x n matrix; bounded with constant
/// ||B||_2 by construction.
struct BilinearFormSpec {
  Mat B;

  double eval(const Vec& v, const Vec& rho) const;
  double spectral_norm() const;
  bool is_zero() const { return B.size() == 0 || B.isZero(0.0); }
  void validate(int n, int m) const;
};

/// gamma as a k x n matrix with its cached operator norm.
struct GammaSpec {
  Mat G;
  double operator_norm = 0.0;

  static GammaSpec from_matrix(Mat G);
  void validate(int n, int k) const;
};

/// h(v) = c_h ||v||^tau, or identically zero.  The power form satisfies
/// h(0) = 0, h > 0 away from 0, convexity for tau > 1, and h(tv)/t -> 0.
struct HFunctionSpec {
  enum class Form { PowerNorm, Zero };
  Form form = Form::Zero;
  double c_h = 0.0;
  double tau = 2.0;

  static HFunctionSpec power(double c_h, double tau);
  static HFunctionSpec zero();

  double eval(const Vec& v) const;
  double eval_norm(double norm) const;
  bool is_power() const { return form == Form::PowerNorm; }
  bool convex() const { return form == Form::Zero || tau >= 1.0; }
  /// h(u)/||u|| -> infinity, the superlinear-growth property.
  bool coercive() const { return form == Form::PowerNorm && tau > 1.0; }
};

enum class Provenance { Declared, Estimated };

struct ConstantInfo {
  double value = 0.0;
  Provenance provenance = Provenance::Declared;
  long samples = 0; // estimation sample count; 0 for declared constants

  static ConstantInfo declared(double v) { return {v, Provenance::Declared, 0}; }
  static ConstantInfo estimated(double v, long n) {
    return {v, Provenance::Estimated, n};
  }
};

/// Growth/monotonicity constants with declared-vs-estimated provenance.
struct HypothesisProfile {
  ConstantInfo theta;   // growth exponent, >= 0
  ConstantInfo alpha_J; // J0(v;-v) <= alpha_J + beta_J ||v||^theta
  ConstantInfo beta_J;
  ConstantInfo m_J;     // relaxed-monotonicity constant of the subgradient map
  ConstantInfo alpha_b; // inf-sup constant of b
};

struct ProbeConfig {
  long count = 4000;
  std::uint64_t seed = 0x6d76687669ULL;
  bool refine = true;
};

/// Worst clamped violations of the four equivalent formulations.
struct ResidualReport {
  double r_original = 0.0;
  double r_minty = 0.0;
  double r_combined = 0.0;
  double r_minty_combined = 0.0;
  ProbeConfig sampling;

  double max() const;
  bool certified(double tol) const { return max() <= tol; }
};

struct SolutionPair {
  Vec u;
  Vec lambda;
  ResidualReport residuals;
};

struct ProblemInstance {
  SpaceDims dims;
  OperatorSpec A;
  PiecewiseC1Spec J;
  GammaSpec gamma;
  BilinearFormSpec b;
  LambdaSet Lambda = LambdaSet::orthant(1);
  Vec f;
  HFunctionSpec h;
  HypothesisProfile profile;

  void validate() const;
};

} // namespace mvhvi
