#include "mvhvi/types.hpp"

#include <cmath>

#include "mvhvi/simd/kernels.hpp"

namespace mvhvi {

Vec OperatorSpec::apply(const Vec& u) const {
  Vec y = P * u;
  if (power && power->coeff != 0.0) {
    const auto& k = simd::scalar_kernels();
    Vec pw(u.size());
    k.power_term(u.data(), u.size(), power->exponent, power->coeff, pw.data());
    y += pw;
  }
  return y;
}

void OperatorSpec::apply_batch(const double* X, long count, double* Y) const {
  const auto& k = simd::active_kernels();
  const int n = static_cast<int>(P.rows());
  // Row-major copy of P once per call; instance matrices are tiny.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Pr =
      P;
  k.matvec(Pr.data(), n, n, X, count, Y);
  if (power && power->coeff != 0.0) {
    std::vector<double> pw(count);
    for (int r = 0; r < n; ++r) {
      const long off = static_cast<long>(r) * count;
      k.power_term(X + off, count, power->exponent, power->coeff, pw.data());
      for (long s = 0; s < count; ++s) Y[off + s] += pw[s];
    }
  }
}

double OperatorSpec::spectral_norm() const {
  if (P.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(P);
  return svd.singularValues()[0];
}

double OperatorSpec::sym_eigmin() const {
  const Mat S = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  return es.eigenvalues()[0];
}

double OperatorSpec::lipschitz_on_ball(double radius) const {
  double L = spectral_norm();
  if (power && power->coeff != 0.0) {
    const double p = power->exponent;
    L += power->coeff * (p - 1.0) * std::pow(radius, p - 2.0);
  }
  return L;
}

double OperatorSpec::bound_on_ball(double radius) const {
  double bound = spectral_norm() * radius;
  if (power && power->coeff != 0.0) {
    // Componentwise |c |u|^(p-2) u| <= c radius^(p-1) per coordinate.
    bound += power->coeff * std::pow(radius, power->exponent - 1.0) *
             std::sqrt(static_cast<double>(P.rows()));
  }
  return bound;
}

void OperatorSpec::validate(int n) const {
  if (P.rows() != n || P.cols() != n) {
    throw ShapeError("operator matrix must be n x n");
  }
  if (power) {
    if (!(power->exponent >= 2.0)) {
      throw HypothesisError("power term exponent must be >= 2");
    }
    if (!(power->coeff >= 0.0)) {
      throw HypothesisError("power term coefficient must be >= 0");
    }
  }
  if (declared_m_A < 0.0) {
    throw HypothesisError("declared m_A must be >= 0");
  }
  if (declared_m_A > 0.0) {
    // The power term is componentwise monotone (p >= 2), so the symmetric
    // part of P alone must carry the declared constant.
    if (sym_eigmin() + 1e-9 < declared_m_A) {
      throw HypothesisError(
          "declared m_A exceeds the smallest symmetric-part eigenvalue");
    }
  }
}

double BilinearFormSpec::eval(const Vec& v, const Vec& rho) const {
  return rho.dot(B * v);
}

double BilinearFormSpec::spectral_norm() const {
  if (B.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(B);
  return svd.singularValues()[0];
}

void BilinearFormSpec::validate(int n, int m) const {
  if (B.rows() != m || B.cols() != n) {
    throw ShapeError("bilinear form matrix must be m x n");
  }
}

GammaSpec GammaSpec::from_matrix(Mat G) {
  GammaSpec g;
  g.operator_norm = 0.0;
  if (G.size() != 0) {
    Eigen::JacobiSVD<Mat> svd(G);
    g.operator_norm = svd.singularValues()[0];
  }
  g.G = std::move(G);
  return g;
}

void GammaSpec::validate(int n, int k) const {
  if (G.rows() != k || G.cols() != n) {
    throw ShapeError("gamma matrix must be k x n");
  }
  Eigen::JacobiSVD<Mat> svd(G);
  const double sigma = svd.singularValues()[0];
  if (std::fabs(sigma - operator_norm) > 1e-12 * std::max(1.0, sigma)) {
    throw HypothesisError("cached gamma norm does not match the largest "
                          "singular value");
  }
}

HFunctionSpec HFunctionSpec::power(double c_h, double tau) {
  if (!(c_h > 0.0)) throw HypothesisError("power h requires c_h > 0");
  if (!(tau > 1.0)) throw HypothesisError("power h requires tau > 1");
  HFunctionSpec h;
  h.form = Form::PowerNorm;
  h.c_h = c_h;
  h.tau = tau;
  return h;
}

HFunctionSpec HFunctionSpec::zero() { return HFunctionSpec{}; }

double HFunctionSpec::eval(const Vec& v) const { return eval_norm(v.norm()); }

double HFunctionSpec::eval_norm(double norm) const {
  if (form == Form::Zero) return 0.0;
  if (tau == 2.0) return c_h * norm * norm;
  return c_h * std::pow(norm, tau);
}

double ResidualReport::max() const {
  return std::max(std::max(r_original, r_minty),
                  std::max(r_combined, r_minty_combined));
}

void ProblemInstance::validate() const {
  dims.validate();
  A.validate(dims.n_V);
  b.validate(dims.n_V, dims.m_E);
  gamma.validate(dims.n_V, dims.k_X);
  if (J.dim() != dims.k_X) {
    throw ShapeError("J must have one coordinate function per gamma row");
  }
  if (Lambda.dim() != dims.m_E) {
    throw ShapeError("multiplier set dimension mismatch");
  }
  if (f.size() != dims.n_V) {
    throw ShapeError("load vector dimension mismatch");
  }
  if (!Lambda.contains(Vec::Zero(dims.m_E))) {
    throw HypothesisError("multiplier set must contain 0");
  }
}

} // namespace mvhvi
