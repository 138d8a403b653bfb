#include "mvhvi/simd/kernels.hpp"

#include <cmath>

// Scalar reference kernels.  These define the semantics; the AVX2 variants
// must reproduce them bit for bit.

namespace mvhvi::simd {
namespace {

void matvec_scalar(const double* M, int rows, int cols, const double* X,
                   long n, double* Y) {
  for (int r = 0; r < rows; ++r) {
    const double* mrow = M + static_cast<long>(r) * cols;
    double* yrow = Y + static_cast<long>(r) * n;
    for (long s = 0; s < n; ++s) {
      double acc = 0.0;
      for (int c = 0; c < cols; ++c) {
        acc = acc + mrow[c] * X[static_cast<long>(c) * n + s];
      }
      yrow[s] = acc;
    }
  }
}

void dot_cols_scalar(const double* A, const double* B, int rows, long n,
                     double* out) {
  for (long s = 0; s < n; ++s) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) {
      acc = acc + A[static_cast<long>(r) * n + s] *
                      B[static_cast<long>(r) * n + s];
    }
    out[s] = acc;
  }
}

void piecewise_eval_scalar(const CoordPiecesView& f, const double* x, long n,
                           double* val, double* dlo, double* dhi) {
  for (long s = 0; s < n; ++s) {
    const double xs = x[s];
    // Piece index = number of breakpoints <= xs (half-open intervals).
    double v = (f.v2[0] * xs + f.v1[0]) * xs + f.v0[0];
    double d = f.d1[0] * xs + f.d0[0];
    for (int j = 0; j < f.nbp; ++j) {
      if (xs >= f.bps[j]) {
        v = (f.v2[j + 1] * xs + f.v1[j + 1]) * xs + f.v0[j + 1];
        d = f.d1[j + 1] * xs + f.d0[j + 1];
      }
    }
    double lo = d;
    double hi = d;
    for (int j = 0; j < f.nbp; ++j) {
      if (xs == f.bps[j]) {
        const double dleft = f.d1[j] * xs + f.d0[j];
        lo = dleft < lo ? dleft : lo;
        hi = dleft > hi ? dleft : hi;
      }
    }
    val[s] = v;
    dlo[s] = lo;
    dhi[s] = hi;
  }
}

void support_fixed_scalar(const double* lo, const double* hi, int k,
                          const double* D, long n, double* out,
                          int accumulate) {
  for (long s = 0; s < n; ++s) {
    double acc = accumulate ? out[s] : 0.0;
    for (int i = 0; i < k; ++i) {
      const double d = D[static_cast<long>(i) * n + s];
      const double a = lo[i] * d;
      const double b = hi[i] * d;
      acc = acc + (a > b ? a : b);
    }
    out[s] = acc;
  }
}

void support_var_scalar(const double* LO, const double* HI, const double* D,
                        int k, long n, double* out, int accumulate) {
  for (long s = 0; s < n; ++s) {
    double acc = accumulate ? out[s] : 0.0;
    for (int i = 0; i < k; ++i) {
      const long off = static_cast<long>(i) * n + s;
      const double a = LO[off] * D[off];
      const double b = HI[off] * D[off];
      acc = acc + (a > b ? a : b);
    }
    out[s] = acc;
  }
}

void power_term_scalar(const double* x, long n, double p, double c,
                       double* out) {
  const double q = p - 2.0;
  const long iq = static_cast<long>(q);
  if (q == static_cast<double>(iq) && iq >= 0 && iq <= 8) {
    for (long s = 0; s < n; ++s) {
      const double a = std::fabs(x[s]);
      double acc = 1.0;
      for (long j = 0; j < iq; ++j) acc = acc * a;
      out[s] = c * acc * x[s];
    }
  } else {
    for (long s = 0; s < n; ++s) {
      out[s] = c * std::pow(std::fabs(x[s]), q) * x[s];
    }
  }
}

MaxResult score_max_scalar(const double* q, const double* c, const double* X,
                           int rows, long n) {
  MaxResult res{-HUGE_VAL, -1};
  for (long s = 0; s < n; ++s) {
    double acc = q[s];
    for (int r = 0; r < rows; ++r) {
      acc = acc + c[r] * X[static_cast<long>(r) * n + s];
    }
    if (acc > res.value) {
      res.value = acc;
      res.index = s;
    }
  }
  return res;
}

MaxResult reduce_max_scalar(const double* a, long n) {
  MaxResult res{-HUGE_VAL, -1};
  for (long s = 0; s < n; ++s) {
    if (a[s] > res.value) {
      res.value = a[s];
      res.index = s;
    }
  }
  return res;
}

} // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",          matvec_scalar,     dot_cols_scalar,
      piecewise_eval_scalar, support_fixed_scalar, support_var_scalar,
      power_term_scalar, score_max_scalar,  reduce_max_scalar,
  };
  return table;
}

} // namespace mvhvi::simd
