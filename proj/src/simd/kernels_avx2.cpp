// AVX2 variants of the batch kernels.  This translation unit is compiled
// with -mavx2 and only entered after the runtime CPU check in dispatch.cpp.
// Lanes run independent samples, so each sample sees the same operation
// order as the scalar reference; no FMA is used.  Results are bit-identical
// to kernels_scalar.cpp and the equivalence test asserts exact equality.

#include "mvhvi/simd/kernels.hpp"

#ifdef __AVX2__

#include <immintrin.h>

#include <cmath>

namespace mvhvi::simd {
namespace {

inline __m256d abs_pd(__m256d x) {
  const __m256d mask = _mm256_castsi256_pd(
      _mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(x, mask);
}

void matvec_avx2(const double* M, int rows, int cols, const double* X,
                 long n, double* Y) {
  for (int r = 0; r < rows; ++r) {
    const double* mrow = M + static_cast<long>(r) * cols;
    double* yrow = Y + static_cast<long>(r) * n;
    long s = 0;
    for (; s + 4 <= n; s += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (int c = 0; c < cols; ++c) {
        const __m256d xv = _mm256_loadu_pd(X + static_cast<long>(c) * n + s);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(mrow[c]), xv));
      }
      _mm256_storeu_pd(yrow + s, acc);
    }
    for (; s < n; ++s) {
      double acc = 0.0;
      for (int c = 0; c < cols; ++c) {
        acc = acc + mrow[c] * X[static_cast<long>(c) * n + s];
      }
      yrow[s] = acc;
    }
  }
}

void dot_cols_avx2(const double* A, const double* B, int rows, long n,
                   double* out) {
  long s = 0;
  for (; s + 4 <= n; s += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int r = 0; r < rows; ++r) {
      const long off = static_cast<long>(r) * n + s;
      acc = _mm256_add_pd(
          acc, _mm256_mul_pd(_mm256_loadu_pd(A + off), _mm256_loadu_pd(B + off)));
    }
    _mm256_storeu_pd(out + s, acc);
  }
  for (; s < n; ++s) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) {
      acc = acc + A[static_cast<long>(r) * n + s] *
                      B[static_cast<long>(r) * n + s];
    }
    out[s] = acc;
  }
}

inline __m256d piece_value(const CoordPiecesView& f, int p, __m256d xs) {
  __m256d v = _mm256_mul_pd(_mm256_set1_pd(f.v2[p]), xs);
  v = _mm256_add_pd(v, _mm256_set1_pd(f.v1[p]));
  v = _mm256_mul_pd(v, xs);
  return _mm256_add_pd(v, _mm256_set1_pd(f.v0[p]));
}

inline __m256d piece_deriv(const CoordPiecesView& f, int p, __m256d xs) {
  return _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(f.d1[p]), xs),
                       _mm256_set1_pd(f.d0[p]));
}

void piecewise_eval_avx2(const CoordPiecesView& f, const double* x, long n,
                         double* val, double* dlo, double* dhi) {
  long s = 0;
  for (; s + 4 <= n; s += 4) {
    const __m256d xs = _mm256_loadu_pd(x + s);
    __m256d v = piece_value(f, 0, xs);
    __m256d d = piece_deriv(f, 0, xs);
    for (int j = 0; j < f.nbp; ++j) {
      const __m256d m =
          _mm256_cmp_pd(xs, _mm256_set1_pd(f.bps[j]), _CMP_GE_OQ);
      v = _mm256_blendv_pd(v, piece_value(f, j + 1, xs), m);
      d = _mm256_blendv_pd(d, piece_deriv(f, j + 1, xs), m);
    }
    __m256d lo = d;
    __m256d hi = d;
    for (int j = 0; j < f.nbp; ++j) {
      const __m256d m =
          _mm256_cmp_pd(xs, _mm256_set1_pd(f.bps[j]), _CMP_EQ_OQ);
      const __m256d dl = piece_deriv(f, j, xs);
      lo = _mm256_blendv_pd(lo, _mm256_min_pd(lo, dl), m);
      hi = _mm256_blendv_pd(hi, _mm256_max_pd(hi, dl), m);
    }
    _mm256_storeu_pd(val + s, v);
    _mm256_storeu_pd(dlo + s, lo);
    _mm256_storeu_pd(dhi + s, hi);
  }
  if (s < n) {
    for (; s < n; ++s) {
      const double xs = x[s];
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
}

void support_fixed_avx2(const double* lo, const double* hi, int k,
                        const double* D, long n, double* out, int accumulate) {
  long s = 0;
  for (; s + 4 <= n; s += 4) {
    __m256d acc = accumulate ? _mm256_loadu_pd(out + s) : _mm256_setzero_pd();
    for (int i = 0; i < k; ++i) {
      const __m256d d = _mm256_loadu_pd(D + static_cast<long>(i) * n + s);
      const __m256d a = _mm256_mul_pd(_mm256_set1_pd(lo[i]), d);
      const __m256d b = _mm256_mul_pd(_mm256_set1_pd(hi[i]), d);
      acc = _mm256_add_pd(acc, _mm256_max_pd(a, b));
    }
    _mm256_storeu_pd(out + s, acc);
  }
  for (; s < n; ++s) {
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

void support_var_avx2(const double* LO, const double* HI, const double* D,
                      int k, long n, double* out, int accumulate) {
  long s = 0;
  for (; s + 4 <= n; s += 4) {
    __m256d acc = accumulate ? _mm256_loadu_pd(out + s) : _mm256_setzero_pd();
    for (int i = 0; i < k; ++i) {
      const long off = static_cast<long>(i) * n + s;
      const __m256d d = _mm256_loadu_pd(D + off);
      const __m256d a = _mm256_mul_pd(_mm256_loadu_pd(LO + off), d);
      const __m256d b = _mm256_mul_pd(_mm256_loadu_pd(HI + off), d);
      acc = _mm256_add_pd(acc, _mm256_max_pd(a, b));
    }
    _mm256_storeu_pd(out + s, acc);
  }
  for (; s < n; ++s) {
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

void power_term_avx2(const double* x, long n, double p, double c,
                     double* out) {
  const double q = p - 2.0;
  const long iq = static_cast<long>(q);
  if (!(q == static_cast<double>(iq) && iq >= 0 && iq <= 8)) {
    // Non-integer exponents go through std::pow; keep one code path.
    scalar_kernels().power_term(x, n, p, c, out);
    return;
  }
  const __m256d cv = _mm256_set1_pd(c);
  long s = 0;
  for (; s + 4 <= n; s += 4) {
    const __m256d xv = _mm256_loadu_pd(x + s);
    const __m256d a = abs_pd(xv);
    __m256d acc = _mm256_set1_pd(1.0);
    for (long j = 0; j < iq; ++j) acc = _mm256_mul_pd(acc, a);
    _mm256_storeu_pd(out + s,
                     _mm256_mul_pd(_mm256_mul_pd(cv, acc), xv));
  }
  for (; s < n; ++s) {
    const double a = std::fabs(x[s]);
    double acc = 1.0;
    for (long j = 0; j < iq; ++j) acc = acc * a;
    out[s] = c * acc * x[s];
  }
}

inline MaxResult horizontal_max(__m256d best, __m256d bestidx, long n_done,
                                MaxResult init) {
  alignas(32) double v[4];
  alignas(32) double ix[4];
  _mm256_store_pd(v, best);
  _mm256_store_pd(ix, bestidx);
  MaxResult res = init;
  for (int l = 0; l < 4; ++l) {
    const long idx = static_cast<long>(ix[l]);
    if (idx < 0 || idx >= n_done) continue;
    if (v[l] > res.value || (v[l] == res.value && idx < res.index)) {
      res.value = v[l];
      res.index = idx;
    }
  }
  return res;
}

MaxResult score_max_avx2(const double* q, const double* c, const double* X,
                         int rows, long n) {
  MaxResult res{-HUGE_VAL, -1};
  __m256d best = _mm256_set1_pd(-HUGE_VAL);
  __m256d bestidx = _mm256_set1_pd(-1.0);
  __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d four = _mm256_set1_pd(4.0);
  long s = 0;
  for (; s + 4 <= n; s += 4) {
    __m256d acc = _mm256_loadu_pd(q + s);
    for (int r = 0; r < rows; ++r) {
      const __m256d xv = _mm256_loadu_pd(X + static_cast<long>(r) * n + s);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(c[r]), xv));
    }
    const __m256d m = _mm256_cmp_pd(acc, best, _CMP_GT_OQ);
    best = _mm256_blendv_pd(best, acc, m);
    bestidx = _mm256_blendv_pd(bestidx, idx, m);
    idx = _mm256_add_pd(idx, four);
  }
  if (s > 0) {
    res = horizontal_max(best, bestidx, s, res);
  }
  for (; s < n; ++s) {
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

MaxResult reduce_max_avx2(const double* a, long n) {
  MaxResult res{-HUGE_VAL, -1};
  __m256d best = _mm256_set1_pd(-HUGE_VAL);
  __m256d bestidx = _mm256_set1_pd(-1.0);
  __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d four = _mm256_set1_pd(4.0);
  long s = 0;
  for (; s + 4 <= n; s += 4) {
    const __m256d v = _mm256_loadu_pd(a + s);
    const __m256d m = _mm256_cmp_pd(v, best, _CMP_GT_OQ);
    best = _mm256_blendv_pd(best, v, m);
    bestidx = _mm256_blendv_pd(bestidx, idx, m);
    idx = _mm256_add_pd(idx, four);
  }
  if (s > 0) {
    res = horizontal_max(best, bestidx, s, res);
  }
  for (; s < n; ++s) {
    if (a[s] > res.value) {
      res.value = a[s];
      res.index = s;
    }
  }
  return res;
}

} // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{
      "avx2",          matvec_avx2,     dot_cols_avx2,
      piecewise_eval_avx2, support_fixed_avx2, support_var_avx2,
      power_term_avx2, score_max_avx2,  reduce_max_avx2,
  };
  return table;
}

} // namespace mvhvi::simd

#endif // __AVX2__
