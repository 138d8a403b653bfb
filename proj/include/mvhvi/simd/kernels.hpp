#pragma once

#include <cstddef>
#include <cstdint>

// Batched arithmetic kernels for the sampling-heavy loops (probe sweeps,
// hypothesis audits, grid oracles).  Data layout is structure-of-arrays:
// a batch of N vectors in R^rows is stored as `rows` contiguous runs of N
// doubles, so X[r*n + s] is coordinate r of sample s.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2 variant selected at runtime.  The two paths are kept bit-identical:
// no FMA, same evaluation order per sample (the build disables fp
// contraction).  Equivalence is asserted exactly in the test suite.

namespace mvhvi::simd {

/// One separable coordinate function in canonical piecewise-quadratic form.
/// Piece p is active on [bps[p-1], bps[p]) with value (v2*x + v1)*x + v0 and
/// derivative d1*x + d0.  Arrays v2..d0 have nbp+1 entries.
struct CoordPiecesView {
  const double* bps = nullptr;
  int nbp = 0;
  const double* v2 = nullptr;
  const double* v1 = nullptr;
  const double* v0 = nullptr;
  const double* d1 = nullptr;
  const double* d0 = nullptr;
};

struct MaxResult {
  double value;
  long index;
};

struct KernelTable {
  const char* name;

  /// Y[r][s] = sum_c M[r,c] * X[c][s].  M row-major rows x cols.
  void (*matvec)(const double* M, int rows, int cols, const double* X,
                 long n, double* Y);

  /// out[s] = sum_r A[r][s] * B[r][s].
  void (*dot_cols)(const double* A, const double* B, int rows, long n,
                   double* out);

  /// Per-sample value and one-sided derivative hull of one coordinate
  /// function.  At a stored breakpoint the hull spans both adjacent pieces;
  /// membership is decided by exact comparison against the stored value.
  void (*piecewise_eval)(const CoordPiecesView& f, const double* x, long n,
                         double* val, double* dlo, double* dhi);

  /// out[s] (+)= sum_i max(lo[i]*D[i][s], hi[i]*D[i][s]); box fixed across
  /// the batch.  accumulate != 0 adds into out.
  void (*support_fixed)(const double* lo, const double* hi, int k,
                        const double* D, long n, double* out, int accumulate);

  /// Same with a per-sample box, LO/HI in the same SoA layout as D.
  void (*support_var)(const double* LO, const double* HI, const double* D,
                      int k, long n, double* out, int accumulate);

  /// out[s] = c * |x[s]|^(p-2) * x[s].
  void (*power_term)(const double* x, long n, double p, double c,
                     double* out);

  /// max over s of q[s] + sum_r c[r] * X[r][s]; first index attaining it.
  MaxResult (*score_max)(const double* q, const double* c, const double* X,
                         int rows, long n);

  /// max over s of a[s]; first index attaining it.
  MaxResult (*reduce_max)(const double* a, long n);
};

const KernelTable& scalar_kernels();

/// Kernel set picked once at startup: AVX2 when the CPU supports it and the
/// build carries the AVX2 translation unit, scalar otherwise.  Setting
/// MVHVI_FORCE_SCALAR=1 in the environment pins the scalar path.
const KernelTable& active_kernels();

bool avx2_selected();

} // namespace mvhvi::simd
