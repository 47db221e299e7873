// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace ompcs::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

// std::complex<double> arrays are laid out as interleaved (re, im) doubles.
// Per pair of complex values:
//   prod  = a * b           -> [ar*br, ai*bi, ...]   real part = sum of lanes
//   cross = a * swap(b)     -> [ar*bi, ai*br, ...]   imag part = even - odd lanes
cplx dot_conj_avx2(const cplx* a, const cplx* b, Index n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  __m256d prod0 = _mm256_setzero_pd(), prod1 = _mm256_setzero_pd();
  __m256d cross0 = _mm256_setzero_pd(), cross1 = _mm256_setzero_pd();

  Index i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va0 = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb0 = _mm256_loadu_pd(pb + 2 * i);
    const __m256d va1 = _mm256_loadu_pd(pa + 2 * i + 4);
    const __m256d vb1 = _mm256_loadu_pd(pb + 2 * i + 4);
    prod0 = _mm256_fmadd_pd(va0, vb0, prod0);
    prod1 = _mm256_fmadd_pd(va1, vb1, prod1);
    cross0 = _mm256_fmadd_pd(va0, _mm256_permute_pd(vb0, 0b0101), cross0);
    cross1 = _mm256_fmadd_pd(va1, _mm256_permute_pd(vb1, 0b0101), cross1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    prod0 = _mm256_fmadd_pd(va, vb, prod0);
    cross0 = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), cross0);
  }

  const __m256d prod = _mm256_add_pd(prod0, prod1);
  const __m256d cross = _mm256_add_pd(cross0, cross1);
  const __m256d sign = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
  double re = hsum(prod);
  double im = hsum(_mm256_mul_pd(cross, sign));

  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double squared_norm_avx2(const cplx* a, Index n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const Index len = 2 * n;
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  Index i = 0;
  for (; i + 8 <= len; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(pa + i);
    const __m256d v1 = _mm256_loadu_pd(pa + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; i + 4 <= len; i += 4) {
    const __m256d v = _mm256_loadu_pd(pa + i);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) acc += pa[i] * pa[i];
  return acc;
}

void correlate_avx2(const cplx* columns, Index rows, Index cols, const cplx* r, cplx* out) {
  for (Index j = 0; j < cols; ++j) out[j] = dot_conj_avx2(columns + j * rows, r, rows);
}

}  // namespace ompcs::kernels::detail
