#include "kernels_impl.hpp"

namespace ompcs::kernels::detail {

cplx dot_conj_scalar(const cplx* a, const cplx* b, Index n) {
  double re = 0.0;
  double im = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double squared_norm_scalar(const cplx* a, Index n) {
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return acc;
}

void correlate_scalar(const cplx* columns, Index rows, Index cols, const cplx* r, cplx* out) {
  for (Index j = 0; j < cols; ++j) out[j] = dot_conj_scalar(columns + j * rows, r, rows);
}

}  // namespace ompcs::kernels::detail
