#pragma once

#include "ompcs/kernels.hpp"

namespace ompcs::kernels::detail {

cplx dot_conj_scalar(const cplx* a, const cplx* b, Index n);
double squared_norm_scalar(const cplx* a, Index n);
void correlate_scalar(const cplx* columns, Index rows, Index cols, const cplx* r, cplx* out);

#if defined(OMPCS_HAVE_AVX2)
cplx dot_conj_avx2(const cplx* a, const cplx* b, Index n);
double squared_norm_avx2(const cplx* a, Index n);
void correlate_avx2(const cplx* columns, Index rows, Index cols, const cplx* r, cplx* out);
#endif

}  // namespace ompcs::kernels::detail
