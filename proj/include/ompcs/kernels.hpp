#pragma once

// Inner-loop kernels shared by coherence, OMP column selection and the
// noise-event check. Each kernel has a portable scalar reference and, on
// x86-64 builds, an AVX2/FMA variant. The variant is picked once at runtime
// from CPU support; setting OMPCS_KERNELS=scalar forces the reference path.
//
// Matrices are column-major with the column length as leading dimension,
// which is Eigen's default layout for MatrixXcd.

#include <span>
#include <string_view>

#include "ompcs/types.hpp"

namespace ompcs::kernels {

struct KernelSet {
  std::string_view name;
  /// sum_i conj(a_i) * b_i
  cplx (*dot_conj)(const cplx* a, const cplx* b, Index n);
  /// sum_i |a_i|^2
  double (*squared_norm)(const cplx* a, Index n);
  /// out_j = a_j^H r for each of `cols` columns of length `rows`.
  void (*correlate)(const cplx* columns, Index rows, Index cols, const cplx* r, cplx* out);
};

const KernelSet& scalar();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelSet* avx2();

/// Kernel set used by the library.
const KernelSet& active();

inline cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) {
  require(a.size() == b.size(), "dot_conj: length mismatch");
  return active().dot_conj(a.data(), b.data(), a.size());
}

inline double squared_norm(std::span<const cplx> a) {
  return active().squared_norm(a.data(), a.size());
}

}  // namespace ompcs::kernels
