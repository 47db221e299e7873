#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace ompcs::kernels {

namespace {

constexpr KernelSet kScalar{"scalar", detail::dot_conj_scalar, detail::squared_norm_scalar,
                            detail::correlate_scalar};

#if defined(OMPCS_HAVE_AVX2)
constexpr KernelSet kAvx2{"avx2", detail::dot_conj_avx2, detail::squared_norm_avx2,
                          detail::correlate_avx2};

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelSet& select() {
  const char* forced = std::getenv("OMPCS_KERNELS");
  if (forced != nullptr && std::string_view(forced) == "scalar") return kScalar;
  if (const KernelSet* simd = avx2()) return *simd;
  return kScalar;
}

}  // namespace

const KernelSet& scalar() { return kScalar; }

const KernelSet* avx2() {
#if defined(OMPCS_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& active() {
  static const KernelSet& chosen = select();
  return chosen;
}

}  // namespace ompcs::kernels
