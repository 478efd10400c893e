#include <cstdlib>
#include <cstring>

#include "fdlab/kernels.hpp"

namespace fdlab {

namespace detail {
const KernelOps* avx2_kernels();  // defined only when compiled in
}

namespace {

const KernelOps* avx2_if_supported() {
#ifdef FDLAB_HAVE_AVX2
  if (__builtin_cpu_supports("avx2")) return detail::avx2_kernels();
#endif
  return nullptr;
}

const KernelOps& choose() {
  const char* req = std::getenv("FDLAB_KERNELS");
  if (req && std::strcmp(req, "scalar") == 0) return scalar_kernels();
  const KernelOps* v = avx2_if_supported();
  return v ? *v : scalar_kernels();
}

}  // namespace

const KernelOps* kernels_by_name(const char* name) {
  if (name && std::strcmp(name, "scalar") == 0) return &scalar_kernels();
  if (name && std::strcmp(name, "avx2") == 0) return avx2_if_supported();
  return nullptr;
}

const KernelOps& active_kernels() {
  static const KernelOps& chosen = choose();
  return chosen;
}

}  // namespace fdlab
