#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "varbound/simd/kernels.hpp"

namespace varbound::simd {
namespace {

constexpr KernelTable kScalar{Backend::Scalar, scalar::dot, scalar::sq_l2_block,
                              scalar::linf_block};
#if defined(VARBOUND_HAVE_AVX2)
constexpr KernelTable kAvx2{Backend::Avx2, avx2::dot, avx2::sq_l2_block, avx2::linf_block};
#endif
#if defined(VARBOUND_HAVE_NEON)
constexpr KernelTable kNeon{Backend::Neon, neon::dot, neon::sq_l2_block, neon::linf_block};
#endif

bool cpu_has(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(VARBOUND_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(VARBOUND_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* select_initial() {
  if (const char* env = std::getenv("VARBOUND_SIMD")) {
    const std::string want(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
      if (want == name(b) && cpu_has(b)) return &table(b);
    }
  }
  if (cpu_has(Backend::Avx2)) return &table(Backend::Avx2);
  if (cpu_has(Backend::Neon)) return &table(Backend::Neon);
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{select_initial()};
  return ptr;
}

}  // namespace

const KernelTable& table(Backend backend) {
  switch (backend) {
#if defined(VARBOUND_HAVE_AVX2)
    case Backend::Avx2:
      return kAvx2;
#endif
#if defined(VARBOUND_HAVE_NEON)
    case Backend::Neon:
      return kNeon;
#endif
    default:
      break;
  }
  if (backend != Backend::Scalar) {
    throw std::invalid_argument("simd backend not compiled in: " + std::string(name(backend)));
  }
  return kScalar;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool supported(Backend backend) { return cpu_has(backend); }

std::vector<Backend> supported_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
    if (cpu_has(b)) out.push_back(b);
  }
  return out;
}

void set_backend(Backend backend) {
  if (!cpu_has(backend)) {
    throw std::invalid_argument("simd backend unsupported on this CPU: " +
                                std::string(name(backend)));
  }
  current().store(&table(backend), std::memory_order_release);
}

std::string_view name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace varbound::simd
