#include <atomic>
#include <cstdlib>
#include <string>

#include "sshtraj/kernels.hpp"

namespace sshtraj::kernels {

#ifdef SSHTRAJ_HAVE_AVX2_TU
namespace avx2 {
const KernelTable& table();
}
#endif

namespace {

bool cpu_has_avx2() {
#if defined(SSHTRAJ_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* resolve() {
  const KernelTable* best = avx2_table();
  if (const char* env = std::getenv("SSHTRAJ_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && best != nullptr) return best;
  }
  return best != nullptr ? best : &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{resolve()};
  return ptr;
}

}  // namespace

const KernelTable* avx2_table() {
#ifdef SSHTRAJ_HAVE_AVX2_TU
  static const bool ok = cpu_has_avx2();
  return ok ? &avx2::table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current().store(&scalar_table(), std::memory_order_release);
    return true;
  }
  if (name == "avx2") {
    if (const KernelTable* t = avx2_table()) {
      current().store(t, std::memory_order_release);
      return true;
    }
  }
  return false;
}

}  // namespace sshtraj::kernels
