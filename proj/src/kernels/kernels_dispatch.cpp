#include <atomic>
#include <cstdlib>
#include <string>

#include "visent/error.hpp"
#include "visent/kernels.hpp"

namespace visent::kernels {

#if VISENT_HAVE_AVX2_KERNELS
namespace avx2_impl {
const KernelTable& table();
}
#endif

bool cpu_has_avx2() {
#if VISENT_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable* avx2_table() {
#if VISENT_HAVE_AVX2_KERNELS
  if (cpu_has_avx2()) return &avx2_impl::table();
#endif
  return nullptr;
}

namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable& resolve(std::string_view name) {
  if (name == "scalar") return scalar_table();
  if (name == "avx2") {
    if (const KernelTable* t = avx2_table()) return *t;
    throw ComputeError("avx2 kernels are not available on this machine");
  }
  if (name == "auto") {
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }
  throw ComputeError("unknown kernel variant '" + std::string(name) + "'");
}

}  // namespace

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t) return *t;
  const char* env = std::getenv("VISENT_KERNELS");
  const KernelTable& chosen = resolve(env ? std::string_view(env) : std::string_view("auto"));
  g_active.store(&chosen, std::memory_order_release);
  return chosen;
}

void select(std::string_view name) {
  g_active.store(&resolve(name), std::memory_order_release);
}

}  // namespace visent::kernels
