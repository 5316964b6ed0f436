#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace visent::kernels {

// C (m x n) = A (m x k) * B (k x n), all row-major. Contract: for every
// output element the k products are accumulated left to right, each step a
// separate multiply and add in 32-bit floats. Scalar and SIMD variants are
// bit-identical under this contract; the equivalence suite asserts it.
using GemmFn = void (*)(const float* a, const float* b, float* c,
                        std::int64_t m, std::int64_t k, std::int64_t n);

// y[i] = max(0, x[i]); x and y may alias.
using ReluFn = void (*)(const float* x, float* y, std::size_t n);

// y[i] += alpha * x[i]; one multiply and one add per element.
using AxpyFn = void (*)(float alpha, const float* x, float* y, std::size_t n);

struct KernelTable {
  const char* name;
  GemmFn gemm;
  ReluFn relu;
  AxpyFn axpy;
};

const KernelTable& scalar_table();

// Non-null only when the build carries AVX2 kernels and the CPU supports
// them.
const KernelTable* avx2_table();

bool cpu_has_avx2();

// Active table, resolved once: the VISENT_KERNELS environment variable
// ("scalar", "avx2", "auto") if set, otherwise the best supported variant.
const KernelTable& active();

// Overrides the active table. Throws ComputeError for an unknown name or an
// unsupported variant.
void select(std::string_view name);

}  // namespace visent::kernels
