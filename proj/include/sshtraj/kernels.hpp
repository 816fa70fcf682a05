#pragma once

// Dense complex kernels used by the covariance integrator and the jump
// updates. Every kernel has a portable scalar reference implementation; an
// AVX2/FMA variant is compiled in a separate translation unit and selected at
// runtime when the CPU supports it. Matrices are n x n, column-major,
// interleaved std::complex<double> (the layout of Eigen::MatrixXcd).

#include <complex>
#include <cstddef>
#include <string_view>

namespace sshtraj::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  const char* name;
  // c = a * b
  void (*gemm)(int n, const cplx* a, const cplx* b, cplx* c);
  // y += alpha * x, m entries
  void (*axpy)(std::size_t m, cplx alpha, const cplx* x, cplx* y);
  // g += s * u u^dag
  void (*rank1)(int n, double s, const cplx* u, cplx* g);
  // Upper triangle (diagonal included) of c = a * b; the strict lower
  // triangle of c is left in an unspecified state.
  void (*gemm_upper)(int n, const cplx* a, const cplx* b, cplx* c);
  // c = U + t + t^dag where U is the upper triangle of c; the result is
  // exactly Hermitian with a real diagonal.
  void (*herm_add)(int n, const cplx* t, cplx* c);
  // y = alpha * x, m entries
  void (*scale)(std::size_t m, cplx alpha, const cplx* x, cplx* y);
  // c = a * s with s n x n in compressed sparse columns
  void (*spmm)(int n, const cplx* a, const int* col_ptr, const int* rows,
               const cplx* vals, cplx* c);
};

const KernelTable& scalar_table();

// nullptr when the AVX2 translation unit was not built or the CPU lacks
// AVX2/FMA.
const KernelTable* avx2_table();

// The table used by the library. Resolved once: SSHTRAJ_KERNELS=scalar|avx2
// in the environment overrides the cpuid choice.
const KernelTable& active();

// Forces a variant ("scalar" or "avx2"); returns false if unavailable. Not
// thread-safe with respect to concurrently running trajectories.
bool select(std::string_view name);

}  // namespace sshtraj::kernels
