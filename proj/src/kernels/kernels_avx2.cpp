// Compiled with -mavx2 -mfma. Nothing in here may be called unless the
// dispatcher has confirmed CPU support, so keep this file free of inline
// library code that could be merged with baseline-ISA copies elsewhere.

#include <immintrin.h>

#include <cstddef>

#include "sshtraj/kernels.hpp"

namespace sshtraj::kernels::avx2 {
namespace {

// Two complex numbers per register: [re0, im0, re1, im1].
inline __m256d swap_ri(__m256d x) { return _mm256_permute_pd(x, 0b0101); }

// alpha * x for a broadcast complex alpha = (ar, ai).
inline __m256d cmul(__m256d x, __m256d ar, __m256d ai) {
  return _mm256_fmaddsub_pd(x, ar, _mm256_mul_pd(swap_ri(x), ai));
}

// Computes an (2*RY) x COLS block of c = a * b starting at row i, column j.
// Real and imaginary partial products are accumulated separately and merged
// with one addsub at the end.
template <int RY, int COLS>
inline void gemm_block(int n, const double* a, const double* b, double* c,
                       int i, int j) {
  __m256d acc_r[COLS][RY];
  __m256d acc_i[COLS][RY];
  for (int q = 0; q < COLS; ++q)
    for (int r = 0; r < RY; ++r) {
      acc_r[q][r] = _mm256_setzero_pd();
      acc_i[q][r] = _mm256_setzero_pd();
    }
  const std::size_t ld = 2 * static_cast<std::size_t>(n);
  for (int k = 0; k < n; ++k) {
    const double* ak = a + k * ld + 2 * static_cast<std::size_t>(i);
    __m256d av[RY];
    __m256d as[RY];
    for (int r = 0; r < RY; ++r) {
      av[r] = _mm256_loadu_pd(ak + 4 * r);
      as[r] = swap_ri(av[r]);
    }
    for (int q = 0; q < COLS; ++q) {
      const double* bkj = b + (j + q) * ld + 2 * static_cast<std::size_t>(k);
      const __m256d br = _mm256_broadcast_sd(bkj);
      const __m256d bi = _mm256_broadcast_sd(bkj + 1);
      for (int r = 0; r < RY; ++r) {
        acc_r[q][r] = _mm256_fmadd_pd(av[r], br, acc_r[q][r]);
        acc_i[q][r] = _mm256_fmadd_pd(as[r], bi, acc_i[q][r]);
      }
    }
  }
  for (int q = 0; q < COLS; ++q) {
    double* cq = c + (j + q) * ld + 2 * static_cast<std::size_t>(i);
    for (int r = 0; r < RY; ++r)
      _mm256_storeu_pd(cq + 4 * r, _mm256_addsub_pd(acc_r[q][r], acc_i[q][r]));
  }
}

// Last row when n is odd.
inline void gemm_tail_row(int n, const double* a, const double* b, double* c,
                          int i) {
  const std::size_t ld = 2 * static_cast<std::size_t>(n);
  for (int j = 0; j < n; ++j) {
    double re = 0.0;
    double im = 0.0;
    for (int k = 0; k < n; ++k) {
      const double ar = a[k * ld + 2 * i];
      const double ai = a[k * ld + 2 * i + 1];
      const double br = b[j * ld + 2 * k];
      const double bi = b[j * ld + 2 * k + 1];
      re += ar * br - ai * bi;
      im += ar * bi + ai * br;
    }
    c[j * ld + 2 * i] = re;
    c[j * ld + 2 * i + 1] = im;
  }
}

template <int COLS>
inline void gemm_columns(int n, const double* a, const double* b, double* c,
                         int j) {
  int i = 0;
  for (; i + 4 <= n; i += 4) gemm_block<2, COLS>(n, a, b, c, i, j);
  for (; i + 2 <= n; i += 2) gemm_block<1, COLS>(n, a, b, c, i, j);
}

void gemm(int n, const cplx* a, const cplx* b, cplx* c) {
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  auto* cd = reinterpret_cast<double*>(c);
  int j = 0;
  for (; j + 2 <= n; j += 2) gemm_columns<2>(n, ad, bd, cd, j);
  for (; j < n; ++j) gemm_columns<1>(n, ad, bd, cd, j);
  if (n % 2 != 0) gemm_tail_row(n, ad, bd, cd, n - 1);
}

// Upper triangle only: row blocks starting past the last column are skipped.
template <int COLS>
inline void gemm_columns_upper(int n, const double* a, const double* b,
                               double* c, int j) {
  const int last = j + COLS - 1;
  int i = 0;
  for (; i + 4 <= n && i <= last; i += 4) gemm_block<2, COLS>(n, a, b, c, i, j);
  for (; i + 2 <= n && i <= last; i += 2) gemm_block<1, COLS>(n, a, b, c, i, j);
}

void gemm_upper(int n, const cplx* a, const cplx* b, cplx* c) {
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  auto* cd = reinterpret_cast<double*>(c);
  const auto un = static_cast<std::size_t>(n);
  int j = 0;
  for (; j + 2 <= n; j += 2) gemm_columns_upper<2>(n, ad, bd, cd, j);
  for (; j < n; ++j) gemm_columns_upper<1>(n, ad, bd, cd, j);
  if (n % 2 != 0) {
    const std::size_t i = un - 1;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < un; ++k) {
      const cplx x = a[i + k * un];
      const cplx y = b[k + i * un];
      re += x.real() * y.real() - x.imag() * y.imag();
      im += x.real() * y.imag() + x.imag() * y.real();
    }
    c[i + i * un] = cplx(re, im);
  }
}

inline __m256d conj2(__m256d x) {
  return _mm256_xor_pd(x, _mm256_set_pd(-0.0, 0.0, -0.0, 0.0));
}

inline void herm_add_entry(std::size_t un, const cplx* t, cplx* c,
                           std::size_t i, std::size_t j) {
  if (i == j) {
    c[j + j * un] = c[j + j * un].real() + 2.0 * t[j + j * un].real();
    return;
  }
  const cplx v = c[i + j * un] + t[i + j * un] + std::conj(t[j + i * un]);
  c[i + j * un] = v;
  c[j + i * un] = std::conj(v);
}

// Works on 2x2 complex blocks of the strict upper block triangle.
void herm_add(int n, const cplx* t, cplx* c) {
  const auto un = static_cast<std::size_t>(n);
  const auto* td = reinterpret_cast<const double*>(t);
  auto* cd = reinterpret_cast<double*>(c);
  const std::size_t ld = 2 * un;
  const std::size_t even = un & ~std::size_t{1};
  for (std::size_t j = 0; j < even; j += 2) {
    for (std::size_t i = 0; i < j; i += 2) {
      const __m256d a0 = _mm256_loadu_pd(td + j * ld + 2 * i);
      const __m256d a1 = _mm256_loadu_pd(td + (j + 1) * ld + 2 * i);
      const __m256d b0 = _mm256_loadu_pd(td + i * ld + 2 * j);
      const __m256d b1 = _mm256_loadu_pd(td + (i + 1) * ld + 2 * j);
      const __m256d bt0 = _mm256_permute2f128_pd(b0, b1, 0x20);
      const __m256d bt1 = _mm256_permute2f128_pd(b0, b1, 0x31);
      double* c0 = cd + j * ld + 2 * i;
      double* c1 = cd + (j + 1) * ld + 2 * i;
      const __m256d v0 =
          _mm256_add_pd(_mm256_add_pd(_mm256_loadu_pd(c0), a0), conj2(bt0));
      const __m256d v1 =
          _mm256_add_pd(_mm256_add_pd(_mm256_loadu_pd(c1), a1), conj2(bt1));
      _mm256_storeu_pd(c0, v0);
      _mm256_storeu_pd(c1, v1);
      _mm256_storeu_pd(cd + i * ld + 2 * j,
                       conj2(_mm256_permute2f128_pd(v0, v1, 0x20)));
      _mm256_storeu_pd(cd + (i + 1) * ld + 2 * j,
                       conj2(_mm256_permute2f128_pd(v0, v1, 0x31)));
    }
    herm_add_entry(un, t, c, j, j);
    herm_add_entry(un, t, c, j, j + 1);
    herm_add_entry(un, t, c, j + 1, j + 1);
  }
  if (even != un)
    for (std::size_t i = 0; i < un; ++i) herm_add_entry(un, t, c, i, un - 1);
}

void scale(std::size_t m, cplx alpha, const cplx* x, cplx* y) {
  const auto* xd = reinterpret_cast<const double*>(x);
  auto* yd = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= m; i += 2)
    _mm256_storeu_pd(yd + 2 * i, cmul(_mm256_loadu_pd(xd + 2 * i), ar, ai));
  for (; i < m; ++i) {
    const double xr = xd[2 * i];
    const double xi = xd[2 * i + 1];
    yd[2 * i] = alpha.real() * xr - alpha.imag() * xi;
    yd[2 * i + 1] = alpha.real() * xi + alpha.imag() * xr;
  }
}

void axpy(std::size_t m, cplx alpha, const cplx* x, cplx* y) {
  const auto* xd = reinterpret_cast<const double*>(x);
  auto* yd = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d x0 = _mm256_loadu_pd(xd + 2 * i);
    const __m256d x1 = _mm256_loadu_pd(xd + 2 * i + 4);
    const __m256d y0 = _mm256_loadu_pd(yd + 2 * i);
    const __m256d y1 = _mm256_loadu_pd(yd + 2 * i + 4);
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(y0, cmul(x0, ar, ai)));
    _mm256_storeu_pd(yd + 2 * i + 4, _mm256_add_pd(y1, cmul(x1, ar, ai)));
  }
  for (; i + 2 <= m; i += 2) {
    const __m256d x0 = _mm256_loadu_pd(xd + 2 * i);
    const __m256d y0 = _mm256_loadu_pd(yd + 2 * i);
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(y0, cmul(x0, ar, ai)));
  }
  for (; i < m; ++i) {
    const double xr = xd[2 * i];
    const double xi = xd[2 * i + 1];
    yd[2 * i] += alpha.real() * xr - alpha.imag() * xi;
    yd[2 * i + 1] += alpha.real() * xi + alpha.imag() * xr;
  }
}

void spmm(int n, const cplx* a, const int* col_ptr, const int* rows,
          const cplx* vals, cplx* c) {
  const auto* ad = reinterpret_cast<const double*>(a);
  auto* cd = reinterpret_cast<double*>(c);
  const std::size_t ld = 2 * static_cast<std::size_t>(n);
  for (int j = 0; j < n; ++j) {
    double* cj = cd + j * ld;
    const int p0 = col_ptr[j];
    const int p1 = col_ptr[j + 1];
    int i = 0;
    for (; i + 4 <= n; i += 4) {
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (int p = p0; p < p1; ++p) {
        const double* ak = ad + rows[p] * ld + 2 * static_cast<std::size_t>(i);
        const __m256d vr = _mm256_set1_pd(vals[p].real());
        const __m256d vi = _mm256_set1_pd(vals[p].imag());
        acc0 = _mm256_add_pd(acc0, cmul(_mm256_loadu_pd(ak), vr, vi));
        acc1 = _mm256_add_pd(acc1, cmul(_mm256_loadu_pd(ak + 4), vr, vi));
      }
      _mm256_storeu_pd(cj + 2 * i, acc0);
      _mm256_storeu_pd(cj + 2 * i + 4, acc1);
    }
    for (; i < n; ++i) {
      double re = 0.0;
      double im = 0.0;
      for (int p = p0; p < p1; ++p) {
        const double* ak = ad + rows[p] * ld + 2 * static_cast<std::size_t>(i);
        re += vals[p].real() * ak[0] - vals[p].imag() * ak[1];
        im += vals[p].real() * ak[1] + vals[p].imag() * ak[0];
      }
      cj[2 * i] = re;
      cj[2 * i + 1] = im;
    }
  }
}

void rank1(int n, double s, const cplx* u, cplx* g) {
  for (int j = 0; j < n; ++j) {
    const cplx alpha = s * cplx(u[j].real(), -u[j].imag());
    axpy(static_cast<std::size_t>(n), alpha, u,
         g + static_cast<std::size_t>(j) * n);
  }
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2", &gemm, &axpy, &rank1, &gemm_upper, &herm_add, &scale, &spmm};
  return t;
}

}  // namespace sshtraj::kernels::avx2
