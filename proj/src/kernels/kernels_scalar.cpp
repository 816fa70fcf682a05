#include "sshtraj/kernels.hpp"

namespace sshtraj::kernels {
namespace {

void gemm_scalar(int n, const cplx* a, const cplx* b, cplx* c) {
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  auto* cd = reinterpret_cast<double*>(c);
  for (int j = 0; j < n; ++j) {
    double* cj = cd + 2 * static_cast<std::size_t>(j) * n;
    for (int i = 0; i < 2 * n; ++i) cj[i] = 0.0;
    for (int k = 0; k < n; ++k) {
      const double br = bd[2 * (k + static_cast<std::size_t>(j) * n)];
      const double bi = bd[2 * (k + static_cast<std::size_t>(j) * n) + 1];
      const double* ak = ad + 2 * static_cast<std::size_t>(k) * n;
      for (int i = 0; i < n; ++i) {
        const double ar = ak[2 * i];
        const double ai = ak[2 * i + 1];
        cj[2 * i] += ar * br - ai * bi;
        cj[2 * i + 1] += ar * bi + ai * br;
      }
    }
  }
}

void axpy_scalar(std::size_t m, cplx alpha, const cplx* x, cplx* y) {
  const double ar = alpha.real();
  const double ai = alpha.imag();
  const auto* xd = reinterpret_cast<const double*>(x);
  auto* yd = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < m; ++i) {
    const double xr = xd[2 * i];
    const double xi = xd[2 * i + 1];
    yd[2 * i] += ar * xr - ai * xi;
    yd[2 * i + 1] += ar * xi + ai * xr;
  }
}

void rank1_scalar(int n, double s, const cplx* u, cplx* g) {
  for (int j = 0; j < n; ++j)
    axpy_scalar(static_cast<std::size_t>(n), s * std::conj(u[j]), u,
                g + static_cast<std::size_t>(j) * n);
}

void gemm_upper_scalar(int n, const cplx* a, const cplx* b, cplx* c) {
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t j = 0; j < un; ++j)
    for (std::size_t i = 0; i <= j; ++i) {
      double re = 0.0;
      double im = 0.0;
      for (std::size_t k = 0; k < un; ++k) {
        const cplx x = a[i + k * un];
        const cplx y = b[k + j * un];
        re += x.real() * y.real() - x.imag() * y.imag();
        im += x.real() * y.imag() + x.imag() * y.real();
      }
      c[i + j * un] = cplx(re, im);
    }
}

void herm_add_scalar(int n, const cplx* t, cplx* c) {
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t j = 0; j < un; ++j) {
    c[j + j * un] = c[j + j * un].real() + 2.0 * t[j + j * un].real();
    for (std::size_t i = 0; i < j; ++i) {
      const cplx v = c[i + j * un] + t[i + j * un] + std::conj(t[j + i * un]);
      c[i + j * un] = v;
      c[j + i * un] = std::conj(v);
    }
  }
}

void scale_scalar(std::size_t m, cplx alpha, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < m; ++i) y[i] = alpha * x[i];
}

void spmm_scalar(int n, const cplx* a, const int* col_ptr, const int* rows,
                 const cplx* vals, cplx* c) {
  const auto un = static_cast<std::size_t>(n);
  for (int j = 0; j < n; ++j) {
    cplx* cj = c + j * un;
    for (std::size_t i = 0; i < un; ++i) cj[i] = 0.0;
    for (int p = col_ptr[j]; p < col_ptr[j + 1]; ++p)
      axpy_scalar(un, vals[p], a + static_cast<std::size_t>(rows[p]) * un, cj);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar",          &gemm_scalar,
                                 &axpy_scalar,      &rank1_scalar,
                                 &gemm_upper_scalar, &herm_add_scalar,
                                 &scale_scalar,      &spmm_scalar};
  return table;
}

}  // namespace sshtraj::kernels
