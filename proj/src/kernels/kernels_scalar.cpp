#include "bitraj/kernels.hpp"

namespace bitraj::kernels::scalar {

void gemm(const cd* a, const cd* b, cd* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n * m; ++i) c[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cd* crow = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const cd aip = a[i * k + p];
      const cd* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) {
        const double re = aip.real() * brow[j].real() - aip.imag() * brow[j].imag();
        const double im = aip.real() * brow[j].imag() + aip.imag() * brow[j].real();
        crow[j] += cd(re, im);
      }
    }
  }
}

cd dot_conj(const cd* a, const cd* b, std::size_t len) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].imag() * b[i].real() - a[i].real() * b[i].imag();
  }
  return {re, im};
}

void axpy(cd alpha, const cd* x, cd* y, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    y[i] += cd(alpha.real() * x[i].real() - alpha.imag() * x[i].imag(),
               alpha.real() * x[i].imag() + alpha.imag() * x[i].real());
  }
}

}  // namespace bitraj::kernels::scalar
