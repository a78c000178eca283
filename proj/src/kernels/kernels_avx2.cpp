// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "bitraj/kernels.hpp"

#include <immintrin.h>

namespace bitraj::kernels::avx2 {

namespace {

inline const double* as_doubles(const cd* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cd* p) { return reinterpret_cast<double*>(p); }

// Two complex products alpha * x[0..1] with x packed as [re0, im0, re1, im1].
inline __m256d cmul_bcast(__m256d alpha_re, __m256d alpha_im, __m256d x) {
  const __m256d x_swapped = _mm256_permute_pd(x, 0b0101);
  return _mm256_fmaddsub_pd(alpha_re, x, _mm256_mul_pd(alpha_im, x_swapped));
}

}  // namespace

void gemm(const cd* a, const cd* b, cd* c, std::size_t n, std::size_t k, std::size_t m) {
  const std::size_t m_vec = m & ~std::size_t{1};
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = as_doubles(c + i * m);
    for (std::size_t j = 0; j < 2 * m; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const cd aip = a[i * k + p];
      const __m256d are = _mm256_set1_pd(aip.real());
      const __m256d aim = _mm256_set1_pd(aip.imag());
      const double* brow = as_doubles(b + p * m);
      std::size_t j = 0;
      for (; j < m_vec; j += 2) {
        const __m256d bv = _mm256_loadu_pd(brow + 2 * j);
        const __m256d cv = _mm256_loadu_pd(crow + 2 * j);
        _mm256_storeu_pd(crow + 2 * j, _mm256_add_pd(cv, cmul_bcast(are, aim, bv)));
      }
      for (; j < m; ++j) {
        const double br = brow[2 * j];
        const double bi = brow[2 * j + 1];
        crow[2 * j] += aip.real() * br - aip.imag() * bi;
        crow[2 * j + 1] += aip.real() * bi + aip.imag() * br;
      }
    }
  }
}

cd dot_conj(const cd* a, const cd* b, std::size_t len) {
  const double* ad = as_doubles(a);
  const double* bd = as_doubles(b);
  // straight: [ar*br, ai*bi, ...]; crossed: [ar*bi, ai*br, ...]
  __m256d straight = _mm256_setzero_pd();
  __m256d crossed = _mm256_setzero_pd();
  const std::size_t len_vec = len & ~std::size_t{1};
  std::size_t i = 0;
  for (; i < len_vec; i += 2) {
    const __m256d av = _mm256_loadu_pd(ad + 2 * i);
    const __m256d bv = _mm256_loadu_pd(bd + 2 * i);
    straight = _mm256_fmadd_pd(av, bv, straight);
    crossed = _mm256_fmadd_pd(av, _mm256_permute_pd(bv, 0b0101), crossed);
  }
  alignas(32) double s[4];
  alignas(32) double x[4];
  _mm256_store_pd(s, straight);
  _mm256_store_pd(x, crossed);
  double re = (s[0] + s[2]) + (s[1] + s[3]);
  double im = (x[1] + x[3]) - (x[0] + x[2]);
  for (; i < len; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].imag() * b[i].real() - a[i].real() * b[i].imag();
  }
  return {re, im};
}

void axpy(cd alpha, const cd* x, cd* y, std::size_t len) {
  const double* xd = as_doubles(x);
  double* yd = as_doubles(y);
  const __m256d are = _mm256_set1_pd(alpha.real());
  const __m256d aim = _mm256_set1_pd(alpha.imag());
  const std::size_t len_vec = len & ~std::size_t{1};
  std::size_t i = 0;
  for (; i < len_vec; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(yv, cmul_bcast(are, aim, xv)));
  }
  for (; i < len; ++i) {
    y[i] += cd(alpha.real() * x[i].real() - alpha.imag() * x[i].imag(),
               alpha.real() * x[i].imag() + alpha.imag() * x[i].real());
  }
}

}  // namespace bitraj::kernels::avx2
