#pragma once

// Dense complex inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2+FMA version. The public entry points dispatch once per
// process on the CPU features detected at first use.

#include <complex>
#include <cstddef>
#include <string_view>

namespace bitraj::kernels {

using cd = std::complex<double>;

enum class Backend { kScalar, kAvx2 };

// c[n x m] = a[n x k] * b[k x m], all row-major, c must not alias a or b.
void gemm(const cd* a, const cd* b, cd* c, std::size_t n, std::size_t k, std::size_t m);

// sum_i a[i] * conj(b[i])
cd dot_conj(const cd* a, const cd* b, std::size_t len);

// y[i] += alpha * x[i]
void axpy(cd alpha, const cd* x, cd* y, std::size_t len);

Backend active_backend();
std::string_view backend_name(Backend b);
bool backend_available(Backend b);

namespace scalar {
void gemm(const cd* a, const cd* b, cd* c, std::size_t n, std::size_t k, std::size_t m);
cd dot_conj(const cd* a, const cd* b, std::size_t len);
void axpy(cd alpha, const cd* x, cd* y, std::size_t len);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define BITRAJ_HAVE_AVX2_KERNELS 1
namespace avx2 {
void gemm(const cd* a, const cd* b, cd* c, std::size_t n, std::size_t k, std::size_t m);
cd dot_conj(const cd* a, const cd* b, std::size_t len);
void axpy(cd alpha, const cd* x, cd* y, std::size_t len);
}  // namespace avx2
#else
#define BITRAJ_HAVE_AVX2_KERNELS 0
#endif

}  // namespace bitraj::kernels
