#include "bitraj/kernels.hpp"

namespace bitraj::kernels {

namespace {

struct Table {
  Backend backend;
  void (*gemm)(const cd*, const cd*, cd*, std::size_t, std::size_t, std::size_t);
  cd (*dot_conj)(const cd*, const cd*, std::size_t);
  void (*axpy)(cd, const cd*, cd*, std::size_t);
};

bool cpu_has_avx2() {
#if BITRAJ_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table& table() {
  static const Table t = [] {
#if BITRAJ_HAVE_AVX2_KERNELS
    if (cpu_has_avx2()) return Table{Backend::kAvx2, &avx2::gemm, &avx2::dot_conj, &avx2::axpy};
#endif
    return Table{Backend::kScalar, &scalar::gemm, &scalar::dot_conj, &scalar::axpy};
  }();
  return t;
}

}  // namespace

void gemm(const cd* a, const cd* b, cd* c, std::size_t n, std::size_t k, std::size_t m) {
  table().gemm(a, b, c, n, k, m);
}

cd dot_conj(const cd* a, const cd* b, std::size_t len) { return table().dot_conj(a, b, len); }

void axpy(cd alpha, const cd* x, cd* y, std::size_t len) { table().axpy(alpha, x, y, len); }

Backend active_backend() { return table().backend; }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  if (b == Backend::kScalar) return true;
  return cpu_has_avx2();
}

}  // namespace bitraj::kernels
