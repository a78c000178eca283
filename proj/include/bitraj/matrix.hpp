#pragma once

// Dense complex matrices and the handful of operations the rest of the
// library is written in: Hermitian eigendecomposition, exp(-i s H), Kronecker
// product, partial trace and ordered products.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace bitraj {

using cd = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cd> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cd>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols);
  static ComplexMatrix diagonal(std::span<const double> values);
  // |v><v|
  static ComplexMatrix outer(std::span<const cd> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  cd& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cd& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<cd> data() noexcept { return data_; }
  std::span<const cd> data() const noexcept { return data_; }

  std::vector<cd> column(std::size_t c) const;

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  cd trace() const;
  // max_ij |m_ij|
  double max_abs() const;
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cd s);

  // this += alpha * o
  void add_scaled(cd alpha, const ComplexMatrix& o);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cd s) { return a *= s; }
  friend ComplexMatrix operator*(cd s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cd> data_;
};

// max_ij |a_ij - b_ij|; throws on shape mismatch.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// tr(a b) without forming the product.
cd trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b);

// tr(a b^dagger) = sum_ij a_ij conj(b_ij)
cd trace_with_adjoint(const ComplexMatrix& a, const ComplexMatrix& b);

struct Tolerances {
  static constexpr double kHermiticityRel = 1e-10;
  static constexpr double kProjector = 1e-10;
  static constexpr double kPsd = 1e-10;
  static constexpr double kTrace = 1e-10;
  static constexpr double kDegeneracyRel = 1e-8;
};

// Returns (m + m^dagger)/2 if m is Hermitian within the relative tolerance,
// otherwise throws NotHermitian (with the observed asymmetry) or NotSquare.
ComplexMatrix require_hermitian(const ComplexMatrix& m);
double hermiticity_defect(const ComplexMatrix& m);

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // orthonormal columns, column phase gauged
};

HermitianEigen eig_hermitian(const ComplexMatrix& m);

// exp(-i s h)
ComplexMatrix expm_hermitian_phase(const ComplexMatrix& h, double s);

// Index convention (i_a, i_b) -> i_a * dim_b + i_b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix partial_trace_b(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b);
ComplexMatrix partial_trace_a(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b);

enum class ProductOrder {
  kForward,  // A_1 A_2 ... A_n
  kReverse,  // A_n ... A_2 A_1
};

ComplexMatrix ordered_product(std::span<const ComplexMatrix> factors, ProductOrder order,
                              std::size_t dim_if_empty = 0);

// ||u^dagger u - 1||_max
double unitarity_defect(const ComplexMatrix& u);

// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const ComplexMatrix& m);

// Spectral projectors of a Hermitian matrix with eigenvalues clustered within
// kDegeneracyRel * (1 + spread); clusters ascending.
struct SpectralCluster {
  double value;
  ComplexMatrix projector;
  std::vector<std::size_t> eigen_columns;
};
std::vector<SpectralCluster> spectral_clusters(const ComplexMatrix& m);

}  // namespace bitraj
