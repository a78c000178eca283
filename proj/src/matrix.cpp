#include "bitraj/matrix.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bitraj/errors.hpp"
#include "bitraj/kernels.hpp"

namespace bitraj {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
  Eigen::MatrixXcd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cd{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cd> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_)
    throw Error(ErrorCode::kDimensionMismatch, "entry count does not match rows x cols");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cd>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw Error(ErrorCode::kDimensionMismatch, "ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::outer(std::span<const cd> v) {
  ComplexMatrix m(v.size(), v.size());
  for (std::size_t r = 0; r < v.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) m(r, c) = v[r] * std::conj(v[c]);
  return m;
}

std::vector<cd> ComplexMatrix::column(std::size_t c) const {
  std::vector<cd> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

cd ComplexMatrix::trace() const {
  if (!is_square()) throw Error(ErrorCode::kNotSquare, "trace of non-square matrix");
  cd t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const cd& z : data_) m = std::max(m, std::abs(z));
  return m;
}

bool ComplexMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const cd& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "matrix sum");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "matrix difference");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cd s) {
  for (cd& z : data_) z *= s;
  return *this;
}

void ComplexMatrix::add_scaled(cd alpha, const ComplexMatrix& o) {
  require_same_shape(*this, o, "scaled sum");
  kernels::axpy(alpha, o.data_.data(), data_.data(), data_.size());
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "matrix product: " << a.rows() << "x" << a.cols() << " * " << b.rows() << "x" << b.cols();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  ComplexMatrix c(a.rows(), b.cols());
  kernels::gemm(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols());
  return c;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

cd trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw Error(ErrorCode::kDimensionMismatch, "trace_of_product shapes");
  // tr(ab) = sum_ij a_ij b_ji = sum_ij a_ij conj(conj(b)^T_ij)
  const ComplexMatrix bt_conj = b.adjoint();
  return kernels::dot_conj(a.data().data(), bt_conj.data().data(), a.data().size());
}

cd trace_with_adjoint(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "trace_with_adjoint");
  return kernels::dot_conj(a.data().data(), b.data().data(), a.data().size());
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (!m.is_square()) throw Error(ErrorCode::kNotSquare, "expected a square matrix");
  double d = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = r; c < m.cols(); ++c) d = std::max(d, std::abs(m(r, c) - std::conj(m(c, r))));
  return d;
}

ComplexMatrix require_hermitian(const ComplexMatrix& m) {
  if (!m.is_square()) {
    std::ostringstream os;
    os << "expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::kNotSquare, os.str());
  }
  if (!m.all_finite()) throw Error(ErrorCode::kNonFinite, "matrix has NaN or Inf entries");
  const double defect = hermiticity_defect(m);
  if (defect > Tolerances::kHermiticityRel * m.max_abs()) {
    std::ostringstream os;
    os << "max |m - m^dagger| = " << defect;
    throw Error(ErrorCode::kNotHermitian, os.str());
  }
  ComplexMatrix sym = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) sym(r, c) = 0.5 * (m(r, c) + std::conj(m(c, r)));
  return sym;
}

HermitianEigen eig_hermitian(const ComplexMatrix& m) {
  const ComplexMatrix h = require_hermitian(m);
  const std::size_t n = h.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_eigen(h));
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::kNonFinite, "eigensolver did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& evals = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return evals(a) < evals(b); });

  HermitianEigen out;
  out.values.resize(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = evals(order[j]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = solver.eigenvectors()(r, order[j]);
  }

  // Re-orthonormalize within numerically degenerate groups (modified Gram-Schmidt).
  const double scale = 1.0 + std::max(std::abs(out.values.front()), std::abs(out.values.back()));
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && out.values[end] - out.values[end - 1] <= 1e-12 * scale) ++end;
    for (std::size_t j = start; j < end; ++j) {
      for (std::size_t i = start; i < j; ++i) {
        cd proj = 0.0;
        for (std::size_t r = 0; r < n; ++r) proj += std::conj(out.vectors(r, i)) * out.vectors(r, j);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) -= proj * out.vectors(r, i);
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < n; ++r) norm += std::norm(out.vectors(r, j));
      norm = std::sqrt(norm);
      for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) /= norm;
    }
    start = end;
  }

  // Gauge: largest-magnitude entry of each column real and positive.
  for (std::size_t j = 0; j < n; ++j) {
    double best = 0.0;
    for (std::size_t r = 0; r < n; ++r) best = std::max(best, std::abs(out.vectors(r, j)));
    std::size_t pivot = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(out.vectors(r, j)) >= best * (1.0 - 1e-12)) {
        pivot = r;
        break;
      }
    }
    const cd phase = std::conj(out.vectors(pivot, j)) / std::abs(out.vectors(pivot, j));
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) *= phase;
  }
  return out;
}

ComplexMatrix expm_hermitian_phase(const ComplexMatrix& h, double s) {
  const HermitianEigen e = eig_hermitian(h);
  const std::size_t n = h.rows();
  ComplexMatrix vd = e.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const cd phase = std::polar(1.0, -s * e.values[j]);
    for (std::size_t r = 0; r < n; ++r) vd(r, j) *= phase;
  }
  return vd * e.vectors.adjoint();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac) {
      const cd av = a(ar, ac);
      if (av == cd{0.0, 0.0}) continue;
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc)
          out(ar * b.rows() + br, ac * b.cols() + bc) = av * b(br, bc);
    }
  return out;
}

ComplexMatrix partial_trace_b(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b) {
  if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
    throw Error(ErrorCode::kDimensionMismatch, "partial_trace_b: matrix is not (dim_a*dim_b)^2");
  ComplexMatrix out(dim_a, dim_a);
  for (std::size_t i = 0; i < dim_a; ++i)
    for (std::size_t j = 0; j < dim_a; ++j) {
      cd s = 0.0;
      for (std::size_t k = 0; k < dim_b; ++k) s += m(i * dim_b + k, j * dim_b + k);
      out(i, j) = s;
    }
  return out;
}

ComplexMatrix partial_trace_a(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b) {
  if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
    throw Error(ErrorCode::kDimensionMismatch, "partial_trace_a: matrix is not (dim_a*dim_b)^2");
  ComplexMatrix out(dim_b, dim_b);
  for (std::size_t i = 0; i < dim_b; ++i)
    for (std::size_t j = 0; j < dim_b; ++j) {
      cd s = 0.0;
      for (std::size_t k = 0; k < dim_a; ++k) s += m(k * dim_b + i, k * dim_b + j);
      out(i, j) = s;
    }
  return out;
}

ComplexMatrix ordered_product(std::span<const ComplexMatrix> factors, ProductOrder order,
                              std::size_t dim_if_empty) {
  if (factors.empty()) return ComplexMatrix::identity(dim_if_empty);
  const std::size_t d = factors.front().rows();
  for (const auto& f : factors)
    if (f.rows() != d || f.cols() != d)
      throw Error(ErrorCode::kDimensionMismatch, "ordered_product: factors must be square of equal size");
  if (order == ProductOrder::kForward) {
    ComplexMatrix acc = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) acc = acc * factors[i];
    return acc;
  }
  ComplexMatrix acc = factors.back();
  for (std::size_t i = factors.size() - 1; i-- > 0;) acc = acc * factors[i];
  return acc;
}

double unitarity_defect(const ComplexMatrix& u) {
  return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.cols()));
}

double min_eigenvalue(const ComplexMatrix& m) { return eig_hermitian(m).values.front(); }

std::vector<SpectralCluster> spectral_clusters(const ComplexMatrix& m) {
  const HermitianEigen e = eig_hermitian(m);
  const std::size_t n = e.values.size();
  const double spread = e.values.back() - e.values.front();
  const double tol = Tolerances::kDegeneracyRel * (1.0 + spread);
  std::vector<SpectralCluster> out;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && e.values[end] - e.values[end - 1] <= tol) ++end;
    SpectralCluster c;
    c.value = 0.0;
    c.projector = ComplexMatrix(n, n);
    for (std::size_t j = start; j < end; ++j) {
      c.value += e.values[j];
      c.eigen_columns.push_back(j);
      const std::vector<cd> v = e.vectors.column(j);
      c.projector += ComplexMatrix::outer(v);
    }
    c.value /= static_cast<double>(end - start);
    out.push_back(std::move(c));
    start = end;
  }
  return out;
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotSquare: return "NotSquare";
    case ErrorCode::kNotHermitian: return "NotHermitian";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnknownOutcome: return "UnknownOutcome";
    case ErrorCode::kCellMismatch: return "CellMismatch";
    case ErrorCode::kNotFineGrained: return "NotFineGrained";
    case ErrorCode::kInvalidObservable: return "InvalidObservable";
    case ErrorCode::kInvalidSchedule: return "InvalidSchedule";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroConditioningEvent: return "ZeroConditioningEvent";
    case ErrorCode::kEnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::kPositionOutOfRange: return "PositionOutOfRange";
    case ErrorCode::kNotPSD: return "NotPSD";
    case ErrorCode::kCouplingNonzero: return "CouplingNonzero";
    case ErrorCode::kBadSplit: return "BadSplit";
    case ErrorCode::kPathCapExceeded: return "PathCapExceeded";
    case ErrorCode::kGridMisaligned: return "GridMisaligned";
    case ErrorCode::kBadDimension: return "BadDimension";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kWeightSumError: return "WeightSumError";
    case ErrorCode::kUnknownCommand: return "UnknownCommand";
    case ErrorCode::kUnknownExperiment: return "UnknownExperiment";
  }
  return "Unknown";
}

}  // namespace bitraj
