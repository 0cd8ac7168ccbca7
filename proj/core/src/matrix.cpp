#include "coopdiss/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coopdiss/error.hpp"

namespace coopdiss {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionCapExceeded: return "DimensionCapExceeded";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::NonNormalizable: return "NonNormalizable";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::UnsupportedSector: return "UnsupportedSector";
    case ErrorCode::NonIdealModel: return "NonIdealModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::DimensionMismatch, "matrix dimensions must be >= 1");
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::DimensionMismatch, "matrix dimensions must be >= 1");
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::DimensionMismatch, "entry count " + std::to_string(data_.size()) +
                                                  " != " + std::to_string(rows * cols));
  }
  if (!all_finite()) throw Error(ErrorCode::NonFinite, "matrix entries must be finite");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  if (rows_ == 0 || cols_ == 0) throw Error(ErrorCode::DimensionMismatch, "empty matrix literal");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw Error(ErrorCode::NonFinite, "matrix entries must be finite");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::projector(std::span<const Complex> v) { return outer(v, v); }

ComplexMatrix ComplexMatrix::outer(std::span<const Complex> a, std::span<const Complex> b) {
  ComplexMatrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * std::conj(b[j]);
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
  return m;
}

ComplexMatrix ComplexMatrix::conj() const {
  ComplexMatrix m = *this;
  for (auto& z : m.data_) z = std::conj(z);
  return m;
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

StateVector ComplexMatrix::column(std::size_t c) const {
  StateVector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
  return v;
}

StateVector ComplexMatrix::apply(std::span<const Complex> v) const {
  if (v.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "matrix-vector size mismatch");
  StateVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    Complex acc = 0.0;
    const Complex* row = &data_[i * cols_];
    for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return out;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) noexcept {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix product " + std::to_string(a.cols()) + " vs " +
                                                  std::to_string(b.rows()));
  }
  ComplexMatrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      const Complex ail = a(i, l);
      if (ail == Complex{}) continue;
      for (std::size_t j = 0; j < m; ++j) c(i, j) += ail * b(l, j);
    }
  }
  return c;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

double hermiticity_error(const ComplexMatrix& m) {
  if (!m.is_square()) throw Error(ErrorCode::DimensionMismatch, "hermiticity_error: matrix not square");
  double e = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) e = std::max(e, std::abs(m(i, j) - std::conj(m(j, i))));
  return e;
}

double norm(std::span<const Complex> v) noexcept {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) noexcept {
  Complex s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += std::conj(a[i]) * b[i];
  return s;
}

DimsLayout::DimsLayout(std::vector<std::size_t> subsystem_dims) : dims_(std::move(subsystem_dims)) {
  if (dims_.empty()) throw Error(ErrorCode::DimensionMismatch, "layout needs at least one subsystem");
  strides_.assign(dims_.size(), 1);
  total_ = 1;
  for (std::size_t s = dims_.size(); s-- > 0;) {
    if (dims_[s] < 2) throw Error(ErrorCode::DimensionMismatch, "subsystem dimension must be >= 2");
    strides_[s] = total_;
    total_ *= dims_[s];
  }
}

std::size_t DimsLayout::digit(std::size_t flat, std::size_t site) const {
  return (flat / strides_.at(site)) % dims_[site];
}

std::vector<std::size_t> DimsLayout::digits(std::size_t flat) const {
  std::vector<std::size_t> d(dims_.size());
  for (std::size_t s = 0; s < dims_.size(); ++s) d[s] = digit(flat, s);
  return d;
}

std::size_t DimsLayout::flat_index(std::span<const std::size_t> digits) const {
  if (digits.size() != dims_.size()) throw Error(ErrorCode::DimensionMismatch, "digit count != subsystem count");
  std::size_t flat = 0;
  for (std::size_t s = 0; s < dims_.size(); ++s) {
    if (digits[s] >= dims_[s]) throw Error(ErrorCode::DimensionMismatch, "level out of range for subsystem");
    flat += digits[s] * strides_[s];
  }
  return flat;
}

}  // namespace coopdiss
