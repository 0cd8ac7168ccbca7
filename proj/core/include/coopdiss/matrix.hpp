#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace coopdiss {

using Complex = std::complex<double>;
using StateVector = std::vector<Complex>;

/// Dense complex matrix, row-major. Used for states, operators and
/// superoperators alike; every dimension in this project is small enough
/// (a few hundred at most) that dense storage is the right call.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  /// Throws NonFinite if any entry is NaN/Inf, DimensionMismatch if
  /// entries.size() != rows * cols.
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const double> values);
  /// |v><v|
  static ComplexMatrix projector(std::span<const Complex> v);
  /// |a><b|
  static ComplexMatrix outer(std::span<const Complex> a, std::span<const Complex> b);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conj() const;
  Complex trace() const;
  /// max |a_ij|
  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  StateVector column(std::size_t c) const;
  StateVector apply(std::span<const Complex> v) const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex s) noexcept;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);

/// max_ij |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
/// max_ij |m_ij - conj(m_ji)|
double hermiticity_error(const ComplexMatrix& m);

double norm(std::span<const Complex> v) noexcept;
Complex inner(std::span<const Complex> a, std::span<const Complex> b) noexcept;  // <a|b>

/// Tensor-factor bookkeeping. Subsystem 0 is the leftmost (slowest-varying)
/// factor, which is also emitter 1 and the leftmost character of a basis string.
class DimsLayout {
 public:
  DimsLayout() = default;
  /// Throws DimensionMismatch if any local dimension is < 2 or the list is empty.
  explicit DimsLayout(std::vector<std::size_t> subsystem_dims);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t site) const { return dims_.at(site); }
  std::size_t total_dim() const noexcept { return total_; }

  /// Local level of `site` inside the flat basis index.
  std::size_t digit(std::size_t flat, std::size_t site) const;
  std::vector<std::size_t> digits(std::size_t flat) const;
  std::size_t flat_index(std::span<const std::size_t> digits) const;

  friend bool operator==(const DimsLayout&, const DimsLayout&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
};

}  // namespace coopdiss
