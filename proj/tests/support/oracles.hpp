#pragma once
// Test-only reference computations. Nothing here calls into the library's
// eigensolver, kernel or integrator, so they can check those paths.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "coopdiss/matrix.hpp"

namespace oracle {

using coopdiss::Complex;
using coopdiss::ComplexMatrix;

inline Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
  Eigen::MatrixXcd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline ComplexMatrix from_eigen(const Eigen::MatrixXcd& e) {
  ComplexMatrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

inline std::vector<double> eigvalsh(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s(to_eigen(m), Eigen::EigenvaluesOnly);
  std::vector<double> v(s.eigenvalues().data(), s.eigenvalues().data() + s.eigenvalues().size());
  return v;
}

/// (1/2) ||a - b||_1 for Hermitian a, b.
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix d = a - b;
  ComplexMatrix h = 0.5 * (d + d.adjoint());
  double s = 0.0;
  for (double l : eigvalsh(h)) s += std::abs(l);
  return 0.5 * s;
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Eigen::MatrixXcd scaled = a / std::pow(2.0, squarings);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// Numerical rank by Gaussian elimination with complete pivoting.
inline std::size_t rank(ComplexMatrix m, double rel_tol = 1e-10) {
  const std::size_t rows = m.rows(), cols = m.cols();
  const double scale = std::max(1.0, m.max_abs());
  std::size_t r = 0;
  std::vector<std::size_t> colperm(cols);
  for (std::size_t c = 0; c < cols; ++c) colperm[c] = c;
  for (std::size_t step = 0; step < std::min(rows, cols); ++step) {
    std::size_t pr = step, pc = step;
    double best = 0.0;
    for (std::size_t i = step; i < rows; ++i)
      for (std::size_t j = step; j < cols; ++j)
        if (std::abs(m(i, j)) > best) {
          best = std::abs(m(i, j));
          pr = i;
          pc = j;
        }
    if (best <= rel_tol * scale) break;
    for (std::size_t j = 0; j < cols; ++j) std::swap(m(step, j), m(pr, j));
    for (std::size_t i = 0; i < rows; ++i) std::swap(m(i, step), m(i, pc));
    for (std::size_t i = step + 1; i < rows; ++i) {
      const Complex f = m(i, step) / m(step, step);
      for (std::size_t j = step; j < cols; ++j) m(i, j) -= f * m(step, j);
    }
    ++r;
  }
  return r;
}

inline long long binomial(long long n, long long k) {
  if (k < 0 || k > n) return 0;
  long long b = 1;
  for (long long i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

inline ComplexMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = g(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = Complex(g(rng), g(rng));
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

/// Random density matrix A A^dagger / tr.
inline ComplexMatrix random_density(std::size_t n, std::mt19937_64& rng, std::size_t rank = 0) {
  std::normal_distribution<double> g;
  const std::size_t k = rank == 0 ? n : rank;
  ComplexMatrix a(n, k);
  for (auto& z : a.data()) z = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  const Complex tr = rho.trace();
  rho *= Complex(1.0) / tr;
  return rho;
}

}  // namespace oracle
