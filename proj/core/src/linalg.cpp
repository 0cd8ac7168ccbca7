#include "coopdiss/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "coopdiss/error.hpp"

namespace coopdiss {

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return c;
}

HermitianEigen hermitian_eigen(const ComplexMatrix& m, double hermiticity_tol) {
  if (!m.is_square()) throw Error(ErrorCode::DimensionMismatch, "hermitian_eigen: matrix not square");
  const double herr = hermiticity_error(m);
  if (herr > hermiticity_tol) {
    throw Error(ErrorCode::NotHermitian, "hermiticity error " + std::to_string(herr) + " exceeds " +
                                             std::to_string(hermiticity_tol));
  }
  const std::size_t n = m.rows();
  ComplexMatrix a = 0.5 * (m + m.adjoint());
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (const auto& z : a.data()) scale += std::norm(z);
  scale = std::sqrt(scale);

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_norm() <= 1e-15 * scale || scale == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        // Phase the (p,q) element real, then a real Jacobi rotation zeroes it.
        const Complex phase = apq / mag;
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // W = diag(1, conj(phase)) * [[c, s], [-s, c]]
        const Complex w00 = c, w01 = s, w10 = -s * std::conj(phase), w11 = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * w00 + akq * w10;
          a(k, q) = akp * w01 + akq * w11;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(w00) * apk + std::conj(w10) * aqk;
          a(q, k) = std::conj(w01) * apk + std::conj(w11) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * w00 + vkq * w10;
          v(k, q) = vkp * w01 + vkq * w11;
        }
      }
    }
  }
  if (sweep == kMaxSweeps) throw Error(ErrorCode::ConvergenceFailure, "Jacobi sweeps did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

std::vector<StateVector> kernel_basis(const ComplexMatrix& m, double tol) {
  const ComplexMatrix gram = m.adjoint() * m;
  const HermitianEigen eig = hermitian_eigen(gram, 1e-8 * std::max(1.0, gram.max_abs()));
  const double top = std::max(0.0, eig.values.back());
  // Eigenvalues of m^dagger m carry absolute noise ~ n * eps * top, so the
  // squared threshold is floored there.
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * static_cast<double>(gram.rows());
  const double cutoff = std::max(tol * tol, noise) * top;
  std::vector<StateVector> basis;
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] <= cutoff) basis.push_back(eig.vectors.column(i));
  }
  return basis;
}

ComplexMatrix partial_transpose(const ComplexMatrix& rho, const DimsLayout& layout, std::size_t site) {
  if (!rho.is_square() || rho.rows() != layout.total_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "partial_transpose: state dimension != layout total");
  }
  if (site >= layout.size()) throw Error(ErrorCode::DimensionMismatch, "partial_transpose: no such subsystem");
  const std::size_t n = rho.rows();
  ComplexMatrix out(n, n);
  std::vector<std::size_t> di, dj;
  for (std::size_t i = 0; i < n; ++i) {
    di = layout.digits(i);
    for (std::size_t j = 0; j < n; ++j) {
      dj = layout.digits(j);
      std::swap(di[site], dj[site]);
      out(layout.flat_index(di), layout.flat_index(dj)) = rho(i, j);
      std::swap(di[site], dj[site]);
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, const DimsLayout& layout,
                            std::span<const std::size_t> keep) {
  if (!rho.is_square() || rho.rows() != layout.total_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "partial_trace: state dimension != layout total");
  }
  std::vector<bool> kept(layout.size(), false);
  for (std::size_t s : keep) {
    if (s >= layout.size() || kept[s]) throw Error(ErrorCode::DimensionMismatch, "partial_trace: bad keep index");
    kept[s] = true;
  }
  std::vector<std::size_t> kept_dims;
  for (std::size_t s = 0; s < layout.size(); ++s)
    if (kept[s]) kept_dims.push_back(layout.dim(s));
  if (kept_dims.empty()) return ComplexMatrix(1, 1, {rho.trace()});

  const DimsLayout reduced(kept_dims);
  ComplexMatrix out(reduced.total_dim(), reduced.total_dim());
  const std::size_t n = rho.rows();
  std::vector<std::size_t> ri(kept_dims.size()), rj(kept_dims.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto di = layout.digits(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto dj = layout.digits(j);
      bool diagonal_in_traced = true;
      std::size_t k = 0;
      for (std::size_t s = 0; s < layout.size(); ++s) {
        if (kept[s]) {
          ri[k] = di[s];
          rj[k] = dj[s];
          ++k;
        } else if (di[s] != dj[s]) {
          diagonal_in_traced = false;
          break;
        }
      }
      if (diagonal_in_traced) out(reduced.flat_index(ri), reduced.flat_index(rj)) += rho(i, j);
    }
  }
  return out;
}

double trace_norm_hermitian(const ComplexMatrix& m, double hermiticity_tol) {
  const auto eig = hermitian_eigen(m, hermiticity_tol);
  double s = 0.0;
  for (double l : eig.values) s += std::abs(l);
  return s;
}

GeneralEigen general_eigen(const ComplexMatrix& m) {
  if (!m.is_square()) throw Error(ErrorCode::DimensionMismatch, "general_eigen: matrix not square");
  const auto n = static_cast<Eigen::Index>(m.rows());
  Eigen::MatrixXcd em(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) em(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(em, true);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "complex eigensolve failed");
  GeneralEigen out{std::vector<Complex>(m.rows()), ComplexMatrix(m.rows(), m.rows())};
  for (Eigen::Index c = 0; c < n; ++c) {
    out.values[static_cast<std::size_t>(c)] = solver.eigenvalues()(c);
    const Eigen::VectorXcd col = solver.eigenvectors().col(c).normalized();
    for (Eigen::Index r = 0; r < n; ++r) out.vectors(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = col(r);
  }
  return out;
}

}  // namespace coopdiss
