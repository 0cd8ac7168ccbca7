#pragma once

#include <span>
#include <vector>

#include "coopdiss/matrix.hpp"

namespace coopdiss {

inline constexpr double kDefaultHermiticityTol = 1e-9;
inline constexpr double kDefaultKernelTol = 1e-9;

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // orthonormal columns, vectors.column(i) <-> values[i]
};

/// Cyclic complex Jacobi. Throws NotHermitian when ||m - m^dagger||_max exceeds
/// hermiticity_tol; the (m + m^dagger)/2 part is what gets diagonalized.
HermitianEigen hermitian_eigen(const ComplexMatrix& m, double hermiticity_tol = kDefaultHermiticityTol);

/// Orthonormal basis of null(m), from the eigendecomposition of m^dagger m.
/// Keeps eigenvalues <= max(tol^2, noise floor) * ||m^dagger m||_2, where the
/// floor is ~1e3 * eps * dim. May be empty.
std::vector<StateVector> kernel_basis(const ComplexMatrix& m, double tol = kDefaultKernelTol);

/// Transposes the index pair belonging to `site`.
ComplexMatrix partial_transpose(const ComplexMatrix& rho, const DimsLayout& layout, std::size_t site);

/// Traces out every subsystem not listed in `keep` (kept order follows layout order).
ComplexMatrix partial_trace(const ComplexMatrix& rho, const DimsLayout& layout,
                            std::span<const std::size_t> keep);

/// Sum of |eigenvalues| of a Hermitian matrix.
double trace_norm_hermitian(const ComplexMatrix& m, double hermiticity_tol = kDefaultHermiticityTol);

struct GeneralEigen {
  std::vector<Complex> values;
  ComplexMatrix vectors;  // right eigenvectors as columns, unit norm
};

/// Dense non-Hermitian eigensolve (Eigen's complex Schur backend).
GeneralEigen general_eigen(const ComplexMatrix& m);

}  // namespace coopdiss
