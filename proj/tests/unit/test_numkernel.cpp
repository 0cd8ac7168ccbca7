#include <cmath>
#include <random>
#include <vector>

#include "coopdiss/error.hpp"
#include "coopdiss/linalg.hpp"
#include "coopdiss/matrix.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace coopdiss;

namespace {

const double kSqrt2 = std::sqrt(2.0);

ComplexMatrix sigma_minus() { return {{0.0, 1.0}, {0.0, 0.0}}; }

StateVector basis(std::size_t dim, std::size_t i) {
  StateVector v(dim);
  v[i] = 1.0;
  return v;
}

// (|psi_-><psi_-| + |00><00|)/2 for two qubits, basis |00>,|01>,|10>,|11>.
ComplexMatrix rho2_inf() {
  ComplexMatrix r(4, 4);
  r(0, 0) = 0.5;
  r(1, 1) = 0.25;
  r(2, 2) = 0.25;
  r(1, 2) = -0.25;
  r(2, 1) = -0.25;
  return r;
}

}  // namespace

TEST_CASE("complex matrix construction rules") {
  CHECK_THROWS_AS(ComplexMatrix(1, 1, {Complex(std::nan(""), 0.0)}), Error);
  try {
    ComplexMatrix(2, 2, {1.0, 2.0, 3.0});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  ComplexMatrix m{{1.0, Complex(0, 2)}, {3.0, 4.0}};
  CHECK(m.adjoint()(0, 1) == Complex(3.0, 0.0));
  CHECK(m.adjoint()(1, 0) == Complex(0.0, -2.0));
  CHECK(m.trace() == Complex(5.0, 0.0));
}

TEST_CASE("dims layout digits") {
  DimsLayout l({2, 4});
  CHECK(l.total_dim() == 8);
  CHECK(l.digit(5, 0) == 1);
  CHECK(l.digit(5, 1) == 1);
  std::vector<std::size_t> d{1, 3};
  CHECK(l.flat_index(d) == 7);
  CHECK_THROWS_AS(DimsLayout({2, 1}), Error);
}

TEST_CASE("kron examples") {
  CHECK(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)) == ComplexMatrix::identity(4));

  std::vector<double> a{1, 2}, b{3, 4}, ab{3, 4, 6, 8};
  CHECK(kron(ComplexMatrix::diagonal(a), ComplexMatrix::diagonal(b)) == ComplexMatrix::diagonal(ab));

  const ComplexMatrix op = kron(sigma_minus(), ComplexMatrix::identity(2));
  CHECK(op.apply(basis(4, 2)) == basis(4, 0));  // |10> -> |00>
}

TEST_CASE("hermitian eigen examples") {
  SUBCASE("pauli x") {
    auto e = hermitian_eigen({{0.0, 1.0}, {1.0, 0.0}});
    CHECK(e.values[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("identity") {
    auto e = hermitian_eigen(ComplexMatrix::identity(3));
    for (double v : e.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("quadratic 2x2") {
    auto e = hermitian_eigen({{0.5, -0.25}, {-0.25, 0.0}});
    CHECK(std::abs(e.values[0] - (1.0 - kSqrt2) / 4.0) < 1e-14);
    CHECK(std::abs(e.values[1] - (1.0 + kSqrt2) / 4.0) < 1e-14);
  }
  SUBCASE("not hermitian") {
    try {
      hermitian_eigen({{0.0, 1.0}, {0.0, 0.0}});
      FAIL("expected NotHermitian");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotHermitian);
    }
  }
}

TEST_CASE("hermitian eigen reconstruction on random matrices") {
  std::mt19937_64 rng(12345);
  for (std::size_t n = 1; n <= 16; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      const ComplexMatrix m = oracle::random_hermitian(n, rng);
      const auto e = hermitian_eigen(m);
      const ComplexMatrix recon = e.vectors * ComplexMatrix::diagonal(e.values) * e.vectors.adjoint();
      CHECK(max_abs_diff(recon, m) < 1e-10);
      CHECK(max_abs_diff(e.vectors.adjoint() * e.vectors, ComplexMatrix::identity(n)) < 1e-10);
      for (std::size_t i = 1; i < n; ++i) CHECK(e.values[i - 1] <= e.values[i]);
      const auto ref = oracle::eigvalsh(m);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ref[i] - e.values[i]) < 1e-10);
    }
  }
}

TEST_CASE("kernel basis examples") {
  SUBCASE("single-excitation collective row gives psi_minus") {
    const ComplexMatrix m{{1.0, 1.0}};
    const auto k = kernel_basis(m);
    REQUIRE(k.size() == 1);
    // Up to a global phase, (1, -1)/sqrt2.
    const StateVector ref{1.0 / kSqrt2, -1.0 / kSqrt2};
    CHECK(std::abs(std::abs(inner(ref, k[0])) - 1.0) < 1e-12);
  }
  SUBCASE("full two-qubit lowering operator") {
    const ComplexMatrix o = kron(sigma_minus(), ComplexMatrix::identity(2)) +
                            kron(ComplexMatrix::identity(2), sigma_minus());
    const auto k = kernel_basis(o);
    REQUIRE(k.size() == 2);
    // Span{|00>, psi_-}: projector onto the kernel.
    ComplexMatrix p(4, 4);
    for (const auto& v : k) p += ComplexMatrix::projector(v);
    ComplexMatrix ref(4, 4);
    ref(0, 0) = 1.0;
    ref(1, 1) = 0.5;
    ref(2, 2) = 0.5;
    ref(1, 2) = -0.5;
    ref(2, 1) = -0.5;
    CHECK(max_abs_diff(p, ref) < 1e-12);
  }
  SUBCASE("invertible matrix has empty kernel") {
    CHECK(kernel_basis({{2.0, 1.0}, {1.0, 3.0}}).empty());
    CHECK(kernel_basis(ComplexMatrix::identity(5)).empty());
  }
}

TEST_CASE("kernel basis soundness against rank count") {
  std::mt19937_64 rng(777);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t rows = 2 + rep % 6, cols = 3 + rep % 7;
    const std::size_t r = 1 + rep % std::min(rows, cols);
    // Random product of (rows x r) (r x cols): rank r generically.
    ComplexMatrix a(rows, r), b(r, cols);
    for (auto& z : a.data()) z = Complex(g(rng), g(rng));
    for (auto& z : b.data()) z = Complex(g(rng), g(rng));
    const ComplexMatrix m = a * b;
    const double tol = 1e-9;
    const auto k = kernel_basis(m, tol);
    CHECK(k.size() == cols - oracle::rank(m));
    const double mnorm = std::sqrt(oracle::eigvalsh(m.adjoint() * m).back());
    for (std::size_t i = 0; i < k.size(); ++i) {
      CHECK(norm(m.apply(k[i])) <= tol * mnorm);
      for (std::size_t j = 0; j < k.size(); ++j)
        CHECK(std::abs(inner(k[i], k[j]) - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("partial transpose examples") {
  const DimsLayout two({2, 2});
  const ComplexMatrix pt = partial_transpose(rho2_inf(), two, 1);
  ComplexMatrix ref(4, 4);
  ref(0, 0) = 0.5;
  ref(1, 1) = 0.25;
  ref(2, 2) = 0.25;
  ref(0, 3) = -0.25;
  ref(3, 0) = -0.25;
  CHECK(pt == ref);
  CHECK(partial_transpose(pt, two, 1) == rho2_inf());

  std::mt19937_64 rng(5);
  const ComplexMatrix ra = oracle::random_density(2, rng), rb = oracle::random_density(3, rng);
  const DimsLayout l23({2, 3});
  const ComplexMatrix prod_pt = partial_transpose(kron(ra, rb), l23, 1);
  CHECK(max_abs_diff(prod_pt, kron(ra, rb.transpose())) == 0.0);
  const auto e1 = oracle::eigvalsh(kron(ra, rb)), e2 = oracle::eigvalsh(prod_pt);
  for (std::size_t i = 0; i < e1.size(); ++i) CHECK(std::abs(e1[i] - e2[i]) < 1e-12);

  CHECK_THROWS_AS(partial_transpose(ComplexMatrix::identity(3), two, 0), Error);
}

TEST_CASE("partial transpose consistency on random states") {
  std::mt19937_64 rng(99);
  const DimsLayout l({2, 4, 2});
  for (int rep = 0; rep < 10; ++rep) {
    const ComplexMatrix r = oracle::random_density(16, rng);
    for (std::size_t s = 0; s < 3; ++s) {
      const ComplexMatrix pt = partial_transpose(r, l, s);
      CHECK(std::abs(pt.trace() - r.trace()) < 1e-14);
      CHECK(partial_transpose(pt, l, s) == r);
    }
  }
}

TEST_CASE("partial trace examples") {
  const DimsLayout two({2, 2});
  const std::vector<std::size_t> keep_a{0};
  StateVector psi_minus(4);
  psi_minus[2] = 1.0 / kSqrt2;
  psi_minus[1] = -1.0 / kSqrt2;
  const ComplexMatrix half_i = 0.5 * ComplexMatrix::identity(2);
  CHECK(max_abs_diff(partial_trace(ComplexMatrix::projector(psi_minus), two, keep_a), half_i) < 1e-15);

  std::mt19937_64 rng(3);
  const ComplexMatrix ra = oracle::random_density(2, rng), rb = oracle::random_density(4, rng);
  const DimsLayout l24({2, 4});
  CHECK(max_abs_diff(partial_trace(kron(ra, rb), l24, keep_a), ra) < 1e-14);
  const std::vector<std::size_t> keep_b{1};
  CHECK(max_abs_diff(partial_trace(kron(ra, rb), l24, keep_b), rb) < 1e-14);

  const DimsLayout three({2, 2, 2});
  const ComplexMatrix p100 = ComplexMatrix::projector(basis(8, 4));
  const ComplexMatrix one{{0.0, 0.0}, {0.0, 1.0}};
  CHECK(partial_trace(p100, three, keep_a) == one);

  for (int rep = 0; rep < 10; ++rep) {
    const ComplexMatrix r = oracle::random_density(8, rng);
    const std::vector<std::size_t> keep{0, 2};
    const ComplexMatrix red = partial_trace(r, three, keep);
    CHECK(red.rows() == 4);
    CHECK(std::abs(red.trace() - r.trace()) < 1e-12);
  }
}

TEST_CASE("trace norm examples") {
  std::mt19937_64 rng(11);
  for (std::size_t n = 2; n <= 16; n += 2) {
    CHECK(std::abs(trace_norm_hermitian(oracle::random_density(n, rng)) - 1.0) < 1e-10);
  }
  const ComplexMatrix pt = partial_transpose(rho2_inf(), DimsLayout({2, 2}), 1);
  CHECK(std::abs(trace_norm_hermitian(pt) - (1.0 + kSqrt2) / 2.0) < 1e-14);
  CHECK(trace_norm_hermitian(ComplexMatrix::zeros(3, 3)) == 0.0);
  CHECK_THROWS_AS(trace_norm_hermitian({{0.0, 1.0}, {0.0, 0.0}}), Error);
}

TEST_CASE("general eigen agrees with oracle on a non-hermitian matrix") {
  const ComplexMatrix m{{Complex(1.0, -0.1), Complex(0.0, -0.1)}, {Complex(0.0, -0.1), Complex(1.1, -0.1)}};
  const auto e = general_eigen(m);
  REQUIRE(e.values.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const StateVector v = e.vectors.column(i);
    const StateVector mv = m.apply(v);
    for (std::size_t r = 0; r < 2; ++r) CHECK(std::abs(mv[r] - e.values[i] * v[r]) < 1e-12);
  }
}
