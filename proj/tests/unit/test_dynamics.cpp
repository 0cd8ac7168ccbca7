#include <cmath>
#include <random>

#include "coopdiss/dynamics.hpp"
#include "coopdiss/error.hpp"
#include "coopdiss/linalg.hpp"
#include "coopdiss/observables.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace coopdiss;

namespace {

const DimsLayout kTwo({2, 2});
const DimsLayout kThree({2, 2, 2});

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no coopdiss::Error thrown");
  return ErrorCode::IoError;
}

bool contains_value(const std::vector<Complex>& values, Complex z, double tol) {
  for (const auto& v : values)
    if (std::abs(v - z) < tol) return true;
  return false;
}

ComplexMatrix expm_evolve(const ModelOperators& model, const ComplexMatrix& rho0, double t) {
  const Eigen::MatrixXcd l = oracle::to_eigen(liouvillian_matrix(model));
  const Eigen::MatrixXcd u = oracle::expm(l * t);
  const StateVector v0 = vectorize(rho0);
  Eigen::VectorXcd x(v0.size());
  for (std::size_t i = 0; i < v0.size(); ++i) x(i) = v0[i];
  const Eigen::VectorXcd y = u * x;
  return unvectorize(std::span<const Complex>(y.data(), y.size()), model.dim);
}

}  // namespace

TEST_CASE("lindblad rhs examples") {
  const double kappa = 0.001;
  const auto model = build_model(fixture::collective_qubits(2, kappa));
  CHECK(lindblad_rhs(model, fixture::dm("00", kTwo)).max_abs() == 0.0);
  CHECK(lindblad_rhs(model, fixture::dm("psi_minus", kTwo)).max_abs() < 1e-18);

  const auto plus = fixture::ket("psi_plus", kTwo);
  const ComplexMatrix d = lindblad_rhs(model, ComplexMatrix::projector(plus));
  CHECK(std::abs(dark_overlap(d, plus) - (-4.0 * kappa)) < 1e-15);

  // Single emitter under a local channel loses population at 2 alpha.
  auto spec = qubit_chain(1);
  spec.local_channels.push_back({0.01, 0, {}});
  const ComplexMatrix one{{0.0, 0.0}, {0.0, 1.0}};
  CHECK(std::abs(lindblad_rhs(build_model(spec), one)(1, 1) - (-0.02)) < 1e-15);

  CHECK(code_of([&] { lindblad_rhs(model, ComplexMatrix::identity(3)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("lindblad rhs is traceless and hermitian on random inputs") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const auto model = build_model(fixture::random_two_qubit(rng));
    const ComplexMatrix rho = oracle::random_density(4, rng);
    const ComplexMatrix d = lindblad_rhs(model, rho);
    CHECK(std::abs(d.trace()) < 1e-12);
    CHECK(hermiticity_error(d) < 1e-12);
  }
}

TEST_CASE("evolve examples") {
  const double kappa = 0.001;
  const auto model = build_model(fixture::collective_qubits(2, kappa));
  const auto plus = fixture::ket("psi_plus", kTwo);

  SUBCASE("bright state decays as exp(-4 kappa t)") {
    const std::vector<double> grid{0.0, 500.0};
    const auto traj = evolve(model, ComplexMatrix::projector(plus), grid);
    const double p = dark_overlap(traj.final_state, plus);
    CHECK(std::abs(p - std::exp(-2.0)) / std::exp(-2.0) < 1e-7);
    CHECK(std::abs(energy(traj.final_state, model) - std::exp(-2.0)) < 1e-8);
  }
  SUBCASE("doubly excited state loses all energy") {
    const auto grid = uniform_grid(1e4, 101);
    const auto traj = evolve(model, fixture::dm("11", kTwo), grid);
    CHECK(energy(traj.final_state, model) < 1e-6);
    CHECK(traj.times.size() == 101);
    for (const auto& r : traj.records) {
      CHECK(r.at("trace_error") < 1e-9);
      CHECK(r.at("min_eigenvalue") > -1e-8);
    }
  }
  SUBCASE("dark state is stationary") {
    const auto minus = fixture::ket("psi_minus", kTwo);
    const auto grid = uniform_grid(1e4, 11);
    std::vector<double> f;
    const auto traj = evolve(model, ComplexMatrix::projector(minus), grid, {},
                             [&](double, const ComplexMatrix& rho, Record&) {
                               f.push_back(dark_overlap(rho, minus));
                               return true;
                             });
    REQUIRE(f.size() == 11);
    for (double x : f) CHECK(std::abs(x - 1.0) < 1e-12);
  }
  SUBCASE("observer can stop early and add columns") {
    const auto grid = uniform_grid(100.0, 11);
    const auto traj = evolve(model, fixture::dm("10", kTwo), grid, {},
                             [](double t, const ComplexMatrix&, Record& r) {
                               r.set("twice_t", 2 * t);
                               return t < 50.0;
                             });
    CHECK(traj.stopped_early);
    CHECK(traj.times.size() == 6);
    CHECK(traj.records.back().at("twice_t") == 100.0);
    CHECK(traj.records.back().contains("trace_error"));
  }
  SUBCASE("unphysical input trips the positivity check") {
    ComplexMatrix bad = fixture::dm("10", kTwo);
    bad(0, 0) = -0.1;
    bad(1, 1) = 0.1;
    const std::vector<double> grid{0.0, 1.0};
    CHECK(code_of([&] { evolve(model, bad, grid); }) == ErrorCode::InvariantViolation);
  }
}

TEST_CASE("fixed-step mode is deterministic and accurate") {
  const auto model = build_model(fixture::collective_qubits(2, 0.01));
  IntegratorConfig cfg;
  cfg.fixed_step = 0.5;
  const auto grid = uniform_grid(100.0, 21);
  const auto a = evolve(model, fixture::dm("10", kTwo), grid, cfg);
  const auto b = evolve(model, fixture::dm("10", kTwo), grid, cfg);
  CHECK(a.final_state == b.final_state);
  CHECK(a.stats.accepted_steps == 200);
  const auto ref = evolve(model, fixture::dm("10", kTwo), grid);
  CHECK(max_abs_diff(a.final_state, ref.final_state) < 1e-9);
}

TEST_CASE("effective hamiltonian eigenvalues") {
  const double kappa = 0.001;
  SUBCASE("resonant pair in the lab frame") {
    const auto h = effective_hamiltonian(build_model(fixture::collective_qubits(2, kappa, {}, fixture::lab)));
    REQUIRE(h.eigenvalues.size() == 4);
    for (Complex z : {Complex(0, 0), Complex(1, 0), Complex(1, -2 * kappa), Complex(2, -2 * kappa)})
      CHECK(contains_value(h.eigenvalues, z, 1e-12));
    for (const auto& z : h.eigenvalues) CHECK(z.imag() <= 1e-10);
    // Psi_+ is the eigenvector of 1 - 2 i kappa.
    const auto plus = fixture::ket("psi_plus", kTwo);
    for (std::size_t i = 0; i < 4; ++i) {
      if (std::abs(h.eigenvalues[i] - Complex(1, -2 * kappa)) < 1e-12) {
        CHECK(std::abs(std::abs(inner(plus, h.right_eigenvectors.column(i))) - 1.0) < 1e-12);
        CHECK(h.sectors[i] == 1);
      }
    }
  }
  SUBCASE("detuned pair") {
    for (auto [delta, k] : {std::pair{0.1, 0.001}, std::pair{0.001, 0.01}, std::pair{0.03, 0.01}}) {
      const auto h = effective_hamiltonian(build_model(fixture::collective_qubits(2, k, {0.0, delta}, fixture::lab)));
      const Complex root = std::sqrt(Complex(delta * delta / 4 - k * k, 0.0));
      const Complex centre(1 + delta / 2, -k);
      CHECK(contains_value(h.eigenvalues, centre + root, 1e-12));
      CHECK(contains_value(h.eigenvalues, centre - root, 1e-12));
    }
  }
  SUBCASE("exceptional point delta = 2 kappa") {
    // Defective 2x2 block: eigenvalue error scales like sqrt(eps).
    const double k = 0.01;
    const auto h = effective_hamiltonian(build_model(fixture::collective_qubits(2, k, {0.0, 2 * k}, fixture::lab)));
    std::size_t hits = 0;
    for (const auto& z : h.eigenvalues)
      if (std::abs(z - Complex(1 + k, -k)) < 1e-6) ++hits;
    CHECK(hits == 2);
  }
  SUBCASE("closed system") {
    const auto model = build_model(fixture::collective_qubits(3, 0.0, {0.0, 0.05, -0.02}, fixture::lab));
    const auto h = effective_hamiltonian(model);
    for (std::size_t i = 0; i < model.dim; ++i) {
      CHECK(std::abs(h.eigenvalues[i].imag()) < 1e-14);
      CHECK(contains_value(h.eigenvalues, model.free_energies[i], 1e-12));
    }
  }
  SUBCASE("drive mixes sectors and falls back to the full solve") {
    auto spec = fixture::collective_qubits(2, 0.01);
    spec.drives.push_back({0.05, 0, {}, 0.0});
    const auto h = effective_hamiltonian(build_model(spec));
    for (int s : h.sectors) CHECK(s == -1);
    for (const auto& z : h.eigenvalues) CHECK(z.imag() <= 1e-10);
  }
}

TEST_CASE("liouvillian matrix") {
  const double kappa = 0.001;
  SUBCASE("kernel of the resonant pair in the rotating frame") {
    const auto model = build_model(fixture::collective_qubits(2, kappa));
    const ComplexMatrix l = liouvillian_matrix(model);
    CHECK(l.rows() == 16);
    CHECK(16 - oracle::rank(l) == 4);
    CHECK(kernel_basis(l).size() == 4);
    const StateVector v = vectorize(fixture::rho2_inf());
    CHECK(norm(l.apply(v)) < 1e-15);
  }
  SUBCASE("closed non-degenerate system keeps exactly the diagonal matrices") {
    const auto model = build_model(fixture::collective_qubits(2, 0.0, {0.0, 0.1}, fixture::lab));
    const ComplexMatrix l = liouvillian_matrix(model);
    const auto k = kernel_basis(l);
    CHECK(k.size() == 4);
    for (const auto& v : k) {
      const ComplexMatrix m = unvectorize(v, 4);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
          if (i != j) CHECK(std::abs(m(i, j)) < 1e-12);
    }
  }
  SUBCASE("agrees with the rhs on random states") {
    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 20; ++rep) {
      const auto model = build_model(fixture::random_two_qubit(rng));
      const ComplexMatrix l = liouvillian_matrix(model);
      const ComplexMatrix rho = oracle::random_density(4, rng);
      const ComplexMatrix via_l = unvectorize(l.apply(vectorize(rho)), 4);
      CHECK(max_abs_diff(via_l, lindblad_rhs(model, rho)) < 1e-10);
    }
  }
  SUBCASE("vectorization is column stacking") {
    ComplexMatrix m{{1.0, 2.0}, {3.0, 4.0}};
    const StateVector v = vectorize(m);
    CHECK(v == StateVector{1.0, 3.0, 2.0, 4.0});
    CHECK(unvectorize(v, 2) == m);
  }
  SUBCASE("cap") {
    const auto model = build_model(fixture::collective_qubits(6, kappa));
    CHECK(code_of([&] { liouvillian_matrix(model); }) == ErrorCode::DimensionCapExceeded);
  }
}

TEST_CASE("predict final state") {
  const auto two = build_model(fixture::collective_qubits(2, 0.001));
  CHECK(max_abs_diff(predict_final_state(two, fixture::ket("10", kTwo)), fixture::rho2_inf()) < 1e-15);
  CHECK(max_abs_diff(predict_final_state(two, fixture::ket("psi_minus", kTwo)), fixture::dm("psi_minus", kTwo)) <
        1e-15);
  const auto three = build_model(fixture::collective_qubits(3, 0.001));
  CHECK(max_abs_diff(predict_final_state(three, fixture::ket("100", kThree)), fixture::rho3_inf()) < 1e-15);

  CHECK(code_of([&] { predict_final_state(two, fixture::ket("11", kTwo)); }) == ErrorCode::UnsupportedSector);
  CHECK(code_of([&] { predict_final_state(two, fixture::ket("00", kTwo)); }) == ErrorCode::UnsupportedSector);

  auto lossy = fixture::collective_qubits(2, 0.001);
  fixture::add_local_decay(lossy, 1e-5);
  CHECK(code_of([&] { predict_final_state(build_model(lossy), fixture::ket("10", kTwo)); }) ==
        ErrorCode::NonIdealModel);
  const auto detuned = build_model(fixture::collective_qubits(2, 0.001, {0.0, 0.1}));
  CHECK(code_of([&] { predict_final_state(detuned, fixture::ket("10", kTwo)); }) == ErrorCode::NonIdealModel);
}

TEST_CASE("lab and rotating frames agree on frame-invariant observables") {
  std::mt19937_64 rng(61);
  const Bipartition ab{{0}, {1}};
  for (int rep = 0; rep < 3; ++rep) {
    auto spec = fixture::collective_qubits(2, 0.01, {0.0, 0.03 * rep});
    fixture::add_local_decay(spec, 0.002);
    const auto rot = build_model(spec);
    spec.frame = fixture::lab;
    const auto lab = build_model(spec);
    const ComplexMatrix rho0 = oracle::random_density(4, rng);
    const auto grid = uniform_grid(200.0, 5);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-12;
    const auto a = evolve(rot, rho0, grid, cfg);
    const auto b = evolve(lab, rho0, grid, cfg);
    CHECK(std::abs(energy(a.final_state, rot) - energy(b.final_state, lab)) < 1e-8);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(a.final_state(i, i) - b.final_state(i, i)) < 1e-8);
    CHECK(std::abs(log_negativity(a.final_state, rot.layout, ab) - log_negativity(b.final_state, lab.layout, ab)) <
          1e-7);
    if (rep == 0) {
      const auto minus = fixture::ket("psi_minus", kTwo);
      CHECK(std::abs(dark_overlap(a.final_state, minus) - dark_overlap(b.final_state, minus)) < 1e-8);
    }
  }
}

TEST_CASE("dark populations are conserved under ideal collective decay") {
  std::mt19937_64 rng(71);
  SUBCASE("two qubits, any initial state") {
    const auto model = build_model(fixture::collective_qubits(2, 0.01));
    const auto minus = fixture::ket("psi_minus", kTwo);
    for (int rep = 0; rep < 5; ++rep) {
      const ComplexMatrix rho0 = oracle::random_density(4, rng);
      const double p0 = dark_overlap(rho0, minus);
      evolve(model, rho0, uniform_grid(500.0, 11), {}, [&](double, const ComplexMatrix& rho, Record&) {
        CHECK(std::abs(dark_overlap(rho, minus) - p0) < 1e-8);
        return true;
      });
    }
  }
  SUBCASE("N qubits, initial support up to one excitation") {
    for (std::size_t n = 3; n <= 4; ++n) {
      const auto model = build_model(fixture::collective_qubits(n, 0.01));
      const DarkSubspace dark = dark_subspace(model, 1);
      REQUIRE(dark.dimension() == n - 1);
      const auto idx0 = model.sector_indices(0), idx1 = model.sector_indices(1);
      std::vector<std::size_t> support(idx0);
      support.insert(support.end(), idx1.begin(), idx1.end());
      const ComplexMatrix small = oracle::random_density(support.size(), rng);
      ComplexMatrix rho0(model.dim, model.dim);
      for (std::size_t i = 0; i < support.size(); ++i)
        for (std::size_t j = 0; j < support.size(); ++j) rho0(support[i], support[j]) = small(i, j);
      std::vector<double> p0;
      for (const auto& v : dark.basis) p0.push_back(dark_overlap(rho0, v));
      evolve(model, rho0, uniform_grid(500.0, 11), {}, [&](double, const ComplexMatrix& rho, Record&) {
        for (std::size_t i = 0; i < dark.basis.size(); ++i)
          CHECK(std::abs(dark_overlap(rho, dark.basis[i]) - p0[i]) < 1e-8);
        return true;
      });
    }
  }
}

TEST_CASE("energy is non-increasing without drives") {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 6; ++rep) {
    const std::size_t n = 2 + rep % 2;
    auto spec = qubit_chain(n);
    std::vector<Complex> w;
    for (std::size_t j = 0; j < n; ++j) w.push_back(std::polar(0.5 + u(rng), 2 * M_PI * u(rng)));
    spec.collective_channels.push_back({0.02 * u(rng), w, {}});
    fixture::add_local_decay(spec, 0.005 * u(rng));
    const auto model = build_model(spec);
    double last = std::numeric_limits<double>::infinity();
    evolve(model, oracle::random_density(model.dim, rng), uniform_grid(300.0, 61), {},
           [&](double, const ComplexMatrix& rho, Record&) {
             const double e = energy(rho, model);
             CHECK(e <= last + 1e-9);
             last = e;
             return true;
           });
  }
}

TEST_CASE("superradiant decay rate is 4 kappa") {
  const double kappa = 0.001;
  const auto model = build_model(fixture::collective_qubits(2, kappa));
  const auto plus = fixture::ket("psi_plus", kTwo);
  std::vector<double> t, logp;
  evolve(model, ComplexMatrix::projector(plus), uniform_grid(50.0, 26), {},
         [&](double time, const ComplexMatrix& rho, Record&) {
           t.push_back(time);
           logp.push_back(std::log(dark_overlap(rho, plus)));
           return true;
         });
  double st = 0, sl = 0, stt = 0, stl = 0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sl += logp[i];
    stt += t[i] * t[i];
    stl += t[i] * logp[i];
  }
  const double slope = (n * stl - st * sl) / (n * stt - st * st);
  CHECK(std::abs(-slope / (4 * kappa) - 1.0) < 0.01);
}

TEST_CASE("evolve matches the liouvillian exponential") {
  std::mt19937_64 rng(91);
  for (int rep = 0; rep < 5; ++rep) {
    const auto model = build_model(fixture::random_two_qubit(rng));
    const ComplexMatrix rho0 = oracle::random_density(4, rng);
    const std::vector<double> grid{0.0, 10.0};
    const auto traj = evolve(model, rho0, grid);
    CHECK(max_abs_diff(traj.final_state, expm_evolve(model, rho0, 10.0)) < 1e-7);
  }
}
