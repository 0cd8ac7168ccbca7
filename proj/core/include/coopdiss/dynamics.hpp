#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coopdiss/matrix.hpp"
#include "coopdiss/model.hpp"

namespace coopdiss {

// Dissipator convention, fixed throughout:
//   D[L] rho = rate * (2 L rho L^dagger - L^dagger L rho - rho L^dagger L)
// so a bright two-emitter state loses population at 4 * kappa and a single
// emitter under a local channel at 2 * alpha.

/// Precompiled Lindblad generator. Stores K = H - i sum_k rate_k L_k^dagger L_k
/// and the jump operators in sparse form; rhs = -i (K rho - rho K^dagger)
/// + 2 sum_k rate_k L_k rho L_k^dagger.
class LindbladGenerator {
 public:
  explicit LindbladGenerator(const ModelOperators& model);

  std::size_t dim() const noexcept { return dim_; }
  /// out must be dim x dim; it is overwritten.
  void apply(const ComplexMatrix& rho, ComplexMatrix& out) const;
  ComplexMatrix apply(const ComplexMatrix& rho) const;

 private:
  struct Entry {
    std::size_t row;
    std::size_t col;
    Complex value;
  };
  struct SparseJump {
    double weight;  // 2 * rate
    std::vector<Entry> entries;
  };

  std::size_t dim_ = 0;
  std::vector<Entry> k_entries_;
  std::vector<SparseJump> jumps_;
  mutable ComplexMatrix scratch_;
};

ComplexMatrix lindblad_rhs(const ModelOperators& model, const ComplexMatrix& rho);

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0.0;  // 0 = pick automatically
  double max_step = std::numeric_limits<double>::infinity();
  bool hermitize_each_step = true;
  /// When set, take fixed steps of this size (clipped at grid points).
  std::optional<double> fixed_step;
  /// evolve() raises InvariantViolation if min eigenvalue drops below this.
  double min_eigenvalue_floor = -1e-6;
  std::size_t max_steps = 100'000'000;

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

/// Ordered name -> value record for one grid time.
class Record {
 public:
  void set(const std::string& name, double value);
  double at(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<std::pair<std::string, double>>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

struct EvolutionStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t hermitizations = 0;
  double max_trace_error = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Record> records;
  ComplexMatrix final_state;
  EvolutionStats stats;
  bool stopped_early = false;
};

/// Called at every grid time with the current state. Fill `record` with any
/// observables; return false to stop the evolution after this point.
using Observer = std::function<bool(double t, const ComplexMatrix& rho, Record& record)>;

/// Adaptive Dormand-Prince 5(4) with PI step control between grid points.
/// Every record gets "trace_error" and "min_eigenvalue" appended after the
/// observer runs; the trace is never renormalized.
Trajectory evolve(const ModelOperators& model, const ComplexMatrix& rho0, std::span<const double> time_grid,
                  const IntegratorConfig& config = {}, const Observer& observer = {});

/// Evenly spaced grid [0, horizon] with `points` entries.
std::vector<double> uniform_grid(double horizon, std::size_t points);

struct EffectiveHamiltonian {
  ComplexMatrix matrix;               // H - i sum rate L^dagger L
  std::vector<Complex> eigenvalues;   // grouped by sector, then by real part
  ComplexMatrix right_eigenvectors;   // columns, unit norm
  std::vector<int> sectors;           // excitation sector per eigenpair, -1 if H_eff mixes sectors
};

EffectiveHamiltonian effective_hamiltonian(const ModelOperators& model);

inline constexpr std::size_t kDefaultLiouvillianCap = 1024;  // on dim^2

/// Column-stacking convention: vec(rho)[i + j * dim] = rho(i, j), so that
/// vec(A rho B) = (B^T kron A) vec(rho).
ComplexMatrix liouvillian_matrix(const ModelOperators& model, std::size_t cap = kDefaultLiouvillianCap);
StateVector vectorize(const ComplexMatrix& rho);
ComplexMatrix unvectorize(std::span<const Complex> v, std::size_t dim);

/// Asymptotic state of an ideal collective-only, resonant model started in a
/// pure single-excitation state:
///   rho_inf = P_D |psi><psi| P_D + (1 - <psi|P_D|psi>) |vac><vac|.
/// Throws NonIdealModel or UnsupportedSector otherwise.
ComplexMatrix predict_final_state(const ModelOperators& model, std::span<const Complex> pure_initial);

}  // namespace coopdiss
