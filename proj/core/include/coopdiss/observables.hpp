#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coopdiss/matrix.hpp"
#include "coopdiss/model.hpp"

namespace coopdiss {

/// tr(rho H_free) with H_free the drive-free lab-frame Hamiltonian, in units
/// of hbar * omega. Frame independent.
double energy(const ComplexMatrix& rho, const ModelOperators& model);

/// <target|rho|target>. This is the quantity plotted as "fidelity".
double dark_overlap(const ComplexMatrix& rho, std::span<const Complex> target);
/// sqrt(<target|rho|target>), the literal tr sqrt(...) form.
double fidelity_sqrt(const ComplexMatrix& rho, std::span<const Complex> target);

/// Two disjoint, non-empty groups of subsystems (0-based). Subsystems in
/// neither group are traced out before the partial transpose.
struct Bipartition {
  std::vector<std::size_t> party_a;
  std::vector<std::size_t> party_b;
  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

/// log2 || rho^{T_B} ||_1, clamped at 0 from below.
double log_negativity(const ComplexMatrix& rho, const DimsLayout& layout, const Bipartition& parts);

struct DarkSubspace {
  int sector = 0;
  std::vector<StateVector> basis;
  std::size_t dimension() const noexcept { return basis.size(); }
};

DarkSubspace dark_subspace(const ModelOperators& model, int sector, double tol = 1e-9);

/// Dark bases for every sector >= 1, computed once for repeated reporting.
class DarkStructure {
 public:
  explicit DarkStructure(const ModelOperators& model, double tol = 1e-9);
  const std::vector<DarkSubspace>& sectors() const noexcept { return sectors_; }
  /// sum over sectors of tr(P_D rho P_D); no cross-sector terms.
  double weight(const ComplexMatrix& rho) const;

 private:
  std::vector<DarkSubspace> sectors_;
};

struct NesReport {
  std::vector<double> per_emitter_excitation;  // 1 - P(ground) per emitter
  double dark_weight = 0.0;
  bool is_nonequilibrium = false;
};

NesReport nes_report(const ComplexMatrix& rho, const ModelOperators& model);
NesReport nes_report(const ComplexMatrix& rho, const ModelOperators& model, const DarkStructure& dark);

struct StateChecks {
  double purity = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
  double hermiticity_error = 0.0;
};

StateChecks purity_and_checks(const ComplexMatrix& rho);

}  // namespace coopdiss
