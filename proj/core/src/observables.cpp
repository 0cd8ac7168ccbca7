#include "coopdiss/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coopdiss/error.hpp"
#include "coopdiss/linalg.hpp"

namespace coopdiss {

namespace {

void require_state(const ComplexMatrix& rho, std::size_t dim, const char* op) {
  if (!rho.is_square() || rho.rows() != dim) {
    throw Error(ErrorCode::DimensionMismatch, std::string(op) + ": state dimension " + std::to_string(rho.rows()) +
                                                  " != " + std::to_string(dim));
  }
}

double expectation(const ComplexMatrix& rho, std::span<const Complex> v) {
  double acc = 0.0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == Complex{}) continue;
    Complex row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += rho(i, j) * v[j];
    acc += (std::conj(v[i]) * row).real();
  }
  return acc;
}

}  // namespace

double energy(const ComplexMatrix& rho, const ModelOperators& model) {
  require_state(rho, model.dim, "energy");
  double e = 0.0;
  for (std::size_t i = 0; i < model.dim; ++i) e += model.free_energies[i] * rho(i, i).real();
  return e;
}

double dark_overlap(const ComplexMatrix& rho, std::span<const Complex> target) {
  require_state(rho, target.size(), "dark_overlap");
  return expectation(rho, target);
}

double fidelity_sqrt(const ComplexMatrix& rho, std::span<const Complex> target) {
  return std::sqrt(std::max(0.0, dark_overlap(rho, target)));
}

double log_negativity(const ComplexMatrix& rho, const DimsLayout& layout, const Bipartition& parts) {
  require_state(rho, layout.total_dim(), "log_negativity");
  if (parts.party_a.empty() || parts.party_b.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "log_negativity: both parties must be non-empty");
  }
  std::vector<std::size_t> keep;
  std::vector<bool> in_b(layout.size(), false), seen(layout.size(), false);
  for (auto group : {&parts.party_a, &parts.party_b}) {
    for (std::size_t s : *group) {
      if (s >= layout.size() || seen[s]) throw Error(ErrorCode::DimensionMismatch, "log_negativity: bad bipartition");
      seen[s] = true;
      in_b[s] = group == &parts.party_b;
    }
  }
  for (std::size_t s = 0; s < layout.size(); ++s)
    if (seen[s]) keep.push_back(s);

  ComplexMatrix reduced = rho;
  DimsLayout reduced_layout = layout;
  if (keep.size() != layout.size()) {
    reduced = partial_trace(rho, layout, keep);
    std::vector<std::size_t> dims;
    for (std::size_t s : keep) dims.push_back(layout.dim(s));
    reduced_layout = DimsLayout(dims);
  }
  ComplexMatrix pt = reduced;
  for (std::size_t r = 0; r < keep.size(); ++r)
    if (in_b[keep[r]]) pt = partial_transpose(pt, reduced_layout, r);

  // ||pt||_1 = tr(pt) + 2 * (sum of negative eigenvalues). Eigenvalues inside
  // the roundoff band count as zero so that PPT states give exactly 0.
  const auto eig = hermitian_eigen(pt, std::max(1e-9, 10 * hermiticity_error(reduced)));
  const double scale = std::max(1.0, std::abs(eig.values.back()));
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(pt.rows()) * scale;
  double negative = 0.0;
  for (double v : eig.values)
    if (v < -noise) negative -= v;
  if (negative == 0.0) return 0.0;
  return std::max(0.0, std::log2(pt.trace().real() + 2.0 * negative));
}

DarkSubspace dark_subspace(const ModelOperators& model, int sector, double tol) {
  return DarkSubspace{sector, collective_kernel_in_sector(model, sector, tol)};
}

DarkStructure::DarkStructure(const ModelOperators& model, double tol) {
  for (int k = 1; k <= model.max_excitation(); ++k) {
    auto d = dark_subspace(model, k, tol);
    if (d.dimension() > 0) sectors_.push_back(std::move(d));
  }
}

double DarkStructure::weight(const ComplexMatrix& rho) const {
  double w = 0.0;
  for (const auto& s : sectors_)
    for (const auto& v : s.basis) w += expectation(rho, v);
  return w;
}

NesReport nes_report(const ComplexMatrix& rho, const ModelOperators& model) {
  return nes_report(rho, model, DarkStructure(model));
}

NesReport nes_report(const ComplexMatrix& rho, const ModelOperators& model, const DarkStructure& dark) {
  require_state(rho, model.dim, "nes_report");
  NesReport r;
  for (std::size_t s = 0; s < model.layout.size(); ++s) {
    const std::size_t keep[] = {s};
    const ComplexMatrix local = partial_trace(rho, model.layout, keep);
    r.per_emitter_excitation.push_back(std::clamp(1.0 - local(0, 0).real(), 0.0, 1.0));
  }
  r.dark_weight = std::clamp(dark.weight(rho), 0.0, 1.0);
  const auto [lo, hi] = std::minmax_element(r.per_emitter_excitation.begin(), r.per_emitter_excitation.end());
  r.is_nonequilibrium = (*hi - *lo) > 1e-9;
  return r;
}

StateChecks purity_and_checks(const ComplexMatrix& rho) {
  if (!rho.is_square()) throw Error(ErrorCode::DimensionMismatch, "purity_and_checks: matrix not square");
  StateChecks c;
  const std::size_t n = rho.rows();
  double p = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p += (rho(i, j) * rho(j, i)).real();
  c.purity = p;
  c.trace_error = std::abs(rho.trace() - Complex(1.0));
  c.hermiticity_error = hermiticity_error(rho);
  ComplexMatrix h = 0.5 * (rho + rho.adjoint());
  c.min_eigenvalue = hermitian_eigen(h, std::numeric_limits<double>::infinity()).values.front();
  return c;
}

}  // namespace coopdiss
