#include "coopdiss/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "coopdiss/error.hpp"
#include "coopdiss/linalg.hpp"

namespace coopdiss {

// ---------------------------------------------------------------------------
// Generator

LindbladGenerator::LindbladGenerator(const ModelOperators& model)
    : dim_(model.dim), scratch_(model.dim, model.dim) {
  ComplexMatrix k = model.hamiltonian;
  const Complex minus_i(0.0, -1.0);
  for (const auto& jump : model.jumps) {
    if (jump.rate == 0.0) continue;
    k += (minus_i * jump.rate) * (jump.op.adjoint() * jump.op);
    SparseJump sj{2.0 * jump.rate, {}};
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c)
        if (jump.op(r, c) != Complex{}) sj.entries.push_back({r, c, jump.op(r, c)});
    jumps_.push_back(std::move(sj));
  }
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t c = 0; c < dim_; ++c)
      if (k(r, c) != Complex{}) k_entries_.push_back({r, c, k(r, c)});
}

void LindbladGenerator::apply(const ComplexMatrix& rho, ComplexMatrix& out) const {
  if (rho.rows() != dim_ || rho.cols() != dim_ || out.rows() != dim_ || out.cols() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "lindblad_rhs: state dimension != model dimension");
  }
  const std::size_t n = dim_;
  const Complex minus_i(0.0, -1.0);
  std::fill(out.data().begin(), out.data().end(), Complex{});
  // -i K rho
  for (const auto& e : k_entries_) {
    const Complex a = minus_i * e.value;
    for (std::size_t j = 0; j < n; ++j) out(e.row, j) += a * rho(e.col, j);
  }
  // + i rho K^dagger  ->  (rho K^dagger)(i, r) = sum_c rho(i, c) conj(K(r, c))
  for (const auto& e : k_entries_) {
    const Complex a = Complex(0.0, 1.0) * std::conj(e.value);
    for (std::size_t i = 0; i < n; ++i) out(i, e.row) += a * rho(i, e.col);
  }
  // + 2 rate L rho L^dagger
  for (const auto& jump : jumps_) {
    std::fill(scratch_.data().begin(), scratch_.data().end(), Complex{});
    for (const auto& e : jump.entries)
      for (std::size_t j = 0; j < n; ++j) scratch_(e.row, j) += e.value * rho(e.col, j);
    for (const auto& e : jump.entries) {
      const Complex a = jump.weight * std::conj(e.value);
      for (std::size_t i = 0; i < n; ++i) out(i, e.row) += a * scratch_(i, e.col);
    }
  }
}

ComplexMatrix LindbladGenerator::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out(dim_, dim_);
  apply(rho, out);
  return out;
}

ComplexMatrix lindblad_rhs(const ModelOperators& model, const ComplexMatrix& rho) {
  return LindbladGenerator(model).apply(rho);
}

// ---------------------------------------------------------------------------
// Records

void Record::set(const std::string& name, double value) {
  for (auto& [k, v] : entries_) {
    if (k == name) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(name, value);
}

double Record::at(const std::string& name) const {
  for (const auto& [k, v] : entries_)
    if (k == name) return v;
  throw Error(ErrorCode::UnknownLabel, "no observable named '" + name + "' in record");
}

bool Record::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& kv) { return kv.first == name; });
}

std::vector<double> uniform_grid(double horizon, std::size_t points) {
  if (points < 2 || !(horizon > 0.0)) throw Error(ErrorCode::ValidationError, "grid needs horizon > 0 and >= 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = horizon * static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = horizon;
  return g;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

void hermitize(ComplexMatrix& m) {
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
  }
}

// out = y + h * sum coeffs[s] * k[s]
void combine(ComplexMatrix& out, const ComplexMatrix& y, double h, std::initializer_list<double> coeffs,
             std::initializer_list<const ComplexMatrix*> ks) {
  auto o = out.data();
  const auto yd = y.data();
  std::copy(yd.begin(), yd.end(), o.begin());
  auto c = coeffs.begin();
  for (const ComplexMatrix* k : ks) {
    const double w = h * *c++;
    if (w == 0.0) continue;
    const auto kd = k->data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += w * kd[i];
  }
}

class DormandPrince {
 public:
  DormandPrince(const LindbladGenerator& gen, const IntegratorConfig& cfg)
      : gen_(gen), cfg_(cfg), n_(gen.dim()),
        k1_(n_, n_), k2_(n_, n_), k3_(n_, n_), k4_(n_, n_), k5_(n_, n_), k6_(n_, n_), k7_(n_, n_),
        tmp_(n_, n_), ynew_(n_, n_) {}

  void reset(const ComplexMatrix& y) {
    gen_.apply(y, k1_);
    have_k1_ = true;
  }

  double initial_step(const ComplexMatrix& y, double span) const {
    if (cfg_.initial_step > 0.0) return std::min(cfg_.initial_step, span);
    double d0 = 0.0, d1 = 0.0;
    const std::span<const Complex> yd = y.data(), fd = k1_.data();
    for (std::size_t i = 0; i < yd.size(); ++i) {
      const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(yd[i]);
      d0 = std::max(d0, std::abs(yd[i]) / sc);
      d1 = std::max(d1, std::abs(fd[i]) / sc);
    }
    const double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return std::min({h, span, cfg_.max_step});
  }

  // One trial step of size h from (t, y). Returns the scaled error norm and
  // leaves the candidate in ynew_ and f(ynew) in k7_.
  double trial(const ComplexMatrix& y, double h) {
    combine(tmp_, y, h, {a21}, {&k1_});
    gen_.apply(tmp_, k2_);
    combine(tmp_, y, h, {a31, a32}, {&k1_, &k2_});
    gen_.apply(tmp_, k3_);
    combine(tmp_, y, h, {a41, a42, a43}, {&k1_, &k2_, &k3_});
    gen_.apply(tmp_, k4_);
    combine(tmp_, y, h, {a51, a52, a53, a54}, {&k1_, &k2_, &k3_, &k4_});
    gen_.apply(tmp_, k5_);
    combine(tmp_, y, h, {a61, a62, a63, a64, a65}, {&k1_, &k2_, &k3_, &k4_, &k5_});
    gen_.apply(tmp_, k6_);
    combine(ynew_, y, h, {b1, 0.0, b3, b4, b5, b6}, {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_});
    gen_.apply(ynew_, k7_);

    double err = 0.0;
    const std::span<const Complex> yd = y.data(), yn = std::as_const(ynew_).data();
    const std::span<const Complex> d1 = k1_.data(), d3 = k3_.data(), d4 = k4_.data(), d5 = k5_.data(),
                                   d6 = k6_.data(), d7 = k7_.data();
    for (std::size_t i = 0; i < yd.size(); ++i) {
      const Complex est = h * (e1 * d1[i] + e3 * d3[i] + e4 * d4[i] + e5 * d5[i] + e6 * d6[i] + e7 * d7[i]);
      const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(yd[i]), std::abs(yn[i]));
      err = std::max(err, std::abs(est) / sc);
    }
    return err;
  }

  void accept(ComplexMatrix& y) {
    std::swap(y, ynew_);
    std::swap(k1_, k7_);
  }

  void hermitize_state(ComplexMatrix& y) {
    hermitize(y);
    hermitize(k1_);
  }

 private:
  const LindbladGenerator& gen_;
  const IntegratorConfig& cfg_;
  std::size_t n_;
  ComplexMatrix k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
  bool have_k1_ = false;
};

double min_eigenvalue_of(const ComplexMatrix& rho) {
  ComplexMatrix h = rho;
  hermitize(h);
  return hermitian_eigen(h, std::numeric_limits<double>::infinity()).values.front();
}

}  // namespace

Trajectory evolve(const ModelOperators& model, const ComplexMatrix& rho0, std::span<const double> time_grid,
                  const IntegratorConfig& config, const Observer& observer) {
  if (!rho0.is_square() || rho0.rows() != model.dim) {
    throw Error(ErrorCode::DimensionMismatch, "evolve: initial state dimension != model dimension");
  }
  if (time_grid.empty()) throw Error(ErrorCode::ValidationError, "evolve: empty time grid");
  for (std::size_t i = 1; i < time_grid.size(); ++i)
    if (!(time_grid[i] > time_grid[i - 1])) throw Error(ErrorCode::ValidationError, "evolve: grid must increase");
  if (!(config.rel_tol > 0.0) || !(config.abs_tol > 0.0))
    throw Error(ErrorCode::ValidationError, "evolve: tolerances must be > 0");
  if (config.fixed_step && !(*config.fixed_step > 0.0))
    throw Error(ErrorCode::ValidationError, "evolve: fixed step must be > 0");

  const LindbladGenerator gen(model);
  DormandPrince stepper(gen, config);
  Trajectory traj;
  ComplexMatrix y = rho0;
  double t = time_grid.front();

  auto observe = [&](double at) {
    Record rec;
    const bool keep_going = observer ? observer(at, y, rec) : true;
    const double trace_error = std::abs(y.trace() - Complex(1.0));
    const double min_eig = min_eigenvalue_of(y);
    rec.set("trace_error", trace_error);
    rec.set("min_eigenvalue", min_eig);
    traj.stats.max_trace_error = std::max(traj.stats.max_trace_error, trace_error);
    traj.stats.min_eigenvalue = std::min(traj.stats.min_eigenvalue, min_eig);
    traj.times.push_back(at);
    traj.records.push_back(std::move(rec));
    if (min_eig < config.min_eigenvalue_floor) {
      throw Error(ErrorCode::InvariantViolation, "min eigenvalue " + std::to_string(min_eig) + " at t = " +
                                                     std::to_string(at));
    }
    return keep_going;
  };

  stepper.reset(y);
  if (!observe(t)) {
    traj.final_state = y;
    traj.stopped_early = time_grid.size() > 1;
    return traj;
  }

  double h = config.fixed_step ? *config.fixed_step
                               : stepper.initial_step(y, time_grid.back() - time_grid.front());
  double err_old = 1e-4;
  std::size_t steps = 0;

  for (std::size_t g = 1; g < time_grid.size(); ++g) {
    const double target = time_grid[g];
    while (t < target) {
      if (++steps > config.max_steps) throw Error(ErrorCode::StepSizeUnderflow, "max_steps exceeded");
      const double remaining = target - t;
      const double wanted = std::min(h, config.max_step);
      const bool clipped = wanted >= remaining;
      const double step = clipped ? remaining : wanted;
      if (step < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        throw Error(ErrorCode::StepSizeUnderflow, "step size underflow at t = " + std::to_string(t));
      }
      const double err = stepper.trial(y, step);
      if (config.fixed_step || err <= 1.0) {
        stepper.accept(y);
        t = clipped ? target : t + step;
        if (config.hermitize_each_step) {
          stepper.hermitize_state(y);
          ++traj.stats.hermitizations;
        }
        ++traj.stats.accepted_steps;
        if (!config.fixed_step) {
          const double e = std::max(err, 1e-10);
          double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_old, 0.04);
          fac = std::clamp(fac, 0.2, 10.0);
          // A step shortened only to land on the grid does not shrink the proposal.
          if (!clipped) h = step * fac;
          err_old = std::max(err, 1e-4);
        }
      } else {
        ++traj.stats.rejected_steps;
        h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
    if (!observe(target)) {
      traj.stopped_early = g + 1 < time_grid.size();
      break;
    }
  }
  traj.final_state = y;
  return traj;
}

// ---------------------------------------------------------------------------
// Spectral views

EffectiveHamiltonian effective_hamiltonian(const ModelOperators& model) {
  EffectiveHamiltonian out;
  out.matrix = model.hamiltonian;
  const Complex minus_i(0.0, -1.0);
  for (const auto& jump : model.jumps) out.matrix += (minus_i * jump.rate) * (jump.op.adjoint() * jump.op);

  const std::size_t n = model.dim;
  const double scale = std::max(1.0, out.matrix.max_abs());
  bool conserves = true;
  for (std::size_t i = 0; i < n && conserves; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (model.excitation_numbers[i] != model.excitation_numbers[j] && std::abs(out.matrix(i, j)) > 1e-14 * scale) {
        conserves = false;
        break;
      }

  out.right_eigenvectors = ComplexMatrix(n, n);
  auto sort_pairs = [](std::vector<std::size_t>& order, const std::vector<Complex>& vals) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (vals[a].real() != vals[b].real()) return vals[a].real() < vals[b].real();
      return vals[a].imag() > vals[b].imag();
    });
  };

  if (conserves) {
    std::size_t col = 0;
    for (int k = 0; k <= model.max_excitation(); ++k) {
      const auto idx = model.sector_indices(k);
      if (idx.empty()) continue;
      ComplexMatrix block(idx.size(), idx.size());
      for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b) block(a, b) = out.matrix(idx[a], idx[b]);
      const GeneralEigen eig = general_eigen(block);
      std::vector<std::size_t> order(idx.size());
      std::iota(order.begin(), order.end(), 0);
      sort_pairs(order, eig.values);
      for (std::size_t o : order) {
        out.eigenvalues.push_back(eig.values[o]);
        out.sectors.push_back(k);
        for (std::size_t a = 0; a < idx.size(); ++a) out.right_eigenvectors(idx[a], col) = eig.vectors(a, o);
        ++col;
      }
    }
  } else {
    const GeneralEigen eig = general_eigen(out.matrix);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    sort_pairs(order, eig.values);
    for (std::size_t c = 0; c < n; ++c) {
      out.eigenvalues.push_back(eig.values[order[c]]);
      out.sectors.push_back(-1);
      for (std::size_t r = 0; r < n; ++r) out.right_eigenvectors(r, c) = eig.vectors(r, order[c]);
    }
  }
  for (const auto& v : out.eigenvalues) {
    if (v.imag() > 1e-10 * scale) {
      throw Error(ErrorCode::ConvergenceFailure, "effective Hamiltonian eigenvalue with positive imaginary part");
    }
  }
  return out;
}

StateVector vectorize(const ComplexMatrix& rho) {
  const std::size_t d = rho.rows();
  StateVector v(d * rho.cols());
  for (std::size_t j = 0; j < rho.cols(); ++j)
    for (std::size_t i = 0; i < d; ++i) v[i + j * d] = rho(i, j);
  return v;
}

ComplexMatrix unvectorize(std::span<const Complex> v, std::size_t dim) {
  if (v.size() != dim * dim) throw Error(ErrorCode::DimensionMismatch, "unvectorize: length != dim^2");
  ComplexMatrix rho(dim, dim);
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t i = 0; i < dim; ++i) rho(i, j) = v[i + j * dim];
  return rho;
}

ComplexMatrix liouvillian_matrix(const ModelOperators& model, std::size_t cap) {
  const std::size_t d = model.dim;
  if (d * d > cap) {
    throw Error(ErrorCode::DimensionCapExceeded, "Liouvillian of dimension " + std::to_string(d * d) +
                                                     " exceeds cap " + std::to_string(cap));
  }
  const ComplexMatrix id = ComplexMatrix::identity(d);
  const Complex minus_i(0.0, -1.0);
  ComplexMatrix l = minus_i * (kron(id, model.hamiltonian) - kron(model.hamiltonian.transpose(), id));
  for (const auto& jump : model.jumps) {
    if (jump.rate == 0.0) continue;
    const ComplexMatrix ldl = jump.op.adjoint() * jump.op;
    l += Complex(jump.rate) * (Complex(2.0) * kron(jump.op.conj(), jump.op) - kron(id, ldl) - kron(ldl.transpose(), id));
  }
  return l;
}

// ---------------------------------------------------------------------------

ComplexMatrix predict_final_state(const ModelOperators& model, std::span<const Complex> pure_initial) {
  if (pure_initial.size() != model.dim) {
    throw Error(ErrorCode::DimensionMismatch, "predict_final_state: vector length != model dimension");
  }
  bool has_collective = false;
  for (const auto& j : model.jumps) {
    if (!j.collective && j.rate != 0.0) throw Error(ErrorCode::NonIdealModel, "local channel '" + j.label + "' is active");
    if (j.collective && j.rate > 0.0) has_collective = true;
  }
  if (!has_collective) throw Error(ErrorCode::NonIdealModel, "no active collective channel");
  for (const auto& d : model.spec.drives)
    if (d.amplitude != 0.0 || d.detuning != 0.0) throw Error(ErrorCode::NonIdealModel, "drives are active");

  const auto single = model.sector_indices(1);
  if (single.empty()) throw Error(ErrorCode::UnsupportedSector, "model has no single-excitation sector");
  // Resonance: H restricted to the single-excitation sector must be c * I.
  const Complex c0 = model.hamiltonian(single[0], single[0]);
  for (std::size_t a = 0; a < single.size(); ++a)
    for (std::size_t b = 0; b < single.size(); ++b) {
      const Complex expected = a == b ? c0 : Complex{};
      if (std::abs(model.hamiltonian(single[a], single[b]) - expected) > 1e-12) {
        throw Error(ErrorCode::NonIdealModel, "emitters are not mutually resonant");
      }
    }

  StateVector psi(pure_initial.begin(), pure_initial.end());
  const double nrm = norm(psi);
  if (!(nrm > 0.0)) throw Error(ErrorCode::NonNormalizable, "initial vector has zero norm");
  for (auto& z : psi) z /= nrm;
  std::vector<bool> in_sector(model.dim, false);
  for (std::size_t i : single) in_sector[i] = true;
  for (std::size_t i = 0; i < model.dim; ++i) {
    if (!in_sector[i] && std::abs(psi[i]) > 1e-12) {
      throw Error(ErrorCode::UnsupportedSector,
                  "initial state has support outside the single-excitation sector; evolve it instead");
    }
  }

  StateVector projected(model.dim);
  for (const auto& v : collective_kernel_in_sector(model, 1)) {
    const Complex amp = inner(v, psi);
    for (std::size_t i = 0; i < model.dim; ++i) projected[i] += amp * v[i];
  }
  const double dark_population = std::pow(norm(projected), 2);
  ComplexMatrix rho = ComplexMatrix::projector(projected);
  rho(model.vacuum_index(), model.vacuum_index()) += 1.0 - dark_population;
  return rho;
}

}  // namespace coopdiss
