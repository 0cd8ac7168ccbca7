#include "coopdiss/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coopdiss/error.hpp"
#include "coopdiss/linalg.hpp"

namespace coopdiss {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ValidationError, field + ": " + why);
}

void check_transition(const SystemSpec& spec, std::size_t emitter, Transition t, const std::string& field) {
  if (emitter >= spec.emitters.size()) invalid(field, "emitter index out of range");
  const std::size_t levels = spec.emitters[emitter].levels;
  if (t.upper >= levels || t.lower >= levels || t.upper <= t.lower) {
    throw Error(ErrorCode::InvalidTransition, field + ": transition (" + std::to_string(t.upper) + " -> " +
                                                  std::to_string(t.lower) + ") invalid for a " +
                                                  std::to_string(levels) + "-level emitter");
  }
}

Transition channel_transition(const CollectiveChannelSpec& c, std::size_t emitter) {
  return c.transitions.empty() ? Transition{} : c.transitions.at(emitter);
}

}  // namespace

SystemSpec qubit_chain(std::size_t count, double omega, std::vector<double> detunings) {
  SystemSpec spec;
  for (std::size_t j = 0; j < count; ++j) {
    const double d = j < detunings.size() ? detunings[j] : 0.0;
    spec.emitters.push_back(EmitterSpec{2, {0.0, omega + d}, {}});
  }
  return spec;
}

void validate(const SystemSpec& spec) {
  if (spec.emitters.empty()) invalid("emitters", "at least one emitter required");
  std::size_t total = 1;
  for (std::size_t j = 0; j < spec.emitters.size(); ++j) {
    const auto& e = spec.emitters[j];
    const std::string f = "emitters[" + std::to_string(j) + "]";
    if (e.levels < 2) invalid(f + ".levels", "must be >= 2");
    if (e.level_frequencies.size() != e.levels) invalid(f + ".frequencies", "need one frequency per level");
    if (e.level_frequencies[0] != 0.0) invalid(f + ".frequencies", "level 0 must sit at 0");
    for (std::size_t l = 0; l < e.levels; ++l) {
      if (!std::isfinite(e.level_frequencies[l])) invalid(f + ".frequencies", "must be finite");
      if (l > 0 && e.level_frequencies[l] <= e.level_frequencies[l - 1])
        invalid(f + ".frequencies", "must be strictly increasing");
    }
    if (!e.excitations.empty()) {
      if (e.excitations.size() != e.levels) invalid(f + ".excitations", "need one entry per level");
      if (e.excitations[0] != 0) invalid(f + ".excitations", "ground level carries 0 quanta");
      for (int x : e.excitations)
        if (x < 0) invalid(f + ".excitations", "must be non-negative");
    }
    total *= e.levels;
    if (total > spec.dimension_cap) {
      throw Error(ErrorCode::DimensionCapExceeded, "Hilbert dimension exceeds cap " +
                                                       std::to_string(spec.dimension_cap));
    }
  }
  for (std::size_t c = 0; c < spec.collective_channels.size(); ++c) {
    const auto& ch = spec.collective_channels[c];
    const std::string f = "collective_channels[" + std::to_string(c) + "]";
    if (!(ch.rate >= 0.0) || !std::isfinite(ch.rate)) invalid(f + ".rate", "must be finite and >= 0");
    if (ch.weights.size() != spec.emitters.size()) invalid(f + ".weights", "need one weight per emitter");
    if (!ch.transitions.empty() && ch.transitions.size() != spec.emitters.size())
      invalid(f + ".transitions", "need one transition per emitter");
    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < ch.weights.size(); ++j) {
      if (!std::isfinite(ch.weights[j].real()) || !std::isfinite(ch.weights[j].imag()))
        invalid(f + ".weights", "must be finite");
      if (ch.weights[j] != Complex{}) {
        ++nonzero;
        check_transition(spec, j, channel_transition(ch, j), f + ".transitions");
      }
    }
    if (nonzero < 2) invalid(f + ".weights", "a collective channel needs at least 2 nonzero weights");
  }
  for (std::size_t c = 0; c < spec.local_channels.size(); ++c) {
    const auto& ch = spec.local_channels[c];
    const std::string f = "local_channels[" + std::to_string(c) + "]";
    if (!(ch.rate >= 0.0) || !std::isfinite(ch.rate)) invalid(f + ".rate", "must be finite and >= 0");
    check_transition(spec, ch.emitter, ch.transition, f);
  }
  for (std::size_t d = 0; d < spec.drives.size(); ++d) {
    const auto& dr = spec.drives[d];
    const std::string f = "drives[" + std::to_string(d) + "]";
    if (!std::isfinite(dr.amplitude) || !std::isfinite(dr.detuning)) invalid(f, "must be finite");
    check_transition(spec, dr.emitter, dr.transition, f);
    if (spec.frame.kind == Frame::Kind::Lab) invalid(f, "drives require the rotating frame");
  }
  if (!std::isfinite(spec.frame.reference)) invalid("frame.reference", "must be finite");
}

DimsLayout layout_of(const SystemSpec& spec) {
  std::vector<std::size_t> dims;
  for (const auto& e : spec.emitters) dims.push_back(e.levels);
  return DimsLayout(std::move(dims));
}

std::vector<std::size_t> ModelOperators::sector_indices(int excitations) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < excitation_numbers.size(); ++i)
    if (excitation_numbers[i] == excitations) idx.push_back(i);
  return idx;
}

int ModelOperators::max_excitation() const {
  return excitation_numbers.empty() ? 0 : *std::max_element(excitation_numbers.begin(), excitation_numbers.end());
}

ComplexMatrix transition_operator(std::size_t levels, Transition t) {
  if (t.upper >= levels || t.lower >= levels || t.upper == t.lower) {
    throw Error(ErrorCode::InvalidTransition, "transition outside a " + std::to_string(levels) + "-level space");
  }
  ComplexMatrix op(levels, levels);
  op(t.lower, t.upper) = 1.0;
  return op;
}

ComplexMatrix lift_site_operator(const ComplexMatrix& local_op, std::size_t site, const DimsLayout& layout) {
  if (site >= layout.size()) throw Error(ErrorCode::DimensionMismatch, "lift_site_operator: no such site");
  if (!local_op.is_square() || local_op.rows() != layout.dim(site)) {
    throw Error(ErrorCode::DimensionMismatch, "lift_site_operator: local operator dimension != site dimension");
  }
  // Direct index construction; equivalent to the Kronecker chain but O(dim * d).
  const std::size_t n = layout.total_dim();
  ComplexMatrix out(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    auto digits = layout.digits(col);
    const std::size_t in_level = digits[site];
    for (std::size_t out_level = 0; out_level < local_op.rows(); ++out_level) {
      const Complex a = local_op(out_level, in_level);
      if (a == Complex{}) continue;
      digits[site] = out_level;
      out(layout.flat_index(digits), col) += a;
    }
  }
  return out;
}

ComplexMatrix collective_lowering(const CollectiveChannelSpec& spec, const DimsLayout& layout) {
  if (spec.weights.size() != layout.size()) {
    throw Error(ErrorCode::DimensionMismatch, "collective_lowering: one weight per emitter required");
  }
  ComplexMatrix op(layout.total_dim(), layout.total_dim());
  for (std::size_t j = 0; j < layout.size(); ++j) {
    if (spec.weights[j] == Complex{}) continue;
    op += spec.weights[j] * lift_site_operator(transition_operator(layout.dim(j), channel_transition(spec, j)), j, layout);
  }
  return op;
}

ModelOperators build_model(const SystemSpec& spec) {
  validate(spec);
  ModelOperators m;
  m.spec = spec;
  m.layout = layout_of(spec);
  m.dim = m.layout.total_dim();
  m.free_energies.assign(m.dim, 0.0);
  m.excitation_numbers.assign(m.dim, 0);

  const bool rotating = spec.frame.kind == Frame::Kind::Rotating;
  std::vector<double> frame_energies(m.dim, 0.0);
  for (std::size_t i = 0; i < m.dim; ++i) {
    const auto digits = m.layout.digits(i);
    for (std::size_t s = 0; s < digits.size(); ++s) {
      const auto& e = spec.emitters[s];
      const double f = e.level_frequencies[digits[s]];
      const int x = e.excitation_of(digits[s]);
      m.free_energies[i] += f;
      m.excitation_numbers[i] += x;
      frame_energies[i] += rotating ? f - spec.frame.reference * x : f;
    }
  }
  m.hamiltonian = ComplexMatrix::diagonal(frame_energies);

  for (const auto& d : spec.drives) {
    const std::size_t levels = spec.emitters[d.emitter].levels;
    ComplexMatrix local(levels, levels);
    local(d.transition.upper, d.transition.lower) = d.amplitude;
    local(d.transition.lower, d.transition.upper) = d.amplitude;
    local(d.transition.upper, d.transition.upper) = d.detuning;
    m.hamiltonian += lift_site_operator(local, d.emitter, m.layout);
  }

  for (std::size_t c = 0; c < spec.collective_channels.size(); ++c) {
    const auto& ch = spec.collective_channels[c];
    m.jumps.push_back(Jump{ch.rate, collective_lowering(ch, m.layout), true, "collective" + std::to_string(c + 1)});
  }
  for (const auto& ch : spec.local_channels) {
    const auto local = transition_operator(spec.emitters[ch.emitter].levels, ch.transition);
    m.jumps.push_back(Jump{ch.rate, lift_site_operator(local, ch.emitter, m.layout), false,
                           "local" + std::to_string(ch.emitter + 1) + ":" + std::to_string(ch.transition.upper) +
                               "->" + std::to_string(ch.transition.lower)});
  }
  return m;
}

std::vector<StateVector> collective_kernel_in_sector(const ModelOperators& model, int k, double tol) {
  const auto cols = model.sector_indices(k);
  if (cols.empty()) return {};
  std::vector<const ComplexMatrix*> ops;
  for (const auto& j : model.jumps)
    if (j.collective) ops.push_back(&j.op);

  std::vector<StateVector> full;
  if (ops.empty()) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      StateVector v(model.dim);
      v[cols[c]] = 1.0;
      full.push_back(std::move(v));
    }
    return full;
  }
  // Stack every collective operator's columns restricted to the sector.
  ComplexMatrix stacked(ops.size() * model.dim, cols.size());
  for (std::size_t o = 0; o < ops.size(); ++o)
    for (std::size_t r = 0; r < model.dim; ++r)
      for (std::size_t c = 0; c < cols.size(); ++c) stacked(o * model.dim + r, c) = (*ops[o])(r, cols[c]);

  for (const auto& v : kernel_basis(stacked, tol)) {
    StateVector w(model.dim);
    for (std::size_t c = 0; c < cols.size(); ++c) w[cols[c]] = v[c];
    full.push_back(std::move(w));
  }
  return full;
}

// ---------------------------------------------------------------------------

StateSpec StateSpec::named(std::string label) {
  StateSpec s;
  s.kind = Kind::Named;
  s.label = std::move(label);
  return s;
}

StateSpec StateSpec::from_amplitudes(std::vector<std::pair<std::string, Complex>> amps) {
  StateSpec s;
  s.kind = Kind::Amplitudes;
  s.amplitudes = std::move(amps);
  return s;
}

StateSpec StateSpec::mix(std::vector<MixtureComponent> parts) {
  StateSpec s;
  s.kind = Kind::Mixture;
  s.mixture = std::move(parts);
  return s;
}

std::string StateSpec::describe() const {
  switch (kind) {
    case Kind::Named: return label;
    case Kind::Amplitudes: {
      std::string out = "sup";
      for (const auto& [basis, amp] : amplitudes) {
        (void)amp;
        out += "_" + basis;
      }
      return out;
    }
    case Kind::Mixture: {
      std::string out = "mix";
      for (const auto& part : mixture) out += "_" + part.state.describe();
      return out;
    }
  }
  return "state";
}

bool operator==(const StateSpec& a, const StateSpec& b) {
  return a.kind == b.kind && a.label == b.label && a.amplitudes == b.amplitudes && a.mixture == b.mixture;
}

bool operator==(const MixtureComponent& a, const MixtureComponent& b) {
  return a.weight == b.weight && a.state == b.state;
}

namespace {

std::size_t basis_index(const std::string& bits, const DimsLayout& layout) {
  if (bits.size() != layout.size()) {
    throw Error(ErrorCode::UnknownLabel, "basis string '" + bits + "' needs " + std::to_string(layout.size()) +
                                             " characters");
  }
  std::vector<std::size_t> digits(bits.size());
  for (std::size_t s = 0; s < bits.size(); ++s) {
    const char ch = bits[s];
    if (ch < '0' || ch > '9' || static_cast<std::size_t>(ch - '0') >= layout.dim(s)) {
      throw Error(ErrorCode::UnknownLabel, "basis string '" + bits + "' has an invalid level at position " +
                                               std::to_string(s + 1));
    }
    digits[s] = static_cast<std::size_t>(ch - '0');
  }
  return layout.flat_index(digits);
}

StateVector single_excitation_combination(const DimsLayout& layout, const std::vector<double>& coeffs) {
  StateVector v(layout.total_dim());
  std::vector<std::size_t> digits(layout.size(), 0);
  for (std::size_t s = 0; s < layout.size(); ++s) {
    digits[s] = 1;
    v[layout.flat_index(digits)] = coeffs[s];
    digits[s] = 0;
  }
  return v;
}

StateVector named_state(const std::string& label, const DimsLayout& layout) {
  const std::size_t n = layout.size();
  auto need = [&](std::size_t count) {
    if (n != count) {
      throw Error(ErrorCode::UnknownLabel, "'" + label + "' is defined for " + std::to_string(count) +
                                               " emitters, system has " + std::to_string(n));
    }
  };
  if (label == "psi_plus") {
    need(2);
    return single_excitation_combination(layout, {1.0, 1.0});
  }
  if (label == "psi_minus") {
    need(2);
    return single_excitation_combination(layout, {1.0, -1.0});
  }
  if (label == "W" || label == "psi1") {
    if (n < 2) throw Error(ErrorCode::UnknownLabel, "'W' needs at least 2 emitters");
    return single_excitation_combination(layout, std::vector<double>(n, 1.0));
  }
  if (label == "psi2") {
    need(3);
    return single_excitation_combination(layout, {2.0, -1.0, -1.0});
  }
  if (label == "psi3") {
    need(3);
    return single_excitation_combination(layout, {0.0, 1.0, -1.0});
  }
  if (!label.empty() && std::all_of(label.begin(), label.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    StateVector v(layout.total_dim());
    v[basis_index(label, layout)] = 1.0;
    return v;
  }
  throw Error(ErrorCode::UnknownLabel, "unknown state label '" + label + "'");
}

void normalize(StateVector& v, const std::string& what) {
  const double nv = norm(v);
  if (!(nv > 1e-300) || !std::isfinite(nv)) throw Error(ErrorCode::NonNormalizable, what + " has zero norm");
  for (auto& z : v) z /= nv;
}

}  // namespace

StateVector build_state_vector(const StateSpec& spec, const DimsLayout& layout) {
  StateVector v;
  switch (spec.kind) {
    case StateSpec::Kind::Named:
      v = named_state(spec.label, layout);
      break;
    case StateSpec::Kind::Amplitudes:
      v.assign(layout.total_dim(), Complex{});
      for (const auto& [bits, amp] : spec.amplitudes) v[basis_index(bits, layout)] += amp;
      break;
    case StateSpec::Kind::Mixture:
      throw Error(ErrorCode::UnknownLabel, "a mixture has no state vector");
  }
  normalize(v, spec.describe());
  return v;
}

ComplexMatrix build_initial_state(const StateSpec& spec, const DimsLayout& layout) {
  if (spec.kind != StateSpec::Kind::Mixture) return ComplexMatrix::projector(build_state_vector(spec, layout));
  double total = 0.0;
  for (const auto& part : spec.mixture) {
    if (!(part.weight >= 0.0) || !std::isfinite(part.weight))
      throw Error(ErrorCode::ValidationError, "mixture weights must be finite and >= 0");
    total += part.weight;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::NonNormalizable, "mixture weights sum to zero");
  ComplexMatrix rho(layout.total_dim(), layout.total_dim());
  for (const auto& part : spec.mixture) {
    if (part.weight == 0.0) continue;
    rho += Complex(part.weight / total) * build_initial_state(part.state, layout);
  }
  return rho;
}

}  // namespace coopdiss
