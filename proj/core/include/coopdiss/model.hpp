#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "coopdiss/matrix.hpp"

namespace coopdiss {

// Units: hbar = 1 and the reference frequency omega = 1. Rates, frequencies
// and drive amplitudes are all in units of omega.

/// Ordered level pair; the lowering operator is |lower><upper|.
struct Transition {
  std::size_t upper = 1;
  std::size_t lower = 0;
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct EmitterSpec {
  std::size_t levels = 2;
  /// Lab-frame level energies, level 0 pinned at 0, strictly increasing.
  std::vector<double> level_frequencies{0.0, 1.0};
  /// Excitation quanta carried by each level; the rotating frame removes
  /// reference * excitations[l] from level l. Empty means excitations[l] = l.
  std::vector<int> excitations;

  int excitation_of(std::size_t level) const {
    return excitations.empty() ? static_cast<int>(level) : excitations.at(level);
  }
  friend bool operator==(const EmitterSpec&, const EmitterSpec&) = default;
};

/// One shared decay channel: L = sum_j weights[j] |lower_j><upper_j|_j.
struct CollectiveChannelSpec {
  double rate = 0.0;
  std::vector<Complex> weights;
  /// Per-emitter transition; empty means (1 -> 0) on every emitter.
  std::vector<Transition> transitions;
  friend bool operator==(const CollectiveChannelSpec&, const CollectiveChannelSpec&) = default;
};

struct LocalChannelSpec {
  double rate = 0.0;
  std::size_t emitter = 0;
  Transition transition{};
  friend bool operator==(const LocalChannelSpec&, const LocalChannelSpec&) = default;
};

/// Coherent drive amplitude * (|u><l| + |l><u|), written directly in the
/// rotating frame. `detuning` shifts the upper level by that amount.
struct DriveSpec {
  double amplitude = 0.0;
  std::size_t emitter = 0;
  Transition transition{};
  double detuning = 0.0;
  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

struct Frame {
  enum class Kind { Lab, Rotating };
  Kind kind = Kind::Rotating;
  double reference = 1.0;
  friend bool operator==(const Frame&, const Frame&) = default;
};

inline constexpr std::size_t kDefaultDimensionCap = 256;

struct SystemSpec {
  std::vector<EmitterSpec> emitters;
  std::vector<CollectiveChannelSpec> collective_channels;
  std::vector<LocalChannelSpec> local_channels;
  std::vector<DriveSpec> drives;
  Frame frame{};
  std::size_t dimension_cap = kDefaultDimensionCap;
  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// N identical two-level emitters at frequency `omega` plus per-emitter
/// detunings (missing entries are zero). No channels.
SystemSpec qubit_chain(std::size_t count, double omega = 1.0, std::vector<double> detunings = {});

/// Throws ValidationError, InvalidTransition or DimensionCapExceeded.
void validate(const SystemSpec& spec);
DimsLayout layout_of(const SystemSpec& spec);

struct Jump {
  double rate = 0.0;
  ComplexMatrix op;
  bool collective = false;
  std::string label;
};

struct ModelOperators {
  std::size_t dim = 0;
  ComplexMatrix hamiltonian;  // frame-dependent, time independent
  std::vector<Jump> jumps;    // collective channels first, then local ones
  DimsLayout layout;
  SystemSpec spec;
  std::vector<double> free_energies;    // lab-frame diagonal of the drive-free H
  std::vector<int> excitation_numbers;  // per basis state

  /// Basis indices with the given total excitation number.
  std::vector<std::size_t> sector_indices(int excitations) const;
  int max_excitation() const;
  /// Flat index of the all-ground basis state (always 0).
  std::size_t vacuum_index() const noexcept { return 0; }
};

/// |lower><upper| on a `levels`-dimensional space. Throws InvalidTransition.
ComplexMatrix transition_operator(std::size_t levels, Transition t);

/// I x ... x local_op x ... x I with local_op at `site`.
ComplexMatrix lift_site_operator(const ComplexMatrix& local_op, std::size_t site, const DimsLayout& layout);

/// sum_j w_j * lift(|lower_j><upper_j|, j). Emitters with zero weight are skipped.
ComplexMatrix collective_lowering(const CollectiveChannelSpec& spec, const DimsLayout& layout);

ModelOperators build_model(const SystemSpec& spec);

/// Orthonormal basis of the states in excitation sector `k` annihilated by every
/// collective jump operator, expressed as full-space vectors.
std::vector<StateVector> collective_kernel_in_sector(const ModelOperators& model, int k,
                                                     double tol = 1e-9);

// ---------------------------------------------------------------------------
// Initial and target states

struct MixtureComponent;

struct StateSpec {
  enum class Kind { Named, Amplitudes, Mixture };
  Kind kind = Kind::Named;
  std::string label;                                     // Named
  std::vector<std::pair<std::string, Complex>> amplitudes;  // basis string -> amplitude
  std::vector<MixtureComponent> mixture;

  static StateSpec named(std::string label);
  static StateSpec from_amplitudes(std::vector<std::pair<std::string, Complex>> amps);
  static StateSpec mix(std::vector<MixtureComponent> parts);

  /// Short human-readable tag (used in CSV headers and file suffixes).
  std::string describe() const;
};

struct MixtureComponent {
  double weight = 0.0;
  StateSpec state;
};

bool operator==(const StateSpec& a, const StateSpec& b);
bool operator==(const MixtureComponent& a, const MixtureComponent& b);

/// Normalized state vector for a pure StateSpec (Named or Amplitudes).
/// Supported names: basis strings ("10", "011", leftmost = emitter 1),
/// psi_plus, psi_minus, W, psi2, psi3. Throws UnknownLabel / NonNormalizable.
StateVector build_state_vector(const StateSpec& spec, const DimsLayout& layout);

/// Density matrix for any StateSpec; mixture weights are normalized.
ComplexMatrix build_initial_state(const StateSpec& spec, const DimsLayout& layout);

}  // namespace coopdiss
