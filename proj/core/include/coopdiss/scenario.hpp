#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "coopdiss/dynamics.hpp"
#include "coopdiss/model.hpp"
#include "coopdiss/observables.hpp"

namespace coopdiss {

enum class TimeUnit { Omega, Kappa };

struct TimeSpec {
  /// Omega: times are omega*t. Kappa: times are kappa*t, kappa being the rate
  /// of the first collective channel.
  TimeUnit unit = TimeUnit::Omega;
  double horizon = 1.0;
  std::size_t points = 2;
  friend bool operator==(const TimeSpec&, const TimeSpec&) = default;
};

struct ObservableSpec {
  enum class Kind { Energy, Fidelity, FidelitySqrt, LogNegativity, Purity, Nes, Checks };
  Kind kind = Kind::Energy;
  StateSpec target;             // Fidelity / FidelitySqrt
  std::string name;             // optional column-name override for the target
  Bipartition parties;          // LogNegativity, 0-based internally
  friend bool operator==(const ObservableSpec&, const ObservableSpec&) = default;
};

struct SteadyStateSpec {
  bool enabled = false;
  double rhs_tol = 1e-9;  // ||L(rho)||_max below this counts as steady
  double en_tol = 1e-6;   // or E_N moving less than this over one 1/kappa
  bool stop = false;      // end the run once steady
  friend bool operator==(const SteadyStateSpec&, const SteadyStateSpec&) = default;
};

struct OutputSpec {
  std::string path;       // empty: stdout
  std::string plot_spec;  // optional plot-description JSON path
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct Scenario {
  std::string name;
  std::string description;
  SystemSpec system;
  std::vector<StateSpec> initial_states;
  TimeSpec time;
  std::vector<ObservableSpec> observables;
  IntegratorConfig integrator;
  SteadyStateSpec steady_state;
  OutputSpec output;

  /// Multiplier from the scenario time axis to model time (1 or 1/kappa).
  double time_scale() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses and validates a scenario document (JSON). Throws ParseError with
/// line/column, ValidationError naming the field, UnknownLabel for states.
Scenario parse_scenario(const std::string& text);
/// Canonical JSON form with every default spelled out.
std::string dump_scenario(const Scenario& scenario);

/// CSV column names produced by an observable for a given system.
std::vector<std::string> observable_columns(const ObservableSpec& obs, const SystemSpec& system);

struct SweepAxis {
  std::string name;
  std::vector<std::string> paths;  // JSON pointers into the canonical scenario
  std::vector<double> values;
};

struct Reduction {
  enum class Kind { Final, Min, Max, TailDecayRate, SteadyTime };
  Kind kind = Kind::Final;
  std::string column;
  double from = 0.0;                                       // TailDecayRate window, scenario time units
  double to = std::numeric_limits<double>::infinity();
  std::string label() const;
};

struct SweepSpec {
  std::string base_json;  // canonical dump of the base scenario
  std::size_t initial_index = 0;
  std::vector<SweepAxis> axes;
  std::vector<Reduction> reductions;
  std::size_t workers = 0;  // 0: hardware concurrency

  /// Scenario for one grid point, `indices` holding one value index per axis.
  Scenario scenario_at(const std::vector<std::size_t>& indices) const;
  std::size_t point_count() const;
};

SweepSpec parse_sweep(const std::string& text);

// Presets ------------------------------------------------------------------

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();
/// Scenario text for a preset. Accepts aliases ("clockwork") and the
/// parameterized form "nqubit:N=<n>[:phases=p1,p2,...]". Throws UnknownLabel.
std::string preset_text(const std::string& name);
Scenario load_preset(const std::string& name);

}  // namespace coopdiss
