#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "coopdiss/dynamics.hpp"
#include "coopdiss/scenario.hpp"

namespace coopdiss {

/// Thresholds applied in strict mode to every output row.
struct InvariantThresholds {
  double trace_error = 1e-9;
  double hermiticity_error = 1e-9;
  double min_eigenvalue = -1e-8;
};

struct RunOptions {
  bool strict = false;
  std::optional<double> fixed_step;  // overrides the scenario's integrator mode
  InvariantThresholds thresholds{};
};

/// 17-significant-digit scientific notation used for every CSV number.
std::string format_number(double v);

struct RunResult {
  std::string initial_label;
  std::vector<std::string> header;  // t, observable columns..., trace_error
  std::vector<std::vector<double>> rows;
  ComplexMatrix final_state;
  EvolutionStats stats;
  std::optional<double> steady_time;  // scenario time units
  bool invariant_breach = false;
  std::vector<std::string> breaches;

  std::string to_csv() const;
  std::size_t column(const std::string& name) const;  // throws UnknownLabel
  std::vector<double> series(const std::string& name) const;
};

/// Runs one initial state of a scenario. InvariantViolation from the
/// integrator is caught and reported through invariant_breach (rows up to
/// the failure are kept); other errors propagate.
RunResult run_scenario(const Scenario& scenario, std::size_t initial_index, const RunOptions& options = {});
std::vector<RunResult> run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Column/axis metadata for external plotting tools.
std::string plot_description(const Scenario& scenario, const std::vector<RunResult>& results,
                             const std::vector<std::string>& csv_paths);

/// Least-squares slope of log(y) against t over [from, to], negated. Points
/// with y <= 0 are skipped. Throws ValidationError with fewer than 2 points.
double tail_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double from, double to);

struct SweepTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  bool any_breach = false;
  std::string to_csv() const;
};

/// One row per grid point in lexicographic index order (last axis fastest),
/// whatever order the workers finish in. Per-point failures go to the status
/// column and do not stop the sweep.
SweepTable run_sweep(const SweepSpec& sweep, const RunOptions& options = {});

}  // namespace coopdiss
