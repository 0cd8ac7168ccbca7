// coopdiss: run cooperative-dissipation scenarios and sweeps, list and dump presets.
//
// Exit codes: 0 ok, 1 invariant breach (or numerical failure), 2 usage/parse error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "coopdiss/error.hpp"
#include "coopdiss/runner.hpp"
#include "coopdiss/scenario.hpp"

namespace fs = std::filesystem;
using namespace coopdiss;

namespace {

constexpr int kOk = 0;
constexpr int kBreach = 1;
constexpr int kUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

// A scenario argument is a file path, or a preset name when no such file exists.
std::string scenario_source(const std::string& arg) {
  if (fs::exists(arg)) return read_file(arg);
  try {
    return preset_text(arg);
  } catch (const Error&) {
    throw Error(ErrorCode::IoError, "'" + arg + "' is neither a readable file nor a preset name");
  }
}

std::string suffixed(const std::string& path, const std::string& label) {
  fs::path p(path);
  const std::string stem = p.stem().string(), ext = p.extension().string();
  return (p.parent_path() / (stem + "." + label + (ext.empty() ? ".csv" : ext))).string();
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::UnknownLabel:
    case ErrorCode::IoError:
    case ErrorCode::InvalidTransition:
    case ErrorCode::DimensionCapExceeded:
    case ErrorCode::NonNormalizable:
      return kUsage;
    default:
      return kBreach;
  }
}

struct GlobalOptions {
  std::string out;
  std::optional<double> fixed_step;
  std::optional<long long> seed;
  bool strict = false;
};

int cmd_run(const std::string& arg, const std::string& initial_filter, const std::string& plot_spec,
            const GlobalOptions& g) {
  const Scenario scenario = parse_scenario(scenario_source(arg));
  RunOptions opts;
  opts.strict = g.strict;
  opts.fixed_step = g.fixed_step;

  std::vector<std::size_t> which;
  for (std::size_t i = 0; i < scenario.initial_states.size(); ++i)
    if (initial_filter.empty() || scenario.initial_states[i].describe() == initial_filter) which.push_back(i);
  if (which.empty()) throw Error(ErrorCode::UnknownLabel, "scenario has no initial state '" + initial_filter + "'");

  const std::string out_path = !g.out.empty() ? g.out : scenario.output.path;
  std::vector<RunResult> results;
  std::vector<std::string> paths;
  bool breach = false;
  for (std::size_t i : which) {
    RunResult r = run_scenario(scenario, i, opts);
    breach = breach || r.invariant_breach;
    for (const auto& b : r.breaches) std::cerr << "invariant breach [" << r.initial_label << "]: " << b << "\n";
    if (r.steady_time) std::cerr << "steady state [" << r.initial_label << "] at t = " << *r.steady_time << "\n";
    if (out_path.empty()) {
      if (which.size() > 1) std::cout << "# initial: " << r.initial_label << "\n";
      std::cout << r.to_csv();
      paths.emplace_back();
    } else {
      const std::string path = which.size() > 1 ? suffixed(out_path, r.initial_label) : out_path;
      write_file(path, r.to_csv());
      paths.push_back(path);
    }
    results.push_back(std::move(r));
  }
  const std::string plot_path = !plot_spec.empty() ? plot_spec : scenario.output.plot_spec;
  if (!plot_path.empty()) write_file(plot_path, plot_description(scenario, results, paths));
  return breach ? kBreach : kOk;
}

int cmd_sweep(const std::string& path, const GlobalOptions& g) {
  const SweepSpec sweep = parse_sweep(read_file(path));
  RunOptions opts;
  opts.strict = g.strict;
  opts.fixed_step = g.fixed_step;
  const SweepTable table = run_sweep(sweep, opts);
  if (g.out.empty()) {
    std::cout << table.to_csv();
  } else {
    write_file(g.out, table.to_csv());
  }
  return table.any_breach ? kBreach : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative-dissipation emitter network simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  double fixed_step = 0.0;
  long long seed = 0;
  app.add_option("--out", g.out, "Output path (CSV; per-initial-state suffix when several)");
  auto* fixed_opt = app.add_option("--fixed-step", fixed_step, "Fixed integrator step, in scenario time units")
                        ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Reserved; no stochastic paths are implemented");
  app.add_flag("--check-strict", g.strict, "Exit 1 on any trace/Hermiticity/positivity breach");

  std::string run_arg, initial_filter, plot_spec;
  auto* run = app.add_subcommand("run", "Run a scenario file or preset");
  run->add_option("scenario", run_arg, "Scenario file, or a preset name")->required();
  run->add_option("--initial", initial_filter, "Only run the initial state with this label");
  run->add_option("--plot-spec", plot_spec, "Write plot metadata JSON to this path");

  std::string sweep_arg;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep file");
  sweep->add_option("sweep-file", sweep_arg, "Sweep file")->required();

  auto* presets = app.add_subcommand("presets", "List built-in presets");

  std::string dump_arg;
  auto* dump = app.add_subcommand("dump", "Print the normalized scenario for a preset or file");
  dump->add_option("name", dump_arg, "Preset name (e.g. fig2, nqubit:N=5) or scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (*fixed_opt) g.fixed_step = fixed_step;
  if (*seed_opt) g.seed = seed;

  try {
    if (*run) return cmd_run(run_arg, initial_filter, plot_spec, g);
    if (*sweep) return cmd_sweep(sweep_arg, g);
    if (*presets) {
      for (const auto& p : list_presets()) std::cout << p.name << "\t" << p.description << "\n";
      return kOk;
    }
    if (*dump) {
      const std::string text = dump_scenario(parse_scenario(scenario_source(dump_arg)));
      if (g.out.empty()) {
        std::cout << text;
      } else {
        write_file(g.out, text);
      }
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBreach;
  }
  return kUsage;
}
