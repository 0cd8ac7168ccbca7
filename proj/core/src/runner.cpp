#include "coopdiss/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "coopdiss/error.hpp"
#include "coopdiss/observables.hpp"
#include "json.hpp"

namespace coopdiss {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string RunResult::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ",";
      out += format_number(row[c]);
    }
    out += "\n";
  }
  return out;
}

std::size_t RunResult::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::UnknownLabel, "no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> RunResult::series(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> s;
  s.reserve(rows.size());
  for (const auto& r : rows) s.push_back(r[c]);
  return s;
}

namespace {

struct PreparedObservable {
  ObservableSpec spec;
  std::vector<std::string> columns;
  StateVector target;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, std::size_t initial_index, const RunOptions& options) {
  if (initial_index >= scenario.initial_states.size())
    throw Error(ErrorCode::ValidationError, "initial state index out of range");
  const ModelOperators model = build_model(scenario.system);
  const auto& initial = scenario.initial_states[initial_index];
  const ComplexMatrix rho0 = build_initial_state(initial, model.layout);

  std::vector<PreparedObservable> prepared;
  RunResult result;
  result.initial_label = initial.describe();
  result.header.push_back("t");
  bool needs_dark = false;
  for (const auto& o : scenario.observables) {
    PreparedObservable p{o, observable_columns(o, scenario.system), {}};
    if (o.kind == ObservableSpec::Kind::Fidelity || o.kind == ObservableSpec::Kind::FidelitySqrt)
      p.target = build_state_vector(o.target, model.layout);
    needs_dark = needs_dark || o.kind == ObservableSpec::Kind::Nes;
    result.header.insert(result.header.end(), p.columns.begin(), p.columns.end());
    prepared.push_back(std::move(p));
  }
  result.header.push_back("trace_error");
  const std::optional<DarkStructure> dark = needs_dark ? std::optional<DarkStructure>(DarkStructure(model)) : std::nullopt;

  const double scale = scenario.time_scale();
  std::vector<double> grid = uniform_grid(scenario.time.horizon * scale, scenario.time.points);
  IntegratorConfig cfg = scenario.integrator;
  if (options.fixed_step) cfg.fixed_step = *options.fixed_step * scale;

  // Steady-state bookkeeping: first E_N column drives the plateau rule.
  const LindbladGenerator generator(model);
  std::optional<std::size_t> en_observable;
  for (std::size_t i = 0; i < prepared.size(); ++i)
    if (prepared[i].spec.kind == ObservableSpec::Kind::LogNegativity) {
      en_observable = i;
      break;
    }
  std::vector<std::pair<double, double>> en_history;  // (scenario time, E_N)

  const auto& thr = options.thresholds;
  auto note_breach = [&](const std::string& what) {
    result.invariant_breach = true;
    if (result.breaches.size() < 20) result.breaches.push_back(what);
  };

  Observer observer = [&](double t, const ComplexMatrix& rho, Record& rec) {
    const double ts = t / scale;
    std::vector<double> row{ts};
    std::optional<double> en_now;
    const StateChecks checks = purity_and_checks(rho);
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      const auto& p = prepared[i];
      switch (p.spec.kind) {
        case ObservableSpec::Kind::Energy: row.push_back(energy(rho, model)); break;
        case ObservableSpec::Kind::Fidelity: row.push_back(dark_overlap(rho, p.target)); break;
        case ObservableSpec::Kind::FidelitySqrt: row.push_back(fidelity_sqrt(rho, p.target)); break;
        case ObservableSpec::Kind::LogNegativity: {
          const double en = log_negativity(rho, model.layout, p.spec.parties);
          if (en_observable && *en_observable == i) en_now = en;
          row.push_back(en);
          break;
        }
        case ObservableSpec::Kind::Purity: row.push_back(checks.purity); break;
        case ObservableSpec::Kind::Nes: {
          const NesReport r = nes_report(rho, model, *dark);
          row.insert(row.end(), r.per_emitter_excitation.begin(), r.per_emitter_excitation.end());
          row.push_back(r.dark_weight);
          row.push_back(r.is_nonequilibrium ? 1.0 : 0.0);
          break;
        }
        case ObservableSpec::Kind::Checks:
          row.push_back(checks.hermiticity_error);
          row.push_back(checks.min_eigenvalue);
          break;
      }
    }
    row.push_back(checks.trace_error);
    for (std::size_t c = 1; c + 1 < row.size(); ++c) rec.set(result.header[c], row[c]);
    result.rows.push_back(std::move(row));

    if (options.strict) {
      if (checks.trace_error >= thr.trace_error) note_breach("trace error " + format_number(checks.trace_error) + " at t = " + format_number(ts));
      if (checks.hermiticity_error >= thr.hermiticity_error)
        note_breach("hermiticity error " + format_number(checks.hermiticity_error) + " at t = " + format_number(ts));
      if (checks.min_eigenvalue <= thr.min_eigenvalue)
        note_breach("min eigenvalue " + format_number(checks.min_eigenvalue) + " at t = " + format_number(ts));
    }

    if (scenario.steady_state.enabled && !result.steady_time) {
      bool steady = generator.apply(rho).max_abs() < scenario.steady_state.rhs_tol;
      if (!steady && en_now) {
        // One 1/kappa interval back (1 unit of kappa*t; 1/kappa of omega*t).
        const double window = scenario.time.unit == TimeUnit::Kappa
                                  ? 1.0
                                  : (scenario.system.collective_channels.empty() ? 1.0
                                                                                 : 1.0 / scenario.system.collective_channels[0].rate);
        // Steady once the whole record over the last window (endpoints
        // included) spans less than en_tol; comparing endpoints alone trips
        // early on a damped oscillation.
        en_history.emplace_back(ts, *en_now);
        const double start = ts - window + 1e-12 * std::max(1.0, ts);
        if (en_history.front().first <= start) {
          double lo = *en_now, hi = *en_now;
          for (auto it = en_history.rbegin(); it != en_history.rend(); ++it) {
            lo = std::min(lo, it->second);
            hi = std::max(hi, it->second);
            if (it->first <= start) break;
          }
          steady = hi - lo < scenario.steady_state.en_tol;
        }
      }
      if (steady) {
        result.steady_time = ts;
        if (scenario.steady_state.stop) return false;
      }
    }
    return true;
  };

  try {
    Trajectory traj = evolve(model, rho0, grid, cfg, observer);
    result.final_state = std::move(traj.final_state);
    result.stats = traj.stats;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvariantViolation) throw;
    note_breach(e.what());
  }
  return result;
}

std::vector<RunResult> run_scenario(const Scenario& scenario, const RunOptions& options) {
  std::vector<RunResult> out;
  for (std::size_t i = 0; i < scenario.initial_states.size(); ++i) out.push_back(run_scenario(scenario, i, options));
  return out;
}

std::string plot_description(const Scenario& scenario, const std::vector<RunResult>& results,
                             const std::vector<std::string>& csv_paths) {
  nlohmann::json j;
  j["scenario"] = scenario.name;
  j["x"] = {{"column", "t"}, {"label", scenario.time.unit == TimeUnit::Omega ? "omega t" : "kappa t"}};
  nlohmann::json panels = nlohmann::json::array();
  if (!results.empty()) {
    for (const auto& col : results.front().header) {
      if (col == "t" || col == "trace_error") continue;
      panels.push_back({{"column", col}, {"label", col}});
    }
  }
  j["panels"] = panels;
  nlohmann::json series = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i)
    series.push_back({{"initial", results[i].initial_label}, {"csv", i < csv_paths.size() ? csv_paths[i] : ""}});
  j["series"] = series;
  return j.dump(2) + "\n";
}

double tail_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double from, double to) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(t.size(), y.size()); ++i) {
    if (t[i] < from || t[i] > to || !(y[i] > 0.0)) continue;
    const double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    ++n;
  }
  if (n < 2) throw Error(ErrorCode::ValidationError, "tail_decay_rate: fewer than 2 positive samples in window");
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) throw Error(ErrorCode::ValidationError, "tail_decay_rate: degenerate time window");
  return -(dn * sxy - sx * sy) / denom;
}

std::string SweepTable::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
    out += "\n";
  }
  return out;
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

std::vector<std::string> reduce(const SweepSpec& sweep, const RunResult& r) {
  std::vector<std::string> out;
  for (const auto& red : sweep.reductions) {
    if (red.kind == Reduction::Kind::SteadyTime) {
      out.push_back(r.steady_time ? format_number(*r.steady_time) : "nan");
      continue;
    }
    const auto y = r.series(red.column);
    if (y.empty()) {
      out.push_back("nan");
      continue;
    }
    switch (red.kind) {
      case Reduction::Kind::Final: out.push_back(format_number(y.back())); break;
      case Reduction::Kind::Min: out.push_back(format_number(*std::min_element(y.begin(), y.end()))); break;
      case Reduction::Kind::Max: out.push_back(format_number(*std::max_element(y.begin(), y.end()))); break;
      case Reduction::Kind::TailDecayRate:
        out.push_back(format_number(tail_decay_rate(r.series("t"), y, red.from, red.to)));
        break;
      case Reduction::Kind::SteadyTime: break;
    }
  }
  return out;
}

}  // namespace

SweepTable run_sweep(const SweepSpec& sweep, const RunOptions& options) {
  if (sweep.axes.empty()) throw Error(ErrorCode::ValidationError, "sweep needs at least one axis");
  for (const auto& a : sweep.axes)
    if (a.values.empty()) throw Error(ErrorCode::ValidationError, "sweep axis '" + a.name + "' is empty");

  SweepTable table;
  table.header.push_back("index");
  for (const auto& a : sweep.axes) table.header.push_back(a.name);
  for (const auto& r : sweep.reductions) table.header.push_back(r.label());
  table.header.push_back("status");

  const std::size_t total = sweep.point_count();
  table.rows.resize(total);
  std::vector<char> breach(total, 0);

  auto indices_of = [&](std::size_t flat) {
    std::vector<std::size_t> idx(sweep.axes.size());
    for (std::size_t a = sweep.axes.size(); a-- > 0;) {
      idx[a] = flat % sweep.axes[a].values.size();
      flat /= sweep.axes[a].values.size();
    }
    return idx;
  };

  auto run_point = [&](std::size_t flat) {
    const auto idx = indices_of(flat);
    std::vector<std::string> row{std::to_string(flat)};
    for (std::size_t a = 0; a < idx.size(); ++a) row.push_back(format_number(sweep.axes[a].values[idx[a]]));
    std::string status = "ok";
    std::vector<std::string> reduced(sweep.reductions.size(), "nan");
    try {
      const Scenario sc = sweep.scenario_at(idx);
      const RunResult r = run_scenario(sc, std::min(sweep.initial_index, sc.initial_states.size() - 1), options);
      reduced = reduce(sweep, r);
      if (r.invariant_breach) {
        breach[flat] = 1;
        status = "invariant_breach: " + (r.breaches.empty() ? std::string{} : r.breaches.front());
      }
    } catch (const std::exception& e) {
      status = std::string("error: ") + e.what();
    }
    row.insert(row.end(), reduced.begin(), reduced.end());
    row.push_back(sanitize(status));
    table.rows[flat] = std::move(row);
  };

  std::size_t workers = sweep.workers ? sweep.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) run_point(i);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  table.any_breach = std::any_of(breach.begin(), breach.end(), [](char b) { return b != 0; });
  return table;
}

}  // namespace coopdiss
