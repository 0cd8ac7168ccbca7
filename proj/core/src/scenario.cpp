#include "coopdiss/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "coopdiss/error.hpp"
#include "json.hpp"

namespace coopdiss {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ValidationError, field + ": " + why);
}

json parse_json(const std::string& text, const char* what) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw Error(ErrorCode::ParseError, std::string(what) + " is empty (line 1, column 1)");
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ParseError, std::string(what) + " line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": " + e.what());
  }
}

void only_keys(const json& j, const std::string& field, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) invalid(field, "expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      invalid(field + "." + key, "unknown field");
  }
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) invalid(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(field, "must be finite");
  return v;
}

double number_or(const json& obj, const char* key, const std::string& field, double fallback) {
  return obj.contains(key) ? get_number(obj.at(key), field + "." + key) : fallback;
}

std::size_t get_count(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) invalid(field, "expected a non-negative integer");
  const auto v = j.get<long long>();
  if (v < 0) invalid(field, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) invalid(field, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) invalid(field, "expected true/false");
  return j.get<bool>();
}

Complex get_complex(const json& j, const std::string& field) {
  if (j.is_number()) return {get_number(j, field), 0.0};
  if (j.is_array() && j.size() == 2) return {get_number(j[0], field + "[0]"), get_number(j[1], field + "[1]")};
  invalid(field, "expected a number or a [re, im] pair");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

// Emitter indices are 1-based in files.
std::size_t get_emitter(const json& j, const std::string& field, std::size_t emitters) {
  const std::size_t e = get_count(j, field);
  if (e < 1 || e > emitters) invalid(field, "emitter index must be in 1.." + std::to_string(emitters));
  return e - 1;
}

Transition get_transition(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) invalid(field, "expected [upper, lower]");
  return Transition{get_count(j[0], field + "[0]"), get_count(j[1], field + "[1]")};
}

json transition_json(Transition t) { return json::array({t.upper, t.lower}); }

// --- states ---------------------------------------------------------------

StateSpec parse_state(const json& j, const std::string& field) {
  if (j.is_string()) return StateSpec::named(j.get<std::string>());
  if (!j.is_object()) invalid(field, "expected a label or an object");
  if (j.contains("label")) {
    only_keys(j, field, {"label"});
    return StateSpec::named(get_string(j.at("label"), field + ".label"));
  }
  if (j.contains("amplitudes")) {
    only_keys(j, field, {"amplitudes"});
    const json& a = j.at("amplitudes");
    if (!a.is_object() || a.empty()) invalid(field + ".amplitudes", "expected {basis: amplitude, ...}");
    std::vector<std::pair<std::string, Complex>> amps;
    for (const auto& [basis, value] : a.items()) amps.emplace_back(basis, get_complex(value, field + ".amplitudes." + basis));
    return StateSpec::from_amplitudes(std::move(amps));
  }
  if (j.contains("mixture")) {
    only_keys(j, field, {"mixture"});
    const json& m = j.at("mixture");
    if (!m.is_array() || m.empty()) invalid(field + ".mixture", "expected a non-empty list");
    std::vector<MixtureComponent> parts;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string f = field + ".mixture[" + std::to_string(i) + "]";
      only_keys(m[i], f, {"weight", "state"});
      if (!m[i].contains("weight") || !m[i].contains("state")) invalid(f, "needs weight and state");
      const double w = get_number(m[i].at("weight"), f + ".weight");
      if (w < 0.0) invalid(f + ".weight", "must be >= 0");
      parts.push_back({w, parse_state(m[i].at("state"), f + ".state")});
    }
    return StateSpec::mix(std::move(parts));
  }
  invalid(field, "expected one of label / amplitudes / mixture");
}

json state_json(const StateSpec& s) {
  switch (s.kind) {
    case StateSpec::Kind::Named: return s.label;
    case StateSpec::Kind::Amplitudes: {
      json a = json::object();
      for (const auto& [basis, amp] : s.amplitudes) a[basis] = complex_json(amp);
      return json{{"amplitudes", a}};
    }
    case StateSpec::Kind::Mixture: {
      json parts = json::array();
      for (const auto& p : s.mixture) parts.push_back(json{{"weight", p.weight}, {"state", state_json(p.state)}});
      return json{{"mixture", parts}};
    }
  }
  return nullptr;
}

// --- system ---------------------------------------------------------------

SystemSpec parse_system(const json& j) {
  const std::string f = "system";
  only_keys(j, f, {"qubits", "emitters", "collective_channels", "local_channels", "drives", "frame", "dimension_cap"});
  SystemSpec s;
  if (j.contains("qubits") == j.contains("emitters")) invalid(f, "give exactly one of 'qubits' or 'emitters'");
  if (j.contains("qubits")) {
    const json& q = j.at("qubits");
    only_keys(q, f + ".qubits", {"count", "omega", "detunings"});
    if (!q.contains("count")) invalid(f + ".qubits.count", "required");
    const std::size_t n = get_count(q.at("count"), f + ".qubits.count");
    if (n < 1) invalid(f + ".qubits.count", "must be >= 1");
    const double omega = number_or(q, "omega", f + ".qubits", 1.0);
    std::vector<double> det;
    if (q.contains("detunings")) {
      const json& d = q.at("detunings");
      if (!d.is_array() || d.size() > n) invalid(f + ".qubits.detunings", "expected at most one value per qubit");
      for (std::size_t i = 0; i < d.size(); ++i) det.push_back(get_number(d[i], f + ".qubits.detunings"));
    }
    s = qubit_chain(n, omega, det);
  } else {
    const json& es = j.at("emitters");
    if (!es.is_array() || es.empty()) invalid(f + ".emitters", "expected a non-empty list");
    for (std::size_t i = 0; i < es.size(); ++i) {
      const std::string fe = f + ".emitters[" + std::to_string(i) + "]";
      only_keys(es[i], fe, {"levels", "frequencies", "excitations"});
      EmitterSpec e;
      if (!es[i].contains("frequencies")) invalid(fe + ".frequencies", "required");
      const json& fr = es[i].at("frequencies");
      if (!fr.is_array()) invalid(fe + ".frequencies", "expected a list");
      e.level_frequencies.clear();
      for (const auto& v : fr) e.level_frequencies.push_back(get_number(v, fe + ".frequencies"));
      e.levels = es[i].contains("levels") ? get_count(es[i].at("levels"), fe + ".levels") : e.level_frequencies.size();
      if (es[i].contains("excitations")) {
        for (const auto& v : es[i].at("excitations")) {
          if (!v.is_number_integer()) invalid(fe + ".excitations", "expected integers");
          e.excitations.push_back(v.get<int>());
        }
      }
      s.emitters.push_back(std::move(e));
    }
  }
  const std::size_t n = s.emitters.size();

  if (j.contains("collective_channels")) {
    const json& cs = j.at("collective_channels");
    if (!cs.is_array()) invalid(f + ".collective_channels", "expected a list");
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const std::string fc = f + ".collective_channels[" + std::to_string(c) + "]";
      only_keys(cs[c], fc, {"rate", "weights", "phases", "transitions"});
      CollectiveChannelSpec ch;
      if (!cs[c].contains("rate")) invalid(fc + ".rate", "required");
      ch.rate = get_number(cs[c].at("rate"), fc + ".rate");
      if (ch.rate < 0.0) invalid(fc + ".rate", "must be >= 0");
      if (cs[c].contains("weights") && cs[c].contains("phases")) invalid(fc, "give weights or phases, not both");
      if (cs[c].contains("weights")) {
        const json& w = cs[c].at("weights");
        if (!w.is_array()) invalid(fc + ".weights", "expected a list");
        for (std::size_t i = 0; i < w.size(); ++i)
          ch.weights.push_back(get_complex(w[i], fc + ".weights[" + std::to_string(i) + "]"));
      } else if (cs[c].contains("phases")) {
        const json& p = cs[c].at("phases");
        if (!p.is_array()) invalid(fc + ".phases", "expected a list");
        for (std::size_t i = 0; i < p.size(); ++i)
          ch.weights.push_back(std::polar(1.0, get_number(p[i], fc + ".phases[" + std::to_string(i) + "]")));
      } else {
        ch.weights.assign(n, Complex(1.0));
      }
      if (cs[c].contains("transitions")) {
        const json& t = cs[c].at("transitions");
        if (!t.is_array()) invalid(fc + ".transitions", "expected a list");
        for (std::size_t i = 0; i < t.size(); ++i)
          ch.transitions.push_back(get_transition(t[i], fc + ".transitions[" + std::to_string(i) + "]"));
      }
      s.collective_channels.push_back(std::move(ch));
    }
  }
  if (j.contains("local_channels")) {
    const json& ls = j.at("local_channels");
    if (!ls.is_array()) invalid(f + ".local_channels", "expected a list");
    for (std::size_t c = 0; c < ls.size(); ++c) {
      const std::string fc = f + ".local_channels[" + std::to_string(c) + "]";
      only_keys(ls[c], fc, {"rate", "emitter", "transition"});
      LocalChannelSpec ch;
      if (!ls[c].contains("rate") || !ls[c].contains("emitter")) invalid(fc, "needs rate and emitter");
      ch.rate = get_number(ls[c].at("rate"), fc + ".rate");
      if (ch.rate < 0.0) invalid(fc + ".rate", "must be >= 0");
      ch.emitter = get_emitter(ls[c].at("emitter"), fc + ".emitter", n);
      if (ls[c].contains("transition")) ch.transition = get_transition(ls[c].at("transition"), fc + ".transition");
      s.local_channels.push_back(ch);
    }
  }
  if (j.contains("drives")) {
    const json& ds = j.at("drives");
    if (!ds.is_array()) invalid(f + ".drives", "expected a list");
    for (std::size_t d = 0; d < ds.size(); ++d) {
      const std::string fd = f + ".drives[" + std::to_string(d) + "]";
      only_keys(ds[d], fd, {"amplitude", "emitter", "transition", "detuning"});
      DriveSpec dr;
      if (!ds[d].contains("amplitude") || !ds[d].contains("emitter")) invalid(fd, "needs amplitude and emitter");
      dr.amplitude = get_number(ds[d].at("amplitude"), fd + ".amplitude");
      dr.emitter = get_emitter(ds[d].at("emitter"), fd + ".emitter", n);
      if (ds[d].contains("transition")) dr.transition = get_transition(ds[d].at("transition"), fd + ".transition");
      dr.detuning = number_or(ds[d], "detuning", fd, 0.0);
      s.drives.push_back(dr);
    }
  }
  if (j.contains("frame")) {
    const json& fr = j.at("frame");
    only_keys(fr, f + ".frame", {"kind", "reference"});
    const std::string kind = fr.contains("kind") ? get_string(fr.at("kind"), f + ".frame.kind") : "rotating";
    if (kind == "lab") {
      s.frame.kind = Frame::Kind::Lab;
    } else if (kind == "rotating") {
      s.frame.kind = Frame::Kind::Rotating;
    } else {
      invalid(f + ".frame.kind", "expected 'lab' or 'rotating'");
    }
    s.frame.reference = number_or(fr, "reference", f + ".frame", 1.0);
  }
  if (j.contains("dimension_cap")) s.dimension_cap = get_count(j.at("dimension_cap"), f + ".dimension_cap");

  try {
    validate(s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ValidationError) throw;
    const std::string msg = e.what();
    throw Error(ErrorCode::ValidationError, "system." + msg.substr(to_string(e.code()).size() + 2));
  }
  return s;
}

json system_json(const SystemSpec& s) {
  json emitters = json::array();
  for (const auto& e : s.emitters) {
    json je{{"levels", e.levels}, {"frequencies", e.level_frequencies}};
    if (!e.excitations.empty()) je["excitations"] = e.excitations;
    emitters.push_back(je);
  }
  json coll = json::array();
  for (const auto& c : s.collective_channels) {
    json w = json::array();
    for (const auto& z : c.weights) w.push_back(complex_json(z));
    json jc{{"rate", c.rate}, {"weights", w}};
    if (!c.transitions.empty()) {
      json t = json::array();
      for (const auto& tr : c.transitions) t.push_back(transition_json(tr));
      jc["transitions"] = t;
    }
    coll.push_back(jc);
  }
  json local = json::array();
  for (const auto& c : s.local_channels)
    local.push_back(json{{"rate", c.rate}, {"emitter", c.emitter + 1}, {"transition", transition_json(c.transition)}});
  json drives = json::array();
  for (const auto& d : s.drives)
    drives.push_back(json{{"amplitude", d.amplitude},
                          {"emitter", d.emitter + 1},
                          {"transition", transition_json(d.transition)},
                          {"detuning", d.detuning}});
  return json{{"emitters", emitters},
              {"collective_channels", coll},
              {"local_channels", local},
              {"drives", drives},
              {"frame", json{{"kind", s.frame.kind == Frame::Kind::Lab ? "lab" : "rotating"},
                             {"reference", s.frame.reference}}},
              {"dimension_cap", s.dimension_cap}};
}

// --- observables ------------------------------------------------------------

Bipartition parse_parties(const json& j, const std::string& field, std::size_t emitters) {
  if (!j.is_array() || j.size() != 2) invalid(field, "expected [[emitters of A], [emitters of B]]");
  Bipartition b;
  for (int side = 0; side < 2; ++side) {
    const json& g = j[side];
    if (!g.is_array() || g.empty()) invalid(field, "each party needs at least one emitter");
    for (const auto& e : g) (side == 0 ? b.party_a : b.party_b).push_back(get_emitter(e, field, emitters));
  }
  std::set<std::size_t> all(b.party_a.begin(), b.party_a.end());
  for (auto e : b.party_b)
    if (!all.insert(e).second) invalid(field, "parties overlap");
  if (b.party_a.size() != std::set<std::size_t>(b.party_a.begin(), b.party_a.end()).size())
    invalid(field, "duplicate emitter");
  return b;
}

ObservableSpec parse_observable(const json& j, const std::string& field, const SystemSpec& sys) {
  ObservableSpec o;
  std::string kind;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else {
    only_keys(j, field, {"kind", "target", "name", "parties"});
    if (!j.contains("kind")) invalid(field + ".kind", "required");
    kind = get_string(j.at("kind"), field + ".kind");
  }
  if (kind == "energy") {
    o.kind = ObservableSpec::Kind::Energy;
  } else if (kind == "purity") {
    o.kind = ObservableSpec::Kind::Purity;
  } else if (kind == "nes") {
    o.kind = ObservableSpec::Kind::Nes;
  } else if (kind == "checks") {
    o.kind = ObservableSpec::Kind::Checks;
  } else if (kind == "fidelity" || kind == "fidelity_sqrt") {
    o.kind = kind == "fidelity" ? ObservableSpec::Kind::Fidelity : ObservableSpec::Kind::FidelitySqrt;
    if (!j.is_object() || !j.contains("target")) invalid(field + ".target", "required for " + kind);
    o.target = parse_state(j.at("target"), field + ".target");
    if (o.target.kind == StateSpec::Kind::Mixture) invalid(field + ".target", "target must be a pure state");
    build_state_vector(o.target, layout_of(sys));  // resolves labels early
  } else if (kind == "log_negativity") {
    o.kind = ObservableSpec::Kind::LogNegativity;
    if (j.is_object() && j.contains("parties")) {
      o.parties = parse_parties(j.at("parties"), field + ".parties", sys.emitters.size());
    } else {
      if (sys.emitters.size() < 2) invalid(field, "log_negativity needs at least 2 emitters");
      o.parties = Bipartition{{0}, {1}};
    }
  } else {
    throw Error(ErrorCode::UnknownLabel, field + ": unknown observable '" + kind + "'");
  }
  if (j.is_object() && j.contains("name")) o.name = get_string(j.at("name"), field + ".name");
  return o;
}

std::string kind_name(ObservableSpec::Kind k) {
  switch (k) {
    case ObservableSpec::Kind::Energy: return "energy";
    case ObservableSpec::Kind::Fidelity: return "fidelity";
    case ObservableSpec::Kind::FidelitySqrt: return "fidelity_sqrt";
    case ObservableSpec::Kind::LogNegativity: return "log_negativity";
    case ObservableSpec::Kind::Purity: return "purity";
    case ObservableSpec::Kind::Nes: return "nes";
    case ObservableSpec::Kind::Checks: return "checks";
  }
  return "";
}

json observable_json(const ObservableSpec& o) {
  json j{{"kind", kind_name(o.kind)}};
  if (o.kind == ObservableSpec::Kind::Fidelity || o.kind == ObservableSpec::Kind::FidelitySqrt)
    j["target"] = state_json(o.target);
  if (o.kind == ObservableSpec::Kind::LogNegativity) {
    json a = json::array(), b = json::array();
    for (auto e : o.parties.party_a) a.push_back(e + 1);
    for (auto e : o.parties.party_b) b.push_back(e + 1);
    j["parties"] = json::array({a, b});
  }
  if (!o.name.empty()) j["name"] = o.name;
  return j;
}

IntegratorConfig parse_integrator(const json& j) {
  const std::string f = "integrator";
  only_keys(j, f, {"rel_tol", "abs_tol", "initial_step", "max_step", "hermitize_each_step", "fixed_step",
                   "min_eigenvalue_floor", "max_steps"});
  IntegratorConfig c;
  c.rel_tol = number_or(j, "rel_tol", f, c.rel_tol);
  c.abs_tol = number_or(j, "abs_tol", f, c.abs_tol);
  if (!(c.rel_tol > 0.0)) invalid(f + ".rel_tol", "must be > 0");
  if (!(c.abs_tol > 0.0)) invalid(f + ".abs_tol", "must be > 0");
  c.initial_step = number_or(j, "initial_step", f, 0.0);
  if (c.initial_step < 0.0) invalid(f + ".initial_step", "must be >= 0");
  if (j.contains("max_step") && !j.at("max_step").is_null()) {
    c.max_step = get_number(j.at("max_step"), f + ".max_step");
    if (!(c.max_step > 0.0)) invalid(f + ".max_step", "must be > 0");
  }
  if (j.contains("hermitize_each_step")) c.hermitize_each_step = get_bool(j.at("hermitize_each_step"), f + ".hermitize_each_step");
  if (j.contains("fixed_step") && !j.at("fixed_step").is_null()) {
    c.fixed_step = get_number(j.at("fixed_step"), f + ".fixed_step");
    if (!(*c.fixed_step > 0.0)) invalid(f + ".fixed_step", "must be > 0");
  }
  c.min_eigenvalue_floor = number_or(j, "min_eigenvalue_floor", f, c.min_eigenvalue_floor);
  if (j.contains("max_steps")) c.max_steps = get_count(j.at("max_steps"), f + ".max_steps");
  return c;
}

json integrator_json(const IntegratorConfig& c) {
  return json{{"rel_tol", c.rel_tol},
              {"abs_tol", c.abs_tol},
              {"initial_step", c.initial_step},
              {"max_step", std::isfinite(c.max_step) ? json(c.max_step) : json(nullptr)},
              {"hermitize_each_step", c.hermitize_each_step},
              {"fixed_step", c.fixed_step ? json(*c.fixed_step) : json(nullptr)},
              {"min_eigenvalue_floor", c.min_eigenvalue_floor},
              {"max_steps", c.max_steps}};
}

Scenario scenario_from_json(const json& j) {
  only_keys(j, "scenario", {"name", "description", "system", "initial_states", "initial", "time", "observables",
                            "integrator", "steady_state", "output"});
  Scenario s;
  if (j.contains("name")) s.name = get_string(j.at("name"), "name");
  if (j.contains("description")) s.description = get_string(j.at("description"), "description");
  if (!j.contains("system")) invalid("system", "required");
  s.system = parse_system(j.at("system"));
  const DimsLayout layout = layout_of(s.system);

  if (j.contains("initial_states") == j.contains("initial")) invalid("initial_states", "give exactly one of initial / initial_states");
  if (j.contains("initial")) {
    s.initial_states.push_back(parse_state(j.at("initial"), "initial"));
  } else {
    const json& is = j.at("initial_states");
    if (!is.is_array() || is.empty()) invalid("initial_states", "expected a non-empty list");
    for (std::size_t i = 0; i < is.size(); ++i)
      s.initial_states.push_back(parse_state(is[i], "initial_states[" + std::to_string(i) + "]"));
  }
  for (const auto& st : s.initial_states) build_initial_state(st, layout);

  if (!j.contains("time")) invalid("time", "required");
  {
    const json& t = j.at("time");
    only_keys(t, "time", {"unit", "horizon", "points"});
    const std::string unit = t.contains("unit") ? get_string(t.at("unit"), "time.unit") : "omega";
    if (unit == "omega") {
      s.time.unit = TimeUnit::Omega;
    } else if (unit == "kappa") {
      s.time.unit = TimeUnit::Kappa;
    } else {
      invalid("time.unit", "expected 'omega' or 'kappa'");
    }
    if (!t.contains("horizon")) invalid("time.horizon", "required");
    s.time.horizon = get_number(t.at("horizon"), "time.horizon");
    if (!(s.time.horizon > 0.0)) invalid("time.horizon", "must be > 0");
    s.time.points = t.contains("points") ? get_count(t.at("points"), "time.points") : 1001;
    if (s.time.points < 2) invalid("time.points", "must be >= 2");
    if (s.time.unit == TimeUnit::Kappa &&
        (s.system.collective_channels.empty() || !(s.system.collective_channels[0].rate > 0.0)))
      invalid("time.unit", "'kappa' needs a first collective channel with rate > 0");
  }

  if (j.contains("observables")) {
    const json& os = j.at("observables");
    if (!os.is_array()) invalid("observables", "expected a list");
    for (std::size_t i = 0; i < os.size(); ++i)
      s.observables.push_back(parse_observable(os[i], "observables[" + std::to_string(i) + "]", s.system));
  } else {
    s.observables.push_back(ObservableSpec{});
  }
  std::set<std::string> columns;
  for (const auto& o : s.observables)
    for (const auto& c : observable_columns(o, s.system))
      if (!columns.insert(c).second) invalid("observables", "duplicate column '" + c + "'");

  if (j.contains("integrator")) s.integrator = parse_integrator(j.at("integrator"));
  if (j.contains("steady_state")) {
    const json& ss = j.at("steady_state");
    only_keys(ss, "steady_state", {"enabled", "rhs_tol", "en_tol", "stop"});
    if (ss.contains("enabled")) s.steady_state.enabled = get_bool(ss.at("enabled"), "steady_state.enabled");
    s.steady_state.rhs_tol = number_or(ss, "rhs_tol", "steady_state", s.steady_state.rhs_tol);
    s.steady_state.en_tol = number_or(ss, "en_tol", "steady_state", s.steady_state.en_tol);
    if (ss.contains("stop")) s.steady_state.stop = get_bool(ss.at("stop"), "steady_state.stop");
    if (!(s.steady_state.rhs_tol > 0.0) || !(s.steady_state.en_tol > 0.0))
      invalid("steady_state", "tolerances must be > 0");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    only_keys(o, "output", {"path", "plot_spec", "format"});
    if (o.contains("format") && get_string(o.at("format"), "output.format") != "csv")
      invalid("output.format", "only 'csv' is supported");
    if (o.contains("path")) s.output.path = get_string(o.at("path"), "output.path");
    if (o.contains("plot_spec")) s.output.plot_spec = get_string(o.at("plot_spec"), "output.plot_spec");
  }
  return s;
}

json scenario_json(const Scenario& s) {
  json initial = json::array();
  for (const auto& st : s.initial_states) initial.push_back(state_json(st));
  json obs = json::array();
  for (const auto& o : s.observables) obs.push_back(observable_json(o));
  return json{{"name", s.name},
              {"description", s.description},
              {"system", system_json(s.system)},
              {"initial_states", initial},
              {"time", json{{"unit", s.time.unit == TimeUnit::Omega ? "omega" : "kappa"},
                            {"horizon", s.time.horizon},
                            {"points", s.time.points}}},
              {"observables", obs},
              {"integrator", integrator_json(s.integrator)},
              {"steady_state", json{{"enabled", s.steady_state.enabled},
                                    {"rhs_tol", s.steady_state.rhs_tol},
                                    {"en_tol", s.steady_state.en_tol},
                                    {"stop", s.steady_state.stop}}},
              {"output", json{{"path", s.output.path}, {"plot_spec", s.output.plot_spec}, {"format", "csv"}}}};
}

std::string party_label(const Bipartition& b) {
  std::string out = "EN[";
  for (std::size_t i = 0; i < b.party_a.size(); ++i) out += (i ? "," : "") + std::to_string(b.party_a[i] + 1);
  out += "|";
  for (std::size_t i = 0; i < b.party_b.size(); ++i) out += (i ? "," : "") + std::to_string(b.party_b[i] + 1);
  return out + "]";
}

}  // namespace

double Scenario::time_scale() const {
  if (time.unit == TimeUnit::Omega) return 1.0;
  return 1.0 / system.collective_channels.at(0).rate;
}

std::vector<std::string> observable_columns(const ObservableSpec& obs, const SystemSpec& system) {
  const std::string tag = obs.name.empty() ? obs.target.describe() : obs.name;
  switch (obs.kind) {
    case ObservableSpec::Kind::Energy: return {"energy"};
    case ObservableSpec::Kind::Fidelity: return {"fidelity[" + tag + "]"};
    case ObservableSpec::Kind::FidelitySqrt: return {"fidelity_sqrt[" + tag + "]"};
    case ObservableSpec::Kind::LogNegativity: return {obs.name.empty() ? party_label(obs.parties) : obs.name};
    case ObservableSpec::Kind::Purity: return {"purity"};
    case ObservableSpec::Kind::Nes: {
      std::vector<std::string> cols;
      for (std::size_t e = 0; e < system.emitters.size(); ++e) cols.push_back("exc[" + std::to_string(e + 1) + "]");
      cols.push_back("dark_weight");
      cols.push_back("nes");
      return cols;
    }
    case ObservableSpec::Kind::Checks: return {"hermiticity_error", "min_eigenvalue"};
  }
  return {};
}

Scenario parse_scenario(const std::string& text) { return scenario_from_json(parse_json(text, "scenario")); }

std::string dump_scenario(const Scenario& scenario) { return scenario_json(scenario).dump(2) + "\n"; }

// --- sweeps -------------------------------------------------------------------

std::string Reduction::label() const {
  switch (kind) {
    case Kind::Final: return "final(" + column + ")";
    case Kind::Min: return "min(" + column + ")";
    case Kind::Max: return "max(" + column + ")";
    case Kind::TailDecayRate: return "tail_rate(" + column + ")";
    case Kind::SteadyTime: return "steady_time";
  }
  return column;
}

std::size_t SweepSpec::point_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

Scenario SweepSpec::scenario_at(const std::vector<std::size_t>& indices) const {
  if (indices.size() != axes.size()) throw Error(ErrorCode::DimensionMismatch, "one index per sweep axis required");
  json j = json::parse(base_json);
  for (std::size_t a = 0; a < axes.size(); ++a) {
    for (const auto& p : axes[a].paths) {
      const json::json_pointer ptr(p);
      if (!j.contains(ptr)) invalid("axes[" + std::to_string(a) + "].paths", "'" + p + "' does not exist in the scenario");
      j[ptr] = axes[a].values.at(indices[a]);
    }
  }
  return scenario_from_json(j);
}

SweepSpec parse_sweep(const std::string& text) {
  const json j = parse_json(text, "sweep");
  only_keys(j, "sweep", {"base", "preset", "initial", "axes", "reductions", "workers"});
  SweepSpec s;
  if (j.contains("base") == j.contains("preset")) invalid("sweep", "give exactly one of base / preset");
  const Scenario base = j.contains("base") ? scenario_from_json(j.at("base"))
                                           : load_preset(get_string(j.at("preset"), "preset"));
  s.base_json = scenario_json(base).dump();

  if (j.contains("initial")) {
    const StateSpec wanted = parse_state(j.at("initial"), "initial");
    auto it = std::find(base.initial_states.begin(), base.initial_states.end(), wanted);
    if (it == base.initial_states.end()) {
      // Not one of the scenario's states: sweep it as the only initial state.
      json b = json::parse(s.base_json);
      b["initial_states"] = json::array({state_json(wanted)});
      s.base_json = scenario_json(scenario_from_json(b)).dump();
      s.initial_index = 0;
    } else {
      s.initial_index = static_cast<std::size_t>(it - base.initial_states.begin());
    }
  }

  if (!j.contains("axes") || !j.at("axes").is_array() || j.at("axes").empty()) invalid("axes", "expected a non-empty list");
  const json& axes = j.at("axes");
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const std::string f = "axes[" + std::to_string(a) + "]";
    only_keys(axes[a], f, {"name", "path", "paths", "values"});
    SweepAxis ax;
    if (axes[a].contains("path") == axes[a].contains("paths")) invalid(f, "give exactly one of path / paths");
    if (axes[a].contains("path")) {
      ax.paths.push_back(get_string(axes[a].at("path"), f + ".path"));
    } else {
      const json& ps = axes[a].at("paths");
      if (!ps.is_array() || ps.empty()) invalid(f + ".paths", "expected a non-empty list");
      for (const auto& p : ps) ax.paths.push_back(get_string(p, f + ".paths"));
    }
    ax.name = axes[a].contains("name") ? get_string(axes[a].at("name"), f + ".name") : ax.paths.front();
    if (!axes[a].contains("values") || !axes[a].at("values").is_array() || axes[a].at("values").empty())
      invalid(f + ".values", "expected a non-empty list");
    for (const auto& v : axes[a].at("values")) ax.values.push_back(get_number(v, f + ".values"));
    for (const auto& p : ax.paths) {
      try {
        if (!json::parse(s.base_json).contains(json::json_pointer(p))) invalid(f + ".paths", "'" + p + "' does not exist in the scenario");
      } catch (const json::exception&) {
        invalid(f + ".paths", "'" + p + "' is not a valid JSON pointer");
      }
    }
    s.axes.push_back(std::move(ax));
  }

  const Scenario probe = scenario_from_json(json::parse(s.base_json));
  std::set<std::string> columns;
  for (const auto& o : probe.observables)
    for (const auto& c : observable_columns(o, probe.system)) columns.insert(c);
  columns.insert("trace_error");

  if (j.contains("reductions")) {
    const json& rs = j.at("reductions");
    if (!rs.is_array() || rs.empty()) invalid("reductions", "expected a non-empty list");
    for (std::size_t r = 0; r < rs.size(); ++r) {
      const std::string f = "reductions[" + std::to_string(r) + "]";
      only_keys(rs[r], f, {"kind", "column", "from", "to"});
      Reduction red;
      const std::string kind = rs[r].contains("kind") ? get_string(rs[r].at("kind"), f + ".kind") : "final";
      if (kind == "final") red.kind = Reduction::Kind::Final;
      else if (kind == "min") red.kind = Reduction::Kind::Min;
      else if (kind == "max") red.kind = Reduction::Kind::Max;
      else if (kind == "tail_decay_rate") red.kind = Reduction::Kind::TailDecayRate;
      else if (kind == "steady_time") red.kind = Reduction::Kind::SteadyTime;
      else invalid(f + ".kind", "unknown reduction '" + kind + "'");
      if (red.kind != Reduction::Kind::SteadyTime) {
        if (!rs[r].contains("column")) invalid(f + ".column", "required");
        red.column = get_string(rs[r].at("column"), f + ".column");
        if (!columns.count(red.column)) invalid(f + ".column", "no column '" + red.column + "' in the scenario output");
      }
      red.from = number_or(rs[r], "from", f, 0.0);
      red.to = number_or(rs[r], "to", f, std::numeric_limits<double>::infinity());
      s.reductions.push_back(red);
    }
  } else {
    for (const auto& o : probe.observables)
      for (const auto& c : observable_columns(o, probe.system)) s.reductions.push_back({Reduction::Kind::Final, c});
  }
  if (j.contains("workers")) s.workers = get_count(j.at("workers"), "workers");
  return s;
}

}  // namespace coopdiss
