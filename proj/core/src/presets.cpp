#include <algorithm>
#include <sstream>
#include <string_view>
#include <utility>
#include <vector>

#include "coopdiss/error.hpp"
#include "coopdiss/scenario.hpp"
#include "json.hpp"

namespace coopdiss {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_presets();
}

namespace {

std::string canonical_name(const std::string& name) {
  static const std::pair<const char*, const char*> aliases[] = {
      {"clockwork", "fig3e-clockwork"}, {"fig3e", "fig3e-clockwork"}, {"fig3b", "fig3a"}, {"fig3d", "fig3c"},
  };
  for (const auto& [alias, target] : aliases)
    if (name == alias) return target;
  return name;
}

std::string_view raw_preset(const std::string& name) {
  for (const auto& [n, text] : detail::embedded_presets())
    if (n == name) return text;
  throw Error(ErrorCode::UnknownLabel, "unknown preset '" + name + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// nqubit:N=5:phases=0,1.57,...
std::string nqubit_text(const std::string& args) {
  auto j = nlohmann::json::parse(raw_preset("nqubit"));
  std::size_t n = 4;
  std::vector<double> phases;
  for (const auto& kv : split(args, ':')) {
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::UnknownLabel, "nqubit parameter '" + kv + "' is not key=value");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    try {
      if (key == "N") {
        n = std::stoul(value);
      } else if (key == "phases") {
        for (const auto& p : split(value, ',')) phases.push_back(std::stod(p));
      } else {
        throw Error(ErrorCode::UnknownLabel, "unknown nqubit parameter '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ValidationError, "nqubit parameter '" + kv + "' is not numeric");
    }
  }
  if (n < 2) throw Error(ErrorCode::ValidationError, "nqubit needs N >= 2");
  if (phases.empty()) phases.assign(n, 0.0);
  if (phases.size() != n) throw Error(ErrorCode::ValidationError, "nqubit needs one phase per qubit");
  j["name"] = "nqubit:N=" + std::to_string(n);
  j["system"]["qubits"]["count"] = n;
  j["system"]["collective_channels"][0]["phases"] = phases;
  j["initial_states"] = nlohmann::json::array({"1" + std::string(n - 1, '0')});
  return j.dump(2);
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& [name, text] : detail::embedded_presets()) {
    const auto j = nlohmann::json::parse(text);
    out.push_back({std::string(name), j.value("description", std::string{})});
  }
  return out;
}

std::string preset_text(const std::string& name) {
  if (name == "nqubit" || name.rfind("nqubit:", 0) == 0) {
    return nqubit_text(name.size() > 6 ? name.substr(7) : std::string{});
  }
  return std::string(raw_preset(canonical_name(name)));
}

Scenario load_preset(const std::string& name) { return parse_scenario(preset_text(name)); }

}  // namespace coopdiss
