#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "roughflow/errors.hpp"

namespace roughflow::cli {

namespace {

using nlohmann::json;

enum class Type { String, Number, Integer, Bool, NumberList };

struct Key {
  std::string name;
  Type type;
  json fallback;  // null: no default
  std::vector<std::string> choices;
  std::optional<double> min, max;
  bool min_exclusive = false;
};

const std::vector<std::string> kCommands = {"lift",      "rde",   "flow",           "transport",
                                            "euler",     "study-wongzakai", "study-convergence"};
const std::vector<std::string> kNoise = {"brownian", "fbm", "smooth", "circle", "zero"};
const std::vector<std::string> kFields = {"shear", "constant", "rotation", "zero"};
const std::vector<std::string> kDrifts = {"zero", "rotation", "scaled-identity", "log-lipschitz"};
const std::vector<std::string> kInterp = {"bilinear", "bicubic"};

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = {
      {"command", Type::String, nullptr, kCommands, {}, {}},
      {"seed", Type::Integer, nullptr, {}, 0.0, {}},
      {"grid.horizon", Type::Number, 1.0, {}, 0.0, {}, true},
      {"grid.steps", Type::Integer, 1024, {}, 1.0, 1e7},
      {"grid.level", Type::Integer, 12, {}, 1.0, 20.0},
      {"output.count", Type::Integer, 4, {}, 1.0, 1e6},
      {"noise.kind", Type::String, "brownian", kNoise, {}, {}},
      {"noise.dimension", Type::Integer, 2, {}, 1.0, 8.0},
      {"noise.hurst", Type::Number, 0.5, {}, 1.0 / 3.0, 1.0, true},
      {"fields.name", Type::String, "shear", kFields, {}, {}},
      {"fields.amplitude", Type::Number, 0.3, {}, {}, {}},
      {"fields.wavenumber", Type::Number, 1.0, {}, {}, {}},
      {"fields.sigma", Type::NumberList, json::array(), {}, {}, {}},
      {"drift.name", Type::String, "rotation", kDrifts, {}, {}},
      {"drift.omega", Type::Number, 1.0, {}, {}, {}},
      {"drift.c", Type::Number, 0.5, {}, {}, {}},
      {"rde.initial", Type::NumberList, json::array({0.5, 0.0}), {}, {}, {}},
      {"flow.seeds_per_axis", Type::Integer, 5, {}, 2.0, 100.0},
      {"flow.extent", Type::Number, 0.5, {}, 0.0, {}, true},
      {"flow.fd_step", Type::Number, 1e-4, {}, 0.0, {}, true},
      {"box.cells", Type::Integer, 128, {}, 4.0, 4096.0},
      {"box.half_width", Type::Number, 2.0, {}, 0.0, {}, true},
      {"transport.interpolation", Type::String, "bilinear", kInterp, {}, {}},
      {"transport.rho_sigma", Type::Number, 0.25, {}, 0.0, {}, true},
      {"transport.bump_radius", Type::Number, 1.0, {}, 0.0, {}, true},
      {"euler.pair", Type::Bool, false, {}, {}, {}},
      {"euler.gamma", Type::Number, 1.0, {}, {}, {}},
      {"euler.d", Type::Number, 0.5, {}, 0.0, {}, true},
      {"euler.periods", Type::Number, 1.05, {}, 0.0, {}, true},
      {"euler.cells", Type::Integer, 20, {}, 1.0, 200.0},
      {"euler.spacing", Type::Number, 0.08, {}, 0.0, {}, true},
      {"euler.vortex_sigma", Type::Number, 0.25, {}, 0.0, {}, true},
      {"euler.delta", Type::Number, 0.0, {}, 0.0, {}},
      {"euler.recon_cells", Type::Integer, 64, {}, 4.0, 1024.0},
      {"study.levels", Type::NumberList, json::array(), {}, {}, {}},
      {"tolerance.chen", Type::Number, 1e-12, {}, 0.0, {}},
      {"tolerance.duality", Type::Number, 0.01, {}, 0.0, {}},
      {"tolerance.period", Type::Number, 0.02, {}, 0.0, {}},
      {"tolerance.wongzakai_slack", Type::Number, 0.1, {}, 0.0, {}},
  };
  return keys;
}

// Per-command defaults that differ from the schema defaults.
json command_default(const std::string& command, const std::string& key) {
  static const std::map<std::string, std::map<std::string, json>> table = {
      {"study-wongzakai", {{"study.levels", json::array({6, 7, 8, 9, 10})}, {"grid.steps", 1024}}},
      {"study-convergence", {{"study.levels", json::array({5, 6, 7, 8, 9})}, {"fields.name", "rotation"},
                             {"drift.name", "zero"}}},
      {"euler", {{"grid.steps", 400}}},
      {"transport", {{"grid.steps", 256}}},
  };
  auto c = table.find(command);
  if (c == table.end()) return nullptr;
  auto k = c->second.find(key);
  return k == c->second.end() ? json(nullptr) : k->second;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) return std::nullopt;
  const std::string s = trim(v.get<std::string>());
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return d;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string describe(Type t) {
  switch (t) {
    case Type::String: return "a name";
    case Type::Number: return "a number";
    case Type::Integer: return "an integer";
    case Type::Bool: return "true or false";
    case Type::NumberList: return "a comma-separated list of numbers";
  }
  return "";
}

std::optional<json> coerce(const Key& key, const json& v) {
  switch (key.type) {
    case Type::String:
      if (v.is_string()) return trim(v.get<std::string>());
      return std::nullopt;
    case Type::Number: {
      auto d = to_number(v);
      if (!d || !std::isfinite(*d)) return std::nullopt;
      return *d;
    }
    case Type::Integer: {
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      if (v.is_string()) {
        const std::string s = trim(v.get<std::string>());
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
          auto d = to_number(v);
          if (d && *d >= 0 && std::floor(*d) == *d && *d < 9.007e15) return static_cast<std::uint64_t>(*d);
          return std::nullopt;
        }
        try {
          return std::stoull(s);
        } catch (const std::exception&) {
          return std::nullopt;
        }
      }
      auto d = to_number(v);
      if (d && *d >= 0 && std::floor(*d) == *d && *d < 9.007e15) return static_cast<std::uint64_t>(*d);
      return std::nullopt;
    }
    case Type::Bool:
      if (v.is_boolean()) return v.get<bool>();
      if (v.is_string()) {
        std::string s = trim(v.get<std::string>());
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "off" || s == "no" || s == "0") return false;
      }
      return std::nullopt;
    case Type::NumberList: {
      json out = json::array();
      if (v.is_array()) {
        for (const auto& e : v) {
          auto d = to_number(e);
          if (!d || !std::isfinite(*d)) return std::nullopt;
          out.push_back(*d);
        }
        return out;
      }
      if (v.is_number()) return json::array({v.get<double>()});
      if (!v.is_string()) return std::nullopt;
      const std::string s = trim(v.get<std::string>());
      if (s.empty()) return out;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto d = to_number(json(item));
        if (!d || !std::isfinite(*d)) return std::nullopt;
        out.push_back(*d);
      }
      return out;
    }
  }
  return std::nullopt;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string join(const std::vector<std::string>& names) {
  std::string s;
  for (const auto& n : names) s += (s.empty() ? "" : ", ") + n;
  return s;
}

}  // namespace

json parse_config_text(const std::string& text, std::vector<Violation>& violations) {
  json flat = json::object();
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    for (std::size_t p = 1; p < s.size(); ++p)
      if ((s[p] == '#' || s[p] == ';') && (s[p - 1] == ' ' || s[p - 1] == '\t')) {
        s = trim(s.substr(0, p));
        break;
      }
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) {
        violations.push_back({"line " + std::to_string(number), "malformed section header '" + s + "'"});
        continue;
      }
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      violations.push_back({"line " + std::to_string(number), "expected 'key = value', got '" + s + "'"});
      continue;
    }
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) {
      violations.push_back({"line " + std::to_string(number), "empty key"});
      continue;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (flat.contains(full)) violations.push_back({full, "set more than once"});
    flat[full] = trim(s.substr(eq + 1));
  }
  return flat;
}

json flatten_json(const json& doc, std::vector<Violation>& violations) {
  json flat = json::object();
  if (!doc.is_object()) {
    violations.push_back({"(root)", "configuration must be a JSON object"});
    return flat;
  }
  std::function<void(const json&, const std::string&)> walk = [&](const json& node, const std::string& prefix) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it->is_object())
        walk(*it, key);
      else
        flat[key] = *it;
    }
  };
  walk(doc, "");
  return flat;
}

json load_config_file(const std::string& path, std::vector<Violation>& violations) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read configuration '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return flatten_json(json::parse(text), violations);
    } catch (const json::parse_error& e) {
      violations.push_back({"(json)", e.what()});
      return json::object();
    }
  }
  return parse_config_text(text, violations);
}

ValidationResult validate_config(const json& flat) {
  ValidationResult r;
  r.resolved = json::object();
  std::map<std::string, const Key*> by_name;
  for (const auto& k : schema()) by_name[k.name] = &k;

  for (auto it = flat.begin(); it != flat.end(); ++it)
    if (!by_name.count(it.key())) r.violations.push_back({it.key(), "unknown key"});

  std::string command;
  if (flat.contains("command") && flat["command"].is_string()) command = trim(flat["command"].get<std::string>());

  for (const auto& k : schema()) {
    json value;
    if (flat.contains(k.name)) {
      auto v = coerce(k, flat[k.name]);
      if (!v) {
        r.violations.push_back({k.name, "expected " + describe(k.type) + ", got " + flat[k.name].dump()});
        continue;
      }
      value = *v;
    } else {
      value = command_default(command, k.name);
      if (value.is_null()) value = k.fallback;
    }
    if (value.is_null()) continue;
    if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), value.get<std::string>()) == k.choices.end()) {
      r.violations.push_back({k.name, "unknown name '" + value.get<std::string>() + "'; known: " + join(k.choices)});
      continue;
    }
    if (k.type == Type::Number || k.type == Type::Integer) {
      const double d = value.get<double>();
      if (k.min && (k.min_exclusive ? d <= *k.min : d < *k.min)) {
        r.violations.push_back({k.name, "must be " + std::string(k.min_exclusive ? "> " : ">= ") + short_number(*k.min)});
        continue;
      }
      if (k.max && d > *k.max) {
        r.violations.push_back({k.name, "must be <= " + short_number(*k.max)});
        continue;
      }
    }
    r.resolved[k.name] = value;
  }
  if (!r.resolved.contains("command")) {
    r.violations.push_back({"command", "missing; known: " + join(kCommands)});
    return r;
  }
  // Cross-key rules still run when some keys were rejected; those keys take
  // their defaults here so every violation is reported in one pass.
  json cfg = r.resolved;
  command = cfg["command"].get<std::string>();
  for (const auto& k : schema()) {
    if (cfg.contains(k.name)) continue;
    json fallback = command_default(command, k.name);
    if (fallback.is_null()) fallback = k.fallback;
    if (!fallback.is_null()) cfg[k.name] = fallback;
  }
  const std::string noise = cfg["noise.kind"], fields = cfg["fields.name"], drift = cfg["drift.name"];
  const auto m = cfg["noise.dimension"].get<std::size_t>();
  const auto steps = cfg["grid.steps"].get<std::size_t>();
  const bool circle_lift = command == "lift" && noise == "circle";

  if ((noise == "brownian" || noise == "fbm") && !cfg.contains("seed"))
    r.violations.push_back({"seed", "required for " + noise + " noise"});
  if (!circle_lift && command != "study-wongzakai" && command != "study-convergence" &&
      steps % cfg["output.count"].get<std::size_t>() != 0)
    r.violations.push_back({"output.count", "the output schedule must be a multiple of the time step: output.count (" +
                                                cfg["output.count"].dump() + ") must divide grid.steps (" +
                                                std::to_string(steps) + ")"});
  if (noise == "circle" && m != 2) r.violations.push_back({"noise.dimension", "circle noise is two-dimensional"});
  if (fields == "shear" && m != 2) r.violations.push_back({"noise.dimension", "shear fields need noise.dimension = 2"});
  const std::size_t d = drift == "log-lipschitz" ? 1 : 2;
  if (drift == "log-lipschitz") {
    if (command != "rde") r.violations.push_back({"drift.name", "log-lipschitz drift is one-dimensional (rde only)"});
    if (fields != "zero" && fields != "constant")
      r.violations.push_back({"fields.name", "one-dimensional runs support zero or constant fields"});
  }
  if (fields == "constant" && !cfg["fields.sigma"].empty() && cfg["fields.sigma"].size() != d * m)
    r.violations.push_back({"fields.sigma", "needs " + std::to_string(d * m) + " entries (d x m row-major)"});
  if ((command == "rde" || command == "study-convergence") && cfg["rde.initial"].size() != d)
    r.violations.push_back({"rde.initial", "needs " + std::to_string(d) + " entries"});
  if (command == "study-wongzakai" || command == "study-convergence") {
    const auto& levels = cfg["study.levels"];
    if (levels.size() < 2) r.violations.push_back({"study.levels", "needs at least two levels"});
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double l = levels[i].get<double>();
      if (l < 1 || l > 16 || std::floor(l) != l) r.violations.push_back({"study.levels", "levels are integers in [1, 16]"});
      if (i > 0 && l <= levels[i - 1].get<double>()) r.violations.push_back({"study.levels", "levels must increase"});
    }
    if (command == "study-wongzakai" && noise != "brownian" && noise != "fbm" && noise != "smooth" && noise != "zero")
      r.violations.push_back({"noise.kind", "the Wong-Zakai study samples a path; circle is not supported"});
  }
  if (command == "study-convergence" && fields != "rotation" && fields != "constant" && fields != "zero")
    r.violations.push_back({"fields.name", "the convergence study needs linear or constant fields (rotation, constant, zero)"});
  if (command == "study-convergence" && drift != "zero")
    r.violations.push_back({"drift.name", "the convergence study compares against a driftless closed form"});
  return r;
}

const std::vector<std::string>& known_names(const std::string& key) {
  static const std::vector<std::string> none;
  for (const auto& k : schema())
    if (k.name == key) return k.choices;
  return none;
}

std::uint64_t config_hash(const json& resolved) {
  const std::string text = resolved.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json violations_to_json(const std::vector<Violation>& v) {
  json out = json::array();
  for (const auto& e : v) out.push_back({{"path", e.path}, {"message", e.message}});
  return out;
}

}  // namespace roughflow::cli
