#include "algh/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace algh {

namespace {

using nlohmann::json;

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("'" + key + "' must be finite");
  return d;
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(number(e, key));
  return out;
}

// Splits "family.name" when the prefix matches.
bool parameter_key(const std::string& key, const std::string& family, std::string& name) {
  const std::string prefix = family + ".";
  if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) return false;
  name = key.substr(prefix.size());
  return true;
}

}  // namespace

void validate(const ModelConfig& c) {
  std::size_t m = 0, r = 0;
  try {
    const BuiltinModel model = make_model(c.model, c.model_parameters);
    make_hamiltonian(model, c.hamiltonian, c.hamiltonian_parameters);
    make_force(model, c.force, c.force_parameters);
    m = static_cast<std::size_t>(model.algebroid.m());
    r = static_cast<std::size_t>(model.algebroid.r());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!c.x0.empty() && c.x0.size() != m)
    throw ConfigError("x0 has " + std::to_string(c.x0.size()) + " entries, model expects " + std::to_string(m));
  if (!c.p0.empty() && c.p0.size() != r)
    throw ConfigError("p0 has " + std::to_string(c.p0.size()) + " entries, model expects " + std::to_string(r));
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
  if (c.probes < 1) throw ConfigError("probes must be at least 1");
}

ModelConfig parse_config(const std::string& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ModelConfig c;
  for (const auto& [key, v] : doc.items()) {
    std::string name;
    if (key == "model") {
      c.model = text(v, key);
    } else if (key == "hamiltonian") {
      c.hamiltonian = text(v, key);
    } else if (key == "force") {
      c.force = text(v, key);
    } else if (key == "x0") {
      c.x0 = numbers(v, key);
    } else if (key == "p0") {
      c.p0 = numbers(v, key);
    } else if (key == "t_end") {
      c.t_end = number(v, key);
    } else if (key == "dt") {
      c.dt = number(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "probes") {
      if (!v.is_number_integer()) throw ConfigError("'probes' must be an integer");
      const auto n = v.get<long long>();
      if (n < 1 || n > 1000000) throw ConfigError("probes must be between 1 and 1000000");
      c.probes = static_cast<int>(n);
    } else if (key == "output") {
      c.output = text(v, key);
    } else if (parameter_key(key, "model", name)) {
      c.model_parameters[name] = number(v, key);
    } else if (parameter_key(key, "hamiltonian", name)) {
      c.hamiltonian_parameters[name] = number(v, key);
    } else if (parameter_key(key, "force", name)) {
      c.force_parameters[name] = number(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigIOError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ConfigIOError("error while reading config '" + path + "'");
  return parse_config(buf.str());
}

}  // namespace algh
