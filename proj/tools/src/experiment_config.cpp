#include "tdlab/cli/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace tdlab::cli {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

void reject_unknown_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  if (!object.is_object()) fail(std::string(where) + " must be an object");
  for (const auto& item : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      fail("unknown key '" + item.key() + "' in " + std::string(where));
    }
  }
}

std::size_t read_count(const Json& object, const char* key, std::size_t fallback) {
  if (!object.contains(key)) return fallback;
  const auto& v = object.at(key);
  if (!v.is_number_unsigned()) fail(std::string(key) + " must be a non-negative integer");
  return v.get<std::size_t>();
}

double read_number(const Json& object, const char* key, double fallback) {
  if (!object.contains(key)) return fallback;
  const auto& v = object.at(key);
  if (!v.is_number()) fail(std::string(key) + " must be a number");
  return v.get<double>();
}

std::string read_string(const Json& object, const char* key, std::string fallback) {
  if (!object.contains(key)) return fallback;
  const auto& v = object.at(key);
  if (!v.is_string()) fail(std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::vector<double> read_numbers(const Json& object, const char* key,
                                 std::vector<double> fallback) {
  if (!object.contains(key)) return fallback;
  const auto& v = object.at(key);
  if (!v.is_array()) fail(std::string(key) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(std::string(key) + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

template <typename Parse>
auto read_enum(const Json& object, const char* key, std::string fallback, Parse parse) {
  const auto name = read_string(object, key, std::move(fallback));
  try {
    return parse(name);
  } catch (const std::invalid_argument& e) {
    fail(std::string(key) + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig default_experiment_config() { return ExperimentConfig{}; }

std::string to_json(const ExperimentConfig& config) {
  const auto& r = config.run;
  Json env;
  env["n_states"] = r.env.n_states;
  env["n_actions"] = r.env.n_actions;
  env["branching"] = r.env.branching;
  env["n_terminating"] = r.env.n_terminating;
  env["base_pi"] = r.env.base_pi;
  env["base_mu"] = r.env.base_mu;
  env["gamma"] = r.env.gamma;

  Json grid;
  grid["alphas"] = config.grid.alphas;
  grid["etas"] = config.grid.etas;
  grid["lambdas"] = config.grid.lambdas;

  Json doc;
  doc["version"] = kConfigVersion;
  doc["setting"] = std::string(to_string(r.setting));
  doc["representation"] = std::string(to_string(r.representation));
  doc["metric"] = std::string(to_string(r.metric));
  doc["algorithms"] = config.algorithms;
  doc["n_steps"] = r.n_steps;
  doc["n_runs"] = r.n_runs;
  doc["n_mdps"] = r.n_mdps;
  doc["seed_root"] = r.seed_root;
  doc["clamp_ceiling"] = r.clamp_ceiling;
  doc["beta_scale"] = r.beta_scale;
  doc["environment"] = std::move(env);
  doc["grid"] = std::move(grid);
  doc["out"] = config.out;
  return doc.dump(2) + "\n";
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  reject_unknown_keys(doc,
                      {"version", "setting", "representation", "metric", "algorithms", "n_steps",
                       "n_runs", "n_mdps", "seed_root", "clamp_ceiling", "beta_scale",
                       "environment", "grid", "out"},
                      "config");
  if (!doc.contains("version")) fail("config has no version field");
  if (!doc.at("version").is_number_integer() || doc.at("version").get<int>() != kConfigVersion) {
    fail("unsupported config version (expected " + std::to_string(kConfigVersion) + ")");
  }

  ExperimentConfig c;
  auto& r = c.run;
  r.setting = read_enum(doc, "setting", std::string(to_string(r.setting)),
                        [](const std::string& s) { return parse_setting(s); });
  r.representation = read_enum(doc, "representation", std::string(to_string(r.representation)),
                               [](const std::string& s) { return parse_feature_kind(s); });
  r.metric = read_enum(doc, "metric", std::string(to_string(r.metric)),
                       [](const std::string& s) { return parse_metric_kind(s); });
  if (doc.contains("algorithms")) {
    const auto& a = doc.at("algorithms");
    if (!a.is_array()) fail("algorithms must be an array of strings");
    for (const auto& name : a) {
      if (!name.is_string()) fail("algorithms must be an array of strings");
      c.algorithms.push_back(name.get<std::string>());
    }
  }
  r.n_steps = read_count(doc, "n_steps", r.n_steps);
  r.n_runs = read_count(doc, "n_runs", r.n_runs);
  r.n_mdps = read_count(doc, "n_mdps", r.n_mdps);
  if (doc.contains("seed_root")) {
    if (!doc.at("seed_root").is_number_unsigned()) fail("seed_root must be a non-negative integer");
    r.seed_root = doc.at("seed_root").get<std::uint64_t>();
  }
  r.clamp_ceiling = read_number(doc, "clamp_ceiling", r.clamp_ceiling);
  r.beta_scale = read_number(doc, "beta_scale", r.beta_scale);

  if (doc.contains("environment")) {
    const auto& e = doc.at("environment");
    reject_unknown_keys(e,
                        {"n_states", "n_actions", "branching", "n_terminating", "base_pi",
                         "base_mu", "gamma"},
                        "environment");
    r.env.n_states = read_count(e, "n_states", r.env.n_states);
    r.env.n_actions = read_count(e, "n_actions", r.env.n_actions);
    r.env.branching = read_count(e, "branching", r.env.branching);
    r.env.n_terminating = read_count(e, "n_terminating", r.env.n_terminating);
    r.env.base_pi = read_number(e, "base_pi", r.env.base_pi);
    r.env.base_mu = read_number(e, "base_mu", r.env.base_mu);
    r.env.gamma = read_number(e, "gamma", r.env.gamma);
  }
  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    reject_unknown_keys(g, {"alphas", "etas", "lambdas"}, "grid");
    c.grid.alphas = read_numbers(g, "alphas", c.grid.alphas);
    c.grid.etas = read_numbers(g, "etas", c.grid.etas);
    c.grid.lambdas = read_numbers(g, "lambdas", c.grid.lambdas);
  }
  c.out = read_string(doc, "out", c.out);

  try {
    validate(c.grid);
  } catch (const std::invalid_argument& e) {
    fail(std::string("grid: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("error reading config '" + path.string() + "'");
  return parse_experiment_config(text.str());
}

std::vector<std::string> algorithms_for(Setting setting) {
  std::vector<std::string> out;
  for (const auto& a : algorithms()) {
    if (setting == Setting::on_policy || !a.on_policy_only) out.emplace_back(a.name);
  }
  return out;
}

std::vector<std::string> resolve_algorithms(const ExperimentConfig& config) {
  auto names = config.algorithms.empty() ? algorithms_for(config.run.setting) : config.algorithms;
  for (const auto& name : names) {
    if (std::count(names.begin(), names.end(), name) > 1) {
      fail("algorithm '" + name + "' listed twice");
    }
    RunConfig rc = config.run;
    rc.algorithm = name;
    try {
      validate(rc);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  return names;
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("TDLAB_SEED");
  if (raw == nullptr) return std::nullopt;
  const std::string_view text(raw);
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    fail("TDLAB_SEED must be an unsigned 64-bit integer, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace tdlab::cli
