#include "tdlab/serialization.hpp"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace tdlab {

using nlohmann::json;

namespace {

json nested_table(const MdpSpec& mdp, const std::vector<double>& table) {
  json out = json::array();
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    json per_action = json::array();
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      json row = json::array();
      for (std::size_t t = 0; t < mdp.n_states; ++t) {
        row.push_back(table[(s * mdp.n_actions + a) * mdp.n_states + t]);
      }
      per_action.push_back(std::move(row));
    }
    out.push_back(std::move(per_action));
  }
  return out;
}

std::vector<double> flatten_table(const json& j, std::size_t n, std::size_t m, const char* name) {
  if (!j.is_array() || j.size() != n) {
    throw std::invalid_argument(std::string("environment: bad shape for ") + name);
  }
  std::vector<double> out;
  out.reserve(n * m * n);
  for (const auto& per_action : j) {
    if (!per_action.is_array() || per_action.size() != m) {
      throw std::invalid_argument(std::string("environment: bad shape for ") + name);
    }
    for (const auto& row : per_action) {
      if (!row.is_array() || row.size() != n) {
        throw std::invalid_argument(std::string("environment: bad shape for ") + name);
      }
      for (const auto& v : row) out.push_back(v.get<double>());
    }
  }
  return out;
}

json matrix_rows(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t i = 0; i < rows; ++i) {
    out.push_back(std::vector<double>(flat.begin() + static_cast<long>(i * cols),
                                      flat.begin() + static_cast<long>((i + 1) * cols)));
  }
  return out;
}

std::vector<double> flatten_rows(const json& j, std::size_t rows, std::size_t cols,
                                 const char* name) {
  if (!j.is_array() || j.size() != rows) {
    throw std::invalid_argument(std::string("environment: bad shape for ") + name);
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) {
      throw std::invalid_argument(std::string("environment: bad shape for ") + name);
    }
    for (const auto& v : row) out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::string environment_to_json(const MdpSpec& mdp, const FeatureMap& features,
                                 const PolicyPair* policies, int indent) {
  json doc;
  doc["version"] = kEnvironmentDocumentVersion;
  doc["n_states"] = mdp.n_states;
  doc["n_actions"] = mdp.n_actions;
  doc["P"] = nested_table(mdp, mdp.P);
  doc["R"] = nested_table(mdp, mdp.R);
  json pairs = json::array();
  for (auto [s, t] : mdp.gamma_zero_pairs()) pairs.push_back({s, t});
  doc["gamma_zero_pairs"] = std::move(pairs);
  doc["default_gamma"] = mdp.default_gamma;
  doc["seed"] = mdp.seed;
  doc["features"] = {
      {"kind", std::string(to_string(features.kind))},
      {"d", features.d},
      {"x", matrix_rows(features.x, features.n_states, features.d)},
      {"aliased_states", features.aliased_states},
  };
  if (policies != nullptr) {
    doc["policies"] = {
        {"pi", matrix_rows(policies->pi, policies->n_states, policies->n_actions)},
        {"mu", matrix_rows(policies->mu, policies->n_states, policies->n_actions)},
    };
  }
  return doc.dump(indent);
}

EnvironmentDocument environment_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("environment: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != kEnvironmentDocumentVersion) {
      throw std::invalid_argument("environment: unsupported document version");
    }
    const auto n = doc.at("n_states").get<std::size_t>();
    const auto m = doc.at("n_actions").get<std::size_t>();
    EnvironmentDocument out;
    out.mdp = MdpSpec(n, m, doc.at("default_gamma").get<double>());
    out.mdp.seed = doc.at("seed").get<std::uint64_t>();
    out.mdp.P = flatten_table(doc.at("P"), n, m, "P");
    out.mdp.R = flatten_table(doc.at("R"), n, m, "R");
    for (const auto& pair : doc.at("gamma_zero_pairs")) {
      const auto s = pair.at(0).get<std::size_t>();
      const auto t = pair.at(1).get<std::size_t>();
      if (s >= n || t >= n) throw std::invalid_argument("environment: pair out of range");
      out.mdp.set_terminating(s, t);
    }
    validate(out.mdp);

    const auto& f = doc.at("features");
    out.features.kind = parse_feature_kind(f.at("kind").get<std::string>());
    out.features.n_states = n;
    out.features.d = f.at("d").get<std::size_t>();
    out.features.x = flatten_rows(f.at("x"), n, out.features.d, "features.x");
    out.features.aliased_states = f.at("aliased_states").get<std::vector<std::size_t>>();

    if (doc.contains("policies")) {
      const auto& p = doc.at("policies");
      out.policies = make_policy_pair(n, m, flatten_rows(p.at("pi"), n, m, "policies.pi"),
                                      flatten_rows(p.at("mu"), n, m, "policies.mu"));
    }
    return out;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("environment: ") + e.what());
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

}  // namespace tdlab
