#include "occupancy/model_literal.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace occupancy {

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParameterError("model literal: expected key=value, got '" + item + "'");
    }
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("model literal: bad numeric value for " + key + ": '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("model literal: bad integer value for " + key + ": '" + s + "'");
  }
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ParameterError("model literal: missing " + key + "=");
  return it->second;
}

FrequencyModel parse_block(const std::map<std::string, std::string>& kv) {
  if (auto it = kv.find("preset"); it != kv.end()) {
    BlockPreset preset;
    if (it->second == "ex10") {
      preset = BlockPreset::kEx10;
    } else if (it->second == "ex11") {
      preset = BlockPreset::kEx11;
    } else if (it->second == "ex12") {
      preset = BlockPreset::kEx12;
    } else {
      throw ParameterError("model literal: unknown block preset '" + it->second + "'");
    }
    if (auto d = kv.find("depth"); d != kv.end()) {
      return FrequencyModel::block_preset(preset, static_cast<int>(to_u64(d->second, "depth")));
    }
    return FrequencyModel::block_preset(preset);
  }
  const std::string& path = require(kv, "file");
  std::ifstream in(path);
  if (!in) throw ParameterError("model literal: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("model literal: bad JSON in " + path + ": " + e.what());
  }
  if (!doc.is_array()) throw ParameterError("model literal: " + path + " must hold a JSON array");
  BlockSpec spec;
  for (const auto& rec : doc) {
    if (!rec.is_object() || !rec.contains("q") || !rec.contains("m")) {
      throw ParameterError("model literal: block records need fields q and m");
    }
    spec.atoms.push_back({rec["q"].get<double>(), rec["m"].get<std::uint64_t>()});
  }
  return FrequencyModel::block(std::move(spec));
}

FrequencyModel parse_explicit(const std::map<std::string, std::string>& kv) {
  const std::string& path = require(kv, "file");
  std::ifstream in(path);
  if (!in) throw ParameterError("model literal: cannot open " + path);
  std::vector<double> p;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream ss(line);
    double v;
    while (ss >> v) p.push_back(v);
  }
  if (p.empty()) throw ParameterError("model literal: no frequencies in " + path);
  return FrequencyModel::from_frequencies(std::move(p));
}

}  // namespace

FrequencyModel parse_model_literal(const std::string& literal) {
  const auto colon = literal.find(':');
  if (colon == std::string::npos) {
    throw ParameterError("model literal: expected kind:params, got '" + literal + "'");
  }
  const std::string kind = literal.substr(0, colon);
  const auto kv = parse_kv(literal.substr(colon + 1));
  if (kind == "geometric") return FrequencyModel::geometric(to_double(require(kv, "q"), "q"));
  if (kind == "powerlaw") {
    return FrequencyModel::power_law(to_double(require(kv, "alpha"), "alpha"));
  }
  if (kind == "block") return parse_block(kv);
  if (kind == "gem") {
    return FrequencyModel::stick_breaking(
        to_double(require(kv, "alpha"), "alpha"), to_double(require(kv, "theta"), "theta"),
        to_u64(require(kv, "seed"), "seed"), to_u64(require(kv, "depth"), "depth"));
  }
  if (kind == "explicit") return parse_explicit(kv);
  throw ParameterError("model literal: unknown kind '" + kind + "'");
}

}  // namespace occupancy
