// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "cocoaan/errors.hpp"

namespace cocoaan {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + text + "'");
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

template <class F>
void take(ConfigMap& map, const std::string& key, F&& apply) {
  auto it = map.find(key);
  if (it == map.end()) return;
  apply(it->second);
  map.erase(it);
}

void check_version(ConfigMap& map) {
  take(map, "config_version", [](const std::string& v) {
    if (parse_number<int>("config_version", v) != kConfigVersion) {
      throw ConfigError("unsupported config_version " + v + " (expected " +
                        std::to_string(kConfigVersion) + ")");
    }
  });
}

class Writer {
 public:
  Writer() { os_ << "config_version = " << kConfigVersion << '\n'; }
  Writer& put(const std::string& key, double v) { return raw(key, format_double(v)); }
  Writer& put(const std::string& key, std::int64_t v) { return raw(key, std::to_string(v)); }
  Writer& put(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
  Writer& raw(const std::string& key, const std::string& v) {
    os_ << key << " = " << v << '\n';
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

}  // namespace

void TrainConfig::validate() const {
  scale.validate();
  for (double lr : {lr_s, lr_c, lr_g, lr_d}) {
    if (!(lr > 0 && std::isfinite(lr))) throw ConfigError("learning rates must be positive");
  }
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(lambda >= 0 && std::isfinite(lambda))) throw ConfigError("lambda must be >= 0");
  // Batch statistics need two samples.
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (!(clip_norm >= 0)) throw ConfigError("clip_norm must be >= 0");
}

ConfigMap parse_config(std::istream& in) {
  ConfigMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!map.emplace(key, value).second) throw ConfigError("duplicate config key '" + key + "'");
  }
  return map;
}

ConfigMap parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

std::string format_double(double v) {
  // Plain decimals for the usual hyperparameter range, exponents outside it.
  const double mag = std::fabs(v);
  const auto style = (mag == 0.0 || (mag >= 1e-6 && mag < 1e15)) ? std::chars_format::fixed
                                                                  : std::chars_format::scientific;
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, style);
  return std::string(buf, ptr);
}

std::string to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& text) {
  if (text == "f64") return Precision::f64;
  if (text == "f32") return Precision::f32;
  throw ConfigError("precision must be f64 or f32, got '" + text + "'");
}

void apply_config(ConfigMap& map, TrainConfig& cfg) {
  check_version(map);
  auto num = [&](const char* key, auto& field) {
    take(map, key, [&](const std::string& v) {
      field = parse_number<std::remove_reference_t<decltype(field)>>(key, v);
    });
  };
  num("resolution", cfg.scale.resolution);
  num("code_dim", cfg.scale.code_dim);
  num("width_mult", cfg.scale.width_mult);
  num("lr_s", cfg.lr_s);
  num("lr_c", cfg.lr_c);
  num("lr_g", cfg.lr_g);
  num("lr_d", cfg.lr_d);
  num("beta1", cfg.beta1);
  num("beta2", cfg.beta2);
  num("lambda", cfg.lambda);
  num("batch_size", cfg.batch_size);
  num("iterations", cfg.iterations);
  num("seed", cfg.seed);
  num("checkpoint_every", cfg.checkpoint_every);
  num("clip_norm", cfg.clip_norm);
  take(map, "non_saturating",
       [&](const std::string& v) { cfg.non_saturating = parse_bool("non_saturating", v); });
  take(map, "generator_phase_updates_d", [&](const std::string& v) {
    cfg.generator_phase_updates_d = parse_bool("generator_phase_updates_d", v);
  });
  take(map, "precision", [&](const std::string& v) { cfg.precision = parse_precision(v); });
}

void apply_config(ConfigMap& map, SynthConfig& cfg) {
  check_version(map);
  auto num = [&](const char* key, auto& field) {
    take(map, key, [&](const std::string& v) {
      field = parse_number<std::remove_reference_t<decltype(field)>>(key, v);
    });
  };
  num("n_styles", cfg.n_styles);
  num("n_contents", cfg.n_contents);
  num("resolution", cfg.resolution);
  num("seed", cfg.seed);
  num("thickness_min", cfg.thickness_min);
  num("thickness_max", cfg.thickness_max);
  num("slant_min_deg", cfg.slant_min_deg);
  num("slant_max_deg", cfg.slant_max_deg);
  num("scale_min", cfg.scale_min);
  num("scale_max", cfg.scale_max);
  num("serif_probability", cfg.serif_probability);
}

void reject_unknown_keys(const ConfigMap& map) {
  if (map.empty()) return;
  std::string keys;
  for (const auto& [k, v] : map) keys += (keys.empty() ? "" : ", ") + k;
  throw ConfigError("unknown config keys: " + keys);
}

std::string serialize_config(const TrainConfig& cfg) {
  Writer w;
  w.put("resolution", std::int64_t{cfg.scale.resolution})
      .put("code_dim", std::int64_t{cfg.scale.code_dim})
      .put("width_mult", cfg.scale.width_mult)
      .put("lr_s", cfg.lr_s)
      .put("lr_c", cfg.lr_c)
      .put("lr_g", cfg.lr_g)
      .put("lr_d", cfg.lr_d)
      .put("beta1", cfg.beta1)
      .put("beta2", cfg.beta2)
      .put("lambda", cfg.lambda)
      .put("batch_size", std::int64_t{cfg.batch_size})
      .put("iterations", cfg.iterations)
      .raw("seed", std::to_string(cfg.seed))
      .put("checkpoint_every", cfg.checkpoint_every)
      .put("non_saturating", cfg.non_saturating)
      .put("generator_phase_updates_d", cfg.generator_phase_updates_d)
      .put("clip_norm", cfg.clip_norm)
      .raw("precision", to_string(cfg.precision));
  return w.str();
}

std::string serialize_config(const SynthConfig& cfg) {
  Writer w;
  w.put("n_styles", std::int64_t{cfg.n_styles})
      .put("n_contents", std::int64_t{cfg.n_contents})
      .put("resolution", std::int64_t{cfg.resolution})
      .raw("seed", std::to_string(cfg.seed))
      .put("thickness_min", cfg.thickness_min)
      .put("thickness_max", cfg.thickness_max)
      .put("slant_min_deg", cfg.slant_min_deg)
      .put("slant_max_deg", cfg.slant_max_deg)
      .put("scale_min", cfg.scale_min)
      .put("scale_max", cfg.scale_max)
      .put("serif_probability", cfg.serif_probability);
  return w.str();
}

}  // namespace cocoaan
