// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/feature_store.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "cocoaan/errors.hpp"

namespace cocoaan {

std::string to_string(StoreRole role) { return role == StoreRole::style ? "style" : "content"; }

StoreRole parse_store_role(const std::string& text) {
  if (text == "style") return StoreRole::style;
  if (text == "content") return StoreRole::content;
  throw ConfigError("unknown store role '" + text + "' (expected style or content)");
}

FeatureStore::FeatureStore(StoreRole role, int code_dim) : role_(role), code_dim_(code_dim) {
  if (code_dim < 1) throw ConfigError("feature store code_dim must be positive");
}

const std::vector<double>& FeatureStore::at(Id id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw StoreMissError(to_string(role_) + " store has no entry for id " + std::to_string(id));
  }
  return it->second;
}

void FeatureStore::set(Id id, std::vector<double> code) {
  if (static_cast<int>(code.size()) != code_dim_) {
    throw ShapeError(to_string(role_) + " store: code of length " + std::to_string(code.size()) +
                     ", expected " + std::to_string(code_dim_));
  }
  for (double v : code) {
    if (!std::isfinite(v)) {
      throw NumericError(to_string(role_) + " store: non-finite code for id " + std::to_string(id));
    }
  }
  entries_[id] = std::move(code);
}

Tensor known_codes(const FeatureStore& store, std::span<const Id> keys, std::int64_t iteration,
                   Rng& rng) {
  if (iteration < 0) throw ShapeError("known_codes: negative iteration");
  const auto d = static_cast<std::size_t>(store.code_dim());
  std::vector<double> out;
  out.reserve(keys.size() * d);
  if (iteration == 0) {
    for (std::size_t i = 0; i < keys.size() * d; ++i) out.push_back(rng.normal());
  } else {
    std::vector<Id> missing;
    for (Id k : keys) {
      if (!store.contains(k)) {
        missing.push_back(k);
        continue;
      }
      const auto& code = store.at(k);
      out.insert(out.end(), code.begin(), code.end());
    }
    if (!missing.empty()) {
      std::ostringstream os;
      os << to_string(store.role()) << " store miss at iteration " << iteration << " for ids";
      for (Id k : missing) os << ' ' << k;
      throw StoreMissError(os.str());
    }
  }
  return Tensor({static_cast<std::int64_t>(keys.size()), static_cast<std::int64_t>(d)},
                std::move(out));
}

void update_store(FeatureStore& store, std::span<const Id> keys, const Tensor& codes) {
  const auto d = static_cast<std::int64_t>(store.code_dim());
  if (codes.dim() != 2 || codes.size(0) != static_cast<std::int64_t>(keys.size()) ||
      codes.size(1) != d) {
    throw ShapeError("update_store: " + std::to_string(keys.size()) + " keys with codes " +
                     shape_str(codes.shape()));
  }
  const auto values = codes.data();
  std::map<Id, std::pair<std::vector<double>, int>> groups;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto& [acc, count] = groups[keys[i]];
    acc.resize(static_cast<std::size_t>(d), 0.0);
    for (std::int64_t j = 0; j < d; ++j) acc[j] += values[i * d + j];
    ++count;
  }
  for (auto& [id, group] : groups) {
    auto& [acc, count] = group;
    for (double& v : acc) v /= count;
    store.set(id, std::move(acc));
  }
}

std::set<Id> coverage(const FeatureStore& store) {
  std::set<Id> out;
  for (const auto& [id, code] : store.entries()) out.insert(id);
  return out;
}

void write_store_csv(const FeatureStore& store, std::ostream& out) {
  char buf[32];
  for (const auto& [id, code] : store.entries()) {
    out << to_string(store.role()) << ',' << id;
    for (double v : code) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

FeatureStore read_store_csv(std::istream& in) {
  std::string line;
  FeatureStore store;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() < 3) throw DataError("embedding CSV row too short: " + line);
    const StoreRole role = parse_store_role(fields[0]);
    const int dim = static_cast<int>(fields.size()) - 2;
    if (first) {
      store = FeatureStore(role, dim);
      first = false;
    } else if (role != store.role() || dim != store.code_dim()) {
      throw DataError("embedding CSV mixes roles or dimensions: " + line);
    }
    std::vector<double> code;
    for (std::size_t i = 2; i < fields.size(); ++i) code.push_back(std::stod(fields[i]));
    store.set(std::stoll(fields[1]), std::move(code));
  }
  return store;
}

}  // namespace cocoaan
