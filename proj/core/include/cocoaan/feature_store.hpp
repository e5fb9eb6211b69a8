// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cocoaan/rng.hpp"
#include "cocoaan/tensor.hpp"

namespace cocoaan {

/// Dense integer id of a style or a content, assigned by the dataset manifest.
using Id = std::int64_t;

enum class StoreRole { style, content };

std::string to_string(StoreRole role);
StoreRole parse_store_role(const std::string& text);

/// Latest averaged code per style (or per content).
class FeatureStore {
 public:
  FeatureStore() = default;
  FeatureStore(StoreRole role, int code_dim);

  StoreRole role() const { return role_; }
  int code_dim() const { return code_dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(Id id) const { return entries_.count(id) != 0; }

  /// Throws StoreMissError when absent.
  const std::vector<double>& at(Id id) const;
  /// Replaces the entry. Throws ShapeError / NumericError on wrong length or
  /// non-finite values.
  void set(Id id, std::vector<double> code);

  const std::map<Id, std::vector<double>>& entries() const { return entries_; }

  friend bool operator==(const FeatureStore&, const FeatureStore&) = default;

 private:
  StoreRole role_ = StoreRole::style;
  int code_dim_ = 0;
  std::map<Id, std::vector<double>> entries_;
};

/// Known (conditioning) codes for `keys`, as a constant [n, code_dim] batch.
/// Iteration 0 draws every row fresh from N(0, I); later iterations look the
/// keys up and throw StoreMissError naming any absent key.
Tensor known_codes(const FeatureStore& store, std::span<const Id> keys, std::int64_t iteration,
                   Rng& rng);

/// For each distinct key, replaces its entry with the mean of that key's rows
/// of `codes` [n, code_dim] in this batch.
void update_store(FeatureStore& store, std::span<const Id> keys, const Tensor& codes);

std::set<Id> coverage(const FeatureStore& store);

/// Rows `role,id,v0,...,v{d-1}` with 17 significant digits, no header.
void write_store_csv(const FeatureStore& store, std::ostream& out);
/// Inverse of write_store_csv.
FeatureStore read_store_csv(std::istream& in);

}  // namespace cocoaan
