// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cocoaan/errors.hpp"

namespace cocoaan {
namespace {

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Encoder {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_.append(s);
  }
  void doubles(std::span<const double> v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Decoder {
 public:
  Decoder(const std::string& in, std::size_t end) : in_(in), end_(end) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t count(std::size_t elem_bytes) {
    const std::uint64_t n = u64();
    if (elem_bytes > 0 && n > (end_ - pos_) / elem_bytes) throw CheckpointError("checkpoint truncated");
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    const std::size_t n = count(1);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    std::vector<double> v(count(8));
    for (double& x : v) x = f64();
    return v;
  }
  void raw(char* p, std::size_t n) {
    need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw CheckpointError("checkpoint truncated");
  }
  const std::string& in_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

enum EntryKind : std::uint8_t { kParameter = 0, kBuffer = 1 };

template <class P>
void encode_network(Encoder& e, P& net) {
  const auto entries = state_entries(net);
  e.u64(entries.size());
  for (const auto& entry : entries) {
    e.str(entry.name);
    if (entry.tensor.defined()) {
      e.u8(kParameter);
      e.u64(entry.tensor.shape().size());
      for (auto d : entry.tensor.shape()) e.i64(d);
      e.doubles(entry.tensor.data());
    } else {
      e.u8(kBuffer);
      e.u64(1);
      e.i64(static_cast<std::int64_t>(entry.buffer->size()));
      e.doubles(*entry.buffer);
    }
  }
}

template <class P>
void decode_network(Decoder& d, P& net, const char* which) {
  auto entries = state_entries(net);
  if (d.count(0) != entries.size()) {
    throw CheckpointError(std::string(which) + ": entry count does not match the configured scale");
  }
  for (auto& entry : entries) {
    const std::string name = d.str();
    if (name != entry.name) {
      throw CheckpointError(std::string(which) + ": expected entry '" + entry.name + "', found '" +
                            name + "'");
    }
    const auto kind = d.u8();
    Shape shape(d.count(8));
    for (auto& s : shape) s = d.i64();
    std::vector<double> values = d.doubles();
    const bool is_param = entry.tensor.defined();
    if (kind != (is_param ? kParameter : kBuffer)) {
      throw CheckpointError(std::string(which) + ": entry '" + name + "' has the wrong kind");
    }
    if (is_param) {
      if (shape != entry.tensor.shape() || values.size() != static_cast<std::size_t>(entry.tensor.numel())) {
        throw CheckpointError(std::string(which) + ": entry '" + name + "' has shape " +
                              shape_str(shape) + ", expected " + shape_str(entry.tensor.shape()));
      }
      std::copy(values.begin(), values.end(), entry.tensor.mutable_data().begin());
    } else {
      if (values.size() != entry.buffer->size()) {
        throw CheckpointError(std::string(which) + ": buffer '" + name + "' has the wrong length");
      }
      *entry.buffer = std::move(values);
    }
  }
}

void encode_adam(Encoder& e, const AdamState& a) {
  e.i64(a.t);
  e.u64(a.m.size());
  for (std::size_t i = 0; i < a.m.size(); ++i) {
    e.doubles(a.m[i]);
    e.doubles(a.v[i]);
  }
}

void decode_adam(Decoder& d, AdamState& a, const char* which) {
  a.t = d.i64();
  if (d.count(16) != a.m.size()) throw CheckpointError(std::string(which) + ": Adam state size mismatch");
  for (std::size_t i = 0; i < a.m.size(); ++i) {
    auto m = d.doubles();
    auto v = d.doubles();
    if (m.size() != a.m[i].size() || v.size() != a.v[i].size()) {
      throw CheckpointError(std::string(which) + ": Adam moment size mismatch");
    }
    a.m[i] = std::move(m);
    a.v[i] = std::move(v);
  }
}

void encode_store(Encoder& e, const FeatureStore& s) {
  e.u8(s.role() == StoreRole::style ? 0 : 1);
  e.u32(static_cast<std::uint32_t>(s.code_dim()));
  e.u64(s.size());
  for (const auto& [id, code] : s.entries()) {
    e.i64(id);
    for (double x : code) e.f64(x);
  }
}

FeatureStore decode_store(Decoder& d) {
  const auto role = d.u8() == 0 ? StoreRole::style : StoreRole::content;
  const int dim = static_cast<int>(d.u32());
  FeatureStore s(role, dim);
  const std::size_t n = d.count(8 + 8 * static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    const Id id = d.i64();
    std::vector<double> code(static_cast<std::size_t>(dim));
    for (double& x : code) x = d.f64();
    s.set(id, std::move(code));
  }
  return s;
}

void encode_labels(Encoder& e, const std::vector<std::string>& labels) {
  e.u64(labels.size());
  for (const auto& l : labels) e.str(l);
}

std::vector<std::string> decode_labels(Decoder& d) {
  std::vector<std::string> out(d.count(8));
  for (auto& l : out) l = d.str();
  return out;
}

}  // namespace

std::string encode_checkpoint(const TrainState& state) {
  // state_entries needs mutable access only to hand out buffer pointers.
  auto& st = const_cast<TrainState&>(state);
  Encoder e;
  e.raw(kCheckpointMagic, sizeof kCheckpointMagic);
  e.u32(kCheckpointVersion);
  e.str(serialize_config(st.config));
  e.i64(st.iteration);
  e.u64(st.rng.key);
  e.u64(st.rng.counter);
  encode_labels(e, st.manifest.style_labels);
  encode_labels(e, st.manifest.content_labels);
  encode_network(e, st.nets.g);
  encode_network(e, st.nets.s);
  encode_network(e, st.nets.c);
  encode_network(e, st.nets.d);
  encode_adam(e, st.adam_g);
  encode_adam(e, st.adam_s);
  encode_adam(e, st.adam_c);
  encode_adam(e, st.adam_d);
  encode_store(e, st.z_s);
  encode_store(e, st.z_c);
  const std::uint64_t checksum = fnv1a(e.bytes().data(), e.bytes().size());
  e.u64(checksum);
  return std::move(e.bytes());
}

TrainState decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kCheckpointMagic + 4 + 8) throw CheckpointError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const std::size_t body = bytes.size() - 8;
  const std::string trailer = bytes.substr(body);
  Decoder tail(trailer, trailer.size());
  if (tail.u64() != fnv1a(bytes.data(), body)) throw CheckpointError("checkpoint checksum mismatch");

  Decoder d(bytes, body);
  char magic[sizeof kCheckpointMagic];
  d.raw(magic, sizeof magic);
  const auto version = d.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  ConfigMap map = parse_config_text(d.str());
  TrainConfig cfg;
  apply_config(map, cfg);
  reject_unknown_keys(map);

  Manifest manifest;
  const std::int64_t iteration = d.i64();
  RngState rng;
  rng.key = d.u64();
  rng.counter = d.u64();
  manifest.style_labels = decode_labels(d);
  manifest.content_labels = decode_labels(d);

  TrainState st = init_train_state(cfg, manifest);
  st.iteration = iteration;
  st.rng = rng;
  decode_network(d, st.nets.g, "generator");
  decode_network(d, st.nets.s, "style encoder");
  decode_network(d, st.nets.c, "content encoder");
  decode_network(d, st.nets.d, "discriminator");
  decode_adam(d, st.adam_g, "generator");
  decode_adam(d, st.adam_s, "style encoder");
  decode_adam(d, st.adam_c, "content encoder");
  decode_adam(d, st.adam_d, "discriminator");
  st.z_s = decode_store(d);
  st.z_c = decode_store(d);
  if (st.z_s.role() != StoreRole::style || st.z_c.role() != StoreRole::content) {
    throw CheckpointError("checkpoint stores have swapped roles");
  }
  if (!d.done()) throw CheckpointError("trailing bytes in checkpoint");
  return st;
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(state);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace cocoaan
