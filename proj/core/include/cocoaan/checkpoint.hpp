// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cocoaan/trainer.hpp"

namespace cocoaan {

inline constexpr char kCheckpointMagic[8] = {'C', 'O', 'C', 'O', 'A', 'A', 'N', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Serialises the full training state (see docs/checkpoint_format.md).
std::string encode_checkpoint(const TrainState& state);
/// Throws CheckpointError on bad magic, unsupported version, checksum
/// mismatch, truncation, or entries that do not match the configured scale.
TrainState decode_checkpoint(const std::string& bytes);

/// Writes atomically via a temporary file and rename.
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace cocoaan
