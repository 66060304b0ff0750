// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gencomm::sidechannel {

/// One bit per element, values 0 or 1.
using BitString = std::vector<std::uint8_t>;

/// MSB-first packing; the final byte is zero-padded.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits);
BitString unpack_bytes(std::span<const std::uint8_t> bytes);

}  // namespace gencomm::sidechannel
