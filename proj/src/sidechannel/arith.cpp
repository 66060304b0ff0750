// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/sidechannel/arith.hpp"

#include <optional>

#include "gencomm/errors.hpp"

namespace gencomm::sidechannel {

namespace {

constexpr std::uint64_t kTop = 0xFFFFFFFFull;
constexpr std::uint64_t kHalf = 0x80000000ull;
constexpr std::uint64_t kQuarter = 0x40000000ull;
constexpr std::uint64_t kThreeQuarters = 0xC0000000ull;
constexpr std::size_t kMaxBytes = 0xFFFF;
constexpr std::size_t kLengthBits = 16;

class BitWriter {
 public:
  void put(int bit) { bits_.push_back(static_cast<std::uint8_t>(bit)); }
  void put_with_pending(int bit) {
    put(bit);
    for (; pending_ > 0; --pending_) put(1 - bit);
  }
  void defer() { ++pending_; }
  BitString take() { return std::move(bits_); }

 private:
  BitString bits_;
  std::size_t pending_ = 0;
};

BitString encode_arithmetic(std::span<const std::uint8_t> bytes) {
  AdaptiveByteModel model;
  BitWriter out;
  out.put(0);
  std::uint64_t low = 0;
  std::uint64_t high = kTop;
  auto code = [&](int symbol) {
    const std::uint64_t range = high - low + 1;
    const std::uint64_t lo = model.cum_low(symbol);
    const std::uint64_t hi = lo + model.frequency(symbol);
    high = low + range * hi / model.total() - 1;
    low = low + range * lo / model.total();
    for (;;) {
      if (high < kHalf) {
        out.put_with_pending(0);
      } else if (low >= kHalf) {
        out.put_with_pending(1);
        low -= kHalf;
        high -= kHalf;
      } else if (low >= kQuarter && high < kThreeQuarters) {
        out.defer();
        low -= kQuarter;
        high -= kQuarter;
      } else {
        break;
      }
      low <<= 1;
      high = (high << 1) | 1;
    }
    model.update(symbol);
  };
  for (std::uint8_t b : bytes) code(b);
  code(AdaptiveByteModel::kEndOfStream);
  out.defer();
  out.put_with_pending(low < kQuarter ? 0 : 1);
  return out.take();
}

BitString encode_stored(std::span<const std::uint8_t> bytes) {
  BitString bits;
  bits.reserve(1 + kLengthBits + 8 * bytes.size());
  bits.push_back(1);
  for (int i = static_cast<int>(kLengthBits) - 1; i >= 0; --i) {
    bits.push_back(static_cast<std::uint8_t>((bytes.size() >> i) & 1u));
  }
  for (std::uint8_t b : bytes) {
    for (int i = 7; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((b >> i) & 1u));
  }
  return bits;
}

/// `exact`: the stream length must equal the encoder's output length.
/// Otherwise the stream may carry up to 7 trailing zero bits (byte padding).
std::vector<std::uint8_t> decode(std::span<const std::uint8_t> bits, bool exact) {
  if (bits.empty()) throw DecodeError("ac_decode: empty stream");
  auto check_length = [&](std::size_t expected) {
    const bool ok = exact ? bits.size() == expected
                          : bits.size() >= expected && bits.size() < expected + 8;
    if (!ok) {
      throw DecodeError("ac_decode: stream length " + std::to_string(bits.size()) +
                        " does not match the encoded length " + std::to_string(expected));
    }
    for (std::size_t i = expected; i < bits.size(); ++i) {
      if (bits[i]) throw DecodeError("ac_decode: nonzero padding");
    }
  };

  if (bits[0] == 1) {
    if (bits.size() < 1 + kLengthBits) throw DecodeError("ac_decode: truncated stored header");
    std::size_t len = 0;
    for (std::size_t i = 1; i <= kLengthBits; ++i) len = (len << 1) | (bits[i] & 1u);
    check_length(1 + kLengthBits + 8 * len);
    std::vector<std::uint8_t> out(len);
    for (std::size_t j = 0; j < len; ++j) {
      std::uint8_t b = 0;
      for (std::size_t i = 0; i < 8; ++i) b = static_cast<std::uint8_t>((b << 1) | bits[1 + kLengthBits + 8 * j + i]);
      out[j] = b;
    }
    return out;
  }

  std::size_t pos = 1;
  auto next = [&]() -> std::uint64_t {
    const std::uint64_t bit = pos < bits.size() ? (bits[pos] & 1u) : 0u;
    ++pos;
    return bit;
  };
  std::uint64_t value = 0;
  for (int i = 0; i < 32; ++i) value = (value << 1) | next();
  std::uint64_t low = 0;
  std::uint64_t high = kTop;
  std::size_t shifts = 0;
  AdaptiveByteModel model;
  std::vector<std::uint8_t> out;
  for (;;) {
    const std::uint64_t range = high - low + 1;
    const std::uint64_t count = ((value - low + 1) * model.total() - 1) / range;
    if (value < low || value > high || count >= model.total()) {
      throw DecodeError("ac_decode: corrupt stream");
    }
    const int symbol = model.find(static_cast<std::uint32_t>(count));
    const std::uint64_t lo = model.cum_low(symbol);
    const std::uint64_t hi = lo + model.frequency(symbol);
    high = low + range * hi / model.total() - 1;
    low = low + range * lo / model.total();
    for (;;) {
      if (high < kHalf) {
      } else if (low >= kHalf) {
        value -= kHalf;
        low -= kHalf;
        high -= kHalf;
      } else if (low >= kQuarter && high < kThreeQuarters) {
        value -= kQuarter;
        low -= kQuarter;
        high -= kQuarter;
      } else {
        break;
      }
      low <<= 1;
      high = (high << 1) | 1;
      value = (value << 1) | next();
      ++shifts;
    }
    if (symbol == AdaptiveByteModel::kEndOfStream) break;
    if (out.size() == kMaxBytes) throw DecodeError("ac_decode: no end-of-stream marker");
    out.push_back(static_cast<std::uint8_t>(symbol));
    model.update(symbol);
    if (shifts > bits.size() + 32) throw DecodeError("ac_decode: read past end of stream");
  }
  // Encoder output: mode bit, one bit per renormalization shift, two flush bits.
  check_length(1 + shifts + 2);
  return out;
}

}  // namespace

AdaptiveByteModel::AdaptiveByteModel() : freq_(kSymbols, 1u), total_(kSymbols) {}

std::uint32_t AdaptiveByteModel::cum_low(int symbol) const {
  std::uint32_t c = 0;
  for (int s = 0; s < symbol; ++s) c += freq_[static_cast<std::size_t>(s)];
  return c;
}

int AdaptiveByteModel::find(std::uint32_t count) const {
  std::uint32_t c = 0;
  for (int s = 0; s < kSymbols; ++s) {
    c += freq_[static_cast<std::size_t>(s)];
    if (count < c) return s;
  }
  return kSymbols - 1;
}

void AdaptiveByteModel::update(int symbol) {
  freq_[static_cast<std::size_t>(symbol)] += kIncrement;
  total_ += kIncrement;
  if (total_ >= kMaxTotal) {
    total_ = 0;
    for (auto& f : freq_) {
      f = (f + 1) / 2;
      total_ += f;
    }
  }
}

BitString ac_encode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > kMaxBytes) {
    throw FrameError("ac_encode: input of " + std::to_string(bytes.size()) +
                     " bytes exceeds the 65535-byte limit");
  }
  BitString arith = encode_arithmetic(bytes);
  if (arith.size() <= 1 + kLengthBits + 8 * bytes.size()) return arith;
  return encode_stored(bytes);
}

BitString ac_encode(std::string_view text) {
  return ac_encode(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> ac_decode(std::span<const std::uint8_t> bits) { return decode(bits, true); }

std::vector<std::uint8_t> ac_decode_bytes(std::span<const std::uint8_t> bytes) {
  const BitString bits = unpack_bytes(bytes);
  return decode(bits, false);
}

}  // namespace gencomm::sidechannel
