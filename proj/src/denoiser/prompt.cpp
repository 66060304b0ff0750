// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "gencomm/denoiser/prompt.hpp"

#include <charconv>
#include <cstdint>

#include "gencomm/errors.hpp"

namespace gencomm::denoiser {

diffusion::PromptEmbedding embed_prompt(std::string_view text, int num_classes) {
  if (num_classes < 1) throw ConfigError("embed_prompt: num_classes must be >= 1");
  constexpr std::string_view kPrefix = "class:";
  if (text.starts_with(kPrefix)) {
    const auto digits = text.substr(kPrefix.size());
    unsigned long long value = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec == std::errc{} && end == digits.data() + digits.size() && !digits.empty()) {
      return {static_cast<int>(value % static_cast<unsigned long long>(num_classes))};
    }
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return {static_cast<int>(h % static_cast<std::uint64_t>(num_classes))};
}

}  // namespace gencomm::denoiser
