// Copyright (C) 2026 The gencomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

#include "gencomm/diffusion/predictor.hpp"

namespace gencomm::denoiser {

/// "class:<n>" maps to class n (mod num_classes); any other text is hashed
/// with 64-bit FNV-1a and reduced mod num_classes.
diffusion::PromptEmbedding embed_prompt(std::string_view text, int num_classes);

}  // namespace gencomm::denoiser
