#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sersem/mask.hpp"

namespace sersem {

/// A subword token's character range. start == end marks a zero-width
/// special token.
struct TokenSpan {
  std::size_t index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct TokenWeights {
  std::string sample_id;
  std::vector<double> raw;         // max char weight under each token
  std::vector<double> normalized;  // raw / sum(raw)
};

/// Projects a mask onto tokens by taking the maximum character weight under
/// each token. `spans` may arrive in any order; their indices must form
/// 0..n-1. Throws InvalidArgument on an empty list, a bad index, or a span
/// past the end of the mask.
TokenWeights project(const CharWeightMask& mask, std::span<const TokenSpan> spans);

/// Same, against already materialized character weights.
TokenWeights project(std::span<const double> char_weights, std::span<const TokenSpan> spans,
                     std::string sample_id = {});

}  // namespace sersem
