#include "sersem/projection.hpp"

#include <algorithm>
#include <numeric>

#include "sersem/error.hpp"

namespace sersem {

TokenWeights project(std::span<const double> char_weights, std::span<const TokenSpan> spans,
                     std::string sample_id) {
  if (spans.empty()) throw InvalidArgument("cannot project onto an empty token list");
  const std::size_t n = spans.size();
  TokenWeights out;
  out.sample_id = std::move(sample_id);
  out.raw.assign(n, 0.0);
  std::vector<bool> seen(n, false);

  for (const TokenSpan& t : spans) {
    if (t.index >= n || seen[t.index]) {
      throw InvalidArgument("token index " + std::to_string(t.index) +
                            " is duplicated or outside 0.." + std::to_string(n - 1));
    }
    seen[t.index] = true;
    if (t.start > t.end || t.end > char_weights.size()) {
      throw InvalidArgument("token " + std::to_string(t.index) + " span [" +
                            std::to_string(t.start) + ", " + std::to_string(t.end) +
                            ") exceeds mask length " + std::to_string(char_weights.size()));
    }
    double w = weights::kBoilerplate;
    for (std::size_t i = t.start; i < t.end; ++i) w = std::max(w, char_weights[i]);
    out.raw[t.index] = w;
  }

  const double total = std::accumulate(out.raw.begin(), out.raw.end(), 0.0);
  out.normalized.resize(n);
  std::transform(out.raw.begin(), out.raw.end(), out.normalized.begin(),
                 [total](double w) { return w / total; });
  return out;
}

TokenWeights project(const CharWeightMask& mask, std::span<const TokenSpan> spans) {
  const std::vector<double> weights = mask.materialize();
  return project(weights, spans, mask.sample_id);
}

}  // namespace sersem
