#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sersem/projection.hpp"
#include "sersem/types.hpp"

namespace sersem {

struct ZScore {
  double value = 0.0;
  bool degenerate = false;  // every logit equal; value forced to 0
};

/// Standardizes the correct token's logit against the whole vocabulary
/// (population standard deviation). Requires at least two finite logits.
ZScore zscore(std::span<const double> logits, std::size_t correct_index);
ZScore zscore(std::span<const float> logits, std::size_t correct_index);

/// Model statistics for one predicted token. `index` is the token's position
/// in the sequence; position 0 is never predicted.
struct TokenRecord {
  std::size_t index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  double z = 0.0;
  double logprob = 0.0;
};

double sigmoid(double x);

/// Weighted mean of sigmoid(z) over the predicted positions, with the
/// projected token weights renormalized over exactly those positions.
/// `records` must cover positions 1..n-1 of the n tokens in `weights`.
double anomaly_score(std::span<const TokenRecord> records, const TokenWeights& weights);

/// Mean log-probability; larger means more member-like.
double loss_score(std::span<const TokenRecord> records);

/// Mean of the ceil(k/100 * n) lowest log-probabilities.
double mink_score(std::span<const TokenRecord> records, double k_percent = 20.0);

/// alpha * anomaly + (1 - alpha) * probe; all three must lie in [0, 1].
double fuse(double anomaly, double probe, double alpha = 0.5);

/// One row of the scores file. Empty optionals serialize as null.
struct MembershipScore {
  std::string sample_id;
  std::optional<Language> language;
  std::optional<int> label;
  std::optional<double> anomaly;
  std::optional<double> probe;
  std::optional<double> fused;
  std::optional<double> loss;
  std::optional<double> mink;
};

}  // namespace sersem
