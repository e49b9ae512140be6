#include "sersem/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sersem/error.hpp"

namespace sersem {
namespace {

template <typename T>
ZScore zscore_impl(std::span<const T> logits, std::size_t correct_index) {
  if (logits.size() < 2) throw InvalidArgument("zscore needs a vocabulary of at least 2");
  if (correct_index >= logits.size()) {
    throw InvalidArgument("correct index " + std::to_string(correct_index) + " outside vocabulary");
  }
  for (T v : logits) {
    if (!std::isfinite(v)) throw InvalidArgument("zscore: non-finite logit");
  }
  const auto [lo, hi] = std::minmax_element(logits.begin(), logits.end());
  if (*lo == *hi) return {0.0, true};

  const double n = static_cast<double>(logits.size());
  double mean = 0.0;
  for (T v : logits) mean += static_cast<double>(v);
  mean /= n;
  double var = 0.0;
  for (T v : logits) {
    const double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  const double sd = std::sqrt(var / n);
  return {(static_cast<double>(logits[correct_index]) - mean) / sd, false};
}

}  // namespace

ZScore zscore(std::span<const double> logits, std::size_t correct_index) {
  return zscore_impl(logits, correct_index);
}

ZScore zscore(std::span<const float> logits, std::size_t correct_index) {
  return zscore_impl(logits, correct_index);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double anomaly_score(std::span<const TokenRecord> records, const TokenWeights& weights) {
  const std::size_t n = weights.raw.size();
  if (n < 2 || records.empty()) {
    throw InvalidArgument("anomaly score needs at least two tokens (sample " + weights.sample_id + ")");
  }
  if (records.size() != n - 1) {
    throw InvalidArgument("expected " + std::to_string(n - 1) + " scored positions, got " +
                          std::to_string(records.size()) + " (sample " + weights.sample_id + ")");
  }
  std::vector<bool> seen(n, false);
  double total = 0.0;
  for (const TokenRecord& r : records) {
    if (r.index == 0 || r.index >= n || seen[r.index]) {
      throw InvalidArgument("scored position " + std::to_string(r.index) +
                            " is duplicated or outside 1.." + std::to_string(n - 1));
    }
    if (!std::isfinite(r.z)) throw InvalidArgument("non-finite z at position " + std::to_string(r.index));
    seen[r.index] = true;
    total += weights.raw[r.index];
  }
  double score = 0.0;
  for (const TokenRecord& r : records) score += weights.raw[r.index] / total * sigmoid(r.z);
  // Keep the score inside the open interval when every sigmoid saturates.
  return std::clamp(score, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
}

double loss_score(std::span<const TokenRecord> records) {
  if (records.empty()) throw InvalidArgument("loss score needs at least one record");
  double sum = 0.0;
  for (const TokenRecord& r : records) sum += r.logprob;
  return sum / static_cast<double>(records.size());
}

double mink_score(std::span<const TokenRecord> records, double k_percent) {
  if (records.empty()) throw InvalidArgument("min-k score needs at least one record");
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw InvalidArgument("k_percent must lie in (0, 100]");
  }
  std::vector<double> lp(records.size());
  std::transform(records.begin(), records.end(), lp.begin(),
                 [](const TokenRecord& r) { return r.logprob; });
  std::sort(lp.begin(), lp.end());
  // k * n / 100 keeps integral products exact (0.07 * 100 would not be).
  const double n = static_cast<double>(lp.size());
  const auto take = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(k_percent * n / 100.0)), 1, lp.size());
  if (take == lp.size()) return loss_score(records);
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += lp[i];
  return sum / static_cast<double>(take);
}

double fuse(double anomaly, double probe, double alpha) {
  const auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(anomaly) || !unit(probe) || !unit(alpha)) {
    throw InvalidArgument("fuse inputs must lie in [0, 1]");
  }
  return alpha * anomaly + (1.0 - alpha) * probe;
}

}  // namespace sersem
