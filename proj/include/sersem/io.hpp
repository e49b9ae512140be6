#pragma once

// NDJSON wire formats shared by the pipeline commands.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sersem/mask.hpp"
#include "sersem/projection.hpp"
#include "sersem/scoring.hpp"
#include "sersem/types.hpp"

namespace sersem {

/// Parses every non-blank line; JSON errors become SchemaError with the line.
void for_each_ndjson(const std::filesystem::path& path,
                     const std::function<void(const nlohmann::json&, std::size_t)>& fn);

/// {"id", "language", "label", "content"} per line. Ids must be unique and
/// non-empty, content valid UTF-8, label 0, 1 or null.
std::vector<SourceSample> read_manifest(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const SourceSample& sample);

/// {"sample_id", "length", "degraded", "spans": [[start, end, weight], ...]}
nlohmann::ordered_json to_json(const CharWeightMask& mask);
std::map<std::string, CharWeightMask> read_masks(const std::filesystem::path& path);

/// One row of the prober's token-record file. `tokens` covers every
/// position; `z` and `logprob` cover positions 1..n-1.
struct TokenDump {
  std::string sample_id;
  std::vector<TokenSpan> tokens;
  std::vector<double> z;
  std::vector<double> logprob;

  std::vector<TokenRecord> records() const;
};

nlohmann::ordered_json to_json(const TokenDump& dump);
std::map<std::string, TokenDump> read_token_records(const std::filesystem::path& path);

/// {"sample_id", "layer", "features": [...]} rows, one per (sample, layer).
struct FeatureTable {
  std::map<std::string, std::map<std::size_t, std::vector<double>>> by_sample;
  std::map<std::size_t, std::size_t> dims;  // layer -> feature dimension
};

FeatureTable read_features(const std::filesystem::path& path);

/// {"sample_id", "language", "label", "anomaly", "probe", "fused", "loss", "mink"}
nlohmann::ordered_json to_json(const MembershipScore& score);
std::vector<MembershipScore> read_scores(const std::filesystem::path& path);

/// Writes one compact JSON document per line.
class NdjsonWriter {
 public:
  explicit NdjsonWriter(const std::filesystem::path& path);
  void write(const nlohmann::ordered_json& row);
  void write_line(const std::string& line);
  /// Flushes and reports write failures; the destructor only closes.
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};
}  // namespace sersem
