#pragma once

// Batch commands behind the `sersem` executable. Each command reads its
// inputs completely (failing with a SchemaError on the first malformed row),
// processes samples on a worker pool and writes rows in input order.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sersem/probe.hpp"

namespace sersem {

using Path = std::filesystem::path;

struct RunContext {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  /// Receives per-sample problems that do not stop the run. Called from the
  /// calling thread, in input order.
  std::function<void(const std::string&)> warn;
};

struct MaskOptions {
  Path manifest;
  Path out;
  std::optional<Path> lints;     // external lint NDJSON
  std::optional<Path> wordlist;  // defaults to default_wordlist_path()
};

struct MaskSummary {
  std::size_t samples = 0;
  std::size_t degraded = 0;
};

MaskSummary cmd_mask(const MaskOptions& options, const RunContext& ctx);

struct ScoreOptions {
  Path manifest;
  Path masks;
  Path token_records;
  Path out;
  double k_percent = 20.0;
};

struct ScoreSummary {
  std::size_t samples = 0;
  std::size_t incomplete = 0;  // rows with at least one null score
};

ScoreSummary cmd_score(const ScoreOptions& options, const RunContext& ctx);

struct TrainOptions {
  Path features;
  Path manifest;  // source of labels
  Path out_bundle;
  std::optional<Path> split;  // restrict training to the plan's train ids
  TrainConfig config;          // config.seed is taken from the context
};

struct TrainSummary {
  std::size_t samples = 0;
  std::size_t layers = 0;
  std::vector<std::size_t> chosen;
};

TrainSummary cmd_train_probes(const TrainOptions& options, const RunContext& ctx);

struct InferOptions {
  Path features;
  Path bundle;
  Path scores_in;
  Path out;
  double alpha = 0.5;
};

struct InferSummary {
  std::size_t samples = 0;
  std::size_t missing_features = 0;
};

InferSummary cmd_infer(const InferOptions& options, const RunContext& ctx);

struct EvalOptions {
  Path scores;
  Path report;
  std::optional<Path> roc_dir;  // defaults to the report's directory
  std::optional<Path> split;    // restrict to the plan's inference ids
};

struct EvalSummary {
  std::size_t rows = 0;
  std::vector<Path> roc_files;
};

EvalSummary cmd_eval(const EvalOptions& options, const RunContext& ctx);

struct SplitOptions {
  Path manifest;
  Path out;
  std::size_t per_language = 0;
  double train_fraction = 0.5;
};

void cmd_split(const SplitOptions& options, const RunContext& ctx);

}  // namespace sersem
