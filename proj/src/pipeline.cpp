#include "sersem/pipeline.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "sersem/error.hpp"
#include "sersem/evaluation.hpp"
#include "sersem/io.hpp"
#include "sersem/mask.hpp"
#include "sersem/parallel.hpp"
#include "sersem/projection.hpp"
#include "sersem/scoring.hpp"
#include "sersem/utf8.hpp"

namespace sersem {
namespace {

void warn(const RunContext& ctx, const std::string& message) {
  if (ctx.warn) ctx.warn(message);
}

Path canonical_or_self(const Path& p) {
  std::error_code ec;
  Path c = std::filesystem::weakly_canonical(p, ec);
  return ec ? p : c;
}

void require_distinct(const Path& out, std::initializer_list<Path> inputs) {
  const Path target = canonical_or_self(out);
  for (const Path& in : inputs) {
    if (!in.empty() && canonical_or_self(in) == target) {
      throw UsageError("output " + out.string() + " would overwrite input " + in.string());
    }
  }
}

nlohmann::json read_json_file(const Path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string(), 1, std::string("invalid JSON: ") + e.what());
  }
}

std::set<std::string> plan_ids(const Path& path, bool train) {
  SplitPlan plan;
  try {
    plan = split_plan_from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string(), 1, std::string("bad split plan: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw SchemaError(path.string(), 1, e.what());
  }
  std::set<std::string> ids;
  for (const auto& [_, split] : plan.languages) {
    const auto& list = train ? split.train : split.inference;
    ids.insert(list.begin(), list.end());
  }
  return ids;
}

// Per-sample results carry their warnings so they can be reported in input
// order after the parallel section.
template <typename Row>
struct Outcome {
  Row row;
  std::vector<std::string> warnings;
};

}  // namespace

MaskSummary cmd_mask(const MaskOptions& options, const RunContext& ctx) {
  require_distinct(options.out, {options.manifest, options.lints.value_or(Path{}),
                                 options.wordlist.value_or(Path{})});
  const std::vector<SourceSample> samples = read_manifest(options.manifest);
  const ExternalLints lints = options.lints ? read_lint_file(*options.lints) : ExternalLints{};
  const Wordlist wordlist = Wordlist::load(options.wordlist.value_or(default_wordlist_path()));

  const std::size_t workers = std::clamp<std::size_t>(ctx.workers, 1, std::max<std::size_t>(samples.size(), 1));
  std::vector<MaskEngine> engines;
  engines.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) engines.emplace_back(wordlist);

  std::vector<Outcome<CharWeightMask>> results(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i, std::size_t w) {
    const SourceSample& s = samples[i];
    LintImport imported;
    if (!lints.empty()) imported = import_lint_diagnostics(lints, s.id, utf8_length(s.content));
    results[i].row = engines[w].build(s, imported.diagnostics);
    results[i].warnings = std::move(imported.warnings);
  });

  std::set<std::string> known;
  for (const SourceSample& s : samples) known.insert(s.id);
  for (const auto& [id, _] : lints) {
    if (!known.contains(id)) warn(ctx, "lint diagnostics for unknown sample " + id + " ignored");
  }

  MaskSummary summary;
  NdjsonWriter out(options.out);
  for (auto& r : results) {
    for (const std::string& w : r.warnings) warn(ctx, w);
    out.write(to_json(r.row));
    ++summary.samples;
    if (r.row.degraded) ++summary.degraded;
  }
  out.close();
  return summary;
}

ScoreSummary cmd_score(const ScoreOptions& options, const RunContext& ctx) {
  require_distinct(options.out, {options.manifest, options.masks, options.token_records});
  if (!(options.k_percent > 0.0 && options.k_percent <= 100.0)) {
    throw UsageError("k-percent must lie in (0, 100]");
  }
  const std::vector<SourceSample> samples = read_manifest(options.manifest);
  const auto masks = read_masks(options.masks);
  const auto dumps = read_token_records(options.token_records);

  std::vector<Outcome<MembershipScore>> results(samples.size());
  parallel_for(samples.size(), ctx.workers, [&](std::size_t i, std::size_t) {
    const SourceSample& s = samples[i];
    auto& [score, warnings] = results[i];
    score.sample_id = s.id;
    score.language = s.language;
    score.label = s.label;

    const auto dump = dumps.find(s.id);
    if (dump == dumps.end()) {
      warnings.push_back("no token records for sample " + s.id);
      return;
    }
    const std::vector<TokenRecord> records = dump->second.records();
    if (records.empty()) {
      warnings.push_back("sample " + s.id + " has a single token; nothing to score");
      return;
    }
    score.loss = loss_score(records);
    score.mink = mink_score(records, options.k_percent);

    const auto mask = masks.find(s.id);
    if (mask == masks.end()) {
      warnings.push_back("no mask for sample " + s.id + "; anomaly score left null");
      return;
    }
    const std::size_t length = utf8_length(s.content);
    if (mask->second.length != length) {
      warnings.push_back("mask for sample " + s.id + " covers " +
                         std::to_string(mask->second.length) + " characters, content has " +
                         std::to_string(length) + "; anomaly score left null");
      return;
    }
    try {
      score.anomaly = anomaly_score(records, project(mask->second, dump->second.tokens));
    } catch (const InvalidArgument& e) {
      warnings.push_back("sample " + s.id + ": " + e.what());
    }
  });

  std::set<std::string> known;
  for (const SourceSample& s : samples) known.insert(s.id);
  std::size_t orphans = 0;
  for (const auto& [id, _] : dumps) orphans += known.contains(id) ? 0 : 1;
  if (orphans > 0) {
    warn(ctx, std::to_string(orphans) + " token records have no manifest entry and were ignored");
  }

  ScoreSummary summary;
  NdjsonWriter out(options.out);
  for (const auto& [score, warnings] : results) {
    for (const std::string& w : warnings) warn(ctx, w);
    out.write(to_json(score));
    ++summary.samples;
    if (!score.anomaly || !score.loss || !score.mink) ++summary.incomplete;
  }
  out.close();
  return summary;
}

TrainSummary cmd_train_probes(const TrainOptions& options, const RunContext& ctx) {
  require_distinct(options.out_bundle,
                   {options.features, options.manifest, options.split.value_or(Path{})});
  TrainConfig config = options.config;
  config.seed = ctx.seed;
  try {
    config.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const std::vector<SourceSample> samples = read_manifest(options.manifest);
  const FeatureTable table = read_features(options.features);
  std::optional<std::set<std::string>> allowed;
  if (options.split) allowed = plan_ids(*options.split, true);

  std::map<std::size_t, LabeledSet> layers;
  for (const auto& [layer, _] : table.dims) layers[layer];
  for (const SourceSample& s : samples) {
    if (!s.label || (allowed && !allowed->contains(s.id))) continue;
    const auto it = table.by_sample.find(s.id);
    if (it == table.by_sample.end()) {
      warn(ctx, "no features for labeled sample " + s.id + "; skipped");
      continue;
    }
    if (it->second.size() != table.dims.size()) {
      warn(ctx, "sample " + s.id + " has features for " + std::to_string(it->second.size()) +
                    " of " + std::to_string(table.dims.size()) + " layers; skipped");
      continue;
    }
    for (const auto& [layer, features] : it->second) {
      LabeledSet& set = layers[layer];
      set.ids.push_back(s.id);
      set.features.push_back(features);
      set.labels.push_back(*s.label);
    }
  }
  if (layers.empty() || layers.begin()->second.size() == 0) {
    throw InvalidArgument("no labeled samples with features to train on");
  }

  const ProbeBundle bundle = train_probe_bundle(layers, config, ctx.workers);
  write_bundle(bundle, options.out_bundle);
  return {layers.begin()->second.size(), layers.size(), bundle.selection.chosen};
}

InferSummary cmd_infer(const InferOptions& options, const RunContext& ctx) {
  require_distinct(options.out, {options.features, options.bundle, options.scores_in});
  if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) throw UsageError("alpha must lie in [0, 1]");
  const ProbeBundle bundle = read_bundle(options.bundle);
  const FeatureTable table = read_features(options.features);
  std::vector<MembershipScore> scores = read_scores(options.scores_in);
  for (std::size_t layer : bundle.selection.chosen) {
    const auto dim = table.dims.find(layer);
    const std::size_t expected = bundle.probes.at(layer).input_dim;
    if (dim != table.dims.end() && dim->second != expected) {
      throw InvalidArgument("layer " + std::to_string(layer) + " features have dimension " +
                            std::to_string(dim->second) + ", the probe expects " +
                            std::to_string(expected));
    }
  }

  std::vector<std::vector<std::string>> warnings(scores.size());
  parallel_for(scores.size(), ctx.workers, [&](std::size_t i, std::size_t) {
    MembershipScore& s = scores[i];
    s.probe.reset();
    s.fused.reset();
    const auto it = table.by_sample.find(s.sample_id);
    std::map<std::size_t, std::vector<double>> chosen;
    for (std::size_t layer : bundle.selection.chosen) {
      if (it == table.by_sample.end() || !it->second.contains(layer)) {
        warnings[i].push_back("no layer " + std::to_string(layer) + " features for sample " +
                              s.sample_id + "; probe score left null");
        return;
      }
      chosen[layer] = it->second.at(layer);
    }
    s.probe = ensemble_infer(bundle.selection, bundle.probes, chosen);
    if (s.anomaly) s.fused = fuse(*s.anomaly, *s.probe, options.alpha);
  });

  InferSummary summary;
  NdjsonWriter out(options.out);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (const std::string& w : warnings[i]) warn(ctx, w);
    out.write(to_json(scores[i]));
    ++summary.samples;
    if (!scores[i].probe) ++summary.missing_features;
  }
  out.close();
  return summary;
}

EvalSummary cmd_eval(const EvalOptions& options, const RunContext& ctx) {
  require_distinct(options.report, {options.scores, options.split.value_or(Path{})});
  std::vector<MembershipScore> scores = read_scores(options.scores);
  if (options.split) {
    const std::set<std::string> ids = plan_ids(*options.split, false);
    std::erase_if(scores, [&](const MembershipScore& s) { return !ids.contains(s.sample_id); });
  }
  std::size_t unlabeled = 0;
  for (const MembershipScore& s : scores) unlabeled += s.label ? 0 : 1;
  if (unlabeled > 0) warn(ctx, std::to_string(unlabeled) + " unlabeled rows excluded from AUC");

  const EvalReport report = evaluate(scores);
  for (const char* method : kScoreMethods) {
    const auto it = report.methods.find(method);
    if (it == report.methods.end() || !it->second.overall_pooled) {
      warn(ctx, std::string("no AUC for method ") + method + " (missing scores or a class)");
    }
  }

  EvalSummary summary;
  summary.rows = scores.size();
  {
    std::ofstream out(options.report, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + options.report.string());
    out << to_json(report).dump(2) << '\n';
    if (!out) throw Error("failed writing " + options.report.string());
  }
  const Path dir = options.roc_dir.value_or(options.report.parent_path());
  if (!dir.empty()) std::filesystem::create_directories(dir);
  for (const auto& [method, m] : report.methods) {
    if (m.roc.empty()) continue;
    const Path file = dir / ("roc_" + method + ".csv");
    require_distinct(file, {options.scores, options.report});
    write_roc_csv(m.roc, file);
    summary.roc_files.push_back(file);
  }
  return summary;
}

void cmd_split(const SplitOptions& options, const RunContext& ctx) {
  require_distinct(options.out, {options.manifest});
  const std::vector<SourceSample> samples = read_manifest(options.manifest);
  const SplitPlan plan =
      make_splits(samples, ctx.seed, options.per_language, options.train_fraction);
  std::ofstream out(options.out, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + options.out.string());
  out << to_json(plan).dump(2) << '\n';
  if (!out) throw Error("failed writing " + options.out.string());
}

}  // namespace sersem
