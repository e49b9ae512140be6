#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sersem/scoring.hpp"
#include "sersem/types.hpp"

namespace sersem {

/// Mann-Whitney AUC with average ranks for ties. Labels are 0/1; both
/// classes must be present.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the leading (0, 0) point
};

/// Threshold sweep over distinct scores, descending, from (0, 0) to (1, 1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under a curve from roc_curve.
double roc_area(std::span<const RocPoint> curve);

void write_roc_csv(std::span<const RocPoint> curve, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Balanced train/inference splits

struct LanguageSplit {
  std::vector<std::string> train;
  std::vector<std::string> inference;
};

struct SplitPlan {
  std::uint64_t seed = 0;
  std::map<Language, LanguageSplit> languages;
};

/// For every language in `samples`, draws per_language_n labeled samples
/// (half members, half non-members) and splits each class train_fraction /
/// rest. Throws InvalidArgument naming the language and the shortfall.
SplitPlan make_splits(std::span<const SourceSample> samples, std::uint64_t seed,
                      std::size_t per_language_n, double train_fraction);

nlohmann::json to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Report

struct CellCounts {
  std::size_t members = 0;
  std::size_t non_members = 0;
};

struct MethodReport {
  std::optional<double> overall_pooled;
  std::optional<double> overall_macro;
  std::map<Language, std::optional<double>> per_language;
  std::map<Language, CellCounts> counts;
  CellCounts overall_counts;
  std::vector<RocPoint> roc;
};

struct EvalReport {
  std::map<std::string, MethodReport> methods;  // keyed by method name
};

/// Method names as they appear in the scores file and the report.
inline constexpr const char* kScoreMethods[] = {"anomaly", "probe", "fused", "loss", "mink"};

/// AUC per method and language over rows with a label and a value for that
/// method. Cells lacking a class report null.
EvalReport evaluate(std::span<const MembershipScore> scores);

nlohmann::json to_json(const EvalReport& report);

}  // namespace sersem
