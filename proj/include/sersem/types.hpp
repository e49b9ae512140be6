#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace sersem {

enum class Language { python, java, go, ruby, rust };

inline constexpr Language kAllLanguages[] = {Language::python, Language::java, Language::go,
                                             Language::ruby, Language::rust};

std::string_view to_string(Language language);
std::optional<Language> parse_language(std::string_view name);

/// One labeled source file. `label` is 1 for a training-set member, 0 for a
/// non-member and empty when unknown.
struct SourceSample {
  std::string id;
  Language language = Language::python;
  std::string content;
  std::optional<int> label;
};

enum class AnomalyKind {
  boilerplate,
  standard_identifier,
  long_identifier,
  string_literal,
  lint_error,
  comment,
  multilingual_slippage,
  psych_tag,
};

std::string_view to_string(AnomalyKind kind);

namespace weights {
inline constexpr double kBoilerplate = 0.1;
inline constexpr double kStandardIdentifier = 1.0;
inline constexpr double kLongIdentifier = 3.0;
inline constexpr double kStringLiteral = 5.0;
inline constexpr double kLintError = 5.0;
inline constexpr double kComment = 10.0;
inline constexpr double kMultilingualSlippage = 10.0;
inline constexpr double kPsychTag = 10.0;
}  // namespace weights

constexpr double weight_of(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::boilerplate: return weights::kBoilerplate;
    case AnomalyKind::standard_identifier: return weights::kStandardIdentifier;
    case AnomalyKind::long_identifier: return weights::kLongIdentifier;
    case AnomalyKind::string_literal: return weights::kStringLiteral;
    case AnomalyKind::lint_error: return weights::kLintError;
    case AnomalyKind::comment: return weights::kComment;
    case AnomalyKind::multilingual_slippage: return weights::kMultilingualSlippage;
    case AnomalyKind::psych_tag: return weights::kPsychTag;
  }
  return weights::kBoilerplate;
}

/// True when `w` is one of the five distinct mask weights.
bool is_mask_weight(double w);

/// Half-open range [start, end) of Unicode scalar offsets with its class.
struct AnomalySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  AnomalyKind kind = AnomalyKind::boilerplate;
  double weight = weights::kBoilerplate;

  static AnomalySpan make(std::size_t start, std::size_t end, AnomalyKind kind) {
    return {start, end, kind, weight_of(kind)};
  }
  friend bool operator==(const AnomalySpan&, const AnomalySpan&) = default;
};

}  // namespace sersem
