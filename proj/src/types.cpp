#include "sersem/types.hpp"

namespace sersem {

std::string_view to_string(Language language) {
  switch (language) {
    case Language::python: return "python";
    case Language::java: return "java";
    case Language::go: return "go";
    case Language::ruby: return "ruby";
    case Language::rust: return "rust";
  }
  return "unknown";
}

std::optional<Language> parse_language(std::string_view name) {
  for (Language language : kAllLanguages) {
    if (to_string(language) == name) return language;
  }
  return std::nullopt;
}

std::string_view to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::boilerplate: return "boilerplate";
    case AnomalyKind::standard_identifier: return "standard_identifier";
    case AnomalyKind::long_identifier: return "long_identifier";
    case AnomalyKind::string_literal: return "string_literal";
    case AnomalyKind::lint_error: return "lint_error";
    case AnomalyKind::comment: return "comment";
    case AnomalyKind::multilingual_slippage: return "multilingual_slippage";
    case AnomalyKind::psych_tag: return "psych_tag";
  }
  return "unknown";
}

bool is_mask_weight(double w) {
  return w == weights::kBoilerplate || w == weights::kStandardIdentifier ||
         w == weights::kLongIdentifier || w == weights::kStringLiteral || w == weights::kComment;
}

}  // namespace sersem
