#pragma once

// Character-level anomaly weighting of source code.
//
// A mask assigns every Unicode scalar of a sample one of the five weights in
// `sersem::weights`. Signals come from a tree-sitter parse (identifiers,
// string literals, comments), formatting lints, an English dictionary check
// on identifiers, and a developer-tag scan. Where signals overlap the
// character takes the maximum weight; uncovered characters weigh 0.1.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sersem/types.hpp"
#include "sersem/utf8.hpp"

namespace sersem {

// ---------------------------------------------------------------------------
// Syntax classification

struct SyntaxResult {
  std::vector<AnomalySpan> spans;  // sorted by start
  bool degraded = false;           // regex fallback was used
};

/// Owns one tree-sitter parser per language. Not thread-safe; give each
/// worker its own instance.
class SyntaxClassifier {
 public:
  SyntaxClassifier();
  ~SyntaxClassifier();
  SyntaxClassifier(SyntaxClassifier&&) noexcept;
  SyntaxClassifier& operator=(SyntaxClassifier&&) noexcept;
  SyntaxClassifier(const SyntaxClassifier&) = delete;
  SyntaxClassifier& operator=(const SyntaxClassifier&) = delete;

  /// Emits standard_identifier, long_identifier, string_literal and comment
  /// spans. Identifiers shorter than three scalars emit nothing.
  SyntaxResult classify(const SourceSample& sample, const Utf8Text& text);
  SyntaxResult classify(const SourceSample& sample);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SyntaxResult classify_syntax(const SourceSample& sample);

/// Regex-only classification used when the parse fails: identifier words
/// (minus the language's keywords), quote-delimited strings and line or block
/// comments. Exposed for testing.
std::vector<AnomalySpan> classify_by_regex(Language language, const Utf8Text& text);

/// True when the whole of `text` matches [A-Za-z_][A-Za-z0-9_]*.
bool is_identifier(std::u32string_view text);

// ---------------------------------------------------------------------------
// Formatting lints

enum class LintRule {
  trailing_whitespace,
  mixed_tabs_spaces,
  inconsistent_indent,
  multiple_blank_lines,
  overlong_line,
};

std::string_view to_string(LintRule rule);
std::optional<LintRule> parse_lint_rule(std::string_view name);

struct LintDiagnostic {
  std::size_t start = 0;
  std::size_t end = 0;
  LintRule rule = LintRule::trailing_whitespace;
  friend bool operator==(const LintDiagnostic&, const LintDiagnostic&) = default;
};

inline constexpr std::size_t kMaxLineLength = 120;

std::vector<LintDiagnostic> lint_format(const Utf8Text& text);
std::vector<LintDiagnostic> lint_format(const SourceSample& sample);

/// Rows of an external lint NDJSON file grouped by sample id, in file order.
using ExternalLints = std::map<std::string, std::vector<LintDiagnostic>>;

/// Parses the whole file; a malformed row rejects it with a SchemaError
/// naming the line.
ExternalLints read_lint_file(const std::filesystem::path& path);

struct LintImport {
  std::vector<LintDiagnostic> diagnostics;
  std::vector<std::string> warnings;
};

/// Diagnostics for `sample_id` that fit inside `content_length`; the rest are
/// dropped with a warning each.
LintImport import_lint_diagnostics(const ExternalLints& lints, const std::string& sample_id,
                                   std::size_t content_length);
LintImport import_lint_diagnostics(const std::filesystem::path& path, const std::string& sample_id,
                                   std::size_t content_length);

// ---------------------------------------------------------------------------
// Dictionary check

class Wordlist {
 public:
  Wordlist() = default;
  /// One lowercase word per line; blank lines ignored.
  static Wordlist load(const std::filesystem::path& path);
  static Wordlist from_words(std::span<const std::string> words);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_set<std::string, Hash, std::equal_to<>> words_;
};

/// Location of the bundled English word list: $SERSEM_WORDLIST if set, else
/// the path baked in at build time.
std::filesystem::path default_wordlist_path();

/// Lowercased sub-words of an identifier longer than two characters. Splits
/// on underscores, digits, lower-to-upper transitions and at the end of an
/// upper-case run followed by a lower-case letter (HTTPServer -> http, server).
std::vector<std::string> split_identifier(std::string_view identifier);

/// Passes when every sub-word is an English word, or there are none.
bool dictionary_check(std::string_view identifier, const Wordlist& wordlist);

// ---------------------------------------------------------------------------
// Developer tags

inline constexpr std::string_view kPsychTags[] = {"TODO", "FIXME", "HACK", "XXX", "WTF", "NOTE"};

std::vector<AnomalySpan> psych_tag_scan(const Utf8Text& text);
std::vector<AnomalySpan> psych_tag_scan(const SourceSample& sample);

// ---------------------------------------------------------------------------
// Mask assembly

/// A maximal run of characters sharing one weight above the 0.1 default.
struct WeightRun {
  std::size_t start = 0;
  std::size_t end = 0;
  double weight = weights::kBoilerplate;
  friend bool operator==(const WeightRun&, const WeightRun&) = default;
};

struct CharWeightMask {
  std::string sample_id;
  std::size_t length = 0;
  bool degraded = false;
  std::vector<WeightRun> spans;  // sorted, non-overlapping, weight > 0.1

  /// Per-character weights, `length` entries.
  std::vector<double> materialize() const;
};

/// Per-character maximum over spans, defaulting to 0.1.
std::vector<double> max_weights(std::size_t length, std::span<const AnomalySpan> spans);

/// Collapses per-character weights to runs, omitting the 0.1 default.
std::vector<WeightRun> compress_weights(std::span<const double> weights);

/// Builds masks; holds a syntax classifier, so one engine per worker.
class MaskEngine {
 public:
  explicit MaskEngine(const Wordlist& wordlist);

  /// All spans feeding the mask, before the max rule is applied.
  std::vector<AnomalySpan> collect_spans(const SourceSample& sample, const Utf8Text& text,
                                         std::span<const LintDiagnostic> external_lints,
                                         bool* degraded);

  CharWeightMask build(const SourceSample& sample,
                       std::span<const LintDiagnostic> external_lints = {});

 private:
  const Wordlist* wordlist_;
  SyntaxClassifier syntax_;
};

CharWeightMask build_mask(const SourceSample& sample, const Wordlist& wordlist,
                          std::span<const LintDiagnostic> external_lints = {});

}  // namespace sersem
