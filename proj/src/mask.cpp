#include <algorithm>

#include "sersem/error.hpp"
#include "sersem/mask.hpp"

namespace sersem {
namespace {

constexpr bool is_word_char(char32_t c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

std::string ascii(const Utf8Text& text, std::size_t start, std::size_t end) {
  std::string out;
  out.reserve(end - start);
  for (std::size_t i = start; i < end; ++i) out.push_back(static_cast<char>(text[i]));
  return out;
}

}  // namespace

std::vector<AnomalySpan> psych_tag_scan(const Utf8Text& text) {
  std::vector<AnomalySpan> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && is_word_char(text[end])) ++end;
    for (std::string_view tag : kPsychTags) {
      if (end - i != tag.size()) continue;
      if (std::equal(tag.begin(), tag.end(), text.chars().begin() + static_cast<std::ptrdiff_t>(i))) {
        out.push_back(AnomalySpan::make(i, end, AnomalyKind::psych_tag));
        break;
      }
    }
    i = end;
  }
  return out;
}

std::vector<AnomalySpan> psych_tag_scan(const SourceSample& sample) {
  return psych_tag_scan(Utf8Text(sample.content));
}

std::vector<double> max_weights(std::size_t length, std::span<const AnomalySpan> spans) {
  std::vector<double> w(length, weights::kBoilerplate);
  for (const AnomalySpan& s : spans) {
    if (s.start >= s.end || s.end > length) {
      throw InvalidArgument("span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                            ") outside text of length " + std::to_string(length));
    }
    for (std::size_t i = s.start; i < s.end; ++i) w[i] = std::max(w[i], s.weight);
  }
  return w;
}

std::vector<WeightRun> compress_weights(std::span<const double> w) {
  std::vector<WeightRun> runs;
  std::size_t i = 0;
  while (i < w.size()) {
    std::size_t j = i + 1;
    while (j < w.size() && w[j] == w[i]) ++j;
    if (w[i] != weights::kBoilerplate) runs.push_back({i, j, w[i]});
    i = j;
  }
  return runs;
}

std::vector<double> CharWeightMask::materialize() const {
  std::vector<double> w(length, weights::kBoilerplate);
  for (const WeightRun& run : spans) {
    if (run.start >= run.end || run.end > length) {
      throw InvalidArgument("mask run outside text for sample " + sample_id);
    }
    std::fill(w.begin() + static_cast<std::ptrdiff_t>(run.start),
              w.begin() + static_cast<std::ptrdiff_t>(run.end), run.weight);
  }
  return w;
}

MaskEngine::MaskEngine(const Wordlist& wordlist) : wordlist_(&wordlist) {}

std::vector<AnomalySpan> MaskEngine::collect_spans(const SourceSample& sample,
                                                   const Utf8Text& text,
                                                   std::span<const LintDiagnostic> external_lints,
                                                   bool* degraded) {
  SyntaxResult syntax = syntax_.classify(sample, text);
  if (degraded) *degraded = syntax.degraded;
  std::vector<AnomalySpan> spans = std::move(syntax.spans);

  for (AnomalySpan& span : spans) {
    if (span.kind != AnomalyKind::standard_identifier && span.kind != AnomalyKind::long_identifier) {
      continue;
    }
    if (!dictionary_check(ascii(text, span.start, span.end), *wordlist_)) {
      span = AnomalySpan::make(span.start, span.end, AnomalyKind::multilingual_slippage);
    }
  }
  for (const LintDiagnostic& d : lint_format(text)) {
    spans.push_back(AnomalySpan::make(d.start, d.end, AnomalyKind::lint_error));
  }
  for (const LintDiagnostic& d : external_lints) {
    if (d.start < d.end && d.end <= text.size()) {
      spans.push_back(AnomalySpan::make(d.start, d.end, AnomalyKind::lint_error));
    }
  }
  for (const AnomalySpan& tag : psych_tag_scan(text)) spans.push_back(tag);
  return spans;
}

CharWeightMask MaskEngine::build(const SourceSample& sample,
                                 std::span<const LintDiagnostic> external_lints) {
  const Utf8Text text(sample.content);
  CharWeightMask mask;
  mask.sample_id = sample.id;
  mask.length = text.size();
  const std::vector<AnomalySpan> spans = collect_spans(sample, text, external_lints, &mask.degraded);
  mask.spans = compress_weights(max_weights(mask.length, spans));
  return mask;
}

CharWeightMask build_mask(const SourceSample& sample, const Wordlist& wordlist,
                          std::span<const LintDiagnostic> external_lints) {
  MaskEngine engine(wordlist);
  return engine.build(sample, external_lints);
}

}  // namespace sersem
