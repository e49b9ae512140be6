#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "sersem/error.hpp"
#include "sersem/mask.hpp"

namespace sersem {
namespace {

struct Line {
  std::size_t start = 0;
  std::size_t content_end = 0;  // excludes "\n" and a preceding "\r"
  std::size_t end = 0;          // includes the "\n" when present
  bool terminated = false;
  std::size_t indent = 0;
  bool has_tab = false;
  bool has_space = false;
  bool blank = false;
};

std::vector<Line> split_lines(const Utf8Text& text) {
  std::vector<Line> lines;
  const std::size_t n = text.size();
  std::size_t start = 0;
  while (start < n) {
    Line line;
    line.start = start;
    std::size_t nl = start;
    while (nl < n && text[nl] != '\n') ++nl;
    line.terminated = nl < n;
    line.end = line.terminated ? nl + 1 : nl;
    line.content_end = (nl > start && text[nl - 1] == '\r') ? nl - 1 : nl;
    std::size_t i = start;
    while (i < line.content_end && (text[i] == ' ' || text[i] == '\t')) {
      (text[i] == '\t' ? line.has_tab : line.has_space) = true;
      ++i;
    }
    line.indent = i - start;
    line.blank = i == line.content_end;
    lines.push_back(line);
    start = line.end;
  }
  return lines;
}

// Most frequent positive indentation step between consecutive non-blank
// lines; ties go to the smaller step. Zero when nothing ever indents.
std::size_t dominant_indent_unit(const std::vector<Line>& lines) {
  std::map<std::size_t, std::size_t> counts;
  const Line* prev = nullptr;
  for (const Line& line : lines) {
    if (line.blank) continue;
    if (prev && line.indent > prev->indent) ++counts[line.indent - prev->indent];
    prev = &line;
  }
  std::size_t unit = 0;
  std::size_t best = 0;
  for (const auto& [delta, count] : counts) {
    if (count > best) unit = delta, best = count;
  }
  return unit;
}

}  // namespace

std::string_view to_string(LintRule rule) {
  switch (rule) {
    case LintRule::trailing_whitespace: return "trailing_whitespace";
    case LintRule::mixed_tabs_spaces: return "mixed_tabs_spaces";
    case LintRule::inconsistent_indent: return "inconsistent_indent";
    case LintRule::multiple_blank_lines: return "multiple_blank_lines";
    case LintRule::overlong_line: return "overlong_line";
  }
  return "unknown";
}

std::optional<LintRule> parse_lint_rule(std::string_view name) {
  for (LintRule rule : {LintRule::trailing_whitespace, LintRule::mixed_tabs_spaces,
                        LintRule::inconsistent_indent, LintRule::multiple_blank_lines,
                        LintRule::overlong_line}) {
    if (to_string(rule) == name) return rule;
  }
  return std::nullopt;
}

std::vector<LintDiagnostic> lint_format(const Utf8Text& text) {
  const std::vector<Line> lines = split_lines(text);
  const std::size_t unit = dominant_indent_unit(lines);
  std::vector<LintDiagnostic> out;

  std::size_t blank_run = 0;
  std::size_t excess_start = 0;
  const auto close_blank_run = [&](std::size_t run_end) {
    if (blank_run >= 3 && run_end > excess_start) {
      out.push_back({excess_start, run_end, LintRule::multiple_blank_lines});
    }
    blank_run = 0;
  };

  for (const Line& line : lines) {
    if (line.terminated) {
      std::size_t ws = line.content_end;
      while (ws > line.start && (text[ws - 1] == ' ' || text[ws - 1] == '\t')) --ws;
      if (ws < line.content_end) out.push_back({ws, line.content_end, LintRule::trailing_whitespace});
    }
    if (line.blank) {
      if (++blank_run == 3) excess_start = line.start;
    } else {
      close_blank_run(line.start);
      if (line.has_tab && line.has_space) {
        out.push_back({line.start, line.start + line.indent, LintRule::mixed_tabs_spaces});
      }
      if (unit > 0 && line.indent % unit != 0) {
        out.push_back({line.start, line.start + line.indent, LintRule::inconsistent_indent});
      }
    }
    const std::size_t length = line.content_end - line.start;
    if (length > kMaxLineLength) {
      out.push_back({line.start + kMaxLineLength, line.content_end, LintRule::overlong_line});
    }
  }
  close_blank_run(lines.empty() ? 0 : lines.back().end);

  std::stable_sort(out.begin(), out.end(), [](const LintDiagnostic& a, const LintDiagnostic& b) {
    return a.start < b.start;
  });
  return out;
}

std::vector<LintDiagnostic> lint_format(const SourceSample& sample) {
  return lint_format(Utf8Text(sample.content));
}

ExternalLints read_lint_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lint file " + path.string());
  const std::string source = path.string();
  ExternalLints out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(source, line_no, std::string("not JSON: ") + e.what());
    }
    const auto field = [&](const char* key) -> const nlohmann::json& {
      if (!row.is_object() || !row.contains(key)) {
        throw SchemaError(source, line_no, std::string("missing field \"") + key + "\"");
      }
      return row.at(key);
    };
    const auto& id = field("sample_id");
    const auto& start = field("start");
    const auto& end = field("end");
    const auto& rule = field("rule");
    if (!id.is_string()) throw SchemaError(source, line_no, "sample_id must be a string");
    if (!start.is_number_unsigned() || !end.is_number_unsigned()) {
      throw SchemaError(source, line_no, "start and end must be non-negative integers");
    }
    if (!rule.is_string()) throw SchemaError(source, line_no, "rule must be a string");
    const auto parsed = parse_lint_rule(rule.get<std::string>());
    if (!parsed) throw SchemaError(source, line_no, "unknown rule " + rule.dump());
    out[id.get<std::string>()].push_back(
        {start.get<std::size_t>(), end.get<std::size_t>(), *parsed});
  }
  return out;
}

LintImport import_lint_diagnostics(const ExternalLints& lints, const std::string& sample_id,
                                   std::size_t content_length) {
  LintImport result;
  const auto it = lints.find(sample_id);
  if (it == lints.end()) return result;
  for (const LintDiagnostic& d : it->second) {
    if (d.start < d.end && d.end <= content_length) {
      result.diagnostics.push_back(d);
    } else {
      result.warnings.push_back("sample " + sample_id + ": lint diagnostic [" +
                                std::to_string(d.start) + ", " + std::to_string(d.end) +
                                ") outside content of length " + std::to_string(content_length) +
                                ", skipped");
    }
  }
  return result;
}

LintImport import_lint_diagnostics(const std::filesystem::path& path, const std::string& sample_id,
                                   std::size_t content_length) {
  return import_lint_diagnostics(read_lint_file(path), sample_id, content_length);
}

}  // namespace sersem
