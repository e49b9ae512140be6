#include <algorithm>
#include <array>
#include <cstring>
#include <string_view>

#include <tree_sitter/api.h>

#include "sersem/error.hpp"
#include "sersem/mask.hpp"

extern "C" {
const TSLanguage* tree_sitter_python();
const TSLanguage* tree_sitter_java();
const TSLanguage* tree_sitter_go();
const TSLanguage* tree_sitter_ruby();
const TSLanguage* tree_sitter_rust();
}

namespace sersem {
namespace {

using NodeTypes = std::initializer_list<std::string_view>;

struct GrammarTable {
  const TSLanguage* (*grammar)();
  NodeTypes comments;
  NodeTypes strings;
  NodeTypes identifiers;
};

const GrammarTable& grammar_table(Language language) {
  static const GrammarTable python{
      tree_sitter_python, {"comment"}, {"string"}, {"identifier"}};
  static const GrammarTable java{tree_sitter_java,
                                 {"line_comment", "block_comment"},
                                 {"string_literal", "character_literal"},
                                 {"identifier", "type_identifier"}};
  static const GrammarTable go{
      tree_sitter_go,
      {"comment"},
      {"interpreted_string_literal", "raw_string_literal", "rune_literal"},
      {"identifier", "field_identifier", "type_identifier", "package_identifier", "label_name"}};
  static const GrammarTable ruby{
      tree_sitter_ruby,
      {"comment"},
      {"string", "character", "chained_string", "heredoc_body", "string_array"},
      {"identifier", "constant", "instance_variable", "class_variable", "global_variable",
       "simple_symbol", "hash_key_symbol"}};
  static const GrammarTable rust{
      tree_sitter_rust,
      {"line_comment", "block_comment"},
      {"string_literal", "raw_string_literal", "char_literal"},
      {"identifier", "type_identifier", "field_identifier", "shorthand_field_identifier"}};
  switch (language) {
    case Language::python: return python;
    case Language::java: return java;
    case Language::go: return go;
    case Language::ruby: return ruby;
    case Language::rust: return rust;
  }
  return python;
}

bool contains(NodeTypes types, std::string_view type) {
  return std::find(types.begin(), types.end(), type) != types.end();
}

constexpr bool is_ident_start(char32_t c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
constexpr bool is_ident_char(char32_t c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

void push_identifier(std::size_t start, std::size_t end, const Utf8Text& text,
                     std::vector<AnomalySpan>& out) {
  if (end <= start) return;
  const std::u32string_view word(text.chars().data() + start, end - start);
  if (!is_identifier(word)) return;
  const std::size_t length = end - start;
  if (length < 3) return;
  out.push_back(AnomalySpan::make(
      start, end, length >= 10 ? AnomalyKind::long_identifier : AnomalyKind::standard_identifier));
}

// Ruby variables and symbols carry sigils (@x, @@x, $x, :x) and method names
// may end in ?, ! or =; the identifier proper sits between them.
void trim_ruby_identifier(const Utf8Text& text, std::size_t& start, std::size_t& end) {
  while (start < end && (text[start] == '@' || text[start] == '$' || text[start] == ':')) ++start;
  if (end > start && (text[end - 1] == '?' || text[end - 1] == '!' || text[end - 1] == '=')) --end;
}

const std::vector<std::u32string>& keywords(Language language) {
  static const auto make = [](std::initializer_list<const char*> words) {
    std::vector<std::u32string> out;
    for (const char* w : words) out.emplace_back(w, w + std::strlen(w));
    return out;
  };
  static const auto python = make({"False", "None", "True", "and", "as", "assert", "async",
                                   "await", "break", "class", "continue", "def", "del", "elif",
                                   "else", "except", "finally", "for", "from", "global", "if",
                                   "import", "in", "is", "lambda", "nonlocal", "not", "or",
                                   "pass", "raise", "return", "try", "while", "with", "yield"});
  static const auto java = make(
      {"abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class",
       "const", "continue", "default", "do", "double", "else", "enum", "extends", "final",
       "finally", "float", "for", "goto", "if", "implements", "import", "instanceof", "int",
       "interface", "long", "native", "new", "package", "private", "protected", "public",
       "return", "short", "static", "strictfp", "super", "switch", "synchronized", "this",
       "throw", "throws", "transient", "try", "void", "volatile", "while", "true", "false",
       "null", "var", "record", "yield"});
  static const auto go = make({"break", "case", "chan", "const", "continue", "default", "defer",
                               "else", "fallthrough", "for", "func", "go", "goto", "if",
                               "import", "interface", "map", "package", "range", "return",
                               "select", "struct", "switch", "type", "var", "true", "false",
                               "nil", "iota"});
  static const auto ruby = make({"BEGIN", "END", "alias", "and", "begin", "break", "case",
                                 "class", "def", "defined", "do", "else", "elsif", "end",
                                 "ensure", "false", "for", "if", "in", "module", "next", "nil",
                                 "not", "or", "redo", "rescue", "retry", "return", "self",
                                 "super", "then", "true", "undef", "unless", "until", "when",
                                 "while", "yield", "__FILE__", "__LINE__", "__method__"});
  static const auto rust = make(
      {"as", "async", "await", "break", "const", "continue", "crate", "dyn", "else", "enum",
       "extern", "false", "fn", "for", "if", "impl", "in", "let", "loop", "match", "mod",
       "move", "mut", "pub", "ref", "return", "self", "Self", "static", "struct", "super",
       "trait", "true", "type", "unsafe", "use", "where", "while", "i8", "i16", "i32", "i64",
       "i128", "isize", "u8", "u16", "u32", "u64", "u128", "usize", "f32", "f64", "bool",
       "char", "str"});
  switch (language) {
    case Language::python: return python;
    case Language::java: return java;
    case Language::go: return go;
    case Language::ruby: return ruby;
    case Language::rust: return rust;
  }
  return python;
}

bool uses_hash_comments(Language language) {
  return language == Language::python || language == Language::ruby;
}

}  // namespace

bool is_identifier(std::u32string_view text) {
  if (text.empty() || !is_ident_start(text.front())) return false;
  return std::all_of(text.begin() + 1, text.end(), is_ident_char);
}

std::vector<AnomalySpan> classify_by_regex(Language language, const Utf8Text& text) {
  std::vector<AnomalySpan> out;
  const auto& kw = keywords(language);
  const std::size_t n = text.size();
  const auto at = [&](std::size_t i) -> char32_t { return i < n ? text[i] : U'\0'; };
  const auto line_end = [&](std::size_t i) {
    while (i < n && text[i] != '\n') ++i;
    return i;
  };

  std::size_t i = 0;
  while (i < n) {
    const char32_t c = text[i];
    if (uses_hash_comments(language) ? c == '#' : (c == '/' && at(i + 1) == '/')) {
      const std::size_t end = line_end(i);
      out.push_back(AnomalySpan::make(i, end, AnomalyKind::comment));
      i = end;
    } else if (!uses_hash_comments(language) && c == '/' && at(i + 1) == '*') {
      std::size_t end = i + 2;
      while (end < n && !(text[end] == '*' && at(end + 1) == '/')) ++end;
      end = std::min(n, end + 2);
      out.push_back(AnomalySpan::make(i, end, AnomalyKind::comment));
      i = end;
    } else if (language == Language::python && (c == '"' || c == '\'') && at(i + 1) == c &&
               at(i + 2) == c) {
      std::size_t end = i + 3;
      while (end < n && !(text[end] == c && at(end + 1) == c && at(end + 2) == c)) {
        end += text[end] == '\\' ? 2 : 1;
      }
      end = std::min(n, end + 3);
      out.push_back(AnomalySpan::make(i, end, AnomalyKind::string_literal));
      i = end;
    } else if (c == '"' || (c == '\'' && language != Language::rust) ||
               (c == '`' && language == Language::go)) {
      // Closed on the same line (backtick strings may span lines); an
      // unterminated quote is treated as punctuation.
      std::size_t end = i + 1;
      bool closed = false;
      while (end < n) {
        if (text[end] == '\\' && c != '`') {
          end += 2;
          continue;
        }
        if (text[end] == c) {
          closed = true;
          break;
        }
        if (text[end] == '\n' && c != '`') break;
        ++end;
      }
      if (closed) {
        out.push_back(AnomalySpan::make(i, end + 1, AnomalyKind::string_literal));
        i = end + 1;
      } else {
        ++i;
      }
    } else if (c == '\'' && language == Language::rust) {
      // Char literal 'x' or '\n'; anything else is a lifetime or label tick.
      std::size_t end = 0;
      if (at(i + 1) == '\\' && at(i + 3) == '\'') end = i + 4;
      else if (at(i + 1) != '\'' && at(i + 1) != '\\' && at(i + 2) == '\'') end = i + 3;
      if (end != 0) {
        out.push_back(AnomalySpan::make(i, end, AnomalyKind::string_literal));
        i = end;
      } else {
        ++i;
      }
    } else if (is_ident_start(c)) {
      std::size_t end = i + 1;
      while (end < n && is_ident_char(text[end])) ++end;
      const std::u32string_view word(text.chars().data() + i, end - i);
      if (std::find(kw.begin(), kw.end(), word) == kw.end()) push_identifier(i, end, text, out);
      i = end;
    } else if (c >= '0' && c <= '9') {
      while (i < n && is_ident_char(text[i])) ++i;
    } else {
      ++i;
    }
  }
  return out;
}

struct SyntaxClassifier::Impl {
  std::array<TSParser*, std::size(kAllLanguages)> parsers{};

  ~Impl() {
    for (TSParser* p : parsers) {
      if (p) ts_parser_delete(p);
    }
  }

  TSParser* parser_for(Language language) {
    TSParser*& p = parsers[static_cast<std::size_t>(language)];
    if (!p) {
      p = ts_parser_new();
      if (!ts_parser_set_language(p, grammar_table(language).grammar())) {
        ts_parser_delete(p);
        p = nullptr;
        throw Error("tree-sitter grammar ABI mismatch for " + std::string(to_string(language)));
      }
    }
    return p;
  }
};

SyntaxClassifier::SyntaxClassifier() : impl_(std::make_unique<Impl>()) {}
SyntaxClassifier::~SyntaxClassifier() = default;
SyntaxClassifier::SyntaxClassifier(SyntaxClassifier&&) noexcept = default;
SyntaxClassifier& SyntaxClassifier::operator=(SyntaxClassifier&&) noexcept = default;

SyntaxResult SyntaxClassifier::classify(const SourceSample& sample) {
  const Utf8Text text(sample.content);
  return classify(sample, text);
}

SyntaxResult SyntaxClassifier::classify(const SourceSample& sample, const Utf8Text& text) {
  SyntaxResult result;
  if (sample.content.empty()) return result;

  const GrammarTable& table = grammar_table(sample.language);
  TSParser* parser = impl_->parser_for(sample.language);
  std::unique_ptr<TSTree, decltype(&ts_tree_delete)> tree(
      ts_parser_parse_string(parser, nullptr, sample.content.data(),
                             static_cast<uint32_t>(sample.content.size())),
      &ts_tree_delete);
  ts_parser_reset(parser);

  const TSNode root = tree ? ts_tree_root_node(tree.get()) : TSNode{};
  if (!tree || ts_node_is_null(root) || std::string_view(ts_node_type(root)) == "ERROR") {
    result.spans = classify_by_regex(sample.language, text);
    result.degraded = true;
    return result;
  }

  TSTreeCursor cursor = ts_tree_cursor_new(root);
  bool descend = true;
  for (;;) {
    if (descend) {
      const TSNode node = ts_tree_cursor_current_node(&cursor);
      const std::size_t start = text.char_at_byte(ts_node_start_byte(node));
      std::size_t end = text.char_at_byte(ts_node_end_byte(node));
      bool leaf = true;
      if (!ts_node_is_named(node) || start >= end) {
        leaf = ts_node_child_count(node) == 0 || start >= end;
      } else {
        const std::string_view type = ts_node_type(node);
        if (contains(table.comments, type)) {
          result.spans.push_back(AnomalySpan::make(start, end, AnomalyKind::comment));
        } else if (contains(table.strings, type)) {
          result.spans.push_back(AnomalySpan::make(start, end, AnomalyKind::string_literal));
        } else if (contains(table.identifiers, type)) {
          std::size_t id_start = start;
          if (sample.language == Language::ruby) trim_ruby_identifier(text, id_start, end);
          push_identifier(id_start, end, text, result.spans);
        } else {
          leaf = false;
        }
      }
      if (!leaf && ts_tree_cursor_goto_first_child(&cursor)) continue;
    }
    if (ts_tree_cursor_goto_next_sibling(&cursor)) {
      descend = true;
      continue;
    }
    if (!ts_tree_cursor_goto_parent(&cursor)) break;
    descend = false;
  }
  ts_tree_cursor_delete(&cursor);

  std::stable_sort(result.spans.begin(), result.spans.end(),
                   [](const AnomalySpan& a, const AnomalySpan& b) { return a.start < b.start; });
  return result;
}

SyntaxResult classify_syntax(const SourceSample& sample) {
  SyntaxClassifier classifier;
  return classifier.classify(sample);
}

}  // namespace sersem
