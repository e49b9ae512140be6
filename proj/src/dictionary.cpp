#include <cctype>
#include <cstdlib>
#include <fstream>

#include "sersem/error.hpp"
#include "sersem/mask.hpp"

#ifndef SERSEM_DEFAULT_WORDLIST
#define SERSEM_DEFAULT_WORDLIST "english_words.txt"
#endif

namespace sersem {

Wordlist Wordlist::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word list " + path.string());
  Wordlist list;
  list.words_.reserve(300000);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) list.words_.insert(line);
  }
  return list;
}

Wordlist Wordlist::from_words(std::span<const std::string> words) {
  Wordlist list;
  list.words_.insert(words.begin(), words.end());
  return list;
}

bool Wordlist::contains(std::string_view word) const { return words_.find(word) != words_.end(); }

std::filesystem::path default_wordlist_path() {
  if (const char* env = std::getenv("SERSEM_WORDLIST"); env && *env) return env;
  return SERSEM_DEFAULT_WORDLIST;
}

std::vector<std::string> split_identifier(std::string_view identifier) {
  std::vector<std::string> parts;
  std::string current;
  const auto flush = [&] {
    if (current.size() > 2) parts.push_back(current);
    current.clear();
  };
  const auto is_upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
  const auto is_lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };

  for (std::size_t i = 0; i < identifier.size(); ++i) {
    const char c = identifier[i];
    if (is_upper(c)) {
      if (!current.empty()) {
        const char prev = identifier[i - 1];
        const bool next_lower = i + 1 < identifier.size() && is_lower(identifier[i + 1]);
        if (is_lower(prev) || (is_upper(prev) && next_lower)) flush();
      }
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (is_lower(c)) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return parts;
}

bool dictionary_check(std::string_view identifier, const Wordlist& wordlist) {
  for (const std::string& part : split_identifier(identifier)) {
    if (!wordlist.contains(part)) return false;
  }
  return true;
}

}  // namespace sersem
