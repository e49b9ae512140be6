#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sersem {

/// UTF-8 text decoded to Unicode scalar values, keeping the byte offset of
/// every scalar so that byte ranges (from a parser) map back to scalar ranges.
class Utf8Text {
 public:
  /// Throws InvalidArgument on ill-formed UTF-8 (overlongs, surrogates and
  /// truncated sequences included).
  explicit Utf8Text(std::string_view bytes);

  const std::u32string& chars() const { return chars_; }
  std::size_t size() const { return chars_.size(); }
  char32_t operator[](std::size_t i) const { return chars_[i]; }

  /// Scalar index of the scalar that starts at or contains `byte_offset`.
  /// The total byte length maps to size().
  std::size_t char_at_byte(std::size_t byte_offset) const;
  std::size_t byte_at_char(std::size_t char_index) const { return byte_offsets_[char_index]; }

 private:
  std::u32string chars_;
  std::vector<std::size_t> byte_offsets_;  // size() + 1 entries
};

bool is_valid_utf8(std::string_view bytes);

/// Number of Unicode scalars; throws InvalidArgument on ill-formed input.
std::size_t utf8_length(std::string_view bytes);

}  // namespace sersem
