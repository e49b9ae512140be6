#include "sersem/utf8.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>

#include "sersem/error.hpp"

namespace sersem {
namespace {

// Decodes one scalar starting at `pos`; returns the scalar and advances `pos`.
std::optional<char32_t> decode_one(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(s[i]); };
  const std::uint8_t lead = byte(pos);
  std::size_t need = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    need = 1, cp = lead & 0x1F, min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    need = 2, cp = lead & 0x0F, min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    need = 3, cp = lead & 0x07, min = 0x10000;
  } else {
    return std::nullopt;
  }
  if (pos + need >= s.size()) return std::nullopt;
  for (std::size_t k = 1; k <= need; ++k) {
    const std::uint8_t b = byte(pos + k);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
  pos += need + 1;
  return cp;
}

}  // namespace

Utf8Text::Utf8Text(std::string_view bytes) {
  chars_.reserve(bytes.size());
  byte_offsets_.reserve(bytes.size() + 1);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t start = pos;
    const auto cp = decode_one(bytes, pos);
    if (!cp) throw InvalidArgument("ill-formed UTF-8 at byte " + std::to_string(start));
    chars_.push_back(*cp);
    byte_offsets_.push_back(start);
  }
  byte_offsets_.push_back(bytes.size());
}

std::size_t Utf8Text::char_at_byte(std::size_t byte_offset) const {
  const auto it = std::upper_bound(byte_offsets_.begin(), byte_offsets_.end(), byte_offset);
  return static_cast<std::size_t>(it - byte_offsets_.begin()) - 1;
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (!decode_one(bytes, pos)) return false;
  }
  return true;
}

std::size_t utf8_length(std::string_view bytes) {
  std::size_t pos = 0;
  std::size_t n = 0;
  while (pos < bytes.size()) {
    const std::size_t start = pos;
    if (!decode_one(bytes, pos)) throw InvalidArgument("ill-formed UTF-8 at byte " + std::to_string(start));
    ++n;
  }
  return n;
}

}  // namespace sersem
