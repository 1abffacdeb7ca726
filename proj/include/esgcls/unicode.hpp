#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace esgcls {

// Minimal UTF-8 / case-folding support for the four corpus languages.
// Latin ranges (ASCII, Latin-1, Latin Extended-A, fullwidth forms) are
// lowercased; Hangul and Japanese scripts have no case and pass through.

inline bool is_space_cp(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

inline char32_t to_lower_cp(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;  // Latin-1
  if (cp >= 0x100 && cp <= 0x17F) {                              // Latin Ext-A
    if (cp == 0x130) return 0x69;  // dotted capital I
    if (cp == 0x178) return 0xFF;  // Y with diaeresis
    if (cp <= 0x137 || (cp >= 0x14A && cp <= 0x177)) {
      return (cp % 2 == 0) ? cp + 1 : cp;
    }
    return (cp % 2 == 1) ? cp + 1 : cp;  // 0x139..0x148, 0x179..0x17E
  }
  if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;  // fullwidth A-Z
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// Decodes one codepoint at byte offset i. Returns false on malformed input,
/// in which case the caller should treat the single byte verbatim.
inline bool decode_utf8(std::string_view s, std::size_t i, char32_t& cp,
                        std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    cp = b0;
    len = 1;
    return true;
  }
  int need;
  char32_t acc;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    acc = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    acc = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    acc = b0 & 0x07;
  } else {
    return false;
  }
  if (i + static_cast<std::size_t>(need) >= s.size()) return false;
  for (int k = 1; k <= need; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return false;
    acc = (acc << 6) | (b & 0x3F);
  }
  cp = acc;
  len = static_cast<std::size_t>(need) + 1;
  return true;
}

/// Lowercases UTF-8 text. Malformed byte sequences are copied through
/// unchanged so the function is total.
inline std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp;
    std::size_t len;
    if (decode_utf8(text, i, cp, len)) {
      append_utf8(out, to_lower_cp(cp));
      i += len;
    } else {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

/// Splits UTF-8 text on Unicode whitespace. Malformed bytes are kept as
/// ordinary word bytes.
inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp;
    std::size_t len;
    if (decode_utf8(text, i, cp, len)) {
      if (is_space_cp(cp)) {
        if (!cur.empty()) {
          words.push_back(std::move(cur));
          cur.clear();
        }
      } else {
        cur.append(text.substr(i, len));
      }
      i += len;
    } else {
      cur.push_back(text[i]);
      ++i;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace esgcls
