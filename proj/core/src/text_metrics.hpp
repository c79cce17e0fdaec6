#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace tableforge {

inline constexpr int kMinFittedWidth = 60;
inline constexpr int kFitPadding = 16;

// Built-in 5x7 bitmap font in a 6x8 cell, scaled by an integer factor so the
// glyph height tracks font_size.
inline int glyph_scale(int font_size) { return font_size < 7 ? 1 : (font_size + 3) / 7; }
inline int glyph_advance(int font_size) { return 6 * glyph_scale(font_size); }
inline int glyph_height(int font_size) { return 7 * glyph_scale(font_size); }

inline int codepoint_count(std::string_view text) {
  int n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

inline int text_width(std::string_view text, int font_size) {
  return codepoint_count(text) * glyph_advance(font_size);
}

// Column-major glyph bitmaps for 0x20..0x7E, bit 0 = top row.
const std::array<std::uint8_t, 5>& glyph(char32_t c);

}  // namespace tableforge
