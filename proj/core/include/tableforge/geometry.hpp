#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace tableforge {

// Pixel box, origin top-left. Spans grid lines inclusively: neighbours share
// coordinates, and the box covers pixels [x1, x2) x [y1, y2).
struct BBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool valid() const { return x1 < x2 && y1 < y2 && x1 >= 0 && y1 >= 0; }
  bool within(int w, int h) const { return x1 >= 0 && y1 >= 0 && x2 <= w && y2 <= h; }
  std::array<int, 4> as_array() const { return {x1, y1, x2, y2}; }

  friend auto operator<=>(const BBox&, const BBox&) = default;
};

// The five semantic label types used by regions, tags and model output.
enum class LabelType { kColumn, kRow, kCell, kColHead, kRowHead };

std::string_view to_string(LabelType label);
std::optional<LabelType> parse_label_type(std::string_view text);

}  // namespace tableforge
