#pragma once

#include <string>

namespace navsim {

/// Axis-aligned box in normalized image coordinates, origin at the top-left.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double center_x() const { return x + 0.5 * w; }
  bool within_unit_square() const {
    return x >= 0.0 && y >= 0.0 && w >= 0.0 && h >= 0.0 && x + w <= 1.0 + 1e-12 &&
           y + h <= 1.0 + 1e-12;
  }
  bool operator==(const BBox&) const = default;
};

struct Detection {
  std::string label;
  BBox bbox;
  double confidence = 0.0;

  bool operator==(const Detection&) const = default;
};

}  // namespace navsim
