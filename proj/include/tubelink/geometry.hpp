#pragma once

#include <algorithm>
#include <cmath>

namespace tubelink {

// Axis-aligned box in continuous pixel coordinates.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  friend bool operator==(const Box&, const Box&) = default;
};

inline bool is_valid(const Box& b) noexcept {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2) && b.x2 > b.x1 && b.y2 > b.y1;
}

inline double area(const Box& b) noexcept {
  return (b.x2 - b.x1) * (b.y2 - b.y1);
}

inline double intersection_area(const Box& a, const Box& b) noexcept {
  const double w = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double h = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  return w * h;
}

/// Intersection-over-Union of two valid boxes. Identical boxes give exactly 1.
inline double iou(const Box& a, const Box& b) noexcept {
  if (a == b) return 1.0;
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = area(a) + area(b) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

inline Box translated(const Box& b, double dx, double dy) noexcept {
  return {b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy};
}

inline Box scaled(const Box& b, double s) noexcept {
  return {b.x1 * s, b.y1 * s, b.x2 * s, b.y2 * s};
}

}  // namespace tubelink
