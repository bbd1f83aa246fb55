// SPDX-License-Identifier: Apache-2.0
#include "movesort/geom.hpp"

#include <algorithm>
#include <cmath>

namespace movesort {

Box::Box(double l, double t, double w, double h)
    : left(l), top(t), width(std::max(0.0, w)), height(std::max(0.0, h)) {}

Box Box::from_pixels(double l, double t, double w, double h, double image_w, double image_h) {
  return {l / image_w, t / image_h, w / image_w, h / image_h};
}

Box Box::from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

double iou(const Box& a, const Box& b) {
  const double ix = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  const double inter = (ix > 0.0 && iy > 0.0) ? ix * iy : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double l1_distance(const Box& a, const Box& b) {
  return std::abs(a.left - b.left) + std::abs(a.top - b.top) + std::abs(a.width - b.width) +
         std::abs(a.height - b.height);
}

Box clip_to_frame(const Box& b) {
  const double l = std::clamp(b.left, 0.0, 1.0);
  const double t = std::clamp(b.top, 0.0, 1.0);
  const double r = std::clamp(b.right(), 0.0, 1.0);
  const double btm = std::clamp(b.bottom(), 0.0, 1.0);
  const double w = (l == b.left && r == b.right()) ? b.width : r - l;
  const double h = (t == b.top && btm == b.bottom()) ? b.height : btm - t;
  return {l, t, w, h};
}

}  // namespace movesort
