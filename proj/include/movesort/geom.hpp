// SPDX-License-Identifier: Apache-2.0
/**
 * @file   geom.hpp
 * @brief  Bounding boxes in normalized image coordinates and overlap geometry.
 *
 * A box is (left, top, width, height). Coordinates are fractions of the image
 * width (x, width) and height (y, height); boxes may leave the unit frame.
 */
#pragma once

#include <Eigen/Core>

namespace movesort {

using Vec4 = Eigen::Vector4d;

struct Box {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  Box() = default;
  /// Width and height are clamped to be nonnegative.
  Box(double l, double t, double w, double h);

  /// Converts a pixel-space box using the image dimensions.
  static Box from_pixels(double l, double t, double w, double h, double image_w, double image_h);
  static Box from_vec(const Vec4& v);

  Vec4 vec() const { return {left, top, width, height}; }
  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }

  Box translated(double dx, double dy) const { return {left + dx, top + dy, width, height}; }

  bool operator==(const Box&) const = default;
};

/// Intersection over union; 0 when the union is empty.
double iou(const Box& a, const Box& b);

/// Sum of absolute coordinate differences.
double l1_distance(const Box& a, const Box& b);

/// Intersects the box with the unit frame [0,1]x[0,1].
Box clip_to_frame(const Box& b);

}  // namespace movesort
