#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pdet {

// Axis-aligned box in pixel coordinates, top-left origin. Ground-truth boxes
// carry no confidence; detector output always does.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;  // must be positive
  double h = 0.0;  // must be positive
  std::optional<double> conf;  // in [0, 1] when present
  std::string class_label = "pedestrian";

  double area() const { return w * h; }
  bool operator==(const BoundingBox&) const = default;
};

// Intersection over union, in [0, 1]. Throws Errc::domain on non-positive
// extents.
double iou(const BoundingBox& a, const BoundingBox& b);

// Greedy non-max suppression: repeatedly keep the highest-confidence box and
// drop every remaining box whose IoU with it strictly exceeds the threshold.
// Confidence ties are broken by input order. Result is sorted by descending
// confidence. Throws Errc::contract if a box lacks conf, Errc::domain if the
// threshold is outside [0, 1].
std::vector<BoundingBox> non_max_suppress(const std::vector<BoundingBox>& boxes,
                                          double iou_threshold = 0.6);

}  // namespace pdet
