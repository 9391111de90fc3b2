#include "pdet/boxes.hpp"

#include <algorithm>
#include <numeric>

#include "pdet/error.hpp"

namespace pdet {

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0)
    throw Error(Errc::domain, "IoU requires positive box extents");
  double ax2 = a.x + a.w, ay2 = a.y + a.h;
  double bx2 = b.x + b.w, by2 = b.y + b.h;
  double ix = std::max(0.0, std::min(ax2, bx2) - std::max(a.x, b.x));
  double iy = std::max(0.0, std::min(ay2, by2) - std::max(a.y, b.y));
  double inter = ix * iy;
  // Areas from the same corner differences keep iou(a, a) exactly 1.
  double area_a = (ax2 - a.x) * (ay2 - a.y);
  double area_b = (bx2 - b.x) * (by2 - b.y);
  return inter / (area_a + area_b - inter);
}

std::vector<BoundingBox> non_max_suppress(const std::vector<BoundingBox>& boxes,
                                          double iou_threshold) {
  if (iou_threshold < 0.0 || iou_threshold > 1.0)
    throw Error(Errc::domain, "NMS threshold must be in [0, 1]");
  for (const BoundingBox& b : boxes)
    if (!b.conf)
      throw Error(Errc::contract, "NMS input box lacks confidence");

  // Stable sort keeps input order among equal confidences.
  std::vector<size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t l, size_t r) {
    return *boxes[l].conf > *boxes[r].conf;
  });

  std::vector<BoundingBox> kept;
  std::vector<bool> suppressed(boxes.size(), false);
  for (size_t i = 0; i < order.size(); ++i) {
    if (suppressed[order[i]]) continue;
    const BoundingBox& top = boxes[order[i]];
    kept.push_back(top);
    for (size_t j = i + 1; j < order.size(); ++j) {
      if (suppressed[order[j]]) continue;
      if (iou(top, boxes[order[j]]) > iou_threshold) suppressed[order[j]] = true;
    }
  }
  return kept;
}

}  // namespace pdet
