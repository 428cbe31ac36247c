#include "coarsepoint/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coarsepoint/error.hpp"

namespace coarsepoint {

void validate(const BBox& b) {
  if (!std::isfinite(b.xc) || !std::isfinite(b.yc) || !std::isfinite(b.w) ||
      !std::isfinite(b.h)) {
    throw ParameterError("box has non-finite fields");
  }
  if (b.w <= 0.0 || b.h <= 0.0) {
    throw ParameterError("box must have positive width and height");
  }
}

void validate(const Scene& s) {
  std::set<int> seen;
  for (const auto& obj : s.objects) {
    validate(obj.bbox);
    if (!seen.insert(obj.object_index).second) {
      throw DataError("image '" + s.image_id + "': duplicate object index " +
                      std::to_string(obj.object_index));
    }
    const BBox& b = obj.bbox;
    if (b.xc - b.w / 2 < 0.0 || b.yc - b.h / 2 < 0.0 || b.xc + b.w / 2 > s.width ||
        b.yc + b.h / 2 > s.height) {
      throw DataError("image '" + s.image_id + "': object " +
                      std::to_string(obj.object_index) + " leaves the image");
    }
  }
}

double point_box_distance(const Point2& p, const BBox& b) {
  const double dx = std::abs(p.x - b.xc) / (b.w / 2);
  const double dy = std::abs(p.y - b.yc) / (b.h / 2);
  return std::max(dx, dy);
}

RelPoint rel_coords(const Point2& p, const BBox& b) {
  return {(p.x - b.xc) / b.w, (p.y - b.yc) / b.h};
}

Point2 abs_coords(const RelPoint& r, const BBox& b) {
  return {b.xc + r.xr * b.w, b.yc + r.yr * b.h};
}

double object_size(const BBox& b) { return std::sqrt(b.w * b.h); }

BucketAssignment scale_bucket(const BBox& b) {
  const double size = object_size(b);
  if (size < 20.0) return {ScaleBucket::tiny, size < 2.0};
  if (size < 32.0) return {ScaleBucket::small, false};
  return {ScaleBucket::normal, false};
}

bool in_bucket(const BBox& b, ScaleBucket bucket) {
  if (bucket == ScaleBucket::all) return true;
  return scale_bucket(b).bucket == bucket;
}

std::string_view to_string(ScaleBucket bucket) {
  switch (bucket) {
    case ScaleBucket::tiny:
      return "tiny";
    case ScaleBucket::small:
      return "small";
    case ScaleBucket::normal:
      return "normal";
    case ScaleBucket::all:
      return "all";
  }
  return "all";
}

ScaleBucket parse_scale_bucket(std::string_view text) {
  if (text == "tiny") return ScaleBucket::tiny;
  if (text == "small") return ScaleBucket::small;
  if (text == "normal") return ScaleBucket::normal;
  if (text == "all") return ScaleBucket::all;
  throw ParameterError("unknown scale bucket '" + std::string(text) + "'");
}

double euclidean(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace coarsepoint
