#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace coarsepoint {

/// Absolute image coordinates in pixels.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Coordinates relative to a box: (p - center) / extent, so the box itself
/// maps onto [-0.5, 0.5]^2.
struct RelPoint {
  double xr = 0.0;
  double yr = 0.0;

  friend bool operator==(const RelPoint&, const RelPoint&) = default;
};

/// Center-size box. w and h must be positive; see validate().
struct BBox {
  double xc = 0.0;
  double yc = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct GtObject {
  int object_index = 0;
  BBox bbox;

  friend bool operator==(const GtObject&, const GtObject&) = default;
};

struct Scene {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<GtObject> objects;

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// A candidate or predicted location with a confidence in [0, 1].
struct ScoredPoint {
  Point2 point;
  double score = 0.0;

  friend bool operator==(const ScoredPoint&, const ScoredPoint&) = default;
};

/// Per-image scored points, keyed by image id.
using PredictionSet = std::map<std::string, std::vector<ScoredPoint>>;

enum class ScaleBucket { tiny, small, normal, all };

struct BucketAssignment {
  ScaleBucket bucket = ScaleBucket::tiny;
  /// Set when sqrt(w*h) < 2, below the smallest evaluated size.
  bool below_range = false;
};

/// Throws ParameterError unless w > 0, h > 0 and all fields are finite.
void validate(const BBox& b);

/// Throws DataError if object indices repeat or a box leaves the image.
void validate(const Scene& s);

/// Max-norm distance normalized by the half extents: <= 1 exactly when p lies
/// in the closed box.
double point_box_distance(const Point2& p, const BBox& b);

RelPoint rel_coords(const Point2& p, const BBox& b);
Point2 abs_coords(const RelPoint& r, const BBox& b);

double object_size(const BBox& b);

/// Buckets on sqrt(w*h) with left-closed, right-open intervals:
/// tiny [2,20), small [20,32), normal [32,inf). Sizes below 2 land in tiny
/// with below_range set.
BucketAssignment scale_bucket(const BBox& b);

/// True if `b` is counted in `bucket`. `all` accepts every box.
bool in_bucket(const BBox& b, ScaleBucket bucket);

std::string_view to_string(ScaleBucket bucket);
ScaleBucket parse_scale_bucket(std::string_view text);

double euclidean(const Point2& a, const Point2& b);

}  // namespace coarsepoint
