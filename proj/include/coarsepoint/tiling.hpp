#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coarsepoint/core.hpp"

namespace coarsepoint::ingest {

/// Window into a parent image. width/height equal the requested tile size
/// unless the image is smaller along that axis.
struct Tile {
  std::string parent_id;
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Tile&, const Tile&) = default;
};

/// Origins along one axis: stride tile - overlap, with the last window
/// pulled back so it ends on the image edge.
std::vector<int> tile_origins(int extent, int tile_size, int overlap);

struct TileView {
  Tile tile;
  /// Objects fully inside the tile, translated to tile coordinates and
  /// re-indexed from 0. `source_index` maps back to the parent.
  Scene scene;
  std::vector<int> source_index;
  /// Annotations of the kept objects, when the caller supplied them.
  std::vector<Point2> annotations;
};

std::string tile_image_id(const Tile& tile);

std::vector<TileView> tile_scene(const Scene& scene, int tile_size, int overlap,
                                 std::span<const Point2> annotations = {});

Point2 to_tile(const Point2& p, const Tile& tile);
Point2 to_parent(const Point2& p, const Tile& tile);

/// Greedy point NMS: highest score first (input order on ties); a point is
/// dropped if it lies within `radius` of one already kept.
std::vector<ScoredPoint> nms_points(std::span<const ScoredPoint> points, double radius);

/// Moves every tile's points into parent coordinates and suppresses
/// duplicates with nms_points.
std::vector<ScoredPoint> fuse_predictions(
    std::span<const std::pair<Tile, std::vector<ScoredPoint>>> per_tile, double dedupe_radius);

}  // namespace coarsepoint::ingest
