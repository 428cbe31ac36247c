#include "coarsepoint/tiling.hpp"

#include <algorithm>
#include <numeric>

#include "coarsepoint/error.hpp"

namespace coarsepoint::ingest {

std::vector<int> tile_origins(int extent, int tile_size, int overlap) {
  if (tile_size <= 0) throw ParameterError("tile size must be positive");
  if (overlap < 0 || overlap >= tile_size) {
    throw ParameterError("overlap must satisfy 0 <= overlap < tile size");
  }
  if (extent <= 0) throw ParameterError("image extent must be positive");
  std::vector<int> origins;
  const int stride = tile_size - overlap;
  for (int x = 0;; x += stride) {
    if (x + tile_size >= extent) {
      origins.push_back(std::max(extent - tile_size, 0));
      break;
    }
    origins.push_back(x);
  }
  return origins;
}

std::string tile_image_id(const Tile& tile) {
  return tile.parent_id + "@" + std::to_string(tile.x0) + "," + std::to_string(tile.y0);
}

Point2 to_tile(const Point2& p, const Tile& tile) { return {p.x - tile.x0, p.y - tile.y0}; }

Point2 to_parent(const Point2& p, const Tile& tile) { return {p.x + tile.x0, p.y + tile.y0}; }

std::vector<TileView> tile_scene(const Scene& scene, int tile_size, int overlap,
                                 std::span<const Point2> annotations) {
  if (!annotations.empty() && annotations.size() != scene.objects.size()) {
    throw DataError("image '" + scene.image_id + "': annotations do not match objects");
  }
  const auto xs = tile_origins(scene.width, tile_size, overlap);
  const auto ys = tile_origins(scene.height, tile_size, overlap);
  std::vector<TileView> views;
  for (int y0 : ys) {
    for (int x0 : xs) {
      TileView view;
      view.tile = {scene.image_id, x0, y0, std::min(tile_size, scene.width),
                   std::min(tile_size, scene.height)};
      view.scene.image_id = tile_image_id(view.tile);
      view.scene.width = view.tile.width;
      view.scene.height = view.tile.height;
      for (std::size_t j = 0; j < scene.objects.size(); ++j) {
        const BBox& b = scene.objects[j].bbox;
        const bool inside = b.xc - b.w / 2 >= x0 && b.xc + b.w / 2 <= x0 + view.tile.width &&
                            b.yc - b.h / 2 >= y0 && b.yc + b.h / 2 <= y0 + view.tile.height;
        if (!inside) continue;
        const Point2 c = to_tile({b.xc, b.yc}, view.tile);
        view.scene.objects.push_back(
            {static_cast<int>(view.scene.objects.size()), {c.x, c.y, b.w, b.h}});
        view.source_index.push_back(scene.objects[j].object_index);
        if (!annotations.empty()) view.annotations.push_back(to_tile(annotations[j], view.tile));
      }
      views.push_back(std::move(view));
    }
  }
  return views;
}

std::vector<ScoredPoint> nms_points(std::span<const ScoredPoint> points, double radius) {
  if (!(radius >= 0.0)) throw ParameterError("dedupe radius must be non-negative");
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].score > points[b].score;
  });
  std::vector<ScoredPoint> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const ScoredPoint& k) {
      return euclidean(k.point, points[i].point) <= radius;
    });
    if (!suppressed) kept.push_back(points[i]);
  }
  return kept;
}

std::vector<ScoredPoint> fuse_predictions(
    std::span<const std::pair<Tile, std::vector<ScoredPoint>>> per_tile, double dedupe_radius) {
  std::vector<ScoredPoint> all;
  for (const auto& [tile, points] : per_tile) {
    for (const auto& p : points) all.push_back({to_parent(p.point, tile), p.score});
  }
  return nms_points(all, dedupe_radius);
}

}  // namespace coarsepoint::ingest
