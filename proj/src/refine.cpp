#include "coarsepoint/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "coarsepoint/error.hpp"
#include "coarsepoint/parallel.hpp"

namespace coarsepoint::refine {

void validate(const RefineConfig& cfg) {
  if (!(cfg.delta >= 0.0 && cfg.delta <= 1.0)) throw ParameterError("delta must lie in [0, 1]");
  if (!(cfg.radius > 0.0)) throw ParameterError("radius must be positive");
  if (cfg.top_k < 1) throw ParameterError("top_k must be at least 1");
  if (cfg.max_iter < 0) throw ParameterError("max_iter must be non-negative");
  if (!(cfg.pseudo_box_size > 0.0)) throw ParameterError("pseudo box size must be positive");
  if (!(cfg.tolerance >= 0.0)) throw ParameterError("tolerance must be non-negative");
}

PredictionSet IdentityEstimator::estimate(std::span<const Scene> scenes,
                                          const AnnotationSet& annotations,
                                          const RefineConfig&) {
  PredictionSet out;
  for (const auto& scene : scenes) {
    auto& preds = out[scene.image_id];
    const auto it = annotations.points.find(scene.image_id);
    if (it == annotations.points.end()) continue;
    for (const auto& p : it->second) preds.push_back({p, 1.0});
  }
  return out;
}

OracleEstimator::OracleEstimator(std::vector<semfield::PartSpec> parts, double noise_std,
                                 std::uint64_t seed)
    : parts_(std::move(parts)), noise_std_(noise_std), seed_(seed) {
  semfield::validate_parts(parts_);
  if (noise_std_ < 0.0) throw ParameterError("noise std must be non-negative");
}

PredictionSet OracleEstimator::estimate(std::span<const Scene> scenes,
                                        const AnnotationSet& annotations,
                                        const RefineConfig&) {
  Rng rng(derive_seed(seed_, calls_++));
  return semfield::oracle_score_field(scenes, parts_, annotations, noise_std_, rng);
}

std::vector<std::vector<ScoredPoint>> assign_to_objects(std::span<const ScoredPoint> ssps,
                                                        std::span<const Point2> anchors) {
  if (anchors.empty() && !ssps.empty()) {
    throw AssignmentError("cannot assign " + std::to_string(ssps.size()) +
                          " points to an image without annotations");
  }
  std::vector<std::vector<ScoredPoint>> groups(anchors.size());
  for (const auto& s : ssps) {
    std::size_t best = 0;
    double best_d = euclidean(s.point, anchors[0]);
    for (std::size_t j = 1; j < anchors.size(); ++j) {
      const double d = euclidean(s.point, anchors[j]);
      if (d < best_d) {
        best = j;
        best_d = d;
      }
    }
    groups[best].push_back(s);
  }
  return groups;
}

Point2 refine_group(std::span<const ScoredPoint> group, const Point2& prev,
                    const RefineConfig& cfg) {
  std::vector<std::size_t> order(group.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return group[a].score > group[b].score;
  });
  if (order.size() > static_cast<std::size_t>(cfg.top_k)) order.resize(cfg.top_k);

  std::vector<const ScoredPoint*> kept;
  double total = 0.0;
  for (std::size_t i : order) {
    if (euclidean(group[i].point, prev) < cfg.radius) {
      kept.push_back(&group[i]);
      total += group[i].score;
    }
  }
  if (kept.empty() || !(total > 0.0)) return prev;

  Point2 merged{0.0, 0.0};
  for (const auto* s : kept) {
    const double weight = s->score / total;
    merged.x += weight * s->point.x;
    merged.y += weight * s->point.y;
  }
  return merged;
}

AnnotationSet refine_once(std::span<const Scene> scenes, const AnnotationSet& annotations,
                          Estimator& est, const RefineConfig& cfg) {
  validate(cfg);
  for (const auto& scene : scenes) {
    if (!annotations.points.contains(scene.image_id)) {
      throw DataError("image '" + scene.image_id + "' has no annotations");
    }
  }
  const PredictionSet candidates = est.estimate(scenes, annotations, cfg);

  std::vector<std::vector<Point2>> updated(scenes.size());
  detail::parallel_for(scenes.size(), cfg.jobs, [&](std::size_t i) {
    const std::string& id = scenes[i].image_id;
    const auto& prev = annotations.points.at(id);
    std::vector<ScoredPoint> ssps;
    if (const auto it = candidates.find(id); it != candidates.end()) {
      for (const auto& c : it->second) {
        if (!(c.score >= 0.0 && c.score <= 1.0)) {
          throw DataError("image '" + id + "': estimator score " + std::to_string(c.score) +
                          " outside [0, 1]");
        }
      }
      ssps = semfield::extract_ssps(it->second, cfg.delta);
    }
    std::vector<std::vector<ScoredPoint>> groups;
    try {
      groups = assign_to_objects(ssps, prev);
    } catch (const AssignmentError& e) {
      throw AssignmentError("image '" + id + "': " + e.what());
    }
    auto& out = updated[i];
    out.reserve(prev.size());
    for (std::size_t j = 0; j < prev.size(); ++j) {
      out.push_back(refine_group(groups[j], prev[j], cfg));
    }
  });

  AnnotationSet next = annotations;
  next.iteration = annotations.iteration + 1;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    next.points[scenes[i].image_id] = std::move(updated[i]);
  }
  return next;
}

namespace {

std::optional<annotgen::RelStats> try_stats(const AnnotationSet& set,
                                            std::span<const Scene> scenes) {
  for (const auto& scene : scenes) {
    const auto it = set.points.find(scene.image_id);
    if (it == set.points.end() || it->second.size() != scene.objects.size()) {
      return std::nullopt;
    }
  }
  return annotgen::rel_stats(set, scenes);
}

std::size_t count_moved(const AnnotationSet& prev, const AnnotationSet& next, double tol) {
  std::size_t moved = 0;
  for (const auto& [id, pts] : next.points) {
    const auto it = prev.points.find(id);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (it == prev.points.end() || j >= it->second.size()) {
        ++moved;
        continue;
      }
      const Point2& a = it->second[j];
      if (tol == 0.0 ? !(a == pts[j])
                     : (std::abs(a.x - pts[j].x) > tol || std::abs(a.y - pts[j].y) > tol)) {
        ++moved;
      }
    }
  }
  return moved;
}

}  // namespace

RefineResult self_refine(std::span<const Scene> scenes, const AnnotationSet& annotations,
                         Estimator& est, const RefineConfig& cfg) {
  validate(cfg);
  RefineResult result;
  result.annotations = annotations;
  result.report.iterations.push_back({annotations.iteration, annotations,
                                      try_stats(annotations, scenes), 0});

  for (int k = 0; k < cfg.max_iter; ++k) {
    AnnotationSet next = refine_once(scenes, result.annotations, est, cfg);
    const std::size_t moved = count_moved(result.annotations, next, cfg.tolerance);
    result.report.iterations.push_back({next.iteration, next, try_stats(next, scenes), moved});
    result.annotations = std::move(next);
    if (moved == 0) {
      result.report.converged = true;
      break;
    }
  }
  return result;
}

BBox point_to_pseudo_box(const Point2& p, double size) {
  if (!(size > 0.0)) throw ParameterError("pseudo box size must be positive");
  return {p.x, p.y, size, size};
}

}  // namespace coarsepoint::refine
