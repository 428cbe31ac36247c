#include "coarsepoint/semfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "coarsepoint/error.hpp"

namespace coarsepoint::semfield {

std::vector<PartSpec> default_parts() {
  return {
      {1, {0.0, -0.30}, 0.20, 1.0},    // head
      {2, {0.0, 0.20}, 0.28, 1.0},     // torso
      {3, {-0.38, 0.38}, 0.10, 1.0},   // hand
  };
}

void validate_parts(std::span<const PartSpec> parts) {
  if (parts.empty()) throw ParameterError("part template is empty");
  std::set<int> ids;
  for (const auto& p : parts) {
    if (p.part_id <= 0) throw ParameterError("part ids must be positive");
    if (!ids.insert(p.part_id).second) {
      throw ParameterError("duplicate part id " + std::to_string(p.part_id));
    }
    if (!(p.rel_radius > 0.0)) throw ParameterError("part radius must be positive");
    if (std::abs(p.rel_center.xr) + p.rel_radius > 0.5 ||
        std::abs(p.rel_center.yr) + p.rel_radius > 0.5) {
      throw ParameterError("part " + std::to_string(p.part_id) + " leaves the unit box");
    }
    if (!(p.detectability >= 0.0 && p.detectability <= 1.0)) {
      throw ParameterError("detectability must lie in [0, 1]");
    }
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      const double d = std::hypot(parts[i].rel_center.xr - parts[j].rel_center.xr,
                                  parts[i].rel_center.yr - parts[j].rel_center.yr);
      if (d <= parts[i].rel_radius + parts[j].rel_radius) {
        throw ParameterError("parts " + std::to_string(parts[i].part_id) + " and " +
                             std::to_string(parts[j].part_id) + " overlap");
      }
    }
  }
}

int part_of(const Point2& p, const GtObject& obj, std::span<const PartSpec> parts) {
  if (point_box_distance(p, obj.bbox) > 1.0) return kBackground;
  const RelPoint r = rel_coords(p, obj.bbox);
  for (const auto& part : parts) {
    const double d = std::hypot(r.xr - part.rel_center.xr, r.yr - part.rel_center.yr);
    if (d <= part.rel_radius) return part.part_id;
  }
  return kResidual;
}

double FreqTable::at(int part_id) const {
  const auto it = q.find(part_id);
  return it == q.end() ? 0.0 : it->second;
}

FreqTable annotated_frequency(const AnnotationSet& annotations,
                              std::span<const Scene> scenes,
                              std::span<const PartSpec> parts) {
  FreqTable table;
  for (const auto& part : parts) table.counts[part.part_id] = 0;
  table.counts[kResidual] = 0;
  table.counts[kBackground] = 0;

  for (const auto& scene : scenes) {
    const auto it = annotations.points.find(scene.image_id);
    const std::size_t have = it == annotations.points.end() ? 0 : it->second.size();
    if (have != scene.objects.size()) {
      throw DataError("image '" + scene.image_id + "': " + std::to_string(have) +
                      " annotations for " + std::to_string(scene.objects.size()) +
                      " objects");
    }
    for (std::size_t j = 0; j < have; ++j) {
      ++table.counts[part_of(it->second[j], scene.objects[j], parts)];
      ++table.instance_count;
    }
  }
  for (const auto& [id, count] : table.counts) {
    table.q[id] = table.instance_count == 0
                      ? 0.0
                      : static_cast<double>(count) / static_cast<double>(table.instance_count);
  }
  return table;
}

FreqTable annotated_frequency(const AnnotationSet& annotations, const SemField& field) {
  return annotated_frequency(annotations, field.scenes, field.parts);
}

namespace {

// -w * ln(x), with the 0 * ln 0 = 0 convention.
double weighted_neg_log(double w, double x) {
  if (w == 0.0) return 0.0;
  if (x <= 0.0) return std::numeric_limits<double>::infinity();
  return -w * std::log(x);
}

}  // namespace

double point_loss(double e, double q, double gamma) {
  if (!(e >= 0.0 && e <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
    throw ParameterError("point_loss expects e and q in [0, 1]");
  }
  if (gamma < 0.0) throw ParameterError("focal gamma must be non-negative");
  if (gamma == 0.0) return weighted_neg_log(q, e) + weighted_neg_log(1.0 - q, 1.0 - e);
  return weighted_neg_log(q * std::pow(1.0 - e, gamma), e) +
         weighted_neg_log((1.0 - q) * std::pow(e, gamma), 1.0 - e);
}

double ce_minimizer(double q, double eps) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("q must lie in [0, 1]");
  if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("eps must lie in (0, 0.5)");
  const auto loss = [q](double e) { return point_loss(e, q, 0.0); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = eps;
  double hi = 1.0 - eps;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = loss(a);
  double fb = loss(b);
  while (hi - lo > 1e-12) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = loss(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = loss(b);
    }
  }
  double best = (lo + hi) / 2.0;
  double best_loss = loss(best);
  for (double edge : {eps, 1.0 - eps}) {
    if (loss(edge) < best_loss) {
      best = edge;
      best_loss = loss(edge);
    }
  }
  return best;
}

PredictionSet oracle_score_field(std::span<const Scene> scenes,
                                 std::span<const PartSpec> parts,
                                 const AnnotationSet& annotations, double noise_std,
                                 Rng& rng) {
  if (noise_std < 0.0) throw ParameterError("noise std must be non-negative");
  const FreqTable table = annotated_frequency(annotations, scenes, parts);
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);

  PredictionSet out;
  for (const auto& scene : scenes) {
    auto& points = out[scene.image_id];
    points.reserve(scene.objects.size() * parts.size());
    for (const auto& obj : scene.objects) {
      for (const auto& part : parts) {
        double score = table.at(part.part_id) * part.detectability;
        if (noise_std > 0.0) score += noise(rng);
        points.push_back({abs_coords(part.rel_center, obj.bbox), std::clamp(score, 0.0, 1.0)});
      }
    }
  }
  return out;
}

PredictionSet oracle_score_field(const SemField& field, const AnnotationSet& annotations,
                                 double noise_std, Rng& rng) {
  return oracle_score_field(field.scenes, field.parts, annotations, noise_std, rng);
}

std::vector<ScoredPoint> extract_ssps(std::span<const ScoredPoint> candidates, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw ParameterError("delta must lie in [0, 1]");
  std::vector<ScoredPoint> out;
  for (const auto& c : candidates) {
    if (c.score > delta) out.push_back(c);
  }
  return out;
}

SemField simulate(const SimulationSpec& spec, std::uint64_t seed) {
  if (spec.images < 0 || spec.objects_per_image < 0) {
    throw ParameterError("image and object counts must be non-negative");
  }
  if (!(spec.min_w > 0.0 && spec.min_w <= spec.max_w && spec.min_h > 0.0 &&
        spec.min_h <= spec.max_h)) {
    throw ParameterError("box size ranges must be positive and ordered");
  }
  if (spec.min_gap < 0.0) throw ParameterError("min gap must be non-negative");
  validate_parts(spec.parts);

  const int m = spec.objects_per_image;
  const int cols = m == 0 ? 1 : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
  const int rows = m == 0 ? 1 : (m + cols - 1) / cols;
  const double cell = std::ceil(std::max(spec.max_w, spec.max_h) + spec.min_gap);

  SemField field;
  field.parts = spec.parts;
  for (int i = 0; i < spec.images; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Scene scene;
    scene.image_id = "img" + std::to_string(i);
    scene.width = static_cast<int>(cols * cell);
    scene.height = static_cast<int>(rows * cell);
    for (int j = 0; j < m; ++j) {
      const double w = spec.min_w + (spec.max_w - spec.min_w) * unit(rng);
      const double h = spec.min_h + (spec.max_h - spec.min_h) * unit(rng);
      const double cx0 = (j % cols) * cell;
      const double cy0 = (j / cols) * cell;
      const double slack_x = cell - spec.min_gap - w;
      const double slack_y = cell - spec.min_gap - h;
      const double left = cx0 + spec.min_gap / 2 + slack_x * unit(rng);
      const double top = cy0 + spec.min_gap / 2 + slack_y * unit(rng);
      scene.objects.push_back({j, {left + w / 2, top + h / 2, w, h}});
    }
    field.scenes.push_back(std::move(scene));
  }
  return field;
}

}  // namespace coarsepoint::semfield
