#include "coarsepoint/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "coarsepoint/error.hpp"

namespace coarsepoint::eval {

MatchResult match_points(std::span<const ScoredPoint> preds, std::span<const GtObject> gts,
                         double tau) {
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score > preds[b].score;
  });

  MatchResult result;
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t pi : order) {
    std::size_t best = gts.size();
    double best_d = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double d = point_box_distance(preds[pi].point, gts[g].bbox);
      if (d <= tau && (best == gts.size() || d < best_d)) {
        best = g;
        best_d = d;
      }
    }
    if (best == gts.size()) {
      result.unmatched_preds.push_back(pi);
    } else {
      taken[best] = true;
      result.pairs.emplace_back(pi, best);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!taken[g]) result.unmatched_gts.push_back(g);
  }
  return result;
}

namespace {

enum class Outcome { tp, fp, ignored };

struct Scored {
  double score;
  std::size_t image;
  std::size_t index;
  Outcome outcome;
};

std::vector<Scored> classify(const PredictionSet& preds, std::span<const Scene> scenes,
                             double tau, ScaleBucket bucket, std::size_t& gt_count) {
  gt_count = 0;
  std::vector<Scored> all;
  for (const auto& [id, _] : preds) {
    const bool known = std::any_of(scenes.begin(), scenes.end(),
                                   [&](const Scene& s) { return s.image_id == id; });
    if (!known) throw DataError("predictions for unknown image '" + id + "'");
  }
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene& scene = scenes[i];
    for (const auto& obj : scene.objects) {
      if (in_bucket(obj.bbox, bucket)) ++gt_count;
    }
    const auto it = preds.find(scene.image_id);
    if (it == preds.end()) continue;
    const auto& list = it->second;
    const MatchResult m = match_points(list, scene.objects, tau);
    std::vector<Outcome> outcome(list.size(), Outcome::fp);
    for (const auto& [p, g] : m.pairs) {
      outcome[p] = in_bucket(scene.objects[g].bbox, bucket) ? Outcome::tp : Outcome::ignored;
    }
    for (std::size_t p = 0; p < list.size(); ++p) {
      all.push_back({list[p].score, i, p, outcome[p]});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image != b.image) return a.image < b.image;
    return a.index < b.index;
  });
  return all;
}

}  // namespace

std::vector<PrPoint> pr_curve(const PredictionSet& preds, std::span<const Scene> scenes,
                              double tau, ScaleBucket bucket) {
  std::size_t gt_count = 0;
  const auto all = classify(preds, scenes, tau, bucket, gt_count);
  std::vector<PrPoint> curve;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const auto& s : all) {
    if (s.outcome == Outcome::ignored) continue;
    if (s.outcome == Outcome::tp) {
      ++tp;
    } else {
      ++fp;
    }
    PrPoint pt;
    pt.score = s.score;
    pt.true_positives = tp;
    pt.false_positives = fp;
    pt.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    pt.recall = gt_count == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gt_count);
    curve.push_back(pt);
  }
  return curve;
}

std::optional<double> average_precision(const PredictionSet& preds,
                                        std::span<const Scene> scenes, double tau,
                                        ScaleBucket bucket) {
  std::size_t gt_count = 0;
  for (const auto& scene : scenes) {
    for (const auto& obj : scene.objects) {
      if (in_bucket(obj.bbox, bucket)) ++gt_count;
    }
  }
  if (gt_count == 0) return std::nullopt;
  const auto curve = pr_curve(preds, scenes, tau, bucket);

  // Precision envelope from the right, then sum over recall steps.
  std::vector<double> envelope(curve.size());
  double running = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].recall > prev_recall) {
      ap += (curve[i].recall - prev_recall) * envelope[i];
      prev_recall = curve[i].recall;
    }
  }
  return ap;
}

FpAtRecall fp_at_recall(const PredictionSet& preds, std::span<const Scene> scenes, double tau,
                        double recall, ScaleBucket bucket) {
  if (!(recall > 0.0 && recall <= 1.0)) throw ParameterError("recall must lie in (0, 1]");
  FpAtRecall result;
  for (const auto& pt : pr_curve(preds, scenes, tau, bucket)) {
    result.recall = std::max(result.recall, pt.recall);
    if (pt.recall >= recall) {
      result.reached = true;
      result.false_positives = pt.false_positives;
      result.recall = pt.recall;
      result.score_threshold = pt.score;
      return result;
    }
  }
  return result;
}

PredictionSet annotations_as_predictions(const AnnotationSet& annotations) {
  PredictionSet out;
  for (const auto& [id, pts] : annotations.points) {
    auto& list = out[id];
    for (const auto& p : pts) list.push_back({p, 1.0});
  }
  return out;
}

Heatmap heatmap(const AnnotationSet& annotations, std::span<const Scene> scenes, int bins) {
  if (bins < 1) throw ParameterError("bins must be at least 1");
  Heatmap map;
  map.bins = bins;
  map.values.assign(static_cast<std::size_t>(bins) * bins, 0.0);
  const auto rel = annotgen::relative_positions(annotations, scenes);
  const auto to_bin = [&](double v, bool& clamped) {
    if (v < -0.5 || v > 0.5) clamped = true;
    const double c = std::clamp(v, -0.5, 0.5);
    return std::min(static_cast<int>(std::floor((c + 0.5) * bins)), bins - 1);
  };
  for (const auto& r : rel) {
    bool clamped = false;
    const int col = to_bin(r.xr, clamped);
    const int row = to_bin(r.yr, clamped);
    map.values[static_cast<std::size_t>(row) * bins + col] += 1.0;
    if (clamped) ++map.clamped_count;
  }
  map.instance_count = rel.size();
  if (map.instance_count > 0) {
    for (auto& v : map.values) v /= static_cast<double>(map.instance_count);
  }
  return map;
}

std::string heatmap_csv(const Heatmap& map) {
  std::ostringstream out;
  out.precision(17);
  for (int r = 0; r < map.bins; ++r) {
    for (int c = 0; c < map.bins; ++c) {
      if (c > 0) out << ',';
      out << map.at(r, c);
    }
    out << '\n';
  }
  return out.str();
}

std::string heatmap_pgm(const Heatmap& map) {
  std::string out = "P5\n" + std::to_string(map.bins) + " " + std::to_string(map.bins) + "\n255\n";
  const double peak = map.values.empty() ? 0.0 : *std::max_element(map.values.begin(), map.values.end());
  for (double v : map.values) {
    const double scaled = peak > 0.0 ? std::round(255.0 * v / peak) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(scaled)));
  }
  return out;
}

}  // namespace coarsepoint::eval
