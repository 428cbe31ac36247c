#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coarsepoint/annotgen.hpp"
#include "coarsepoint/core.hpp"

namespace coarsepoint::eval {

struct MatchResult {
  /// (prediction index, ground-truth index) in the order matches were made.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_gts;
};

/// Greedy matching in descending score order (stable on ties). Each
/// prediction takes the nearest still-free ground truth within point-box
/// distance tau; distance ties go to the lower gt index.
MatchResult match_points(std::span<const ScoredPoint> preds, std::span<const GtObject> gts,
                         double tau);

/// All-point interpolated AP. Predictions matched to ground truths outside
/// `bucket` are ignored. Returns nullopt when the bucket holds no ground
/// truth.
std::optional<double> average_precision(const PredictionSet& preds,
                                        std::span<const Scene> scenes, double tau,
                                        ScaleBucket bucket);

struct PrPoint {
  double score = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
};

/// One point per counted prediction, in evaluation order.
std::vector<PrPoint> pr_curve(const PredictionSet& preds, std::span<const Scene> scenes,
                              double tau, ScaleBucket bucket);

struct FpAtRecall {
  bool reached = false;
  std::size_t false_positives = 0;
  /// Recall at the returned threshold, or the best recall seen when the
  /// target was never reached.
  double recall = 0.0;
  double score_threshold = 0.0;
};

FpAtRecall fp_at_recall(const PredictionSet& preds, std::span<const Scene> scenes, double tau,
                        double recall, ScaleBucket bucket = ScaleBucket::all);

/// Annotations as score-1 predictions, for scoring an annotation set directly.
PredictionSet annotations_as_predictions(const AnnotationSet& annotations);

/// Histogram of box-relative annotation positions over [-0.5, 0.5]^2,
/// row-major with rows along y, normalized by instance count.
struct Heatmap {
  int bins = 32;
  std::vector<double> values;
  std::size_t instance_count = 0;
  /// Points that fell outside the unit box and were clamped to the border.
  std::size_t clamped_count = 0;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * bins + col]; }
};

Heatmap heatmap(const AnnotationSet& annotations, std::span<const Scene> scenes, int bins = 32);

std::string heatmap_csv(const Heatmap& map);
/// Binary 8-bit PGM scaled so the largest bin is 255.
std::string heatmap_pgm(const Heatmap& map);

}  // namespace coarsepoint::eval
