#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "coarsepoint/annotgen.hpp"
#include "coarsepoint/core.hpp"
#include "coarsepoint/semfield.hpp"

namespace coarsepoint::refine {

struct RefineConfig {
  double delta = 0.2;           // SSP threshold
  double radius = 16.0;         // merge radius around the previous point, pixels
  int top_k = 10;               // candidates kept per object before the radius filter
  int max_iter = 3;
  double pseudo_box_size = 16.0;
  /// Largest per-coordinate move still counted as "unchanged" when testing
  /// convergence. 0 means exact equality.
  double tolerance = 0.0;
  int jobs = 1;
};

void validate(const RefineConfig& cfg);

/// Scores candidate points for every image given the current annotations.
/// Implementations that need training do it inside estimate().
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual PredictionSet estimate(std::span<const Scene> scenes,
                                 const AnnotationSet& annotations,
                                 const RefineConfig& cfg) = 0;
};

/// Echoes every annotation back with score 1.
class IdentityEstimator final : public Estimator {
 public:
  PredictionSet estimate(std::span<const Scene> scenes, const AnnotationSet& annotations,
                         const RefineConfig& cfg) override;
};

/// Analytic stand-in for a trained estimator on a synthetic part field.
/// Call n draws its noise from derive_seed(seed, n).
class OracleEstimator final : public Estimator {
 public:
  OracleEstimator(std::vector<semfield::PartSpec> parts, double noise_std,
                  std::uint64_t seed);

  PredictionSet estimate(std::span<const Scene> scenes, const AnnotationSet& annotations,
                         const RefineConfig& cfg) override;

 private:
  std::vector<semfield::PartSpec> parts_;
  double noise_std_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
};

/// Groups SSPs by nearest anchor; ties go to the lowest index. The result
/// has one (possibly empty) group per anchor.
std::vector<std::vector<ScoredPoint>> assign_to_objects(std::span<const ScoredPoint> ssps,
                                                        std::span<const Point2> anchors);

/// Score-weighted mean of the top-k candidates lying strictly within
/// cfg.radius of `prev`; returns `prev` if none survive.
Point2 refine_group(std::span<const ScoredPoint> group, const Point2& prev,
                    const RefineConfig& cfg);

/// One pass over all images with a single estimator call.
AnnotationSet refine_once(std::span<const Scene> scenes, const AnnotationSet& annotations,
                          Estimator& est, const RefineConfig& cfg);

struct IterationRecord {
  int iteration = 0;
  AnnotationSet snapshot;
  std::optional<annotgen::RelStats> stats;
  /// Objects whose point changed relative to the previous snapshot.
  std::size_t moved_count = 0;
};

struct RefineReport {
  std::vector<IterationRecord> iterations;
  bool converged = false;
};

struct RefineResult {
  AnnotationSet annotations;
  RefineReport report;
};

/// Repeats refine_once until max_iter rounds ran or a round leaves every
/// point unchanged (within cfg.tolerance). Stats are filled when every scene
/// has boxes to measure against.
RefineResult self_refine(std::span<const Scene> scenes, const AnnotationSet& annotations,
                         Estimator& est, const RefineConfig& cfg);

BBox point_to_pseudo_box(const Point2& p, double size);

}  // namespace coarsepoint::refine
