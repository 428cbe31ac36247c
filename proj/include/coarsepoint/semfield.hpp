#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "coarsepoint/annotgen.hpp"
#include "coarsepoint/core.hpp"

namespace coarsepoint::semfield {

/// Label for locations outside every object box.
inline constexpr int kBackground = 0;
/// Label for locations inside a box but in none of its part regions.
inline constexpr int kResidual = -1;

/// A semantic part as a disk in the box-relative frame.
struct PartSpec {
  int part_id = 1;
  RelPoint rel_center;
  double rel_radius = 0.1;
  /// Scales the oracle score; 1 means the part is fully recognizable.
  double detectability = 1.0;

  friend bool operator==(const PartSpec&, const PartSpec&) = default;
};

/// Scenes plus one part template shared by every object.
struct SemField {
  std::vector<Scene> scenes;
  std::vector<PartSpec> parts;
};

/// Person-like template: head, torso and a hand region.
std::vector<PartSpec> default_parts();

/// Throws ParameterError for empty templates, duplicate or non-positive ids,
/// overlapping disks, disks leaving the unit box, or detectability outside
/// [0, 1].
void validate_parts(std::span<const PartSpec> parts);

int part_of(const Point2& p, const GtObject& obj, std::span<const PartSpec> parts);

/// Annotated frequency per label: the fraction of instances whose annotation
/// falls in that part. Every part id is present; kResidual and kBackground
/// rows count the remaining instances.
struct FreqTable {
  std::map<int, double> q;
  std::map<int, std::size_t> counts;
  std::size_t instance_count = 0;

  double at(int part_id) const;
};

FreqTable annotated_frequency(const AnnotationSet& annotations,
                              std::span<const Scene> scenes,
                              std::span<const PartSpec> parts);

FreqTable annotated_frequency(const AnnotationSet& annotations, const SemField& field);

/// gamma == 0: cross-entropy against a soft label q.
/// gamma > 0: focal form -[q (1-e)^g ln e + (1-q) e^g ln(1-e)].
/// Returns +inf when e sits at 0 or 1 against nonzero opposing mass.
double point_loss(double e, double q, double gamma);

inline constexpr double kDefaultFocalGamma = 2.0;

/// argmin of point_loss(e, q, 0) over e in [eps, 1 - eps], by golden-section
/// search with the interval endpoints checked explicitly.
double ce_minimizer(double q, double eps = 1e-6);

/// Scores a converged estimator would give: for every object and part, one
/// point at the part center scored clamp(Q * detectability + noise, 0, 1).
/// Noise is drawn per image in scene order.
PredictionSet oracle_score_field(std::span<const Scene> scenes,
                                 std::span<const PartSpec> parts,
                                 const AnnotationSet& annotations, double noise_std,
                                 Rng& rng);

PredictionSet oracle_score_field(const SemField& field, const AnnotationSet& annotations,
                                 double noise_std, Rng& rng);

/// Statistic semantic points: candidates scoring strictly above delta, in
/// input order.
std::vector<ScoredPoint> extract_ssps(std::span<const ScoredPoint> candidates, double delta);

/// Synthetic scene generator for desk-scale experiments. Objects sit one per
/// grid cell with random jitter, so neighbors never overlap and stay at least
/// `min_gap` pixels apart.
struct SimulationSpec {
  int images = 10;
  int objects_per_image = 10;
  double min_w = 6.0;
  double max_w = 10.0;
  double min_h = 10.0;
  double max_h = 14.0;
  double min_gap = 40.0;
  std::vector<PartSpec> parts = default_parts();
};

SemField simulate(const SimulationSpec& spec, std::uint64_t seed);

}  // namespace coarsepoint::semfield
