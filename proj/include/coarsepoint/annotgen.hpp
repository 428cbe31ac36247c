#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coarsepoint/core.hpp"

namespace coarsepoint {

using Rng = std::mt19937_64;

/// Seed for the per-image stream `ordinal` of a run seeded with `seed`.
/// Keeps generation independent of worker count and scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t ordinal);

/// Coarse points per image, index-aligned with Scene::objects when they were
/// generated from scenes. `iteration` is the refinement round that produced
/// the set (0 for the initial annotation).
struct AnnotationSet {
  int iteration = 0;
  std::map<std::string, std::vector<Point2>> points;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

}  // namespace coarsepoint

namespace coarsepoint::annotgen {

enum class DistKind { uniform, rg };

/// Annotation noise model. For `rg`, mu shifts both axes equally and sigma
/// is the per-axis Gaussian scale before rectification to the box.
struct DistSpec {
  DistKind kind = DistKind::uniform;
  double mu = 0.0;
  double sigma = 0.25;

  friend bool operator==(const DistSpec&, const DistSpec&) = default;
};

/// Parses "uniform" or "rg:MU:SIGMA".
DistSpec parse_dist_spec(std::string_view text);
std::string to_string(const DistSpec& spec);
void validate(const DistSpec& spec);

/// Maximum number of whole 2-D redraws before sample_rel gives up.
inline constexpr int kMaxRedraws = 10000;

/// Rectified Gaussian density on the unit box: the isotropic Gaussian
/// renormalized to [-0.5, 0.5]^2 and zero outside.
double rg_density(const RelPoint& r, double mu, double sigma);

/// One relative position. The rg branch redraws the full 2-D sample until
/// both coordinates fall inside the box, which is exactly the renormalized
/// density above.
RelPoint sample_rel(const DistSpec& spec, Rng& rng);

/// One point per object, inside its box.
std::vector<Point2> generate_coarse_points(const Scene& scene, const DistSpec& spec,
                                           Rng& rng);

/// Whole-dataset generation. Image i draws from derive_seed(seed, i), so the
/// result does not depend on `jobs`.
AnnotationSet generate_coarse_points(std::span<const Scene> scenes, const DistSpec& spec,
                                     std::uint64_t seed, int jobs = 1);

enum class SemanticKind { center, head, foot, corner };

SemanticKind parse_semantic_kind(std::string_view text);

/// Deterministic annotation at a fixed place in the box:
/// center (xc, yc), head (xc, yc - h/4), foot (xc, yc + h/4),
/// corner (xc - w/4, yc - h/4).
Point2 semantic_point(const BBox& b, SemanticKind kind);

AnnotationSet semantic_points(std::span<const Scene> scenes, SemanticKind kind);

struct RelStats {
  double mean_x = 0.0;
  double mean_y = 0.0;
  /// sqrt((Var x' + Var y') / 2), population variances.
  double std = 0.0;
  std::size_t count = 0;
};

std::vector<RelPoint> relative_positions(const AnnotationSet& annotations,
                                         std::span<const Scene> scenes);

/// Throws DataError when an image's annotations do not line up with its
/// objects.
RelStats rel_stats(const AnnotationSet& annotations, std::span<const Scene> scenes);

}  // namespace coarsepoint::annotgen
