#include "coarsepoint/annotgen.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "coarsepoint/error.hpp"
#include "coarsepoint/parallel.hpp"

namespace coarsepoint {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t ordinal) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed ^ (ordinal * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace coarsepoint

namespace coarsepoint::annotgen {

namespace {

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParameterError("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Truncated 1-D density on [-0.5, 0.5].
double rg_density_1d(double x, double mu, double sigma) {
  const double mass = normal_cdf((0.5 - mu) / sigma) - normal_cdf((-0.5 - mu) / sigma);
  return normal_pdf((x - mu) / sigma) / (sigma * mass);
}

}  // namespace

DistSpec parse_dist_spec(std::string_view text) {
  if (text == "uniform") return {DistKind::uniform, 0.0, 0.0};
  if (text.starts_with("rg:")) {
    const auto rest = text.substr(3);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw ParameterError("expected rg:MU:SIGMA, got '" + std::string(text) + "'");
    }
    DistSpec spec{DistKind::rg, parse_double(rest.substr(0, colon), "mu"),
                  parse_double(rest.substr(colon + 1), "sigma")};
    validate(spec);
    return spec;
  }
  throw ParameterError("unknown distribution '" + std::string(text) + "'");
}

std::string to_string(const DistSpec& spec) {
  if (spec.kind == DistKind::uniform) return "uniform";
  char buf[64];
  std::string out = "rg:";
  auto r = std::to_chars(buf, buf + sizeof buf, spec.mu);
  out.append(buf, r.ptr);
  out += ':';
  r = std::to_chars(buf, buf + sizeof buf, spec.sigma);
  out.append(buf, r.ptr);
  return out;
}

void validate(const DistSpec& spec) {
  if (spec.kind != DistKind::rg) return;
  if (!std::isfinite(spec.mu)) throw ParameterError("rg mu must be finite");
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw ParameterError("rg sigma must be positive");
  }
}

double rg_density(const RelPoint& r, double mu, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("rg sigma must be positive");
  if (std::abs(r.xr) > 0.5 || std::abs(r.yr) > 0.5) return 0.0;
  return rg_density_1d(r.xr, mu, sigma) * rg_density_1d(r.yr, mu, sigma);
}

RelPoint sample_rel(const DistSpec& spec, Rng& rng) {
  if (spec.kind == DistKind::uniform) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const double x = u(rng);
    return {x, u(rng)};
  }
  validate(spec);
  std::normal_distribution<double> g(spec.mu, spec.sigma);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const double x = g(rng);
    const double y = g(rng);
    if (std::abs(x) <= 0.5 && std::abs(y) <= 0.5) return {x, y};
  }
  throw SamplerError("rg sampler exceeded " + std::to_string(kMaxRedraws) +
                     " redraws for " + to_string(spec));
}

std::vector<Point2> generate_coarse_points(const Scene& scene, const DistSpec& spec,
                                           Rng& rng) {
  std::vector<Point2> out;
  out.reserve(scene.objects.size());
  for (const auto& obj : scene.objects) {
    out.push_back(abs_coords(sample_rel(spec, rng), obj.bbox));
  }
  return out;
}

AnnotationSet generate_coarse_points(std::span<const Scene> scenes, const DistSpec& spec,
                                     std::uint64_t seed, int jobs) {
  validate(spec);
  std::vector<std::vector<Point2>> per_image(scenes.size());
  detail::parallel_for(scenes.size(), jobs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    per_image[i] = generate_coarse_points(scenes[i], spec, rng);
  });
  AnnotationSet out;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    out.points[scenes[i].image_id] = std::move(per_image[i]);
  }
  return out;
}

SemanticKind parse_semantic_kind(std::string_view text) {
  if (text == "center") return SemanticKind::center;
  if (text == "head") return SemanticKind::head;
  if (text == "foot") return SemanticKind::foot;
  if (text == "corner") return SemanticKind::corner;
  throw ParameterError("unknown semantic point '" + std::string(text) + "'");
}

Point2 semantic_point(const BBox& b, SemanticKind kind) {
  switch (kind) {
    case SemanticKind::center:
      return {b.xc, b.yc};
    case SemanticKind::head:
      return {b.xc, b.yc - b.h / 4};
    case SemanticKind::foot:
      return {b.xc, b.yc + b.h / 4};
    case SemanticKind::corner:
      return {b.xc - b.w / 4, b.yc - b.h / 4};
  }
  return {b.xc, b.yc};
}

AnnotationSet semantic_points(std::span<const Scene> scenes, SemanticKind kind) {
  AnnotationSet out;
  for (const auto& scene : scenes) {
    auto& pts = out.points[scene.image_id];
    for (const auto& obj : scene.objects) pts.push_back(semantic_point(obj.bbox, kind));
  }
  return out;
}

std::vector<RelPoint> relative_positions(const AnnotationSet& annotations,
                                         std::span<const Scene> scenes) {
  std::vector<RelPoint> rel;
  for (const auto& scene : scenes) {
    const auto it = annotations.points.find(scene.image_id);
    const std::size_t have = it == annotations.points.end() ? 0 : it->second.size();
    if (have != scene.objects.size()) {
      throw DataError("image '" + scene.image_id + "': " + std::to_string(have) +
                      " annotations for " + std::to_string(scene.objects.size()) +
                      " objects");
    }
    for (std::size_t j = 0; j < have; ++j) {
      rel.push_back(rel_coords(it->second[j], scene.objects[j].bbox));
    }
  }
  return rel;
}

RelStats rel_stats(const AnnotationSet& annotations, std::span<const Scene> scenes) {
  const auto rel = relative_positions(annotations, scenes);
  RelStats stats;
  stats.count = rel.size();
  if (rel.empty()) return stats;
  const double n = static_cast<double>(rel.size());
  for (const auto& r : rel) {
    stats.mean_x += r.xr;
    stats.mean_y += r.yr;
  }
  stats.mean_x /= n;
  stats.mean_y /= n;
  double var_x = 0.0;
  double var_y = 0.0;
  for (const auto& r : rel) {
    var_x += (r.xr - stats.mean_x) * (r.xr - stats.mean_x);
    var_y += (r.yr - stats.mean_y) * (r.yr - stats.mean_y);
  }
  stats.std = std::sqrt((var_x / n + var_y / n) / 2.0);
  return stats;
}

}  // namespace coarsepoint::annotgen
