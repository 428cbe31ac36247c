#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "coarsepoint/error.hpp"
#include "coarsepoint/annotgen.hpp"
#include "coarsepoint/eval.hpp"
#include "oracles.hpp"

using namespace coarsepoint;
using namespace coarsepoint::eval;

namespace {

struct Instance {
  std::vector<Scene> scenes;
  PredictionSet preds;
  std::vector<oracle::Image> images;
};

/// Random small instance with distinct scores; boxes overlap freely.
Instance random_instance(std::mt19937_64& rng, int images) {
  std::uniform_int_distribution<int> count(0, 6);
  std::uniform_real_distribution<double> pos(0, 40), ext(4, 24), score(0, 1);
  Instance inst;
  for (int i = 0; i < images; ++i) {
    Scene s{"img" + std::to_string(i), 64, 64, {}};
    oracle::Image img;
    const int ng = count(rng), np = count(rng);
    for (int g = 0; g < ng; ++g) {
      const BBox b{pos(rng) + 10, pos(rng) + 10, ext(rng), ext(rng)};
      s.objects.push_back({g, b});
      img.gts.push_back({b.xc, b.yc, b.w, b.h});
    }
    auto& list = inst.preds[s.image_id];
    for (int p = 0; p < np; ++p) {
      const ScoredPoint sp{{pos(rng) + 5, pos(rng) + 5}, score(rng)};
      list.push_back(sp);
      img.preds.push_back({sp.point.x, sp.point.y, sp.score});
    }
    inst.scenes.push_back(std::move(s));
    inst.images.push_back(std::move(img));
  }
  return inst;
}

}  // namespace

TEST_CASE("match_points") {
  const std::vector<GtObject> gts{{0, {10, 10, 4, 8}}, {1, {30, 10, 4, 8}}};
  SUBCASE("one prediction inside one box") {
    const std::vector<ScoredPoint> preds{{{10, 11}, 0.9}};
    const auto m = match_points(preds, std::span(gts).first(1), 1.0);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.unmatched_preds.empty());
    CHECK(m.unmatched_gts.empty());
  }
  SUBCASE("prediction outside every box") {
    const std::vector<ScoredPoint> preds{{{20, 10}, 0.9}};
    const auto m = match_points(preds, gts, 1.0);
    CHECK(m.pairs.empty());
    CHECK(m.unmatched_preds == std::vector<std::size_t>{0});
    CHECK(m.unmatched_gts.size() == 2);
  }
  SUBCASE("two predictions in one box: the higher score wins") {
    const std::vector<ScoredPoint> preds{{{10, 10}, 0.4}, {{11, 10}, 0.8}};
    const auto m = match_points(preds, std::span(gts).first(1), 1.0);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0] == std::pair<std::size_t, std::size_t>{1, 0});
    CHECK(m.unmatched_preds == std::vector<std::size_t>{0});
  }
  SUBCASE("nearest eligible box, ties to lower index") {
    const std::vector<GtObject> twin{{0, {10, 10, 4, 4}}, {1, {10, 10, 4, 4}}};
    const std::vector<ScoredPoint> preds{{{10, 10}, 0.5}};
    CHECK(match_points(preds, twin, 1.0).pairs[0].second == 0);
    const std::vector<GtObject> near{{0, {10, 10, 8, 8}}, {1, {12, 10, 8, 8}}};
    const std::vector<ScoredPoint> p2{{{12, 10}, 0.5}};
    CHECK(match_points(p2, near, 1.0).pairs[0].second == 1);
  }
  SUBCASE("injective on random instances") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 500; ++t) {
      auto inst = random_instance(rng, 1);
      const auto& list = inst.preds.begin()->second;
      const auto m = match_points(list, inst.scenes[0].objects, 1.0);
      std::set<std::size_t> ps, gs;
      for (auto [p, g] : m.pairs) {
        REQUIRE(ps.insert(p).second);
        REQUIRE(gs.insert(g).second);
      }
      CHECK(m.pairs.size() + m.unmatched_preds.size() == list.size());
      CHECK(m.pairs.size() + m.unmatched_gts.size() == inst.scenes[0].objects.size());
    }
  }
  CHECK_THROWS_AS(match_points({}, gts, 0.0), ParameterError);
}

TEST_CASE("average_precision worked examples") {
  const std::vector<Scene> scenes{{"a", 100, 100, {{0, {10, 10, 4, 8}}, {1, {50, 50, 4, 8}}}}};
  SUBCASE("perfect") {
    PredictionSet p{{"a", {{{10, 10}, 0.9}, {{50, 50}, 0.8}}}};
    CHECK(*average_precision(p, scenes, 1.0, ScaleBucket::all) == 1.0);
  }
  SUBCASE("all misses") {
    PredictionSet p{{"a", {{{80, 80}, 0.9}}}};
    CHECK(*average_precision(p, scenes, 1.0, ScaleBucket::all) == 0.0);
  }
  SUBCASE("TP, FP, TP") {
    PredictionSet p{{"a", {{{10, 10}, 0.9}, {{80, 80}, 0.8}, {{50, 50}, 0.7}}}};
    const double ap = *average_precision(p, scenes, 1.0, ScaleBucket::all);
    CHECK(std::abs(ap - (0.5 + 0.5 * 2.0 / 3.0)) < 1e-12);
    CHECK(ap == doctest::Approx(0.8333).epsilon(1e-4));
    const auto fp = fp_at_recall(p, scenes, 1.0, 0.5);
    CHECK(fp.reached);
    CHECK(fp.false_positives == 0);
    const auto fp1 = fp_at_recall(p, scenes, 1.0, 1.0);
    CHECK(fp1.false_positives == 1);
  }
  SUBCASE("empty bucket is undefined, not zero") {
    PredictionSet p{{"a", {{{10, 10}, 0.9}}}};
    CHECK_FALSE(average_precision(p, scenes, 1.0, ScaleBucket::normal).has_value());
  }
  SUBCASE("unknown image id") {
    PredictionSet p{{"zzz", {{{10, 10}, 0.9}}}};
    CHECK_THROWS_AS(average_precision(p, scenes, 1.0, ScaleBucket::all), DataError);
  }
}

TEST_CASE("out-of-bucket matches are ignored") {
  // One tiny box (8x8) and one normal box (40x40).
  const std::vector<Scene> scenes{{"a", 200, 200, {{0, {20, 20, 8, 8}}, {1, {100, 100, 40, 40}}}}};
  PredictionSet p{{"a", {{{100, 100}, 0.9}, {{20, 20}, 0.5}, {{180, 180}, 0.4}}}};
  // tiny: the 0.9 prediction hits the normal box and is skipped.
  CHECK(*average_precision(p, scenes, 1.0, ScaleBucket::tiny) == 1.0);
  CHECK(*average_precision(p, scenes, 1.0, ScaleBucket::normal) == 1.0);
  CHECK_FALSE(average_precision(p, scenes, 1.0, ScaleBucket::small).has_value());
}

TEST_CASE("AP equals the brute-force sweep") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const auto inst = random_instance(rng, 1 + t % 3);
    std::size_t gts = 0;
    for (const auto& s : inst.scenes) gts += s.objects.size();
    const auto ap = average_precision(inst.preds, inst.scenes, 1.0, ScaleBucket::all);
    if (gts == 0) {
      CHECK_FALSE(ap.has_value());
      continue;
    }
    REQUIRE(ap.has_value());
    REQUIRE(*ap == oracle::brute_force_ap(inst.images, 1.0));
  }
}

TEST_CASE("AP is invariant under monotone score transforms") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 300; ++t) {
    auto inst = random_instance(rng, 2);
    const auto base = average_precision(inst.preds, inst.scenes, 1.0, ScaleBucket::all);
    for (auto& [id, list] : inst.preds) {
      for (auto& p : list) p.score = std::pow(p.score, 3.0) * 0.5;
    }
    CHECK(average_precision(inst.preds, inst.scenes, 1.0, ScaleBucket::all) == base);
  }
}

TEST_CASE("fp_at_recall") {
  const std::vector<Scene> scenes{{"a", 100, 100, {{0, {10, 10, 4, 8}}, {1, {50, 50, 4, 8}}}}};
  SUBCASE("perfect predictor") {
    PredictionSet p{{"a", {{{10, 10}, 0.9}, {{50, 50}, 0.8}}}};
    const auto r = fp_at_recall(p, scenes, 1.0, 0.5);
    CHECK(r.reached);
    CHECK(r.false_positives == 0);
  }
  SUBCASE("unreachable") {
    PredictionSet p{{"a", {{{80, 80}, 0.9}, {{10, 10}, 0.5}}}};
    const auto r = fp_at_recall(p, scenes, 1.0, 1.0);
    CHECK_FALSE(r.reached);
    CHECK(r.recall == 0.5);
    PredictionSet none{{"a", {{{80, 80}, 0.9}}}};
    CHECK_FALSE(fp_at_recall(none, scenes, 1.0, 0.5).reached);
  }
  SUBCASE("monotone in tau and recall") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 500; ++t) {
      const auto inst = random_instance(rng, 2);
      for (double recall : {0.25, 0.5, 0.75, 1.0}) {
        const auto a = fp_at_recall(inst.preds, inst.scenes, 0.75, recall);
        const auto b = fp_at_recall(inst.preds, inst.scenes, 1.0, recall);
        const auto c = fp_at_recall(inst.preds, inst.scenes, 1.5, recall);
        if (a.reached) {
          REQUIRE(b.reached);
          CHECK(b.false_positives <= a.false_positives);
        }
        if (b.reached) {
          REQUIRE(c.reached);
          CHECK(c.false_positives <= b.false_positives);
        }
      }
      for (double tau : {0.75, 1.0, 1.5}) {
        const auto lo = fp_at_recall(inst.preds, inst.scenes, tau, 0.5);
        const auto hi = fp_at_recall(inst.preds, inst.scenes, tau, 1.0);
        if (hi.reached) {
          REQUIRE(lo.reached);
          CHECK(lo.false_positives <= hi.false_positives);
        }
      }
    }
  }
  CHECK_THROWS_AS(fp_at_recall({}, scenes, 1.0, 0.0), ParameterError);
}

TEST_CASE("heatmap") {
  std::vector<Scene> scenes{{"a", 100, 100, {}}};
  for (int j = 0; j < 4; ++j) scenes[0].objects.push_back({j, {10.0 + 20 * j, 50, 10, 20}});
  AnnotationSet centers;
  for (const auto& o : scenes[0].objects) centers.points["a"].push_back({o.bbox.xc, o.bbox.yc});

  SUBCASE("centers land in the middle bin") {
    const auto m = heatmap(centers, scenes, 3);
    CHECK(m.at(1, 1) == 1.0);
    CHECK(m.instance_count == 4);
  }
  SUBCASE("edges and clamping") {
    AnnotationSet set;
    const auto& b = scenes[0].objects;
    set.points["a"] = {abs_coords({0.5, 0.5}, b[0].bbox), abs_coords({-0.5, -0.5}, b[1].bbox),
                       abs_coords({0.9, 0.0}, b[2].bbox), abs_coords({0.1, 0.1}, b[3].bbox)};
    const auto m = heatmap(set, scenes, 4);
    CHECK(m.at(3, 3) == 0.25);
    CHECK(m.at(0, 0) == 0.25);
    CHECK(m.at(2, 3) == 0.25);
    CHECK(m.clamped_count == 1);
    double sum = 0;
    for (double v : m.values) sum += v;
    CHECK(sum == doctest::Approx(1.0));
  }
  SUBCASE("uniform annotations pass a chi-square uniformity test") {
    std::vector<Scene> many;
    for (int i = 0; i < 100; ++i) {
      Scene s{"i" + std::to_string(i), 2000, 2000, {}};
      for (int j = 0; j < 1000; ++j) {
        s.objects.push_back({j, {30.0 + 60 * (j % 32), 30.0 + 60 * (j / 32), 12, 30}});
      }
      many.push_back(std::move(s));
    }
    const auto set = annotgen::generate_coarse_points(many, {annotgen::DistKind::uniform}, 17);
    const auto m = heatmap(set, many, 16);
    const double n = static_cast<double>(m.instance_count);
    const double expected = n / 256.0;
    double chi2 = 0;
    for (double v : m.values) chi2 += (v * n - expected) * (v * n - expected) / expected;
    CHECK(chi2 < oracle::chi2_critical(255, 0.01));
  }
  SUBCASE("exports") {
    const auto m = heatmap(centers, scenes, 3);
    CHECK(heatmap_csv(m) == "0,0,0\n0,1,0\n0,0,0\n");
    const auto pgm = heatmap_pgm(m);
    CHECK(pgm.starts_with("P5\n3 3\n255\n"));
    CHECK(pgm.size() == std::string("P5\n3 3\n255\n").size() + 9);
    CHECK(static_cast<unsigned char>(pgm.back() ) == 0);
    CHECK(static_cast<unsigned char>(pgm[pgm.size() - 5]) == 255);
  }
  CHECK_THROWS_AS(heatmap(centers, scenes, 0), ParameterError);
}
