#include "coarsepoint/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "coarsepoint/annotgen.hpp"
#include "coarsepoint/bridge.hpp"
#include "coarsepoint/error.hpp"
#include "coarsepoint/eval.hpp"
#include "coarsepoint/records.hpp"
#include "coarsepoint/refine.hpp"
#include "coarsepoint/semfield.hpp"
#include "coarsepoint/tiling.hpp"

namespace coarsepoint::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string manifest;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads; never changes results")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--manifest", c.manifest,
                  "Run manifest path (default: <output>.manifest.json)");
}

/// Records what a command did so it can be replayed.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    doc_["tool"] = "coarsepoint";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["argv"] = args;
    doc_["inputs"] = ojson::array();
    doc_["outputs"] = ojson::array();
    doc_["config"] = ojson::object();
  }

  void input(const std::string& path) { doc_["inputs"].push_back(path); }
  void output(const std::string& path) { doc_["outputs"].push_back(path); }
  ojson& config() { return doc_["config"]; }

  void finish(const CLI::App* cmd, const Common& c) {
    doc_["seed"] = c.seed;
    doc_["jobs"] = c.jobs;
    ojson opts = ojson::object();
    for (const CLI::Option* opt : cmd->get_options()) {
      if (opt->get_name() == "--help" || opt->count() == 0) continue;
      opts[opt->get_name()] = opt->results();
    }
    doc_["options"] = std::move(opts);
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    doc_["timing_ms"] =
        std::chrono::duration<double, std::milli>(elapsed).count();

    std::string path = c.manifest;
    if (path.empty() && !doc_["outputs"].empty()) {
      path = doc_["outputs"][0].get<std::string>() + ".manifest.json";
    }
    if (!path.empty()) ingest::write_text_atomic(path, doc_.dump(2) + "\n");
  }

 private:
  ojson doc_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<semfield::PartSpec> load_parts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open parts file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, std::string(e.what()) + " (in " + path + ")");
  }
  // Reuse the header codec so both places accept the same shape.
  const auto rf = ingest::parse_records(nlohmann::json{{"header", {{"parts", doc}}}}.dump());
  return *rf.header->parts;
}

std::vector<semfield::PartSpec> parts_of(const ingest::RecordFile& rf) {
  if (rf.header && rf.header->parts) return *rf.header->parts;
  return semfield::default_parts();
}

ojson parts_json(const std::vector<semfield::PartSpec>& parts) {
  ojson arr = ojson::array();
  for (const auto& p : parts) {
    arr.push_back({{"part_id", p.part_id},
                   {"center", {p.rel_center.xr, p.rel_center.yr}},
                   {"radius", p.rel_radius},
                   {"detectability", p.detectability}});
  }
  return arr;
}

ojson stats_json(const annotgen::RelStats& s) {
  return {{"mean_x", s.mean_x}, {"mean_y", s.mean_y}, {"std", s.std}, {"count", s.count}};
}

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
  Common common;
  semfield::SimulationSpec spec;
  std::string parts_path;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "Generate a synthetic semantic-part field");
    add_common(cmd, common);
    cmd->add_option("--images", spec.images)->capture_default_str();
    cmd->add_option("--objects-per-image", spec.objects_per_image)->capture_default_str();
    cmd->add_option("--min-w", spec.min_w)->capture_default_str();
    cmd->add_option("--max-w", spec.max_w)->capture_default_str();
    cmd->add_option("--min-h", spec.min_h)->capture_default_str();
    cmd->add_option("--max-h", spec.max_h)->capture_default_str();
    cmd->add_option("--min-gap", spec.min_gap, "Minimum pixel gap between objects")
        ->capture_default_str();
    cmd->add_option("--parts", parts_path, "JSON array of parts (default: head/torso/hand)");
    cmd->add_option("--out", out, "Output record file")->required();
  }

  void run(const CLI::App* cmd, Manifest& m) {
    if (!parts_path.empty()) {
      spec.parts = load_parts(parts_path);
      m.input(parts_path);
    }
    const auto field = semfield::simulate(spec, common.seed);
    auto rf = ingest::make_records(field.scenes, nullptr, nullptr);
    rf.header = ingest::Header{};
    rf.header->parts = field.parts;
    ingest::write_record_file(out, rf);
    m.output(out);
    m.config()["parts"] = parts_json(field.parts);
    m.finish(cmd, common);
  }
};

// -------------------------------------------------------------- gen-points

struct GenPointsCmd {
  Common common;
  std::string in;
  std::string dist = "uniform";
  std::string semantic;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen-points", "Generate coarse point annotations");
    add_common(cmd, common);
    cmd->add_option("--in", in, "Record file with objects")->required();
    auto* d = cmd->add_option("--dist", dist, "uniform | rg:MU:SIGMA")->capture_default_str();
    cmd->add_option("--semantic", semantic, "center | head | foot | corner")->excludes(d);
    cmd->add_option("--out", out, "Output record file")->required();
  }

  void run(const CLI::App* cmd, Manifest& m) {
    auto rf = ingest::read_record_file(in);
    m.input(in);
    const auto scenes = ingest::scenes_from_records(rf);
    for (const auto& s : scenes) validate(s);
    AnnotationSet set;
    if (!semantic.empty()) {
      set = annotgen::semantic_points(scenes, annotgen::parse_semantic_kind(semantic));
      m.config()["semantic"] = semantic;
    } else {
      const auto spec = annotgen::parse_dist_spec(dist);
      set = annotgen::generate_coarse_points(scenes, spec, common.seed, common.jobs);
      m.config()["dist"] = annotgen::to_string(spec);
    }
    ingest::set_annotations(rf, set);
    ingest::write_record_file(out, rf);
    m.output(out);
    m.finish(cmd, common);
  }
};

// ------------------------------------------------------------------ refine

struct RefineCmd {
  Common common;
  std::string in;
  std::string config_path;
  std::string estimator = "oracle";
  double noise = 0.0;
  double delta = 0.0, radius = 0.0, pseudo_box_size = 0.0, tolerance = 0.0;
  int top_k = 0, max_iter = 0;
  int timeout = 3600;
  int snapshot_every = 0;
  std::string out;
  std::string report;
  CLI::Option *o_delta = nullptr, *o_radius = nullptr, *o_top_k = nullptr, *o_max_iter = nullptr,
              *o_box = nullptr, *o_tol = nullptr;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("refine", "Iterative point self-refinement");
    add_common(cmd, common);
    cmd->add_option("--in", in, "Record file with objects and annotations")->required();
    cmd->add_option("--config", config_path,
                    std::string("JSON config (default: $") + kConfigEnv + ")");
    cmd->add_option("--estimator", estimator, "oracle | identity | external:<command>")
        ->capture_default_str();
    cmd->add_option("--noise", noise, "Oracle score noise std")->capture_default_str();
    o_delta = cmd->add_option("--delta", delta, "SSP threshold (default 0.2)");
    o_radius = cmd->add_option("--radius", radius, "Merge radius in pixels (default 16)");
    o_top_k = cmd->add_option("--top-k", top_k, "Candidates kept per object (default 10)");
    o_max_iter = cmd->add_option("--max-iter", max_iter, "Iteration cap (default 3)");
    o_box = cmd->add_option("--pseudo-box-size", pseudo_box_size,
                            "Pseudo box side for external estimators (default 16)");
    o_tol = cmd->add_option("--tolerance", tolerance, "Convergence tolerance (default 0)");
    cmd->add_option("--timeout", timeout, "External estimator timeout, seconds")
        ->capture_default_str();
    cmd->add_option("--snapshot-every", snapshot_every,
                    "Write every n-th iteration to <out>.iter<k>.jsonl (0: off)");
    cmd->add_option("--out", out, "Refined record file")->required();
    cmd->add_option("--report", report, "Report JSON (default: <out>.report.json)");
  }

  refine::RefineConfig resolve(Manifest& m) const {
    refine::RefineConfig cfg;
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv(kConfigEnv)) path = env;
    }
    if (!path.empty()) {
      std::ifstream f(path);
      if (!f) throw Error("cannot open config '" + path + "'");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string(e.what()) + " (in " + path + ")");
      }
      for (const auto& [key, value] : j.items()) {
        if (key == "delta") cfg.delta = value.get<double>();
        else if (key == "radius") cfg.radius = value.get<double>();
        else if (key == "top_k") cfg.top_k = value.get<int>();
        else if (key == "max_iter") cfg.max_iter = value.get<int>();
        else if (key == "pseudo_box_size") cfg.pseudo_box_size = value.get<double>();
        else if (key == "tolerance") cfg.tolerance = value.get<double>();
        else throw SchemaError("unknown config key '" + key + "' in " + path);
      }
      m.input(path);
    }
    if (o_delta->count()) cfg.delta = delta;
    if (o_radius->count()) cfg.radius = radius;
    if (o_top_k->count()) cfg.top_k = top_k;
    if (o_max_iter->count()) cfg.max_iter = max_iter;
    if (o_box->count()) cfg.pseudo_box_size = pseudo_box_size;
    if (o_tol->count()) cfg.tolerance = tolerance;
    cfg.jobs = common.jobs;
    refine::validate(cfg);
    return cfg;
  }

  void run(const CLI::App* cmd, Manifest& m) {
    const auto cfg = resolve(m);
    auto rf = ingest::read_record_file(in);
    m.input(in);
    const auto scenes = ingest::scenes_from_records(rf);
    const auto initial = ingest::annotations_from_records(rf);

    std::unique_ptr<refine::Estimator> est;
    if (estimator == "identity") {
      est = std::make_unique<refine::IdentityEstimator>();
    } else if (estimator == "oracle") {
      est = std::make_unique<refine::OracleEstimator>(parts_of(rf), noise, common.seed);
    } else if (estimator.starts_with("external:")) {
      ingest::BridgeOptions opts;
      opts.command = estimator.substr(std::string("external:").size());
      opts.timeout = std::chrono::seconds(timeout);
      est = std::make_unique<ingest::ExternalEstimator>(opts);
    } else {
      throw ParameterError("unknown estimator '" + estimator + "'");
    }

    const auto result = refine::self_refine(scenes, initial, *est, cfg);

    ingest::set_annotations(rf, result.annotations);
    ingest::write_record_file(out, rf);
    m.output(out);

    const std::string report_path = report.empty() ? out + ".report.json" : report;
    const auto report_dir = std::filesystem::absolute(report_path).parent_path();
    ojson rep;
    rep["converged"] = result.report.converged;
    rep["iterations"] = ojson::array();
    for (const auto& it : result.report.iterations) {
      ojson row{{"iteration", it.iteration}, {"moved_count", it.moved_count}};
      if (it.stats) row["stats"] = stats_json(*it.stats);
      if (snapshot_every > 0 && it.iteration % snapshot_every == 0) {
        auto snap = rf;
        ingest::set_annotations(snap, it.snapshot);
        const std::string path = out + ".iter" + std::to_string(it.iteration) + ".jsonl";
        ingest::write_record_file(path, snap);
        m.output(path);
        row["snapshot"] =
            std::filesystem::absolute(path).lexically_relative(report_dir).generic_string();
      }
      rep["iterations"].push_back(std::move(row));
    }
    ingest::write_text_atomic(report_path, rep.dump(2) + "\n");
    m.output(report_path);

    m.config() = {{"delta", cfg.delta},         {"radius", cfg.radius},
                  {"top_k", cfg.top_k},         {"max_iter", cfg.max_iter},
                  {"pseudo_box_size", cfg.pseudo_box_size},
                  {"tolerance", cfg.tolerance}, {"estimator", estimator},
                  {"noise", noise}};
    m.finish(cmd, common);
  }
};

// -------------------------------------------------------------------- eval

struct EvalCmd {
  Common common;
  std::string in;
  std::string predictions;
  bool use_annotations = false;
  double tau = 1.0;
  std::string bucket = "every";
  double recall = 0.5;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "Point-based AP and false positives at recall");
    add_common(cmd, common);
    cmd->add_option("--in", in, "Ground-truth record file")->required();
    cmd->add_option("--predictions", predictions,
                    "Prediction record file (default: predictions in --in)");
    cmd->add_flag("--use-annotations", use_annotations,
                  "Score the annotations of --in as predictions with score 1");
    cmd->add_option("--tau", tau, "Point-box distance threshold")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--bucket", bucket, "tiny | small | normal | all | every")
        ->check(CLI::IsMember({"tiny", "small", "normal", "all", "every"}))
        ->capture_default_str();
    cmd->add_option("--recall", recall, "Recall for the false-positive count")
        ->capture_default_str();
    cmd->add_option("--out", out, "JSON result file");
  }

  void run(const CLI::App* cmd, Manifest& m, std::ostream& os) {
    const auto gt = ingest::read_record_file(in);
    m.input(in);
    const auto scenes = ingest::scenes_from_records(gt);
    PredictionSet preds;
    if (use_annotations) {
      preds = eval::annotations_as_predictions(ingest::annotations_from_records(gt));
    } else if (!predictions.empty()) {
      preds = ingest::predictions_from_records(ingest::read_record_file(predictions));
      m.input(predictions);
    } else {
      preds = ingest::predictions_from_records(gt);
    }

    std::vector<ScaleBucket> buckets;
    if (bucket == "every") {
      buckets = {ScaleBucket::tiny, ScaleBucket::small, ScaleBucket::normal, ScaleBucket::all};
    } else {
      buckets = {parse_scale_bucket(bucket)};
    }

    ojson res;
    res["tau"] = tau;
    res["ap"] = ojson::object();
    char line[128];
    os << "bucket   AP\n";
    for (ScaleBucket b : buckets) {
      const auto ap = eval::average_precision(preds, scenes, tau, b);
      const std::string name(to_string(b));
      if (ap) {
        std::snprintf(line, sizeof line, "%-8s %.4f\n", name.c_str(), *ap);
        res["ap"][name] = *ap;
      } else {
        std::snprintf(line, sizeof line, "%-8s n/a\n", name.c_str());
        res["ap"][name] = nullptr;
      }
      os << line;
    }
    const auto fp = eval::fp_at_recall(preds, scenes, tau, recall);
    if (fp.reached) {
      std::snprintf(line, sizeof line, "FP@recall %.2f: %zu\n", recall, fp.false_positives);
      os << line;
    } else {
      std::snprintf(line, sizeof line, "FP@recall %.2f: unreachable (max recall %.4f)\n", recall,
                    fp.recall);
      os << line;
    }
    res["fp_at_recall"] = {{"recall_target", recall},
                           {"reached", fp.reached},
                           {"false_positives", fp.false_positives},
                           {"recall", fp.recall},
                           {"score_threshold", fp.score_threshold}};
    if (!out.empty()) {
      ingest::write_text_atomic(out, res.dump(2) + "\n");
      m.output(out);
    }
    m.config() = {{"tau", tau}, {"bucket", bucket}, {"recall", recall}};
    m.finish(cmd, common);
  }
};

// ----------------------------------------------------------------- heatmap

struct HeatmapCmd {
  Common common;
  std::string in;
  int bins = 32;
  std::string csv;
  std::string pgm;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("heatmap", "Relative-position histogram of annotations");
    add_common(cmd, common);
    cmd->add_option("--in", in, "Record file with objects and annotations")->required();
    cmd->add_option("--bins", bins)->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--csv", csv, "CSV output (row-major, rows along y)");
    cmd->add_option("--pgm", pgm, "8-bit PGM output");
  }

  void run(const CLI::App* cmd, Manifest& m, std::ostream& os) {
    if (csv.empty() && pgm.empty()) throw ParameterError("give --csv and/or --pgm");
    const auto rf = ingest::read_record_file(in);
    m.input(in);
    const auto map = eval::heatmap(ingest::annotations_from_records(rf),
                                   ingest::scenes_from_records(rf), bins);
    if (!csv.empty()) {
      ingest::write_text_atomic(csv, eval::heatmap_csv(map));
      m.output(csv);
    }
    if (!pgm.empty()) {
      ingest::write_text_atomic(pgm, eval::heatmap_pgm(map));
      m.output(pgm);
    }
    if (map.clamped_count > 0) {
      os << map.clamped_count << " of " << map.instance_count
         << " points lay outside their box and were clamped\n";
    }
    m.config() = {{"bins", bins}};
    m.finish(cmd, common);
  }
};

// -------------------------------------------------------------------- tile

struct TileCmd {
  Common common;
  std::string in;
  int tile_size = 640;
  int overlap = 32;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("tile", "Cut images into overlapping tiles");
    add_common(cmd, common);
    cmd->add_option("--in", in, "Record file with objects")->required();
    cmd->add_option("--tile-size", tile_size)->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--overlap", overlap)->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--out", out, "Tile record file")->required();
  }

  void run(const CLI::App* cmd, Manifest& m) {
    const auto rf = ingest::read_record_file(in);
    m.input(in);
    const auto scenes = ingest::scenes_from_records(rf);
    const auto annotations = ingest::annotations_from_records(rf);
    ingest::RecordFile tiles;
    tiles.header = rf.header;
    for (const auto& scene : scenes) {
      std::vector<Point2> pts;
      if (const auto it = annotations.points.find(scene.image_id); it != annotations.points.end()) {
        pts = it->second;
      }
      for (auto& view : ingest::tile_scene(scene, tile_size, overlap, pts)) {
        ingest::Record r;
        r.image_id = view.scene.image_id;
        r.width = view.scene.width;
        r.height = view.scene.height;
        std::vector<BBox> boxes;
        for (const auto& o : view.scene.objects) boxes.push_back(o.bbox);
        r.objects = std::move(boxes);
        if (!pts.empty()) r.annotations = view.annotations;
        r.extra["tile"] = {{"parent_id", scene.image_id},   {"x0", view.tile.x0},
                           {"y0", view.tile.y0},            {"width", view.tile.width},
                           {"height", view.tile.height},    {"parent_width", scene.width},
                           {"parent_height", scene.height}, {"source_index", view.source_index}};
        tiles.records.push_back(std::move(r));
      }
    }
    ingest::write_record_file(out, tiles);
    m.output(out);
    m.config() = {{"tile_size", tile_size}, {"overlap", overlap}};
    m.finish(cmd, common);
  }
};

// -------------------------------------------------------------------- fuse

struct FuseCmd {
  Common common;
  std::string in;
  double dedupe_radius = 8.0;
  std::string out;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("fuse", "Merge per-tile predictions back into images");
    add_common(cmd, common);
    cmd->add_option("--in", in, "Tile record file with predictions")->required();
    cmd->add_option("--dedupe-radius", dedupe_radius)
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--out", out, "Image record file with fused predictions")->required();
  }

  void run(const CLI::App* cmd, Manifest& m) {
    const auto rf = ingest::read_record_file(in);
    m.input(in);
    struct Parent {
      int width = 0;
      int height = 0;
      std::vector<std::pair<ingest::Tile, std::vector<ScoredPoint>>> tiles;
    };
    std::vector<std::string> order;
    std::map<std::string, Parent> parents;
    for (const auto& r : rf.records) {
      if (!r.extra.contains("tile")) {
        throw SchemaError("record '" + r.image_id + "' has no 'tile' field");
      }
      const auto& t = r.extra.at("tile");
      ingest::Tile tile;
      try {
        tile = {t.at("parent_id").get<std::string>(), t.at("x0").get<int>(),
                t.at("y0").get<int>(), t.at("width").get<int>(), t.at("height").get<int>()};
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError("record '" + r.image_id + "': bad 'tile' field: " + e.what());
      }
      if (!parents.contains(tile.parent_id)) order.push_back(tile.parent_id);
      auto& p = parents[tile.parent_id];
      p.width = t.value("parent_width", std::max(p.width, tile.x0 + tile.width));
      p.height = t.value("parent_height", std::max(p.height, tile.y0 + tile.height));
      p.tiles.emplace_back(tile, r.predictions.value_or(std::vector<ScoredPoint>{}));
    }
    ingest::RecordFile fused;
    for (const auto& id : order) {
      const auto& p = parents.at(id);
      ingest::Record r;
      r.image_id = id;
      r.width = p.width;
      r.height = p.height;
      r.predictions = ingest::fuse_predictions(p.tiles, dedupe_radius);
      fused.records.push_back(std::move(r));
    }
    ingest::write_record_file(out, fused);
    m.output(out);
    m.config() = {{"dedupe_radius", dedupe_radius}};
    m.finish(cmd, common);
  }
};

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               int depth);

struct ReplayCmd {
  std::string manifest;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    cmd->add_option("manifest", manifest, "Manifest JSON")->required();
  }

  int run(std::ostream& out, std::ostream& err, int depth) {
    std::ifstream in(manifest);
    if (!in) throw Error("cannot open manifest '" + manifest + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(1, std::string(e.what()) + " (in " + manifest + ")");
    }
    if (!doc.contains("argv") || !doc["argv"].is_array()) {
      throw SchemaError("manifest '" + manifest + "' has no argv");
    }
    return run_parsed(doc["argv"].get<std::vector<std::string>>(), out, err, depth + 1);
  }
};

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               int depth) {
  if (depth > 4) {
    err << "error: replay chain too deep\n";
    return 1;
  }
  CLI::App app{"Coarse point annotation, self-refinement and point-based evaluation",
               "coarsepoint"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateCmd simulate;
  GenPointsCmd gen;
  RefineCmd refine_cmd;
  EvalCmd eval_cmd;
  HeatmapCmd heat;
  TileCmd tile;
  FuseCmd fuse;
  ReplayCmd replay;
  simulate.attach(app);
  gen.attach(app);
  refine_cmd.attach(app);
  eval_cmd.attach(app);
  heat.attach(app);
  tile.attach(app);
  fuse.attach(app);
  replay.attach(app);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    if (name == "replay") return replay.run(out, err, depth);
    Manifest m(name, args);
    if (name == "simulate") simulate.run(cmd, m);
    else if (name == "gen-points") gen.run(cmd, m);
    else if (name == "refine") refine_cmd.run(cmd, m);
    else if (name == "eval") eval_cmd.run(cmd, m, out);
    else if (name == "heatmap") heat.run(cmd, m, out);
    else if (name == "tile") tile.run(cmd, m);
    else if (name == "fuse") fuse.run(cmd, m);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_parsed(args, out, err, 0);
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace coarsepoint::cli
