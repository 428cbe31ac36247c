#include "coarsepoint/records.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "coarsepoint/error.hpp"

namespace coarsepoint::ingest {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

const std::set<std::string> kRecordKeys = {"image_id", "width",       "height",
                                           "objects",  "annotations", "predictions"};

double number_at(const json& arr, std::size_t i, std::size_t line, const std::string& what) {
  if (!arr[i].is_number()) throw SchemaError(line, what + " entries must be numbers");
  return arr[i].get<double>();
}

const json& tuple(const json& v, std::size_t arity, std::size_t line, const std::string& what) {
  if (!v.is_array() || v.size() != arity) {
    throw SchemaError(line, what + " entries must be arrays of " + std::to_string(arity) +
                                " numbers");
  }
  return v;
}

const json& list(const json& obj, const char* key, std::size_t line) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw SchemaError(line, std::string("'") + key + "' must be an array");
  return v;
}

int integer(const json& obj, const char* key, std::size_t line) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw SchemaError(line, std::string("'") + key + "' must be an integer");
  }
  return v.get<int>();
}

semfield::PartSpec parse_part(const json& v, std::size_t line) {
  if (!v.is_object() || !v.contains("part_id") || !v.contains("center") ||
      !v.contains("radius")) {
    throw SchemaError(line, "parts need part_id, center and radius");
  }
  semfield::PartSpec part;
  part.part_id = integer(v, "part_id", line);
  const json& c = tuple(v.at("center"), 2, line, "part center");
  part.rel_center = {number_at(c, 0, line, "center"), number_at(c, 1, line, "center")};
  if (!v.at("radius").is_number()) throw SchemaError(line, "'radius' must be a number");
  part.rel_radius = v.at("radius").get<double>();
  if (v.contains("detectability")) {
    if (!v.at("detectability").is_number()) {
      throw SchemaError(line, "'detectability' must be a number");
    }
    part.detectability = v.at("detectability").get<double>();
  }
  return part;
}

Header parse_header(const json& v, std::size_t line) {
  if (!v.is_object()) throw SchemaError(line, "'header' must be an object");
  Header h;
  for (const auto& [key, value] : v.items()) {
    if (key == "iteration") {
      h.iteration = integer(v, "iteration", line);
    } else if (key == "parts") {
      const json& parts = list(v, "parts", line);
      std::vector<semfield::PartSpec> out;
      for (const auto& p : parts) out.push_back(parse_part(p, line));
      try {
        semfield::validate_parts(out);
      } catch (const ParameterError& e) {
        throw SchemaError(line, e.what());
      }
      h.parts = std::move(out);
    } else {
      h.extra[key] = value;
    }
  }
  return h;
}

Record parse_record(const json& v, std::size_t line) {
  if (!v.contains("image_id")) throw SchemaError(line, "missing required field 'image_id'");
  if (!v.at("image_id").is_string()) throw SchemaError(line, "'image_id' must be a string");
  Record r;
  r.image_id = v.at("image_id").get<std::string>();
  if (v.contains("width")) r.width = integer(v, "width", line);
  if (v.contains("height")) r.height = integer(v, "height", line);
  if (v.contains("objects")) {
    std::vector<BBox> boxes;
    for (const auto& e : list(v, "objects", line)) {
      const json& t = tuple(e, 4, line, "objects");
      BBox b{number_at(t, 0, line, "objects"), number_at(t, 1, line, "objects"),
             number_at(t, 2, line, "objects"), number_at(t, 3, line, "objects")};
      if (!(b.w > 0.0 && b.h > 0.0)) throw SchemaError(line, "object boxes need w > 0 and h > 0");
      boxes.push_back(b);
    }
    r.objects = std::move(boxes);
  }
  if (v.contains("annotations")) {
    std::vector<Point2> pts;
    for (const auto& e : list(v, "annotations", line)) {
      const json& t = tuple(e, 2, line, "annotations");
      pts.push_back({number_at(t, 0, line, "annotations"), number_at(t, 1, line, "annotations")});
    }
    r.annotations = std::move(pts);
  }
  if (v.contains("predictions")) {
    std::vector<ScoredPoint> preds;
    for (const auto& e : list(v, "predictions", line)) {
      const json& t = tuple(e, 3, line, "predictions");
      ScoredPoint s{{number_at(t, 0, line, "predictions"), number_at(t, 1, line, "predictions")},
                    number_at(t, 2, line, "predictions")};
      if (!(s.score >= 0.0 && s.score <= 1.0)) {
        throw SchemaError(line, "prediction scores must lie in [0, 1]");
      }
      preds.push_back(s);
    }
    r.predictions = std::move(preds);
  }
  for (const auto& [key, value] : v.items()) {
    if (!kRecordKeys.contains(key)) r.extra[key] = value;
  }
  return r;
}

ojson header_json(const Header& h) {
  ojson body = ojson::object();
  if (h.iteration) body["iteration"] = *h.iteration;
  if (h.parts) {
    ojson parts = ojson::array();
    for (const auto& p : *h.parts) {
      parts.push_back({{"part_id", p.part_id},
                       {"center", {p.rel_center.xr, p.rel_center.yr}},
                       {"radius", p.rel_radius},
                       {"detectability", p.detectability}});
    }
    body["parts"] = std::move(parts);
  }
  for (const auto& [key, value] : h.extra.items()) body[key] = ojson::parse(value.dump());
  return ojson{{"header", std::move(body)}};
}

ojson record_json(const Record& r) {
  ojson out = ojson::object();
  out["image_id"] = r.image_id;
  if (r.width) out["width"] = *r.width;
  if (r.height) out["height"] = *r.height;
  if (r.objects) {
    ojson arr = ojson::array();
    for (const auto& b : *r.objects) arr.push_back({b.xc, b.yc, b.w, b.h});
    out["objects"] = std::move(arr);
  }
  if (r.annotations) {
    ojson arr = ojson::array();
    for (const auto& p : *r.annotations) arr.push_back({p.x, p.y});
    out["annotations"] = std::move(arr);
  }
  if (r.predictions) {
    ojson arr = ojson::array();
    for (const auto& s : *r.predictions) arr.push_back({s.point.x, s.point.y, s.score});
    out["predictions"] = std::move(arr);
  }
  for (const auto& [key, value] : r.extra.items()) out[key] = ojson::parse(value.dump());
  return out;
}

}  // namespace

RecordFile parse_records(std::istream& in) {
  RecordFile file;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  bool first = true;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json v;
    try {
      v = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, e.what());
    }
    if (!v.is_object()) throw SchemaError(line, "each line must be a JSON object");
    if (v.contains("header")) {
      if (!first) throw SchemaError(line, "header must be the first record");
      file.header = parse_header(v.at("header"), line);
    } else {
      Record r = parse_record(v, line);
      if (!ids.insert(r.image_id).second) {
        throw SchemaError(line, "duplicate image_id '" + r.image_id + "'");
      }
      file.records.push_back(std::move(r));
    }
    first = false;
  }
  return file;
}

RecordFile parse_records(const std::string& text) {
  std::istringstream in(text);
  return parse_records(in);
}

std::string serialize_records(const RecordFile& file) {
  std::string out;
  if (file.header) out += header_json(*file.header).dump() + "\n";
  for (const auto& r : file.records) out += record_json(r).dump() + "\n";
  return out;
}

RecordFile read_record_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return parse_records(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail() + " (in " + path.string() + ")");
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out.flush()) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename onto '" + path.string() + "': " + ec.message());
}

void write_record_file(const std::filesystem::path& path, const RecordFile& file) {
  write_text_atomic(path, serialize_records(file));
}

RecordFile codec_roundtrip(const std::filesystem::path& path) {
  RecordFile file = read_record_file(path);
  if (!(parse_records(serialize_records(file)) == file)) {
    throw Error("record codec failed to round-trip '" + path.string() + "'");
  }
  return file;
}

std::vector<Scene> scenes_from_records(const RecordFile& file) {
  std::vector<Scene> scenes;
  for (const auto& r : file.records) {
    if (!r.objects) continue;
    if (!r.width || !r.height) {
      throw SchemaError("image '" + r.image_id + "' has objects but no width/height");
    }
    Scene s{r.image_id, *r.width, *r.height, {}};
    for (std::size_t j = 0; j < r.objects->size(); ++j) {
      s.objects.push_back({static_cast<int>(j), (*r.objects)[j]});
    }
    scenes.push_back(std::move(s));
  }
  return scenes;
}

AnnotationSet annotations_from_records(const RecordFile& file) {
  AnnotationSet set;
  if (file.header && file.header->iteration) set.iteration = *file.header->iteration;
  for (const auto& r : file.records) {
    if (r.annotations) set.points[r.image_id] = *r.annotations;
  }
  return set;
}

PredictionSet predictions_from_records(const RecordFile& file) {
  PredictionSet preds;
  for (const auto& r : file.records) {
    if (r.predictions) preds[r.image_id] = *r.predictions;
  }
  return preds;
}

RecordFile make_records(std::span<const Scene> scenes, const AnnotationSet* annotations,
                        const PredictionSet* predictions) {
  RecordFile file;
  for (const auto& s : scenes) {
    Record r;
    r.image_id = s.image_id;
    r.width = s.width;
    r.height = s.height;
    std::vector<BBox> boxes;
    for (const auto& o : s.objects) boxes.push_back(o.bbox);
    r.objects = std::move(boxes);
    file.records.push_back(std::move(r));
  }
  if (annotations) set_annotations(file, *annotations);
  if (predictions) set_predictions(file, *predictions);
  return file;
}

void set_annotations(RecordFile& file, const AnnotationSet& annotations) {
  if (!file.header) file.header = Header{};
  file.header->iteration = annotations.iteration;
  for (auto& r : file.records) {
    const auto it = annotations.points.find(r.image_id);
    if (it != annotations.points.end()) r.annotations = it->second;
  }
}

void set_predictions(RecordFile& file, const PredictionSet& predictions) {
  for (auto& r : file.records) {
    const auto it = predictions.find(r.image_id);
    if (it != predictions.end()) r.predictions = it->second;
  }
}

}  // namespace coarsepoint::ingest
