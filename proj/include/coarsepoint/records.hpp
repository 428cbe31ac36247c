#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "coarsepoint/annotgen.hpp"
#include "coarsepoint/core.hpp"
#include "coarsepoint/semfield.hpp"

namespace coarsepoint::ingest {

/// One image per line of a record file:
///
///   {"image_id":"img0","width":64,"height":64,
///    "objects":[[xc,yc,w,h],...],"annotations":[[x,y],...],
///    "predictions":[[x,y,score],...]}
///
/// Only image_id is required. Keys the codec does not know are kept in
/// `extra` and written back unchanged.
struct Record {
  std::string image_id;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<std::vector<BBox>> objects;
  std::optional<std::vector<Point2>> annotations;
  std::optional<std::vector<ScoredPoint>> predictions;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const Record&, const Record&) = default;
};

/// Optional first line: {"header":{"iteration":k,"parts":[...]}}.
struct Header {
  std::optional<int> iteration;
  std::optional<std::vector<semfield::PartSpec>> parts;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const Header&, const Header&) = default;
};

struct RecordFile {
  std::optional<Header> header;
  std::vector<Record> records;

  friend bool operator==(const RecordFile&, const RecordFile&) = default;
};

/// Throws ParseError / SchemaError carrying the 1-based line number.
RecordFile parse_records(std::istream& in);
RecordFile parse_records(const std::string& text);
std::string serialize_records(const RecordFile& file);

RecordFile read_record_file(const std::filesystem::path& path);
/// Writes to a sibling temp file and renames it over `path`.
void write_record_file(const std::filesystem::path& path, const RecordFile& file);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Read and re-serialize check used by `codec_roundtrip`.
RecordFile codec_roundtrip(const std::filesystem::path& path);

/// Scenes from records that carry objects. Object indices follow list order.
/// Throws SchemaError when width or height is missing.
std::vector<Scene> scenes_from_records(const RecordFile& file);
AnnotationSet annotations_from_records(const RecordFile& file);
PredictionSet predictions_from_records(const RecordFile& file);

/// Builds one record per scene (in scene order) with whichever sections are
/// supplied.
RecordFile make_records(std::span<const Scene> scenes, const AnnotationSet* annotations,
                        const PredictionSet* predictions);

/// Replaces or adds the given section in every record of `file`.
void set_annotations(RecordFile& file, const AnnotationSet& annotations);
void set_predictions(RecordFile& file, const PredictionSet& predictions);

}  // namespace coarsepoint::ingest
