#pragma once

#include <chrono>
#include <filesystem>
#include <span>
#include <string>

#include "coarsepoint/refine.hpp"

namespace coarsepoint::ingest {

struct BridgeOptions {
  /// Shell command; the input and output paths are appended as arguments.
  std::string command;
  std::chrono::seconds timeout{3600};
  /// Where exchange files go. Empty means the system temp directory.
  std::filesystem::path work_dir;
};

/// Writes scenes with pseudo boxes around the current annotations, runs
/// `<command> <input> <output>` and reads back per-image predictions.
PredictionSet external_estimate(std::span<const Scene> scenes,
                                const AnnotationSet& annotations,
                                const refine::RefineConfig& cfg, const BridgeOptions& opts);

class ExternalEstimator final : public refine::Estimator {
 public:
  explicit ExternalEstimator(BridgeOptions opts) : opts_(std::move(opts)) {}

  PredictionSet estimate(std::span<const Scene> scenes, const AnnotationSet& annotations,
                         const refine::RefineConfig& cfg) override {
    return external_estimate(scenes, annotations, cfg, opts_);
  }

 private:
  BridgeOptions opts_;
};

}  // namespace coarsepoint::ingest
