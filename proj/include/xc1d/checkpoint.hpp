#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xc1d/dataset.hpp"
#include "xc1d/model.hpp"

namespace xc1d {

inline constexpr char kCheckpointMagic[4] = {'X', 'C', '1', 'D'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Trained weights plus everything needed to rebuild and label the model.
///
/// Layout (little-endian): "XC1D", u32 format version, u32 length + config
/// text, u32 parameter count, then per parameter {u32 name length, name,
/// u32 rank, u64 extents..., f32 values...}, f64 best dev accuracy, u32 epoch.
struct Checkpoint {
  ModelConfig config;
  std::string task = "words-all";
  DatasetVersion version = DatasetVersion::kV2;
  ModelParams<float> params;
  double best_dev_accuracy = 0.0;
  std::uint32_t epoch = 0;

  TaskSpec task_spec() const { return make_task(task, version); }
  /// Model config plus task lines, as stored in the file.
  std::string config_text() const;
};

enum class CheckpointErrorKind { kBadMagic, kVersionMismatch, kTruncated, kMalformed };

const char* to_string(CheckpointErrorKind kind);

class CheckpointError : public DataError {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& detail)
      : DataError(std::string("checkpoint: ") + to_string(kind) + ": " + detail),
        kind_(kind) {}
  CheckpointErrorKind kind() const noexcept { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
/// Parses fully before returning; no partial state on error.
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace xc1d
