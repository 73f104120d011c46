#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xc1d/augment.hpp"
#include "xc1d/checkpoint.hpp"
#include "xc1d/dataset.hpp"
#include "xc1d/metrics.hpp"
#include "xc1d/model.hpp"
#include "xc1d/stats.hpp"

namespace xc1d {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
  double lr = 0.0;  // rate used during this epoch
  std::optional<double> train_accuracy;
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double lr = 1e-4;
  double weight_decay = 1e-3;
  double dropout = 0.75;
  std::size_t patience = 4;
  double lr_factor = 0.5;
  std::string task = "words-all";
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};  // multi_seed only
  std::optional<AugmentConfig> augment = AugmentConfig{};
  std::uint64_t augment_seed = 0;
  /// Also measure eval-mode accuracy on the training set after each epoch.
  bool eval_train = false;
  /// Called after every epoch; returning false ends training early.
  std::function<bool(const EpochRecord&)> on_epoch;

  void validate() const;
  std::string to_text() const;
};

struct RunMetrics {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_dev_accuracy = 0.0;
  std::optional<EvalMetrics> test;  // absent when the test split is empty
};

struct TrainResult {
  Checkpoint checkpoint;
  RunMetrics metrics;
};

/// Labelled splits for one run. dev and test must hold originals only.
struct TrainData {
  ClipSet train;
  ClipSet dev;
  ClipSet test;
};

/// Builds the three splits of a manifest; augmentation touches train only.
TrainData load_splits(const DatasetManifest& manifest, const TaskSpec& task,
                      const TrainConfig& config);

/// model.n_classes and model.dropout are taken from the task and config.
ModelConfig resolve_model(const ModelConfig& model, const TrainConfig& config,
                          const TaskSpec& task);

TrainResult train(const ModelConfig& model, const TrainConfig& config, const TaskSpec& task,
                  const TrainData& data);
TrainResult train(const ModelConfig& model, const TrainConfig& config,
                  const DatasetManifest& manifest);

/// Argmax predictions (ties to the lower class index) in batches.
EvalMetrics evaluate(const ModelParams<float>& params, const ModelConfig& config,
                     const ClipSet& set, const TaskSpec& task, std::size_t batch_size = 32);
EvalMetrics evaluate(const Checkpoint& checkpoint, const ClipSet& set, const TaskSpec& task,
                     std::size_t batch_size = 32);
EvalMetrics evaluate(const Checkpoint& checkpoint, const DatasetManifest& manifest, Split split,
                     const TaskSpec& task, std::size_t batch_size = 32);

/// Structured text, one fact per line; stable byte-for-byte for a given run.
std::string format_run_metrics(const RunMetrics& metrics);

struct SeedRun {
  std::uint64_t seed = 0;
  double test_accuracy = 0.0;
  double best_dev_accuracy = 0.0;
  std::size_t best_epoch = 0;
};

struct MultiSeedResult {
  std::vector<SeedRun> runs;
  MeanStd test_accuracy;
};

/// One training run per seed in config.seeds. Each run writes
/// seed-<s>/checkpoint.xc1d and seed-<s>/metrics.txt under out_dir; the
/// aggregate goes to out_dir/summary.txt.
MultiSeedResult multi_seed(const ModelConfig& model, const TrainConfig& config,
                           const DatasetManifest& manifest,
                           const std::filesystem::path& out_dir);

std::string format_multi_seed(const MultiSeedResult& result);

/// Writes checkpoint.xc1d, metrics.txt and per_class.tsv into dir.
void write_run(const TrainResult& result, const std::filesystem::path& dir);

}  // namespace xc1d
