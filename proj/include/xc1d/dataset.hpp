#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xc1d/augment.hpp"
#include "xc1d/rng.hpp"
#include "xc1d/tensor.hpp"
#include "xc1d/wav.hpp"

namespace xc1d {

enum class DatasetVersion { kV1, kV2 };

DatasetVersion parse_version(const std::string& text);
const char* to_string(DatasetVersion v);

/// Corpus vocabulary in canonical order: robot commands, digits, auxiliary
/// words; the last five exist only in V2.
const std::vector<std::string>& corpus_words(DatasetVersion v);

/// Label scheme. Class i < target_words.size() is target_words[i]; the
/// unknown bucket, when present, is the last class.
struct TaskSpec {
  std::string name;
  DatasetVersion version = DatasetVersion::kV2;
  std::vector<std::string> target_words;
  bool has_unknown = false;

  std::size_t n_classes() const { return target_words.size() + (has_unknown ? 1 : 0); }
  std::string class_name(std::size_t index) const;
};

/// names: words-all, commands-20, commands-10, left-right.
TaskSpec make_task(const std::string& name, DatasetVersion version);
const std::vector<std::string>& task_names();

/// Throws DataError for words outside the task version's vocabulary.
std::size_t label_of(const std::string& word, const TaskSpec& task);

enum class Split { kTrain, kDev, kTest };
const char* to_string(Split s);
Split parse_split(const std::string& text);

struct ManifestEntry {
  std::string path;  // relative to the corpus root, '/'-separated
  std::string word;
  std::string speaker_id;
  Split split = Split::kTrain;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  DatasetVersion version = DatasetVersion::kV2;
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  std::size_t count(Split s) const;
  std::vector<std::size_t> indices(Split s) const;
};

/// Speaker id of a corpus file name: everything before the first '_'.
std::string speaker_of(const std::string& file_name);

/// Reads word folders plus validation_list.txt / testing_list.txt. Folders
/// whose name starts with '_' are skipped. Entries are sorted by path.
DatasetManifest scan_corpus(const std::filesystem::path& root, DatasetVersion version);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);
DatasetManifest load_manifest(const std::filesystem::path& file);
std::string manifest_to_text(const DatasetManifest& manifest);

/// Counts per split and per word, one "key=value" per line, starting with
/// "total=N".
std::string manifest_summary(const DatasetManifest& manifest);

/// Speakers present in both splits (sorted).
std::vector<std::string> shared_speakers(const DatasetManifest& manifest, Split a, Split b);

/// An indexable labelled collection, either in memory or backed by a
/// manifest split. Manifest-backed sets decode WAVs on access (or once, when
/// preloaded) and synthesise augmented copies deterministically.
class ClipSet {
 public:
  static ClipSet from_clips(std::vector<AudioClip> clips, std::vector<std::size_t> labels);
  static ClipSet from_manifest(const DatasetManifest& manifest, Split split,
                               const TaskSpec& task,
                               std::optional<AugmentConfig> augment = std::nullopt,
                               std::uint64_t augment_seed = 0, bool preload = false);

  std::size_t size() const { return items_.size(); }
  std::size_t label(std::size_t i) const { return items_[i].label; }
  std::uint32_t augmentation(std::size_t i) const { return items_[i].augmentation; }
  std::vector<std::size_t> labels() const;
  AudioClip clip(std::size_t i) const;

 private:
  struct Item {
    std::size_t source = 0;  // index into originals / entries
    std::uint32_t augmentation = 0;
    std::size_t label = 0;
  };

  AudioClip original(std::size_t source) const;

  std::vector<Item> items_;
  std::shared_ptr<const std::vector<AudioClip>> originals_;
  std::shared_ptr<const DatasetManifest> manifest_;
  std::vector<std::size_t> entry_index_;  // source -> manifest entry
  std::optional<AugmentConfig> augment_;
  std::uint64_t augment_seed_ = 0;
};

struct Batch {
  Tensor<float> inputs;  // [B, 1, kClipSamples]
  std::vector<std::size_t> labels;
  std::vector<std::size_t> indices;
};

/// Index batches of at most batch_size; shuffled by rng when given, in
/// order otherwise. The final partial batch is kept.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   Rng* shuffle_rng);

/// Decodes the given items (in parallel) into one batch tensor.
Batch load_batch(const ClipSet& set, std::span<const std::size_t> indices);

/// Sequential reader over one epoch of a ClipSet.
class BatchStream {
 public:
  BatchStream(const ClipSet& set, std::size_t batch_size, Rng* shuffle_rng);
  bool next(Batch& out);
  std::size_t batch_count() const { return order_.size(); }

 private:
  const ClipSet* set_;
  std::vector<std::vector<std::size_t>> order_;
  std::size_t pos_ = 0;
};

/// Train split shuffled by rng; dev/test in manifest order.
BatchStream batches(const ClipSet& set, Split split, std::size_t batch_size, Rng& rng);

}  // namespace xc1d
