#include "xc1d/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "xc1d/parallel.hpp"

namespace xc1d {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kWordsV2 = {
    "left",  "right", "yes",    "no",     "down",  "up",      "go",
    "stop",  "on",    "off",    "zero",   "one",   "two",     "three",
    "four",  "five",  "six",    "seven",  "eight", "nine",    "dog",
    "cat",   "wow",   "house",  "bird",   "happy", "sheila",  "marvin",
    "bed",   "tree",  "visual", "follow", "learn", "forward", "backward"};

const std::vector<std::string> kWordsV1(kWordsV2.begin(), kWordsV2.begin() + 30);

const std::vector<std::string> kTaskNames = {"words-all", "commands-20",
                                             "commands-10", "left-right"};

std::unordered_set<std::string> read_list(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("corpus: missing list file '" + file.string() + "'");
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

DatasetVersion parse_version(const std::string& text) {
  if (text == "V1" || text == "v1" || text == "1") return DatasetVersion::kV1;
  if (text == "V2" || text == "v2" || text == "2") return DatasetVersion::kV2;
  throw ConfigError("unknown dataset version '" + text + "' (expected V1 or V2)");
}

const char* to_string(DatasetVersion v) { return v == DatasetVersion::kV1 ? "V1" : "V2"; }

const std::vector<std::string>& corpus_words(DatasetVersion v) {
  return v == DatasetVersion::kV1 ? kWordsV1 : kWordsV2;
}

const std::vector<std::string>& task_names() { return kTaskNames; }

std::string TaskSpec::class_name(std::size_t index) const {
  if (index < target_words.size()) return target_words[index];
  if (has_unknown && index == target_words.size()) return "unknown";
  throw ConfigError("task " + name + ": class index " + std::to_string(index) +
                    " out of range");
}

TaskSpec make_task(const std::string& name, DatasetVersion version) {
  const auto& words = corpus_words(version);
  TaskSpec t;
  t.name = name;
  t.version = version;
  if (name == "words-all") {
    t.target_words = words;
    t.has_unknown = false;
  } else if (name == "commands-20") {
    t.target_words.assign(words.begin(), words.begin() + 20);
    t.has_unknown = true;
  } else if (name == "commands-10") {
    t.target_words.assign(words.begin(), words.begin() + 10);
    t.has_unknown = true;
  } else if (name == "left-right") {
    t.target_words = {"left", "right"};
    t.has_unknown = true;
  } else {
    throw ConfigError("unknown task '" + name +
                      "' (expected words-all, commands-20, commands-10 or left-right)");
  }
  return t;
}

std::size_t label_of(const std::string& word, const TaskSpec& task) {
  const auto& vocab = corpus_words(task.version);
  if (std::find(vocab.begin(), vocab.end(), word) == vocab.end()) {
    throw DataError("word '" + word + "' is not in the " + to_string(task.version) +
                    " vocabulary");
  }
  const auto it = std::find(task.target_words.begin(), task.target_words.end(), word);
  if (it != task.target_words.end()) {
    return static_cast<std::size_t>(it - task.target_words.begin());
  }
  // Only reachable for tasks with an unknown bucket: words-all covers the vocabulary.
  return task.target_words.size();
}

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "dev") return Split::kDev;
  if (text == "test") return Split::kTest;
  throw ConfigError("unknown split '" + text + "' (expected train, dev or test)");
}

std::size_t DatasetManifest::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [s](const auto& e) { return e.split == s; }));
}

std::vector<std::size_t> DatasetManifest::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].split == s) out.push_back(i);
  }
  return out;
}

std::string speaker_of(const std::string& file_name) {
  return file_name.substr(0, file_name.find('_'));
}

DatasetManifest scan_corpus(const fs::path& root, DatasetVersion version) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw DataError("corpus: '" + root.string() + "' is not a directory");
  }
  const auto dev_list = read_list(root / "validation_list.txt");
  const auto test_list = read_list(root / "testing_list.txt");
  const auto& vocab = corpus_words(version);

  DatasetManifest m;
  m.version = version;
  m.root = fs::absolute(root).lexically_normal();
  std::vector<fs::path> folders;
  for (const auto& d : fs::directory_iterator(root)) {
    if (!d.is_directory()) continue;
    const std::string name = d.path().filename().string();
    if (name.empty() || name[0] == '_' || name[0] == '.') continue;
    if (std::find(vocab.begin(), vocab.end(), name) == vocab.end()) {
      throw DataError("corpus: unknown word folder '" + name + "' for " +
                      to_string(version));
    }
    folders.push_back(d.path());
  }
  std::sort(folders.begin(), folders.end());
  for (const auto& folder : folders) {
    const std::string word = folder.filename().string();
    std::vector<std::string> files;
    for (const auto& f : fs::directory_iterator(folder)) {
      if (f.is_regular_file() && f.path().extension() == ".wav") {
        files.push_back(f.path().filename().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const std::string rel = word + "/" + file;
      std::ifstream probe(folder / file, std::ios::binary);
      if (!probe) throw DataError("corpus: unreadable file '" + rel + "'");
      ManifestEntry e;
      e.path = rel;
      e.word = word;
      e.speaker_id = speaker_of(file);
      e.split = test_list.count(rel) ? Split::kTest
                : dev_list.count(rel) ? Split::kDev
                                      : Split::kTrain;
      m.entries.push_back(std::move(e));
    }
  }
  return m;
}

std::string manifest_to_text(const DatasetManifest& m) {
  std::ostringstream os;
  os << "#xc1d-manifest\t1\n";
  os << "#version\t" << to_string(m.version) << '\n';
  os << "#root\t" << m.root.string() << '\n';
  for (const auto& e : m.entries) {
    os << e.path << '\t' << e.word << '\t' << e.speaker_id << '\t' << to_string(e.split)
       << '\n';
  }
  return os.str();
}

void save_manifest(const DatasetManifest& m, const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("manifest: cannot create '" + file.string() + "'");
  out << manifest_to_text(m);
  if (!out) throw DataError("manifest: write error on '" + file.string() + "'");
}

DatasetManifest load_manifest(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("manifest: cannot open '" + file.string() + "'");
  DatasetManifest m;
  std::string line;
  std::size_t line_no = 0;
  bool have_magic = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (line[0] == '#') {
      if (fields[0] == "#xc1d-manifest") {
        have_magic = true;
      } else if (fields[0] == "#version" && fields.size() == 2) {
        m.version = parse_version(fields[1]);
      } else if (fields[0] == "#root" && fields.size() == 2) {
        m.root = fields[1];
      }
      continue;
    }
    if (fields.size() != 4) {
      throw DataError("manifest: " + file.string() + ":" + std::to_string(line_no) +
                      ": expected 4 tab-separated fields");
    }
    ManifestEntry e{fields[0], fields[1], fields[2], Split::kTrain};
    try {
      e.split = parse_split(fields[3]);
    } catch (const ConfigError& err) {
      throw DataError("manifest: " + file.string() + ":" + std::to_string(line_no) +
                      ": " + err.what());
    }
    m.entries.push_back(std::move(e));
  }
  if (!have_magic) throw DataError("manifest: '" + file.string() + "' has no header");
  return m;
}

std::string manifest_summary(const DatasetManifest& m) {
  std::ostringstream os;
  os << "total=" << m.entries.size() << '\n';
  os << "version=" << to_string(m.version) << '\n';
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    os << to_string(s) << '=' << m.count(s) << '\n';
  }
  std::map<std::string, std::size_t> per_word;
  for (const auto& e : m.entries) ++per_word[e.word];
  for (const auto& w : corpus_words(m.version)) {
    const auto it = per_word.find(w);
    os << "word." << w << '=' << (it == per_word.end() ? 0 : it->second) << '\n';
  }
  return os.str();
}

std::vector<std::string> shared_speakers(const DatasetManifest& m, Split a, Split b) {
  std::set<std::string> in_a, in_b;
  for (const auto& e : m.entries) {
    if (e.split == a) in_a.insert(e.speaker_id);
    if (e.split == b) in_b.insert(e.speaker_id);
  }
  std::vector<std::string> out;
  std::set_intersection(in_a.begin(), in_a.end(), in_b.begin(), in_b.end(),
                        std::back_inserter(out));
  return out;
}

ClipSet ClipSet::from_clips(std::vector<AudioClip> clips, std::vector<std::size_t> labels) {
  if (clips.size() != labels.size()) {
    throw ConfigError("ClipSet: " + std::to_string(clips.size()) + " clips but " +
                      std::to_string(labels.size()) + " labels");
  }
  ClipSet s;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    s.items_.push_back({i, clips[i].augmentation, labels[i]});
  }
  s.originals_ = std::make_shared<const std::vector<AudioClip>>(std::move(clips));
  return s;
}

ClipSet ClipSet::from_manifest(const DatasetManifest& manifest, Split split,
                               const TaskSpec& task, std::optional<AugmentConfig> augment,
                               std::uint64_t augment_seed, bool preload) {
  if (augment && split != Split::kTrain) {
    throw ConfigError("augmentation may only be applied to the train split");
  }
  if (augment) augment->validate();
  ClipSet s;
  s.manifest_ = std::make_shared<const DatasetManifest>(manifest);
  s.entry_index_ = manifest.indices(split);
  s.augment_ = augment;
  s.augment_seed_ = augment_seed;
  std::vector<std::size_t> labels;
  for (auto idx : s.entry_index_) labels.push_back(label_of(manifest.entries[idx].word, task));
  const std::uint32_t copies = augment ? augment->copies : 0;
  for (std::size_t i = 0; i < s.entry_index_.size(); ++i) s.items_.push_back({i, 0, labels[i]});
  for (std::size_t i = 0; i < s.entry_index_.size(); ++i) {
    for (std::uint32_t c = 1; c <= copies; ++c) s.items_.push_back({i, c, labels[i]});
  }
  if (preload) {
    std::vector<AudioClip> clips(s.entry_index_.size());
    parallel_for(clips.size(), [&](std::size_t i) { clips[i] = s.original(i); });
    s.originals_ = std::make_shared<const std::vector<AudioClip>>(std::move(clips));
  }
  return s;
}

std::vector<std::size_t> ClipSet::labels() const {
  std::vector<std::size_t> out;
  out.reserve(items_.size());
  for (const auto& it : items_) out.push_back(it.label);
  return out;
}

AudioClip ClipSet::original(std::size_t source) const {
  if (originals_) return (*originals_)[source];
  const auto& e = manifest_->entries[entry_index_[source]];
  return load_clip(manifest_->root / e.path, e.word, e.speaker_id, e.path);
}

AudioClip ClipSet::clip(std::size_t i) const {
  const Item& it = items_.at(i);
  if (it.augmentation == 0 || !augment_) return original(it.source);
  return augment_clip(original(it.source), *augment_, augment_seed_, it.augmentation);
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   Rng* shuffle_rng) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle_rng) shuffle(order.begin(), order.end(), *shuffle_rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + start, order.begin() + end);
  }
  return out;
}

Batch load_batch(const ClipSet& set, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ConfigError("load_batch: empty batch");
  const std::size_t b = indices.size();
  std::vector<float> data(b * kClipSamples);
  parallel_for(b, [&](std::size_t k) {
    const auto clip = set.clip(indices[k]);
    if (clip.samples.size() != kClipSamples) {
      throw DataError("load_batch: clip '" + clip.source_path + "' has " +
                      std::to_string(clip.samples.size()) + " samples, expected " +
                      std::to_string(kClipSamples));
    }
    std::copy(clip.samples.begin(), clip.samples.end(), data.begin() + k * kClipSamples);
  });
  Batch out;
  out.inputs = Tensor<float>({b, 1, kClipSamples}, std::move(data));
  out.indices.assign(indices.begin(), indices.end());
  for (auto i : indices) out.labels.push_back(set.label(i));
  return out;
}

BatchStream::BatchStream(const ClipSet& set, std::size_t batch_size, Rng* shuffle_rng)
    : set_(&set), order_(make_batches(set.size(), batch_size, shuffle_rng)) {}

bool BatchStream::next(Batch& out) {
  if (pos_ >= order_.size()) return false;
  out = load_batch(*set_, order_[pos_++]);
  return true;
}

BatchStream batches(const ClipSet& set, Split split, std::size_t batch_size, Rng& rng) {
  return BatchStream(set, batch_size, split == Split::kTrain ? &rng : nullptr);
}

}  // namespace xc1d
