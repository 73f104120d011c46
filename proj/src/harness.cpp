#include "xc1d/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xc1d/layers.hpp"
#include "xc1d/optim.hpp"

namespace xc1d {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kDropoutStream = 0x4452;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

ModelParams<float> frozen(const ModelParams<float>& params) {
  ModelParams<float> out;
  for (const auto& p : params) out.add(p.name, p.value.detach());
  return out;
}

std::vector<std::string> class_names(const TaskSpec& task) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < task.n_classes(); ++c) names.push_back(task.class_name(c));
  return names;
}

void require_originals(const ClipSet& set, const char* which) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.augmentation(i) != 0) {
      throw ConfigError(std::string("train: augmented clip in the ") + which + " split");
    }
  }
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create '" + file.string() + "'");
  out << text;
  if (!out) throw DataError("write error on '" + file.string() + "'");
}

}  // namespace

void TrainConfig::validate() const {
  std::vector<std::string> bad;
  if (epochs == 0) bad.push_back("epochs must be positive");
  if (batch_size == 0) bad.push_back("batch_size must be positive");
  if (!(lr > 0) || !std::isfinite(lr)) bad.push_back("lr must be positive");
  if (!(weight_decay >= 0) || !std::isfinite(weight_decay)) {
    bad.push_back("weight_decay must be >= 0");
  }
  if (!(dropout >= 0 && dropout < 1)) bad.push_back("dropout must be in [0, 1)");
  if (patience == 0) bad.push_back("patience must be positive");
  if (!(lr_factor > 0 && lr_factor < 1)) bad.push_back("lr_factor must be in (0, 1)");
  const auto& names = task_names();
  if (std::find(names.begin(), names.end(), task) == names.end()) {
    bad.push_back("unknown task '" + task + "'");
  }
  if (augment) {
    try {
      augment->validate();
    } catch (const ConfigError& e) {
      bad.push_back(e.what());
    }
  }
  if (!bad.empty()) {
    std::string msg = "invalid train config:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw ConfigError(msg);
  }
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << "epochs=" << epochs << '\n'
     << "batch_size=" << batch_size << '\n'
     << "lr=" << fmt(lr) << '\n'
     << "weight_decay=" << fmt(weight_decay) << '\n'
     << "dropout=" << fmt(dropout) << '\n'
     << "patience=" << patience << '\n'
     << "lr_factor=" << fmt(lr_factor) << '\n'
     << "task=" << task << '\n'
     << "seed=" << seed << '\n';
  os << "seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
  os << '\n';
  if (augment) {
    os << "augment=on\n"
       << "augment.copies=" << augment->copies << '\n'
       << "augment.resample=" << fmt(augment->resample_min) << ':' << fmt(augment->resample_max)
       << '\n'
       << "augment.gain=" << fmt(augment->gain_min) << ':' << fmt(augment->gain_max) << '\n'
       << "augment.offset=" << augment->offset_min << ':' << augment->offset_max << '\n'
       << "augment.noise_sigma=" << fmt(augment->noise_sigma_min) << ':'
       << fmt(augment->noise_sigma_max) << '\n'
       << "augment.pitch=" << fmt(augment->pitch_min) << ':' << fmt(augment->pitch_max) << '\n'
       << "augment.seed=" << augment_seed << '\n';
  } else {
    os << "augment=off\n";
  }
  return os.str();
}

TrainData load_splits(const DatasetManifest& manifest, const TaskSpec& task,
                      const TrainConfig& config) {
  if (manifest.count(Split::kTrain) == 0) throw DataError("train: the train split is empty");
  if (manifest.count(Split::kDev) == 0) throw DataError("train: the dev split is empty");
  return TrainData{
      ClipSet::from_manifest(manifest, Split::kTrain, task, config.augment, config.augment_seed),
      ClipSet::from_manifest(manifest, Split::kDev, task),
      ClipSet::from_manifest(manifest, Split::kTest, task)};
}

ModelConfig resolve_model(const ModelConfig& model, const TrainConfig& config,
                          const TaskSpec& task) {
  ModelConfig out = model;
  out.n_classes = task.n_classes();
  out.dropout = config.dropout;
  out.validate();
  return out;
}

EvalMetrics evaluate(const ModelParams<float>& params, const ModelConfig& config,
                     const ClipSet& set, const TaskSpec& task, std::size_t batch_size) {
  if (config.n_classes != task.n_classes()) {
    throw ConfigError("evaluate: model has " + std::to_string(config.n_classes) +
                      " classes, task " + task.name + " has " +
                      std::to_string(task.n_classes()));
  }
  if (batch_size == 0) throw ConfigError("evaluate: batch_size must be positive");
  const auto weights = frozen(params);
  ConfusionMatrix cm(config.n_classes);
  Rng unused(0);
  for (const auto& idx : make_batches(set.size(), batch_size, nullptr)) {
    const Batch batch = load_batch(set, idx);
    const auto logits = forward(weights, config, batch.inputs, Mode::kEval, unused);
    const auto data = logits.data();
    const std::size_t k = config.n_classes;
    for (std::size_t b = 0; b < batch.labels.size(); ++b) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c) {
        if (data[b * k + c] > data[b * k + best]) best = c;
      }
      cm.add(batch.labels[b], best);
    }
  }
  return summarize(cm, class_names(task));
}

EvalMetrics evaluate(const Checkpoint& ck, const ClipSet& set, const TaskSpec& task,
                     std::size_t batch_size) {
  return evaluate(ck.params, ck.config, set, task, batch_size);
}

EvalMetrics evaluate(const Checkpoint& ck, const DatasetManifest& manifest, Split split,
                     const TaskSpec& task, std::size_t batch_size) {
  return evaluate(ck, ClipSet::from_manifest(manifest, split, task), task, batch_size);
}

TrainResult train(const ModelConfig& model_in, const TrainConfig& config, const TaskSpec& task,
                  const TrainData& data) {
  config.validate();
  const ModelConfig model = resolve_model(model_in, config, task);
  if (data.train.size() == 0) throw DataError("train: the train split is empty");
  if (data.dev.size() == 0) throw DataError("train: the dev split is empty");
  require_originals(data.dev, "dev");
  require_originals(data.test, "test");

  auto params = build_model<float>(model, config.seed);
  auto state = AdamState<float>::init(params, config.lr, config.weight_decay);
  PlateauSchedule schedule;
  schedule.lr = config.lr;
  schedule.factor = config.lr_factor;
  schedule.patience = config.patience;
  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  Rng dropout_rng(derive_seed(config.seed, kDropoutStream));

  TrainResult result;
  ModelParams<float> best = frozen(params);
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = state.lr;
    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::size_t batch_no = 0;
    BatchStream stream(data.train, config.batch_size, &shuffle_rng);
    Batch batch;
    while (stream.next(batch)) {
      ++batch_no;
      params.zero_grad();
      const auto logits = forward(params, model, batch.inputs, Mode::kTrain, dropout_rng);
      const auto loss = layers::softmax_cross_entropy(logits, batch.labels);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_no));
      }
      loss.backward();
      try {
        adam_step(params, state);
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no) + ": " + e.what());
      }
      loss_sum += value * static_cast<double>(batch.labels.size());
      seen += batch.labels.size();
    }
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.dev_accuracy = evaluate(params, model, data.dev, task, config.batch_size).accuracy;
    if (config.eval_train) {
      rec.train_accuracy = evaluate(params, model, data.train, task, config.batch_size).accuracy;
    }
    if (!have_best || rec.dev_accuracy > result.metrics.best_dev_accuracy) {
      have_best = true;
      result.metrics.best_dev_accuracy = rec.dev_accuracy;
      result.metrics.best_epoch = epoch;
      best = frozen(params);
    }
    state.lr = plateau_update(schedule, rec.dev_accuracy);
    result.metrics.epochs.push_back(rec);
    if (config.on_epoch && !config.on_epoch(rec)) break;
  }

  if (data.test.size() > 0) {
    result.metrics.test = evaluate(best, model, data.test, task, config.batch_size);
  }
  Checkpoint& ck = result.checkpoint;
  ck.config = model;
  ck.task = task.name;
  ck.version = task.version;
  for (const auto& p : best) ck.params.add(p.name, p.value.clone());
  ck.best_dev_accuracy = result.metrics.best_dev_accuracy;
  ck.epoch = static_cast<std::uint32_t>(result.metrics.best_epoch);
  return result;
}

TrainResult train(const ModelConfig& model, const TrainConfig& config,
                  const DatasetManifest& manifest) {
  config.validate();
  const TaskSpec task = make_task(config.task, manifest.version);
  return train(model, config, task, load_splits(manifest, task, config));
}

std::string format_run_metrics(const RunMetrics& m) {
  std::ostringstream os;
  os << "#xc1d-metrics\t1\n";
  for (const auto& e : m.epochs) {
    os << "epoch\t" << e.epoch << "\ttrain_loss=" << fmt(e.train_loss)
       << "\tdev_accuracy=" << fmt(e.dev_accuracy) << "\tlr=" << fmt(e.lr);
    if (e.train_accuracy) os << "\ttrain_accuracy=" << fmt(*e.train_accuracy);
    os << '\n';
  }
  os << "best_epoch=" << m.best_epoch << '\n';
  os << "best_dev_accuracy=" << fmt(m.best_dev_accuracy) << '\n';
  if (m.test) {
    os << format_eval(*m.test, "test.");
  } else {
    os << "test=none\n";
  }
  return os.str();
}

void write_run(const TrainResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());
  save_checkpoint(result.checkpoint, dir / "checkpoint.xc1d");
  write_text(dir / "metrics.txt", format_run_metrics(result.metrics));
  if (result.metrics.test) write_text(dir / "per_class.tsv", per_class_tsv(*result.metrics.test));
}

std::string format_multi_seed(const MultiSeedResult& r) {
  std::ostringstream os;
  os << "#xc1d-multi-seed\t1\n";
  for (const auto& run : r.runs) {
    os << "seed\t" << run.seed << "\ttest_accuracy=" << fmt(run.test_accuracy)
       << "\tbest_dev_accuracy=" << fmt(run.best_dev_accuracy)
       << "\tbest_epoch=" << run.best_epoch << '\n';
  }
  os << "mean=" << fmt(r.test_accuracy.mean) << '\n';
  os << "std=" << fmt(r.test_accuracy.std) << '\n';
  os << "mean_std_percent=" << format_percent(r.test_accuracy) << '\n';
  return os.str();
}

MultiSeedResult multi_seed(const ModelConfig& model, const TrainConfig& config,
                           const DatasetManifest& manifest, const fs::path& out_dir) {
  config.validate();
  if (config.seeds.size() < 2) throw ConfigError("multi_seed: need at least two seeds");
  if (manifest.count(Split::kTest) == 0) throw DataError("multi_seed: the test split is empty");
  const TaskSpec task = make_task(config.task, manifest.version);
  const TrainData data = load_splits(manifest, task, config);
  MultiSeedResult out;
  std::vector<double> accs;
  for (auto seed : config.seeds) {
    TrainConfig run_cfg = config;
    run_cfg.seed = seed;
    const auto result = train(model, run_cfg, task, data);
    write_run(result, out_dir / ("seed-" + std::to_string(seed)));
    SeedRun run;
    run.seed = seed;
    run.test_accuracy = result.metrics.test->accuracy;
    run.best_dev_accuracy = result.metrics.best_dev_accuracy;
    run.best_epoch = result.metrics.best_epoch;
    out.runs.push_back(run);
    accs.push_back(run.test_accuracy);
  }
  out.test_accuracy = mean_std(accs);
  write_text(out_dir / "summary.txt", format_multi_seed(out));
  return out;
}

}  // namespace xc1d
