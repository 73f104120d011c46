#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/toy.hpp"
#include "xc1d/harness.hpp"
#include "xc1d/optim.hpp"

using namespace xc1d;
namespace fs = std::filesystem;

namespace {

// Tones labelled 0/1 under left-right (the unknown class stays empty).
TrainData tone_data() {
  return {toy::sine_pair_set(6, 1), toy::sine_pair_set(3, 2), toy::sine_pair_set(3, 3)};
}

TrainConfig quick_config(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 4;
  c.lr = 3e-3;
  c.dropout = 0.0;
  c.task = "left-right";
  c.augment.reset();
  return c;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(TrainConfig, Validation) {
  EXPECT_NO_THROW(TrainConfig{}.validate());
  auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  bad([](TrainConfig& c) { c.epochs = 0; });
  bad([](TrainConfig& c) { c.batch_size = 0; });
  bad([](TrainConfig& c) { c.lr = 0; });
  bad([](TrainConfig& c) { c.dropout = 1.0; });
  bad([](TrainConfig& c) { c.lr_factor = 1.5; });
  bad([](TrainConfig& c) { c.weight_decay = -1; });
  bad([](TrainConfig& c) { c.task = "nope"; });
  const auto text = TrainConfig{}.to_text();
  EXPECT_NE(text.find("epochs=50"), std::string::npos) << text;
  EXPECT_NE(text.find("batch_size=32"), std::string::npos) << text;
}

TEST(Harness, ResolveModelTakesTaskAndDropout) {
  TrainConfig c;
  c.dropout = 0.25;
  const auto m = resolve_model(ModelConfig{}, c, make_task("commands-10", DatasetVersion::kV2));
  EXPECT_EQ(m.n_classes, 11u);
  EXPECT_EQ(m.dropout, 0.25);
}

TEST(Harness, DeterministicRun) {
  const auto data = tone_data();
  const auto task = make_task("left-right", DatasetVersion::kV2);
  const auto cfg = quick_config(2);
  const auto a = train(toy::toy_config(3), cfg, task, data);
  const auto b = train(toy::toy_config(3), cfg, task, data);
  EXPECT_EQ(serialize_checkpoint(a.checkpoint), serialize_checkpoint(b.checkpoint));
  EXPECT_EQ(format_run_metrics(a.metrics), format_run_metrics(b.metrics));
  auto other = cfg;
  other.seed = 1;
  EXPECT_NE(serialize_checkpoint(train(toy::toy_config(3), other, task, data).checkpoint),
            serialize_checkpoint(a.checkpoint));
}

TEST(Harness, BestDevAndSchedulerSemantics) {
  const auto data = tone_data();
  const auto task = make_task("left-right", DatasetVersion::kV2);
  auto cfg = quick_config(6);
  cfg.patience = 1;
  const auto r = train(toy::toy_config(3), cfg, task, data);
  const auto& ep = r.metrics.epochs;
  ASSERT_EQ(ep.size(), 6u);

  std::size_t best = 1;
  for (std::size_t i = 0; i < ep.size(); ++i) {
    EXPECT_EQ(ep[i].epoch, i + 1);
    if (ep[i].dev_accuracy > ep[best - 1].dev_accuracy) best = i + 1;
  }
  EXPECT_EQ(r.metrics.best_epoch, best);
  EXPECT_EQ(r.metrics.best_dev_accuracy, ep[best - 1].dev_accuracy);
  EXPECT_EQ(r.checkpoint.epoch, best);

  // Replaying the dev sequence through the scheduler reproduces the lr column.
  PlateauSchedule s{cfg.lr, cfg.lr_factor, cfg.patience};
  for (const auto& e : ep) {
    EXPECT_EQ(e.lr, s.lr);
    plateau_update(s, e.dev_accuracy);
  }

  // The stored weights are those of the best epoch.
  const auto dev = evaluate(r.checkpoint, data.dev, task);
  EXPECT_EQ(dev.accuracy, r.metrics.best_dev_accuracy);
  ASSERT_TRUE(r.metrics.test.has_value());
  EXPECT_EQ(r.metrics.test->confusion, evaluate(r.checkpoint, data.test, task).confusion);
  EXPECT_EQ(r.metrics.test->confusion.total(), data.test.size());
}

TEST(Harness, EarlyStopCallback) {
  const auto data = tone_data();
  auto cfg = quick_config(10);
  std::size_t calls = 0;
  cfg.on_epoch = [&](const EpochRecord& e) {
    ++calls;
    return e.epoch < 2;
  };
  const auto r = train(toy::toy_config(3), cfg, make_task("left-right", DatasetVersion::kV2), data);
  EXPECT_EQ(calls, 2u);
  EXPECT_EQ(r.metrics.epochs.size(), 2u);
}

TEST(Harness, NonFiniteLossIsNumericError) {
  auto cfg = quick_config(3);
  cfg.lr = 1e30;
  try {
    train(toy::toy_config(3), cfg, make_task("left-right", DatasetVersion::kV2), tone_data());
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos) << e.what();
  }
}

TEST(Harness, RejectsAugmentedEvaluationData) {
  auto data = tone_data();
  std::vector<AudioClip> clips;
  for (std::size_t i = 0; i < data.dev.size(); ++i) {
    clips.push_back(data.dev.clip(i));
    clips.back().augmentation = 1;
  }
  data.dev = ClipSet::from_clips(clips, data.dev.labels());
  EXPECT_THROW(
      train(toy::toy_config(3), quick_config(1), make_task("left-right", DatasetVersion::kV2), data),
      Error);
}

TEST(Harness, EvaluateChecksClassCount) {
  const auto data = tone_data();
  const auto p = build_model<float>(toy::toy_config(2), 0);
  EXPECT_THROW(evaluate(p, toy::toy_config(2), data.test, make_task("left-right", DatasetVersion::kV2)),
               ConfigError);
}

TEST(Harness, ToyCorpusEndToEnd) {
  toy::TempDir dir("e2e");
  toy::write_toy_corpus(dir.path() / "corpus");
  const auto m = scan_corpus(dir.path() / "corpus", DatasetVersion::kV2);
  auto cfg = quick_config(2);
  cfg.task = "commands-10";
  cfg.augment = AugmentConfig{};
  cfg.augment->copies = 1;
  const auto r = train(toy::toy_config(1), cfg, m);
  EXPECT_EQ(r.checkpoint.config.n_classes, 11u);
  ASSERT_TRUE(r.metrics.test);
  const auto& cm = r.metrics.test->confusion;
  EXPECT_EQ(cm.total(), m.count(Split::kTest));
  EXPECT_DOUBLE_EQ(r.metrics.test->accuracy,
                   static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));
  const auto task = make_task("commands-10", m.version);
  std::vector<std::uint64_t> per_class(task.n_classes(), 0);
  for (const auto& e : m.entries)
    if (e.split == Split::kTest) ++per_class[label_of(e.word, task)];
  for (std::size_t k = 0; k < task.n_classes(); ++k) EXPECT_EQ(cm.row_sum(k), per_class[k]);

  write_run(r, dir.path() / "run");
  EXPECT_TRUE(fs::exists(dir.path() / "run" / "checkpoint.xc1d"));
  EXPECT_TRUE(fs::exists(dir.path() / "run" / "per_class.tsv"));
  EXPECT_EQ(slurp(dir.path() / "run" / "metrics.txt"), format_run_metrics(r.metrics));
  const auto back = load_checkpoint(dir.path() / "run" / "checkpoint.xc1d");
  EXPECT_EQ(evaluate(back, m, Split::kTest, task).confusion, cm);
}

TEST(Harness, MultiSeedSummaryMatchesPerSeedFiles) {
  toy::TempDir dir("multi");
  toy::write_toy_corpus(dir.path() / "corpus");
  const auto m = scan_corpus(dir.path() / "corpus", DatasetVersion::kV2);
  auto cfg = quick_config(1);
  cfg.task = "left-right";
  cfg.seeds = {3, 4};
  const auto r = multi_seed(toy::toy_config(3), cfg, m, dir.path() / "out");
  ASSERT_EQ(r.runs.size(), 2u);
  std::vector<double> accs;
  for (const auto& run : r.runs) {
    const auto text = slurp(dir.path() / "out" / ("seed-" + std::to_string(run.seed)) / "metrics.txt");
    const auto pos = text.find("test.accuracy=");
    ASSERT_NE(pos, std::string::npos);
    accs.push_back(std::stod(text.substr(pos + 14)));
  }
  const auto ms = mean_std(accs);
  EXPECT_NEAR(r.test_accuracy.mean, ms.mean, 1e-9);
  EXPECT_NEAR(r.test_accuracy.std, ms.std, 1e-9);
  EXPECT_EQ(slurp(dir.path() / "out" / "summary.txt"), format_multi_seed(r));

  cfg.seeds = {1};
  EXPECT_THROW(multi_seed(toy::toy_config(3), cfg, m, dir.path() / "out1"), ConfigError);
}
