#include "xc1d/xc1d.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "xc1d/augment.hpp"
#include "xc1d/checkpoint.hpp"
#include "xc1d/dataset.hpp"
#include "xc1d/harness.hpp"
#include "xc1d/layers.hpp"
#include "xc1d/parallel.hpp"
#include "xc1d/stats.hpp"

struct xc1d_manifest {
  xc1d::DatasetManifest value;
};

struct xc1d_checkpoint {
  xc1d::Checkpoint value;
  std::vector<std::string> names;
};

namespace {

namespace fs = std::filesystem;

thread_local std::string g_last_error;

template <typename F>
xc1d_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return XC1D_OK;
  } catch (const xc1d::Error& e) {
    g_last_error = e.what();
    return static_cast<xc1d_status>(e.category());
  } catch (const fs::filesystem_error& e) {
    g_last_error = e.what();
    return XC1D_ERR_DATA;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return XC1D_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return XC1D_ERR_CONFIG;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw xc1d::ConfigError(std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

xc1d::TrainConfig to_train_config(const xc1d_train_options& o) {
  xc1d::TrainConfig c;
  c.epochs = o.epochs;
  c.batch_size = o.batch_size;
  c.lr = o.lr;
  c.weight_decay = o.weight_decay;
  c.dropout = o.dropout;
  c.patience = o.patience;
  c.lr_factor = o.lr_factor;
  if (o.task) c.task = o.task;
  c.seed = o.seed;
  if (o.seeds) c.seeds.assign(o.seeds, o.seeds + o.n_seeds);
  if (o.augment) {
    c.augment = xc1d::AugmentConfig{};
    c.augment->copies = o.augment_copies;
  } else {
    c.augment.reset();
  }
  c.augment_seed = o.augment_seed;
  return c;
}

xc1d::ModelConfig to_model_config(const xc1d_train_options& o) {
  if (!o.model_overrides) return xc1d::ModelConfig{};
  return xc1d::ModelConfig::parse(o.model_overrides);
}

}  // namespace

extern "C" {

const char* xc1d_version(void) { return "0.1.0"; }

const char* xc1d_last_error(void) { return g_last_error.c_str(); }

void xc1d_string_free(char* s) { std::free(s); }

xc1d_status xc1d_set_threads(unsigned n) {
  return guarded([&] { xc1d::set_thread_count(n); });
}

xc1d_status xc1d_manifest_scan(const char* root, const char* version, xc1d_manifest** out) {
  return guarded([&] {
    require(root, "root");
    require(out, "out");
    const auto v = xc1d::parse_version(version ? version : "V2");
    *out = new xc1d_manifest{xc1d::scan_corpus(root, v)};
  });
}

xc1d_status xc1d_manifest_load(const char* path, xc1d_manifest** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new xc1d_manifest{xc1d::load_manifest(path)};
  });
}

xc1d_status xc1d_manifest_save(const xc1d_manifest* m, const char* path) {
  return guarded([&] {
    require(m, "manifest");
    require(path, "path");
    xc1d::save_manifest(m->value, path);
  });
}

xc1d_status xc1d_manifest_summary(const xc1d_manifest* m, char** out) {
  return guarded([&] {
    require(m, "manifest");
    put(out, xc1d::manifest_summary(m->value));
  });
}

void xc1d_manifest_free(xc1d_manifest* m) { delete m; }

xc1d_status xc1d_augment_manifest(const xc1d_manifest* m, const char* out_dir, unsigned copies,
                                  uint64_t seed, xc1d_manifest** out) {
  return guarded([&] {
    require(m, "manifest");
    require(out_dir, "out_dir");
    xc1d::AugmentConfig cfg;
    cfg.copies = copies;
    cfg.validate();
    const auto& src = m->value;
    const fs::path root = fs::absolute(out_dir).lexically_normal();
    const auto task = xc1d::make_task("words-all", src.version);

    xc1d::DatasetManifest result;
    result.version = src.version;
    result.root = root;
    for (auto split : {xc1d::Split::kTrain, xc1d::Split::kDev, xc1d::Split::kTest}) {
      const auto set = xc1d::ClipSet::from_manifest(
          src, split, task,
          split == xc1d::Split::kTrain ? std::optional<xc1d::AugmentConfig>(cfg) : std::nullopt,
          seed);
      const auto entries = src.indices(split);
      std::vector<xc1d::ManifestEntry> made(set.size());
      xc1d::parallel_for(set.size(), [&](std::size_t i) {
        const auto clip = set.clip(i);
        // Items are the originals in entry order, then copies clip-major.
        const std::size_t source =
            i < entries.size() ? i : (i - entries.size()) / cfg.copies;
        const auto& e = src.entries[entries[source]];
        fs::path rel(e.path);
        if (clip.augmentation != 0) {
          rel.replace_filename(rel.stem().string() + "_aug" +
                               std::to_string(clip.augmentation) + ".wav");
        }
        const fs::path dst = root / rel;
        fs::create_directories(dst.parent_path());
        xc1d::write_wav(clip.samples, dst);
        made[i] = xc1d::ManifestEntry{rel.generic_string(), e.word, e.speaker_id, e.split};
      });
      result.entries.insert(result.entries.end(), made.begin(), made.end());
    }
    xc1d::save_manifest(result, root / "manifest.tsv");
    if (out) *out = new xc1d_manifest{std::move(result)};
  });
}

void xc1d_train_options_default(xc1d_train_options* o) {
  if (!o) return;
  const xc1d::TrainConfig c;
  o->epochs = c.epochs;
  o->batch_size = c.batch_size;
  o->lr = c.lr;
  o->weight_decay = c.weight_decay;
  o->dropout = c.dropout;
  o->patience = c.patience;
  o->lr_factor = c.lr_factor;
  o->task = "words-all";
  o->seed = c.seed;
  o->seeds = nullptr;
  o->n_seeds = 0;
  o->augment = 1;
  o->augment_copies = c.augment->copies;
  o->augment_seed = c.augment_seed;
  o->model_overrides = nullptr;
}

xc1d_status xc1d_train_config_text(const xc1d_train_options* opts, const xc1d_manifest* m,
                                   char** out) {
  return guarded([&] {
    require(opts, "options");
    const auto cfg = to_train_config(*opts);
    cfg.validate();
    const auto version = m ? m->value.version : xc1d::DatasetVersion::kV2;
    const auto task = xc1d::make_task(cfg.task, version);
    const auto model = xc1d::resolve_model(to_model_config(*opts), cfg, task);
    put(out, "dataset=" + std::string(xc1d::to_string(version)) + "\n" + cfg.to_text() +
                 model.to_text() + "param_count=" + std::to_string(xc1d::param_count(model)) +
                 "\n");
  });
}

xc1d_status xc1d_train(const xc1d_manifest* m, const xc1d_train_options* opts,
                       const char* out_dir, char** metrics_out) {
  return guarded([&] {
    require(m, "manifest");
    require(opts, "options");
    require(out_dir, "out_dir");
    const auto result = xc1d::train(to_model_config(*opts), to_train_config(*opts), m->value);
    xc1d::write_run(result, out_dir);
    put(metrics_out, xc1d::format_run_metrics(result.metrics));
  });
}

xc1d_status xc1d_multi_seed(const xc1d_manifest* m, const xc1d_train_options* opts,
                            const char* out_dir, char** summary_out) {
  return guarded([&] {
    require(m, "manifest");
    require(opts, "options");
    require(out_dir, "out_dir");
    const auto r =
        xc1d::multi_seed(to_model_config(*opts), to_train_config(*opts), m->value, out_dir);
    put(summary_out, xc1d::format_multi_seed(r));
  });
}

xc1d_status xc1d_checkpoint_load(const char* path, xc1d_checkpoint** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto ck = xc1d::load_checkpoint(path);
    const auto task = ck.task_spec();
    std::vector<std::string> names;
    for (std::size_t c = 0; c < task.n_classes(); ++c) names.push_back(task.class_name(c));
    if (names.size() != ck.config.n_classes) {
      throw xc1d::DataError("checkpoint: model has " + std::to_string(ck.config.n_classes) +
                            " classes but task " + ck.task + " has " +
                            std::to_string(names.size()));
    }
    *out = new xc1d_checkpoint{std::move(ck), std::move(names)};
  });
}

void xc1d_checkpoint_free(xc1d_checkpoint* ck) { delete ck; }

xc1d_status xc1d_checkpoint_info(const xc1d_checkpoint* ck, char** out) {
  return guarded([&] {
    require(ck, "checkpoint");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", ck->value.best_dev_accuracy);
    put(out, ck->value.config_text() + "param_count=" +
                 std::to_string(ck->value.params.scalar_count()) + "\nepoch=" +
                 std::to_string(ck->value.epoch) + "\nbest_dev_accuracy=" + buf + "\n");
  });
}

size_t xc1d_checkpoint_num_classes(const xc1d_checkpoint* ck) {
  return ck ? ck->names.size() : 0;
}

const char* xc1d_checkpoint_class_name(const xc1d_checkpoint* ck, size_t index) {
  if (!ck || index >= ck->names.size()) return nullptr;
  return ck->names[index].c_str();
}

xc1d_status xc1d_evaluate(const xc1d_checkpoint* ck, const xc1d_manifest* m, const char* split,
                          char** metrics_out, char** per_class_out) {
  return guarded([&] {
    require(ck, "checkpoint");
    require(m, "manifest");
    const auto s = xc1d::parse_split(split ? split : "test");
    if (m->value.version != ck->value.version) {
      throw xc1d::ConfigError(std::string("evaluate: checkpoint is for ") +
                              xc1d::to_string(ck->value.version) + ", manifest is " +
                              xc1d::to_string(m->value.version));
    }
    const auto task = ck->value.task_spec();
    const auto metrics = xc1d::evaluate(ck->value, m->value, s, task);
    put(metrics_out, xc1d::format_eval(metrics, std::string(xc1d::to_string(s)) + "."));
    put(per_class_out, xc1d::per_class_tsv(metrics));
  });
}

xc1d_status xc1d_infer_file(const xc1d_checkpoint* ck, const char* wav_path, double* probs,
                            size_t* top_class) {
  return guarded([&] {
    require(ck, "checkpoint");
    require(wav_path, "wav_path");
    const auto& cfg = ck->value.config;
    const auto clip = xc1d::load_clip(wav_path, "", "", wav_path);
    const auto samples = xc1d::normalize_length(clip.samples, cfg.input_length);
    xc1d::ModelParams<float> weights;
    for (const auto& p : ck->value.params) weights.add(p.name, p.value.detach());
    xc1d::Tensor<float> x({1, 1, cfg.input_length}, samples);
    xc1d::Rng unused(0);
    const auto logits = xc1d::forward(weights, cfg, x, xc1d::Mode::kEval, unused);
    const auto p = xc1d::layers::softmax(logits);
    std::size_t best = 0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (probs) probs[c] = p[c];
      if (p[c] > p[best]) best = c;
    }
    if (top_class) *top_class = best;
  });
}

xc1d_status xc1d_opcount(uint64_t length, uint64_t kernel, uint64_t in_channels,
                         uint64_t out_channels, int measure, xc1d_opcount_result* out) {
  return guarded([&] {
    require(out, "out");
    const auto oc = xc1d::opcount(length, kernel, in_channels, out_channels);
    *out = xc1d_opcount_result{oc.regular, oc.separable, 0, 0, oc.ratio};
    if (!measure) return;
    if (kernel % 2 == 0) throw xc1d::ConfigError("opcount: kernel must be odd to measure");
    xc1d::Rng rng(1);
    auto filled = [&](xc1d::Shape shape) {
      std::vector<float> v(xc1d::shape_numel(shape));
      for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
      return xc1d::Tensor<float>(std::move(shape), std::move(v));
    };
    const auto x = filled({1, in_channels, length});
    xc1d::Conv1dParams<float> conv{filled({out_channels, in_channels, kernel}),
                                   xc1d::Tensor<float>::zeros({out_channels}), 1};
    xc1d::reset_mac_counter();
    (void)xc1d::layers::conv1d(x, conv);
    out->measured_regular = xc1d::mac_counter();
    xc1d::SeparableConv1dParams<float> sep{filled({in_channels, 1, kernel}),
                                           filled({out_channels, in_channels, 1}),
                                           xc1d::Tensor<float>::zeros({out_channels})};
    xc1d::reset_mac_counter();
    (void)xc1d::layers::separable_conv1d(x, sep);
    out->measured_separable = xc1d::mac_counter();
  });
}

xc1d_status xc1d_t_test(double mean_a, double std_a, double n_a, double mean_b, double std_b,
                        double n_b, double* t, double* df, double* p) {
  return guarded([&] {
    const auto r = xc1d::t_test({mean_a, std_a, n_a}, {mean_b, std_b, n_b});
    if (t) *t = r.t;
    if (df) *df = r.df;
    if (p) *p = r.p;
  });
}

}  // extern "C"
