// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "xc1d/xc1d.h"

namespace {

struct Failure {
  xc1d_status status;
};

void check(xc1d_status s) {
  if (s != XC1D_OK) {
    std::cerr << "error: " << xc1d_last_error() << '\n';
    throw Failure{s};
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  xc1d_string_free(s);
  return out;
}

using ManifestPtr = std::unique_ptr<xc1d_manifest, decltype(&xc1d_manifest_free)>;
using CheckpointPtr = std::unique_ptr<xc1d_checkpoint, decltype(&xc1d_checkpoint_free)>;

ManifestPtr load_manifest(const std::string& path) {
  xc1d_manifest* m = nullptr;
  check(xc1d_manifest_load(path.c_str(), &m));
  return ManifestPtr(m, xc1d_manifest_free);
}

CheckpointPtr load_checkpoint(const std::string& path) {
  xc1d_checkpoint* ck = nullptr;
  check(xc1d_checkpoint_load(path.c_str(), &ck));
  return CheckpointPtr(ck, xc1d_checkpoint_free);
}

void echo(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::cout << "# " << command << '\n';
  for (const auto& [k, v] : kv) std::cout << "# " << k << '=' << v << '\n';
}

void echo_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) std::cout << "# " << line << '\n';
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// "mean,std,n"
bool parse_group(const std::string& text, double out[3]) {
  std::istringstream is(text);
  std::string field;
  int i = 0;
  while (std::getline(is, field, ',')) {
    if (i == 3) return false;
    try {
      std::size_t used = 0;
      out[i] = std::stod(field, &used);
      if (used != field.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
    ++i;
  }
  return i == 3;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    throw Failure{XC1D_ERR_DATA};
  }
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xc1d: raw-waveform keyword spotting with 1-d separable convolutions"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(34);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  // prepare
  std::string data_dir, version = "V2", manifest_out = "manifest.tsv";
  auto* prepare = app.add_subcommand("prepare", "Scan a corpus directory into a manifest");
  prepare->add_option("--data-dir", data_dir, "Corpus root")->required();
  prepare->add_option("--version", version, "Corpus version (V1 or V2)")->capture_default_str();
  prepare->add_option("--out", manifest_out, "Manifest file to write")->capture_default_str();

  // augment
  std::string manifest_path, aug_out = "augmented";
  unsigned copies = 5;
  std::uint64_t aug_seed = 0;
  auto* augment = app.add_subcommand("augment", "Write distorted copies of the train split");
  augment->add_option("--manifest", manifest_path, "Input manifest")->required();
  augment->add_option("--out-dir", aug_out, "Output corpus directory")->capture_default_str();
  augment->add_option("--copies", copies, "Distorted copies per clip")->capture_default_str();
  augment->add_option("--seed", aug_seed, "Augmentation seed")->capture_default_str();

  // train
  xc1d_train_options opts;
  xc1d_train_options_default(&opts);
  std::string task = opts.task, train_out = "run", model_file;
  std::vector<std::string> model_kv;
  std::vector<std::uint64_t> seeds;
  bool no_augment = false;
  auto* train = app.add_subcommand("train", "Train a model (several seeds with --seeds)");
  train->add_option("--manifest", manifest_path, "Manifest from 'prepare'")->required();
  train->add_option("--task", task, "words-all, commands-20, commands-10 or left-right")
      ->capture_default_str();
  train->add_option("--seed", opts.seed, "Seed for weights, shuffling and dropout")
      ->capture_default_str();
  train->add_option("--seeds", seeds, "Run once per seed and report mean ± std")
      ->delimiter(',');
  train->add_option("--epochs", opts.epochs, "Training epochs")->capture_default_str();
  train->add_option("--batch-size", opts.batch_size, "Clips per batch")->capture_default_str();
  train->add_option("--lr", opts.lr, "Initial Adam learning rate")->capture_default_str();
  train->add_option("--weight-decay", opts.weight_decay, "Decoupled weight decay")
      ->capture_default_str();
  train->add_option("--dropout", opts.dropout, "Dropout before the dense head")
      ->capture_default_str();
  train->add_option("--patience", opts.patience, "Plateau epochs before halving the rate")
      ->capture_default_str();
  train->add_option("--lr-factor", opts.lr_factor, "Rate multiplier on plateau")
      ->capture_default_str();
  train->add_flag("--no-augment", no_augment, "Train on originals only");
  train->add_option("--copies", opts.augment_copies, "Distorted copies per train clip")
      ->capture_default_str();
  train->add_option("--augment-seed", opts.augment_seed, "Augmentation seed")
      ->capture_default_str();
  train->add_option("--model", model_kv, "Architecture override key=value (repeatable)");
  train->add_option("--model-config", model_file, "File of architecture key=value lines");
  train->add_option("--out", train_out, "Output directory")->capture_default_str();

  // eval
  std::string ck_path, split = "test", plot_data;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest split");
  eval->add_option("--checkpoint", ck_path, "Checkpoint file")->required();
  eval->add_option("--manifest", manifest_path, "Manifest")->required();
  eval->add_option("--split", split, "train, dev or test")->capture_default_str();
  eval->add_option("--plot-data", plot_data, "Write the per-class precision/recall table here");

  // infer
  std::vector<std::string> wavs;
  bool verbose = false;
  auto* infer = app.add_subcommand("infer", "Classify WAV files");
  infer->add_option("--checkpoint", ck_path, "Checkpoint file")->required();
  infer->add_option("files", wavs, "16 kHz mono 16-bit WAV files")->required();
  infer->add_flag("--verbose", verbose, "Print the full class distribution");

  // opcount
  std::uint64_t length = 63, kernel = 9, cin = 128, cout_ = 128;
  bool measure = false;
  auto* opcount = app.add_subcommand("opcount", "Multiply-accumulates: regular vs separable");
  opcount->add_option("--length", length, "Sequence length L")->capture_default_str();
  opcount->add_option("--kernel", kernel, "Kernel size S")->capture_default_str();
  opcount->add_option("--in-channels", cin, "Input channels")->capture_default_str();
  opcount->add_option("--out-channels", cout_, "Output channels N")->capture_default_str();
  opcount->add_flag("--measure", measure, "Also count MACs in the instrumented kernels");

  // stats
  std::string group_a, group_b;
  auto* stats = app.add_subcommand("stats", "Two-sample Student's t-test from summary stats");
  stats->add_option("--a", group_a, "mean,std,n of group A")->required();
  stats->add_option("--b", group_b, "mean,std,n of group B")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(XC1D_ERR_CONFIG);
  }

  try {
    check(xc1d_set_threads(threads));
    const std::string threads_str = std::to_string(threads);

    if (*prepare) {
      echo("prepare", {{"data_dir", data_dir}, {"version", version}, {"out", manifest_out},
                       {"threads", threads_str}});
      xc1d_manifest* raw = nullptr;
      check(xc1d_manifest_scan(data_dir.c_str(), version.c_str(), &raw));
      ManifestPtr m(raw, xc1d_manifest_free);
      check(xc1d_manifest_save(m.get(), manifest_out.c_str()));
      char* summary = nullptr;
      check(xc1d_manifest_summary(m.get(), &summary));
      std::cout << take(summary);
    } else if (*augment) {
      echo("augment", {{"manifest", manifest_path}, {"out_dir", aug_out},
                       {"copies", std::to_string(copies)}, {"seed", std::to_string(aug_seed)},
                       {"threads", threads_str}});
      auto m = load_manifest(manifest_path);
      xc1d_manifest* raw = nullptr;
      check(xc1d_augment_manifest(m.get(), aug_out.c_str(), copies, aug_seed, &raw));
      ManifestPtr out(raw, xc1d_manifest_free);
      char* summary = nullptr;
      check(xc1d_manifest_summary(out.get(), &summary));
      std::cout << take(summary);
      std::cout << "manifest=" << aug_out << "/manifest.tsv\n";
    } else if (*train) {
      std::string overrides;
      if (!model_file.empty()) {
        std::ifstream in(model_file);
        if (!in) {
          std::cerr << "error: cannot read model config '" << model_file << "'\n";
          return XC1D_ERR_CONFIG;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        overrides = ss.str() + "\n";
      }
      for (const auto& kv : model_kv) overrides += kv + "\n";
      opts.task = task.c_str();
      opts.augment = no_augment ? 0 : 1;
      opts.model_overrides = overrides.empty() ? nullptr : overrides.c_str();
      if (!seeds.empty()) {
        opts.seeds = seeds.data();
        opts.n_seeds = seeds.size();
      }
      auto m = load_manifest(manifest_path);
      char* text = nullptr;
      check(xc1d_train_config_text(&opts, m.get(), &text));
      echo("train", {{"manifest", manifest_path}, {"out", train_out}, {"threads", threads_str}});
      echo_text(take(text));
      std::cout.flush();
      char* result = nullptr;
      if (seeds.empty()) {
        check(xc1d_train(m.get(), &opts, train_out.c_str(), &result));
      } else {
        check(xc1d_multi_seed(m.get(), &opts, train_out.c_str(), &result));
      }
      std::cout << take(result);
    } else if (*eval) {
      echo("eval", {{"checkpoint", ck_path}, {"manifest", manifest_path}, {"split", split},
                    {"plot_data", plot_data}, {"threads", threads_str}});
      auto ck = load_checkpoint(ck_path);
      auto m = load_manifest(manifest_path);
      char* metrics = nullptr;
      char* table = nullptr;
      check(xc1d_evaluate(ck.get(), m.get(), split.c_str(), &metrics, &table));
      std::cout << take(metrics);
      const std::string tsv = take(table);
      if (!plot_data.empty()) write_file(plot_data, tsv);
    } else if (*infer) {
      echo("infer", {{"checkpoint", ck_path}, {"files", std::to_string(wavs.size())},
                     {"verbose", verbose ? "1" : "0"}, {"threads", threads_str}});
      auto ck = load_checkpoint(ck_path);
      const std::size_t k = xc1d_checkpoint_num_classes(ck.get());
      std::vector<double> probs(k);
      int worst = XC1D_OK;
      for (const auto& f : wavs) {
        std::size_t top = 0;
        const auto s = xc1d_infer_file(ck.get(), f.c_str(), probs.data(), &top);
        if (s != XC1D_OK) {
          std::cerr << "error: " << f << ": " << xc1d_last_error() << '\n';
          if (static_cast<int>(s) > worst) worst = s;
          continue;
        }
        std::cout << f << '\t' << xc1d_checkpoint_class_name(ck.get(), top) << '\t'
                  << num(probs[top]) << '\n';
        if (verbose) {
          for (std::size_t c = 0; c < k; ++c) {
            std::cout << "  " << xc1d_checkpoint_class_name(ck.get(), c) << '\t'
                      << num(probs[c]) << '\n';
          }
        }
      }
      return worst;
    } else if (*opcount) {
      echo("opcount", {{"length", std::to_string(length)}, {"kernel", std::to_string(kernel)},
                       {"in_channels", std::to_string(cin)},
                       {"out_channels", std::to_string(cout_)},
                       {"measure", measure ? "1" : "0"}, {"threads", threads_str}});
      xc1d_opcount_result r{};
      check(xc1d_opcount(length, kernel, cin, cout_, measure ? 1 : 0, &r));
      std::cout << "regular=" << r.regular << '\n'
                << "separable=" << r.separable << '\n'
                << "ratio=" << num(r.ratio) << '\n'
                << "additive_form=" << num(1.0 / static_cast<double>(cout_) +
                                           1.0 / static_cast<double>(kernel))
                << '\n';
      if (measure) {
        std::cout << "measured_regular=" << r.measured_regular << '\n'
                  << "measured_separable=" << r.measured_separable << '\n';
      }
    } else if (*stats) {
      double a[3], b[3];
      if (!parse_group(group_a, a) || !parse_group(group_b, b)) {
        std::cerr << "error: groups must be given as mean,std,n\n";
        return XC1D_ERR_CONFIG;
      }
      echo("stats", {{"a", group_a}, {"b", group_b}});
      double t = 0, df = 0, p = 0;
      check(xc1d_t_test(a[0], a[1], a[2], b[0], b[1], b[2], &t, &df, &p));
      char pbuf[32];
      std::snprintf(pbuf, sizeof pbuf, "%.3e", p);
      std::cout << "t=" << num(t) << '\n' << "df=" << num(df) << '\n'
                << "p=" << num(p) << '\n' << "p_sci=" << pbuf << '\n';
    }
  } catch (const Failure& f) {
    return f.status;
  }
  return 0;
}
