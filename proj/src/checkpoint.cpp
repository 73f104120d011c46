#include "xc1d/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace xc1d {
namespace {

using K = CheckpointErrorKind;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  void need(std::size_t n, const char* what) const {
    if (b_.size() - pos_ < n) {
      throw CheckpointError(K::kTruncated, std::string("file ends inside ") + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(CheckpointErrorKind kind) {
  switch (kind) {
    case K::kBadMagic:
      return "bad-magic";
    case K::kVersionMismatch:
      return "version-mismatch";
    case K::kTruncated:
      return "truncated";
    case K::kMalformed:
      return "malformed";
  }
  return "unknown";
}

std::string Checkpoint::config_text() const {
  return config.to_text() + "task=" + task + "\ndataset=" + to_string(version) + "\n";
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.str(ck.config_text());
  w.u32(static_cast<std::uint32_t>(ck.params.size()));
  for (const auto& p : ck.params) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) w.u64(d);
    for (float v : p.value.data()) w.f32(v);
  }
  w.f64(ck.best_dev_accuracy);
  w.u32(ck.epoch);
  return w.take();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError(K::kBadMagic, "missing XC1D signature");
  }
  r.take(4, "magic");
  const std::uint32_t version = r.u32("format version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(K::kVersionMismatch, "format version " + std::to_string(version) +
                                                   ", expected " +
                                                   std::to_string(kCheckpointVersion));
  }
  Checkpoint ck;
  {
    std::istringstream is(r.str("config blob"));
    std::string line, model_text;
    bool have_task = false, have_dataset = false;
    while (std::getline(is, line)) {
      if (line.rfind("task=", 0) == 0) {
        ck.task = line.substr(5);
        have_task = true;
      } else if (line.rfind("dataset=", 0) == 0) {
        try {
          ck.version = parse_version(line.substr(8));
        } catch (const ConfigError& e) {
          throw CheckpointError(K::kMalformed, e.what());
        }
        have_dataset = true;
      } else {
        model_text += line + "\n";
      }
    }
    if (!have_task || !have_dataset) {
      throw CheckpointError(K::kMalformed, "config blob lacks task/dataset");
    }
    try {
      ck.config = ModelConfig::parse(model_text);
      ck.config.validate();
      make_task(ck.task, ck.version);
    } catch (const ConfigError& e) {
      throw CheckpointError(K::kMalformed, e.what());
    }
  }

  const auto expected = build_model<float>(ck.config, 0);
  const std::uint32_t count = r.u32("parameter count");
  if (count != expected.size()) {
    throw CheckpointError(K::kMalformed, std::to_string(count) + " parameters, config implies " +
                                             std::to_string(expected.size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str("parameter name");
    const std::uint32_t rank = r.u32("parameter rank");
    if (rank > 8) throw CheckpointError(K::kMalformed, "implausible rank for '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.u64("parameter shape"));
    if (name != expected[i].name || shape != expected[i].value.shape()) {
      throw CheckpointError(K::kMalformed, "parameter " + std::to_string(i) + " is '" + name +
                                               "' " + shape_to_string(shape) + ", expected '" +
                                               expected[i].name + "' " +
                                               shape_to_string(expected[i].value.shape()));
    }
    const std::size_t n = shape_numel(shape);
    const auto raw = r.take(n * 4, "parameter data");
    std::vector<float> values(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[4 * k + b]) << (8 * b);
      values[k] = std::bit_cast<float>(bits);
    }
    ck.params.add(std::move(name), Tensor<float>(std::move(shape), std::move(values), true));
  }
  ck.best_dev_accuracy = r.f64("best dev accuracy");
  ck.epoch = r.u32("epoch");
  if (!r.done()) throw CheckpointError(K::kMalformed, "trailing bytes after epoch");
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& file) {
  const auto bytes = serialize_checkpoint(ck);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot create '" + file.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("checkpoint: write error on '" + file.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open '" + file.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace xc1d
