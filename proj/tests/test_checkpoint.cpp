#include <gtest/gtest.h>

#include <cstring>

#include "support/toy.hpp"
#include "xc1d/checkpoint.hpp"

using namespace xc1d;

namespace {

Checkpoint random_checkpoint(std::uint64_t seed, const std::string& task = "left-right") {
  Checkpoint ck;
  ck.task = task;
  ck.version = DatasetVersion::kV2;
  ck.config = toy::grad_check_config(ck.task_spec().n_classes());
  ck.config.n_mod = 1 + seed % 3;
  ck.params = build_model<float>(ck.config, seed);
  ck.best_dev_accuracy = 0.5 + 0.01 * static_cast<double>(seed);
  ck.epoch = static_cast<std::uint32_t>(seed);
  return ck;
}

Tensor<float> logits(const Checkpoint& ck, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> x(3 * ck.config.input_length);
  for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
  return forward(ck.params, ck.config, Tensor<float>({3, 1, ck.config.input_length}, x),
                 Mode::kEval, rng);
}

CheckpointErrorKind kind_of(std::span<const std::uint8_t> bytes) {
  try {
    deserialize_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return CheckpointErrorKind::kMalformed;
}

}  // namespace

TEST(Checkpoint, RoundTripForwardBitIdentical) {
  toy::TempDir dir("ckpt");
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto ck = random_checkpoint(s, s % 2 ? "commands-10" : "left-right");
    const auto file = dir.path() / ("m" + std::to_string(s) + ".xc1d");
    save_checkpoint(ck, file);
    const auto back = load_checkpoint(file);
    EXPECT_EQ(back.config, ck.config);
    EXPECT_EQ(back.task, ck.task);
    EXPECT_EQ(back.version, ck.version);
    EXPECT_EQ(back.best_dev_accuracy, ck.best_dev_accuracy);
    EXPECT_EQ(back.epoch, ck.epoch);
    ASSERT_EQ(back.params.size(), ck.params.size());
    const auto a = logits(ck, s), b = logits(back, s);
    ASSERT_EQ(std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(float)), 0);
    EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(ck));
  }
}

TEST(Checkpoint, HeaderLayout) {
  const auto bytes = serialize_checkpoint(random_checkpoint(1));
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(std::memcmp(bytes.data(), "XC1D", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
}

TEST(Checkpoint, BadMagic) {
  auto bytes = serialize_checkpoint(random_checkpoint(2));
  bytes[1] = 'Z';
  EXPECT_EQ(kind_of(bytes), CheckpointErrorKind::kBadMagic);
  EXPECT_EQ(kind_of(std::span<const std::uint8_t>(bytes.data(), 2)),
            CheckpointErrorKind::kBadMagic);
}

TEST(Checkpoint, VersionMismatch) {
  auto bytes = serialize_checkpoint(random_checkpoint(3));
  bytes[4] = 2;
  EXPECT_EQ(kind_of(bytes), CheckpointErrorKind::kVersionMismatch);
}

TEST(Checkpoint, EveryTruncationRejected) {
  const auto bytes = serialize_checkpoint(random_checkpoint(4));
  for (std::size_t n = 4; n < bytes.size(); ++n)
    ASSERT_EQ(kind_of(std::span<const std::uint8_t>(bytes.data(), n)),
              CheckpointErrorKind::kTruncated)
        << n;
}

TEST(Checkpoint, TrailingBytesAndShapeMismatch) {
  auto bytes = serialize_checkpoint(random_checkpoint(5));
  bytes.push_back(0);
  EXPECT_EQ(kind_of(bytes), CheckpointErrorKind::kMalformed);

  auto ck = random_checkpoint(5);
  ck.config.block_channels += 1;  // params no longer match the config
  EXPECT_EQ(kind_of(serialize_checkpoint(ck)), CheckpointErrorKind::kMalformed);
}

TEST(Checkpoint, FileErrorsAreDataErrors) {
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.xc1d"), DataError);
  toy::TempDir dir("ckpt-io");
  EXPECT_THROW(save_checkpoint(random_checkpoint(0), dir.path() / "no" / "such" / "x.xc1d"),
               DataError);
}
