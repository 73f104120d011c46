#include <gtest/gtest.h>

#include <cmath>

#include "support/gradcheck.hpp"
#include "support/toy.hpp"
#include "xc1d/layers.hpp"
#include "xc1d/model.hpp"

using namespace xc1d;

namespace {

template <typename T>
Tensor<T> random_input(std::size_t batch, std::size_t length, Rng& rng) {
  std::vector<T> v(batch * length);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1, 1));
  return Tensor<T>({batch, 1, length}, std::move(v));
}

ModelConfig random_config(Rng& rng) {
  ModelConfig c;
  c.n_classes = static_cast<std::size_t>(rng.uniform_int(2, 6));
  c.input_length = static_cast<std::size_t>(rng.uniform_int(8, 80));
  c.entry.clear();
  const auto stages = rng.uniform_int(1, 3);
  for (int i = 0; i < stages; ++i) {
    c.entry.push_back({static_cast<std::size_t>(rng.uniform_int(1, 5)),
                       static_cast<std::size_t>(rng.uniform_int(1, 3)),
                       static_cast<std::size_t>(2 * rng.uniform_int(0, 2) + 1)});
  }
  c.n_mod = static_cast<std::size_t>(rng.uniform_int(1, 3));
  c.block_channels = static_cast<std::size_t>(rng.uniform_int(1, 6));
  c.block_kernel = static_cast<std::size_t>(2 * rng.uniform_int(0, 2) + 1);
  c.dropout = rng.uniform(0, 0.9);
  c.residual = rng.uniform() < 0.5;
  return c;
}

// Independent count: entry convs + norms, blocks of two separable convs and
// norms (+ 1x1 shortcut when width changes), dense head.
std::size_t count_oracle(const ModelConfig& c) {
  std::size_t n = 0, in = 1;
  for (const auto& e : c.entry) {
    n += e.channels * in * e.kernel + e.channels + 2 * e.channels;
    in = e.channels;
  }
  const std::size_t bc = c.block_channels;
  for (std::size_t j = 0; j < c.n_mod; ++j) {
    n += in * c.block_kernel + bc * in + bc + 2 * bc;
    n += bc * c.block_kernel + bc * bc + bc + 2 * bc;
    if (c.residual && in != bc) n += bc * in + bc;
    in = bc;
  }
  return n + bc * c.n_classes + c.n_classes;
}

}  // namespace

TEST(ModelConfig, DefaultsAndValidation) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_mod = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.block_kernel = 4;
  c.entry[1].stride = 0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("n_mod"), std::string::npos);
    EXPECT_NE(msg.find("block_kernel"), std::string::npos);
    EXPECT_NE(msg.find("stride"), std::string::npos);
  }
}

TEST(ModelConfig, TextRoundTrip) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const auto c = random_config(rng);
    EXPECT_EQ(ModelConfig::parse(c.to_text()), c);
  }
  EXPECT_THROW(ModelConfig::parse("bogus=1\n"), ConfigError);
  EXPECT_EQ(ModelConfig::parse("n_mod=3\n").n_mod, 3u);
}

TEST(Model, ParamCountExamples) {
  ModelConfig c;
  c.entry = {{64, 1, 9}};
  const auto parts = param_breakdown(c);
  EXPECT_EQ(parts[0].name, "entry.0.conv.weight");
  EXPECT_EQ(parts[0].count + parts[1].count, 640u);

  ModelConfig d;
  d.block_channels = 10;
  d.n_classes = 3;
  const auto dparts = param_breakdown(d);
  EXPECT_EQ(dparts[dparts.size() - 2].count + dparts.back().count, 33u);

  ModelConfig wide;
  wide.block_channels = 1800;
  wide.n_classes = 36;
  const auto wparts = param_breakdown(wide);
  EXPECT_EQ(wparts[wparts.size() - 2].count + wparts.back().count, 64836u);

  EXPECT_EQ(param_count(ModelConfig{}), count_oracle(ModelConfig{}));
}

TEST(Model, BuildMatchesCountAndIsDeterministic) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const auto c = random_config(rng);
    const auto p = build_model<float>(c, s);
    EXPECT_EQ(p.scalar_count(), param_count(c));
    EXPECT_EQ(param_count(c), count_oracle(c));
  }
  const auto a = build_model<float>(ModelConfig{}, 1);
  const auto b = build_model<float>(ModelConfig{}, 1);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_TRUE(std::equal(a[i].value.data().begin(), a[i].value.data().end(),
                           b[i].value.data().begin()));
  }
  const auto other = build_model<float>(ModelConfig{}, 2);
  EXPECT_FALSE(std::equal(a[0].value.data().begin(), a[0].value.data().end(),
                          other[0].value.data().begin()));
}

TEST(Model, OutputShapeForRandomConfigs) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s + 100);
    const auto c = random_config(rng);
    const auto p = build_model<float>(c, s);
    const auto y = forward(p, c, random_input<float>(3, c.input_length, rng), Mode::kTrain, rng);
    EXPECT_EQ(y.shape(), (Shape{3, c.n_classes}));
  }
}

TEST(Model, ZeroInputDefaultConfigGivesFiniteLogits) {
  const ModelConfig c;
  const auto p = build_model<float>(c, 0);
  Rng rng(0);
  const auto y = forward(p, c, Tensor<float>::zeros({2, 1, 16000}), Mode::kEval, rng);
  EXPECT_EQ(y.shape(), (Shape{2, 35}));
  for (float v : y.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Model, EvalIsDeterministic) {
  const auto c = toy::toy_config(3);
  const auto p = build_model<float>(c, 4);
  Rng rng(1), r1(10), r2(20);
  const auto x = random_input<float>(2, c.input_length, rng);
  const auto a = forward(p, c, x, Mode::kEval, r1);
  const auto b = forward(p, c, x, Mode::kEval, r2);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST(Model, RejectsWrongInputLength) {
  const auto c = toy::grad_check_config(2);
  const auto p = build_model<double>(c, 0);
  Rng rng(0);
  EXPECT_THROW(forward(p, c, Tensor<double>::zeros({1, 1, 65}), Mode::kEval, rng), ShapeError);
}

TEST(Model, ParameterOrderAndNames) {
  ModelConfig c = toy::grad_check_config(2);
  const auto p = build_model<float>(c, 0);
  EXPECT_EQ(p[0].name, "entry.0.conv.weight");
  EXPECT_EQ(p[p.size() - 1].name, "head.dense.bias");
  EXPECT_TRUE(p.contains("block.0.shortcut.weight"));   // 4 -> 5 channels
  EXPECT_FALSE(p.contains("block.1.shortcut.weight"));  // 5 -> 5
}

// Whole-network loss against central differences on 20 kink-free instances.
TEST(Model, FullGradientCheck) {
  std::size_t accepted = 0, skipped = 0;
  for (std::uint64_t seed = 0; accepted < 20 && seed < 2000; ++seed) {
    const auto r = toy::model_grad_check(seed);
    if (!r) {
      ++skipped;
      continue;
    }
    ++accepted;
    EXPECT_LT(r->max_relative, 1e-4) << "seed " << seed << " worst " << r->worst;
    EXPECT_LT(r->max_structural, 1e-9) << "seed " << seed;
  }
  EXPECT_EQ(accepted, 20u) << skipped << " instances skipped";
}
