#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "xc1d/errors.hpp"
#include "xc1d/metrics.hpp"
#include "xc1d/rng.hpp"
#include "xc1d/stats.hpp"

using namespace xc1d;

TEST(TTest, WorkedExample) {
  const auto r = t_test({95.85, 0.16, 5}, {94.15, 1.03, 4});
  EXPECT_NEAR(r.t, 3.70, 0.005);
  EXPECT_EQ(r.df, 7.0);
  // 7.66e-3, quoted to two figures as 7.6e-3 (truncated, not rounded).
  EXPECT_GE(r.p, 7.6e-3);
  EXPECT_LT(r.p, 7.7e-3);
  EXPECT_NEAR(r.p, toy::t_p_by_integration(r.t, 7), 1e-9);
}

TEST(TTest, AgreesWithIntegrationOracle) {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const SummaryStats a{rng.uniform(50, 100), rng.uniform(0.01, 5),
                         static_cast<double>(rng.uniform_int(2, 30))};
    const SummaryStats b{a.mean + rng.uniform(-10, 10), rng.uniform(0.01, 5),
                         static_cast<double>(rng.uniform_int(2, 30))};
    const auto r = t_test(a, b);
    const double t = toy::pooled_t(a.mean, a.std, a.n, b.mean, b.std, b.n);
    ASSERT_NEAR(r.t, t, 1e-9 * std::max(1.0, std::abs(t)));
    ASSERT_EQ(r.df, a.n + b.n - 2);
    const double p = toy::t_p_by_integration(t, r.df);
    worst = std::max(worst, std::abs(r.p - p));
    ASSERT_NEAR(r.p, p, 1e-6) << "t=" << t << " df=" << r.df;
  }
  RecordProperty("max_abs_p_error", std::to_string(worst));
}

TEST(TTest, Degenerate) {
  const auto same = t_test({90, 1.5, 5}, {90, 1.5, 5});
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);
  const auto flat_equal = t_test({90, 0, 5}, {90, 0, 4});
  EXPECT_EQ(flat_equal.p, 1.0);
  const auto flat_diff = t_test({91, 0, 5}, {90, 0, 4});
  EXPECT_EQ(flat_diff.p, 0.0);
  EXPECT_TRUE(std::isinf(flat_diff.t));
  EXPECT_THROW(t_test({90, 1, 1}, {90, 1, 5}), ConfigError);
  EXPECT_THROW(t_test({90, -1, 5}, {90, 1, 5}), ConfigError);
}

TEST(TTest, MonotoneInMeanGap) {
  double prev = 1.0;
  for (int i = 1; i <= 200; ++i) {
    const auto r = t_test({90 + 0.02 * i, 1.0, 5}, {90, 1.2, 4});
    EXPECT_LT(r.p, prev) << i;
    prev = r.p;
  }
  // Symmetric in the sign of the difference.
  EXPECT_DOUBLE_EQ(t_test({92, 1, 5}, {90, 1, 4}).p, t_test({90, 1, 5}, {92, 1, 4}).p);
}

TEST(TTest, TwoTailedPKnownValues) {
  // t = 1 with df = 1 is the Cauchy quartile: p = 0.5.
  EXPECT_NEAR(t_two_tailed_p(1.0, 1.0), 0.5, 1e-12);
  // df = 2 has the closed form p = 1 - |t| / sqrt(t^2 + 2).
  for (double t : {0.3, 1.7, 4.0, 25.0})
    EXPECT_NEAR(t_two_tailed_p(t, 2.0), 1 - t / std::sqrt(t * t + 2), 1e-12);
}

TEST(MeanStd, Examples) {
  const std::vector<double> same = {0.9, 0.9, 0.9};
  const auto a = mean_std(same);
  EXPECT_NEAR(a.mean, 0.9, 1e-15);
  EXPECT_NEAR(a.std, 0.0, 1e-15);
  const std::vector<double> two = {0.95, 0.97};
  const auto b = mean_std(two);
  EXPECT_NEAR(b.mean, 0.96, 1e-12);
  EXPECT_NEAR(b.std, 0.0141421356, 1e-9);
  EXPECT_EQ(format_percent({0.9585, 0.0012}), "95.85 ± 0.12");
  const std::vector<double> one = {0.5};
  EXPECT_THROW(mean_std(one), ConfigError);
}

TEST(Metrics, HandExample) {
  ConfusionMatrix cm(2);
  for (int i = 0; i < 8; ++i) cm.add(0, 0);
  for (int i = 0; i < 2; ++i) cm.add(0, 1);
  for (int i = 0; i < 3; ++i) cm.add(1, 0);
  for (int i = 0; i < 7; ++i) cm.add(1, 1);
  const auto m = summarize(cm, {"a", "b"});
  EXPECT_DOUBLE_EQ(m.accuracy, 15.0 / 20.0);
  EXPECT_EQ(cm.total(), 20u);
  EXPECT_EQ(cm.row_sum(0), 10u);
  EXPECT_EQ(cm.col_sum(0), 11u);
  const ClassMetrics* c0 = nullptr;
  for (const auto& c : m.per_class)
    if (c.index == 0) c0 = &c;
  ASSERT_NE(c0, nullptr);
  EXPECT_DOUBLE_EQ(c0->precision, 8.0 / 11.0);
  EXPECT_DOUBLE_EQ(c0->recall, 8.0 / 10.0);
  EXPECT_DOUBLE_EQ(c0->f1, 2 * (8.0 / 11) * 0.8 / (8.0 / 11 + 0.8));
  EXPECT_EQ(c0->support, 10u);
  // Sorted by descending F1: class 0 (0.7619) before class 1 (0.7368).
  EXPECT_EQ(m.per_class[0].index, 0u);
  EXPECT_GT(m.per_class[0].f1, m.per_class[1].f1);
}

TEST(Metrics, PerfectAndAbsentClasses) {
  ConfusionMatrix cm(3);
  cm.add(0, 0);
  cm.add(1, 1);
  cm.add(1, 1);
  const auto m = summarize(cm, {"x", "y", "z"});
  EXPECT_EQ(m.accuracy, 1.0);
  for (const auto& c : m.per_class) {
    if (c.index == 2) {
      EXPECT_EQ(c.precision, 0.0);
      EXPECT_EQ(c.recall, 0.0);
      EXPECT_EQ(c.f1, 0.0);
    } else {
      EXPECT_EQ(c.precision, 1.0);
      EXPECT_EQ(c.recall, 1.0);
      EXPECT_EQ(c.f1, 1.0);
    }
  }
  EXPECT_EQ(m.per_class.back().index, 2u);
  EXPECT_EQ(summarize(ConfusionMatrix(2), {"a", "b"}).accuracy, 0.0);
}

TEST(Metrics, FormattedText) {
  ConfusionMatrix cm(2);
  cm.add(0, 0);
  cm.add(1, 0);
  const auto text = format_eval(summarize(cm, {"yes", "no"}), "test.");
  EXPECT_NE(text.find("test.accuracy=0.5\n"), std::string::npos) << text;
  EXPECT_NE(text.find("test.total=2\n"), std::string::npos) << text;
  const auto tsv = per_class_tsv(summarize(cm, {"yes", "no"}));
  EXPECT_NE(tsv.find("yes"), std::string::npos);
  EXPECT_NE(tsv.find("no"), std::string::npos);
}
