#pragma once

#include <span>
#include <string>

namespace xc1d {

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double n = 0.0;
};

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-tailed
};

/// Pooled-variance two-sample Student's t-test.
/// Both stds zero: equal means give p = 1, unequal means p = 0.
TTestResult t_test(const SummaryStats& a, const SummaryStats& b);

/// Two-tailed p of a t statistic with df degrees of freedom,
/// I_{df/(df+t^2)}(df/2, 1/2).
double t_two_tailed_p(double t, double df);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Sample mean and (n-1) standard deviation; needs at least two values.
MeanStd mean_std(std::span<const double> values);

/// Fractions shown as percent with two decimals: "95.85 ± 0.12".
std::string format_percent(const MeanStd& ms);

}  // namespace xc1d
