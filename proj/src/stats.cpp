#include "xc1d/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdio>
#include <limits>

#include "xc1d/errors.hpp"

namespace xc1d {

double t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw ConfigError("t-test: degrees of freedom must be positive");
  if (std::isnan(t)) throw NumericError("t-test: t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

TTestResult t_test(const SummaryStats& a, const SummaryStats& b) {
  if (a.n < 2 || b.n < 2) throw ConfigError("t-test: each group needs n >= 2");
  if (a.std < 0 || b.std < 0 || !std::isfinite(a.std) || !std::isfinite(b.std) ||
      !std::isfinite(a.mean) || !std::isfinite(b.mean)) {
    throw ConfigError("t-test: means must be finite and stds finite and >= 0");
  }
  TTestResult r;
  r.df = a.n + b.n - 2.0;
  const double pooled =
      ((a.n - 1.0) * a.std * a.std + (b.n - 1.0) * b.std * b.std) / r.df;
  const double se = std::sqrt(pooled * (1.0 / a.n + 1.0 / b.n));
  const double diff = a.mean - b.mean;
  if (se == 0.0) {
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p = 0.0;
    }
    return r;
  }
  r.t = diff / se;
  r.p = t_two_tailed_p(r.t, r.df);
  return r;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.size() < 2) throw ConfigError("mean_std: need at least two values");
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanStd out;
  out.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

std::string format_percent(const MeanStd& ms) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f \xC2\xB1 %.2f", 100.0 * ms.mean, 100.0 * ms.std);
  return buf;
}

}  // namespace xc1d
