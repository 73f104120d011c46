#include "xc1d/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "xc1d/errors.hpp"

namespace xc1d {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= k_ || predicted >= k_) {
    throw ConfigError("confusion: label out of range for " + std::to_string(k_) + " classes");
  }
  ++counts_[truth * k_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, i);
  return s;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < k_; ++j) s += at(truth, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, predicted);
  return s;
}

EvalMetrics summarize(const ConfusionMatrix& cm, const std::vector<std::string>& names) {
  if (names.size() != cm.classes()) {
    throw ConfigError("metrics: " + std::to_string(names.size()) + " class names for " +
                      std::to_string(cm.classes()) + " classes");
  }
  EvalMetrics m;
  m.confusion = cm;
  m.accuracy = ratio(cm.trace(), cm.total());
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    ClassMetrics cls;
    cls.index = c;
    cls.name = names[c];
    cls.support = cm.row_sum(c);
    cls.precision = ratio(cm.at(c, c), cm.col_sum(c));
    cls.recall = ratio(cm.at(c, c), cls.support);
    const double denom = cls.precision + cls.recall;
    cls.f1 = denom == 0.0 ? 0.0 : 2.0 * cls.precision * cls.recall / denom;
    m.per_class.push_back(std::move(cls));
  }
  std::stable_sort(m.per_class.begin(), m.per_class.end(),
                   [](const ClassMetrics& a, const ClassMetrics& b) { return a.f1 > b.f1; });
  return m;
}

std::string format_eval(const EvalMetrics& m, const std::string& prefix) {
  std::ostringstream os;
  os << prefix << "accuracy=" << fmt(m.accuracy) << '\n';
  os << prefix << "total=" << m.confusion.total() << '\n';
  for (const auto& c : m.per_class) {
    os << prefix << "class\t" << c.name << "\tprecision=" << fmt(c.precision)
       << "\trecall=" << fmt(c.recall) << "\tf1=" << fmt(c.f1) << "\tsupport=" << c.support
       << '\n';
  }
  const std::size_t k = m.confusion.classes();
  for (std::size_t i = 0; i < k; ++i) {
    os << prefix << "confusion\t" << i;
    for (std::size_t j = 0; j < k; ++j) os << '\t' << m.confusion.at(i, j);
    os << '\n';
  }
  return os.str();
}

std::string per_class_tsv(const EvalMetrics& m) {
  std::ostringstream os;
  os << "class\tprecision\trecall\tf1\tsupport\n";
  for (const auto& c : m.per_class) {
    os << c.name << '\t' << fmt(c.precision) << '\t' << fmt(c.recall) << '\t' << fmt(c.f1)
       << '\t' << c.support << '\n';
  }
  return os.str();
}

}  // namespace xc1d
