#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xc1d {

/// K x K counts, rows are true labels, columns predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

  void add(std::size_t truth, std::size_t predicted);
  std::size_t classes() const { return k_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * k_ + predicted];
  }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> counts_;
};

struct ClassMetrics {
  std::size_t index = 0;
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct EvalMetrics {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;  // descending F1, ties by class index
};

/// 0/0 is 0 for precision, recall and F1; accuracy of an empty matrix is 0.
EvalMetrics summarize(const ConfusionMatrix& confusion,
                      const std::vector<std::string>& class_names);

/// Line-oriented text: accuracy, per-class rows, confusion rows.
std::string format_eval(const EvalMetrics& m, const std::string& prefix);

/// Tab-separated precision/recall table, one row per class.
std::string per_class_tsv(const EvalMetrics& m);

}  // namespace xc1d
