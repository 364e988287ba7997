#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nforge {

/// K x K counts; rows are predicted classes, columns are true classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  std::size_t classes() const { return k_; }
  void add(int predicted, int truth);
  std::size_t at(std::size_t predicted, std::size_t truth) const { return counts_[predicted * k_ + truth]; }

  std::size_t total() const;
  std::size_t trace() const;
  /// trace / total; 0 for an empty matrix.
  double accuracy() const;
  std::size_t column_sum(std::size_t truth) const;
  std::size_t row_sum(std::size_t predicted) const;

  /// K lines of K comma-separated integers.
  std::string to_csv() const;
  /// Aligned table with class headers, for terminals.
  std::string to_table() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion_from(std::span<const int> predicted, std::span<const int> truth,
                               std::size_t classes);

}  // namespace nforge
