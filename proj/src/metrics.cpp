#include "nforge/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "nforge/errors.hpp"

namespace nforge {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw ArgumentError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(int predicted, int truth) {
  if (predicted < 0 || truth < 0 || static_cast<std::size_t>(predicted) >= k_ ||
      static_cast<std::size_t>(truth) >= k_)
    throw ArgumentError("confusion matrix: class out of range (" + std::to_string(predicted) + ", " +
                        std::to_string(truth) + ")");
  ++counts_[static_cast<std::size_t>(predicted) * k_ + static_cast<std::size_t>(truth)];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < k_; ++i) t += at(i, i);
  return t;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t t = total();
  return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
}

std::size_t ConfusionMatrix::column_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += at(p, truth);
  return s;
}

std::size_t ConfusionMatrix::row_sum(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < k_; ++t) s += at(predicted, t);
  return s;
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream os;
  for (std::size_t p = 0; p < k_; ++p) {
    for (std::size_t t = 0; t < k_; ++t) os << (t ? "," : "") << at(p, t);
    os << '\n';
  }
  return os.str();
}

std::string ConfusionMatrix::to_table() const {
  std::ostringstream os;
  os << "pred\\true";
  for (std::size_t t = 0; t < k_; ++t) os << std::setw(5) << t;
  os << '\n';
  for (std::size_t p = 0; p < k_; ++p) {
    os << std::setw(9) << p;
    for (std::size_t t = 0; t < k_; ++t) os << std::setw(5) << at(p, t);
    os << '\n';
  }
  return os.str();
}

ConfusionMatrix confusion_from(std::span<const int> predicted, std::span<const int> truth,
                               std::size_t classes) {
  if (predicted.size() != truth.size())
    throw ArgumentError("confusion_from: " + std::to_string(predicted.size()) + " predictions for " +
                        std::to_string(truth.size()) + " labels");
  ConfusionMatrix m(classes);
  for (std::size_t i = 0; i < predicted.size(); ++i) m.add(predicted[i], truth[i]);
  return m;
}

}  // namespace nforge
