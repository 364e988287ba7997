#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "nforge/checkpoint.hpp"
#include "nforge/dataio.hpp"
#include "nforge/network.hpp"

namespace nforge::fixture {

/// 500 validation predictions over 10 classes with 497 correct: one true 3
/// predicted as 2 and two true 1 predicted as 6.
inline constexpr std::array<std::size_t, 10> kClassCounts{50, 52, 49, 51, 50, 50, 48, 50, 50, 50};
inline constexpr std::size_t kFixtureErrors = 3;

struct Predictions {
  std::vector<int> predicted;
  std::vector<int> truth;
};

inline Predictions reference_predictions() {
  Predictions p;
  for (std::size_t c = 0; c < kClassCounts.size(); ++c)
    for (std::size_t i = 0; i < kClassCounts[c]; ++i) {
      int pred = static_cast<int>(c);
      if (c == 3 && i == 0) pred = 2;
      if (c == 1 && i < 2) pred = 6;
      p.predicted.push_back(pred);
      p.truth.push_back(static_cast<int>(c));
    }
  return p;
}

/// One 1 x 1 x 10 image per prediction, one-hot at the predicted class and
/// labelled with the true class.
inline Dataset reference_dataset() {
  const Predictions p = reference_predictions();
  Dataset ds;
  for (std::size_t i = 0; i < p.truth.size(); ++i) {
    Tensor img({1, 1, 10});
    img[static_cast<std::size_t>(p.predicted[i])] = 1.0;
    ds.samples.push_back({img, p.truth[i]});
  }
  return ds;
}

/// Flatten then an identity dense layer: predicts the hot index.
inline Network identity_network() {
  NetworkSpec spec;
  spec.input = {1, 1, 10};
  spec.layers = {LayerSpec::flatten(), LayerSpec::dense(10)};
  spec.classes = 10;
  Network net(spec);
  Tensor& w = *net.params()[0];
  for (std::size_t i = 0; i < 10; ++i) w(i, i) = 1.0;
  return net;
}

inline Preprocess identity_preprocess() {
  Preprocess prep;
  prep.invert = false;
  return prep;
}

}  // namespace nforge::fixture
