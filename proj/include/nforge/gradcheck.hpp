#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nforge/network.hpp"

namespace nforge {

/// Worst norm-wise relative error ||a - n|| / max(||a|| + ||n||, floor)
/// over all trials, for one layer kind of one spec. Parametric layers are
/// checked on weights, bias and input gradient; the others on input
/// gradient only.
struct GradCheckRow {
  std::string spec_name;
  LayerKind layer = LayerKind::kDense;
  ActivationKind activation = ActivationKind::kElu;
  double max_rel_error = 0.0;
  std::size_t trials = 0;
  bool passed = false;
};

struct GradCheckReport {
  double tolerance = 0.0;
  std::vector<GradCheckRow> rows;
  bool passed() const;
  double max_error() const;
  /// Fixed-width table, one line per row.
  std::string to_table() const;
};

inline constexpr double kGradCheckStep = 1e-5;

/// Central differences with step 1e-5 on `trials` random instances
/// (fresh parameters, inputs and labels each). Dropout runs in eval mode.
/// Instances with a pre-activation within reach of a ReLU/ELU kink or a
/// max-pool near-tie are redrawn, since the derivative is undefined there.
/// Rows are labelled with the network's first activation kind.
GradCheckReport grad_check(const NetworkSpec& spec, const std::string& name, std::size_t trials,
                           double tol, std::uint64_t seed);

struct NamedSpec {
  std::string name;
  NetworkSpec spec;
  double tolerance;
};

/// Dense-only spec (tolerance 1e-6) plus, per activation kind, a mini CNN
/// conv-act-maxpool-dropout-flatten-dense-act-dense (tolerance 1e-4).
std::vector<NamedSpec> gradcheck_suite_specs();

/// Runs every suite spec; one report with all rows.
GradCheckReport grad_check_suite(std::size_t trials, std::uint64_t seed);

}  // namespace nforge
