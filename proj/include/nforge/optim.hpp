#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "nforge/tensor.hpp"

namespace nforge {

/// Decayed accumulators E[g^2] and E[dx^2], created zero on the first step.
struct AdadeltaState {
  double rho = 0.95;
  double eps = 1e-6;
  std::vector<Tensor> sq_grad;
  std::vector<Tensor> sq_update;
};

/// E[g^2] <- rho E[g^2] + (1-rho) g^2
/// dx      = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
/// E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
/// x       <- x + dx
/// Throws ShapeError when params, grads and accumulators are not shape-parallel.
void adadelta_step(std::span<Tensor* const> params, std::span<Tensor* const> grads,
                   AdadeltaState& state);

struct SgdState {
  double learning_rate = 0.1;
};

/// x <- x - lr g.
void sgd_step(std::span<Tensor* const> params, std::span<Tensor* const> grads, const SgdState& state);

enum class OptimizerKind { kAdadelta, kSgd };
std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdadelta;
  double rho = 0.95;
  double eps = 1e-6;
  double learning_rate = 0.1;
};

class Optimizer {
 public:
  explicit Optimizer(const OptimizerConfig& cfg);
  void step(std::span<Tensor* const> params, std::span<Tensor* const> grads);
  const AdadeltaState& adadelta() const { return adadelta_; }

 private:
  OptimizerKind kind_;
  AdadeltaState adadelta_;
  SgdState sgd_;
};

}  // namespace nforge
