#include "nforge/optim.hpp"

#include <cmath>
#include <string>

#include "nforge/errors.hpp"

namespace nforge {

namespace {

void check_parallel(std::span<Tensor* const> params, std::span<Tensor* const> grads, const char* op) {
  if (params.size() != grads.size())
    throw ShapeError(std::string(op) + ": " + std::to_string(params.size()) + " params vs " +
                     std::to_string(grads.size()) + " grads");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i]->shape() != grads[i]->shape())
      throw ShapeError(std::string(op) + ": param " + shape_str(params[i]->shape()) + " vs grad " +
                       shape_str(grads[i]->shape()));
}

}  // namespace

void adadelta_step(std::span<Tensor* const> params, std::span<Tensor* const> grads,
                   AdadeltaState& state) {
  check_parallel(params, grads, "adadelta_step");
  if (state.sq_grad.empty() && state.sq_update.empty()) {
    for (const Tensor* p : params) {
      state.sq_grad.emplace_back(p->shape());
      state.sq_update.emplace_back(p->shape());
    }
  }
  if (state.sq_grad.size() != params.size() || state.sq_update.size() != params.size())
    throw ShapeError("adadelta_step: accumulator count does not match parameters");

  const double rho = state.rho, eps = state.eps;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto x = params[t]->data();
    auto g = grads[t]->data();
    auto eg = state.sq_grad[t].data();
    auto ex = state.sq_update[t].data();
    if (eg.size() != x.size() || ex.size() != x.size())
      throw ShapeError("adadelta_step: accumulator shape mismatch for " + shape_str(params[t]->shape()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      eg[i] = rho * eg[i] + (1.0 - rho) * g[i] * g[i];
      const double dx = -std::sqrt(ex[i] + eps) / std::sqrt(eg[i] + eps) * g[i];
      ex[i] = rho * ex[i] + (1.0 - rho) * dx * dx;
      x[i] += dx;
    }
  }
}

void sgd_step(std::span<Tensor* const> params, std::span<Tensor* const> grads, const SgdState& state) {
  check_parallel(params, grads, "sgd_step");
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto x = params[t]->data();
    auto g = grads[t]->data();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= state.learning_rate * g[i];
  }
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdadelta ? "adadelta" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adadelta") return OptimizerKind::kAdadelta;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ArgumentError("unknown optimizer '" + std::string(name) + "'");
}

Optimizer::Optimizer(const OptimizerConfig& cfg) : kind_(cfg.kind) {
  if (cfg.kind == OptimizerKind::kAdadelta) {
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw ArgumentError("adadelta rho must lie in (0, 1)");
    if (!(cfg.eps > 0.0)) throw ArgumentError("adadelta eps must be > 0");
  } else if (!(cfg.learning_rate > 0.0)) {
    throw ArgumentError("learning rate must be > 0");
  }
  adadelta_.rho = cfg.rho;
  adadelta_.eps = cfg.eps;
  sgd_.learning_rate = cfg.learning_rate;
}

void Optimizer::step(std::span<Tensor* const> params, std::span<Tensor* const> grads) {
  if (kind_ == OptimizerKind::kAdadelta)
    adadelta_step(params, grads, adadelta_);
  else
    sgd_step(params, grads, sgd_);
}

}  // namespace nforge
