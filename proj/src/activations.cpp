#include "nforge/activations.hpp"

#include <array>
#include <atomic>
#include <cmath>

#include "nforge/errors.hpp"

namespace nforge {

std::string_view activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kLogistic: return "logistic";
    case ActivationKind::kTanh: return "tanh";
    case ActivationKind::kArctan: return "arctan";
    case ActivationKind::kRelu: return "relu";
    case ActivationKind::kElu: return "elu";
  }
  return "?";
}

ActivationKind parse_activation(std::string_view name) {
  for (auto k : kAllActivations)
    if (activation_name(k) == name) return k;
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

double act_logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double act_logistic_prime(double x) {
  const double f = act_logistic(x);
  return f * (1.0 - f);
}

double act_tanh(double x) { return std::tanh(x); }

double act_tanh_prime(double x) {
  const double f = std::tanh(x);
  return 1.0 - f * f;
}

double act_arctan(double x) { return std::atan(x); }
double act_arctan_prime(double x) { return 1.0 / (1.0 + x * x); }

double act_relu(double x) { return x < 0.0 ? 0.0 : x; }
double act_relu_prime(double x) { return x < 0.0 ? 0.0 : 1.0; }

double act_elu(double x, double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("ELU alpha must be > 0");
  return x >= 0.0 ? x : alpha * std::expm1(x);
}

double act_elu_prime(double x, double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("ELU alpha must be > 0");
  return x >= 0.0 ? 1.0 : act_elu(x, alpha) + alpha;
}

double activate(ActivationKind kind, double x, double alpha) {
  switch (kind) {
    case ActivationKind::kLogistic: return act_logistic(x);
    case ActivationKind::kTanh: return act_tanh(x);
    case ActivationKind::kArctan: return act_arctan(x);
    case ActivationKind::kRelu: return act_relu(x);
    case ActivationKind::kElu: return act_elu(x, alpha);
  }
  return x;
}

double activate_prime(ActivationKind kind, double x, double alpha) {
  switch (kind) {
    case ActivationKind::kLogistic: return act_logistic_prime(x);
    case ActivationKind::kTanh: return act_tanh_prime(x);
    case ActivationKind::kArctan: return act_arctan_prime(x);
    case ActivationKind::kRelu: return act_relu_prime(x);
    case ActivationKind::kElu: return act_elu_prime(x, alpha);
  }
  return 1.0;
}

namespace testing {

namespace {
std::array<std::atomic<double>, 5>& factors() {
  static std::array<std::atomic<double>, 5> f{1.0, 1.0, 1.0, 1.0, 1.0};
  return f;
}
}  // namespace

void corrupt_derivative(ActivationKind kind, double factor) {
  factors()[static_cast<std::size_t>(kind)] = factor;
}

void clear_corruption() {
  for (auto& f : factors()) f = 1.0;
}

double derivative_factor(ActivationKind kind) { return factors()[static_cast<std::size_t>(kind)]; }

}  // namespace testing

}  // namespace nforge
