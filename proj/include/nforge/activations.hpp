#pragma once

#include <string>
#include <string_view>

namespace nforge {

enum class ActivationKind { kLogistic, kTanh, kArctan, kRelu, kElu };

inline constexpr ActivationKind kAllActivations[] = {
    ActivationKind::kLogistic, ActivationKind::kTanh, ActivationKind::kArctan,
    ActivationKind::kRelu, ActivationKind::kElu};

std::string_view activation_name(ActivationKind kind);
/// Throws ArgumentError for unknown names.
ActivationKind parse_activation(std::string_view name);

double act_logistic(double x);
/// f(x)(1 - f(x)), positive everywhere.
double act_logistic_prime(double x);
double act_tanh(double x);
double act_tanh_prime(double x);
double act_arctan(double x);
double act_arctan_prime(double x);
double act_relu(double x);
/// 0 for x < 0, 1 for x >= 0.
double act_relu_prime(double x);
/// x for x >= 0, alpha (e^x - 1) otherwise. Throws ArgumentError for alpha <= 0.
double act_elu(double x, double alpha = 1.0);
/// 1 for x >= 0, f(alpha, x) + alpha otherwise.
double act_elu_prime(double x, double alpha = 1.0);

double activate(ActivationKind kind, double x, double alpha = 1.0);
double activate_prime(ActivationKind kind, double x, double alpha = 1.0);

namespace testing {

/// Scales the derivative used by activation layers of `kind` during
/// backprop. Used to prove the gradient checker catches a wrong derivative.
void corrupt_derivative(ActivationKind kind, double factor);
void clear_corruption();
double derivative_factor(ActivationKind kind);

}  // namespace testing

}  // namespace nforge
