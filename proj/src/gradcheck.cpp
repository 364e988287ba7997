#include "nforge/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "nforge/errors.hpp"
#include "nforge/rng.hpp"

namespace nforge {

namespace {

constexpr double kNormFloor = 1e-8;
// Pre-activations and pool gaps closer than this to a kink force a redraw.
constexpr double kKinkMargin = 1e-3;
constexpr std::size_t kBatch = 3;
constexpr std::size_t kMaxRedraws = 200;

double loss_from(Network& net, std::size_t first, const Tensor& input, std::span<const int> labels) {
  Rng unused(0);
  const Tensor logits = net.forward_from(first, input, Mode::kEval, unused);
  return cross_entropy(softmax(logits), labels).loss;
}

// `skip` marks coordinates where the derivative is undefined.
double norm_rel_error(const Tensor& analytic, const Tensor& numeric,
                      const std::vector<bool>& skip = {}) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (!skip.empty() && skip[i]) continue;
    const double d = analytic[i] - numeric[i];
    diff += d * d;
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), kNormFloor);
}

// Central difference of the loss w.r.t. every entry of `x`; `eval` must
// read the current contents of `x`.
template <class Eval>
Tensor numeric_grad(Tensor& x, Eval&& eval) {
  Tensor g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + kGradCheckStep;
    const double up = eval();
    x[i] = saved - kGradCheckStep;
    const double down = eval();
    x[i] = saved;
    g[i] = (up - down) / (2.0 * kGradCheckStep);
  }
  return g;
}

bool near_kink(Network& net) {
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    const Layer& layer = net.layer(i);
    const LayerSpec& ls = net.spec().layers[i];
    const Tensor& in = layer.cached_input();
    if (ls.kind == LayerKind::kActivation &&
        (ls.activation == ActivationKind::kRelu || ls.activation == ActivationKind::kElu)) {
      for (double v : in.data())
        if (std::abs(v) < kKinkMargin) return true;
    } else if (ls.kind == LayerKind::kMaxPool) {
      const std::size_t s = ls.kernel;
      const std::size_t n = in.dim(0), c = in.dim(1), h = in.dim(2), w = in.dim(3);
      const auto d = in.data();
      for (std::size_t p = 0; p < n * c; ++p)
        for (std::size_t oy = 0; oy < h / s; ++oy)
          for (std::size_t ox = 0; ox < w / s; ++ox) {
            double best = -INFINITY, second = -INFINITY;
            for (std::size_t ky = 0; ky < s; ++ky)
              for (std::size_t kx = 0; kx < s; ++kx) {
                const double v = d[(p * h + oy * s + ky) * w + ox * s + kx];
                if (v > best) {
                  second = best;
                  best = v;
                } else if (v > second) {
                  second = v;
                }
              }
            // Exact ties come from flat regions (ReLU zeros) and stay tied
            // under small perturbations.
            const double gap = best - second;
            if (gap > 0.0 && gap < kKinkMargin) return true;
          }
    }
  }
  return false;
}

// Max-pool inputs tied for their window's maximum: a one-sided
// perturbation changes which one wins, so no derivative exists there.
std::vector<bool> tied_pool_inputs(const Tensor& in, std::size_t s) {
  const std::size_t n = in.dim(0), c = in.dim(1), h = in.dim(2), w = in.dim(3);
  const auto d = in.data();
  std::vector<bool> skip(in.size(), false);
  for (std::size_t p = 0; p < n * c; ++p)
    for (std::size_t oy = 0; oy < h / s; ++oy)
      for (std::size_t ox = 0; ox < w / s; ++ox) {
        double best = -INFINITY;
        std::size_t hits = 0;
        for (std::size_t ky = 0; ky < s; ++ky)
          for (std::size_t kx = 0; kx < s; ++kx) {
            const double v = d[(p * h + oy * s + ky) * w + ox * s + kx];
            if (v > best) {
              best = v;
              hits = 1;
            } else if (v == best) {
              ++hits;
            }
          }
        if (hits < 2) continue;
        for (std::size_t ky = 0; ky < s; ++ky)
          for (std::size_t kx = 0; kx < s; ++kx) {
            const std::size_t at = (p * h + oy * s + ky) * w + ox * s + kx;
            if (d[at] == best) skip[at] = true;
          }
      }
  return skip;
}

ActivationKind first_activation(const NetworkSpec& spec) {
  for (const LayerSpec& l : spec.layers)
    if (l.kind == LayerKind::kActivation) return l.activation;
  return ActivationKind::kElu;
}

}  // namespace

bool GradCheckReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const GradCheckRow& r) { return r.passed; });
}

double GradCheckReport::max_error() const {
  double m = 0.0;
  for (const GradCheckRow& r : rows) m = std::max(m, r.max_rel_error);
  return m;
}

std::string GradCheckReport::to_table() const {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-16s %-8s %-9s %12s %7s %s\n", "spec", "layer", "activation",
                "max_rel_err", "trials", "result");
  out << line;
  for (const GradCheckRow& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %-8s %-9s %12.3e %7zu %s\n", r.spec_name.c_str(),
                  std::string(layer_kind_name(r.layer)).c_str(),
                  std::string(activation_name(r.activation)).c_str(), r.max_rel_error, r.trials,
                  r.passed ? "PASS" : "FAIL");
    out << line;
  }
  return out.str();
}

GradCheckReport grad_check(const NetworkSpec& spec, const std::string& name, std::size_t trials,
                           double tol, std::uint64_t seed) {
  if (trials == 0) throw ArgumentError("grad_check: trials must be positive");
  Network net(spec);
  net.set_record_input_grads(true);
  const std::size_t classes = spec.classes;
  Shape in_shape{kBatch};
  in_shape.insert(in_shape.end(), spec.input.begin(), spec.input.end());

  std::map<LayerKind, double> worst;
  Rng rng(seed);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Tensor x(in_shape);
    std::vector<int> labels(kBatch);
    std::size_t redraws = 0;
    for (;; ++redraws) {
      if (redraws == kMaxRedraws)
        throw ConvergenceError("grad_check: no kink-free instance for " + name);
      net.init(rng.next_u64());
      for (std::size_t i = 0; i < net.layer_count(); ++i) {
        auto ps = net.layer(i).params();
        if (ps.size() == 2)
          for (double& b : ps[1].data()) b = rng.uniform(-0.2, 0.2);
      }
      for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
      for (int& l : labels) l = static_cast<int>(rng.below(classes));
      loss_from(net, 0, x, labels);
      if (!near_kink(net)) break;
    }

    Rng unused(0);
    const Tensor probs = softmax(net.forward(x, Mode::kEval, unused));
    net.backward(softmax_cross_entropy_grad(probs, labels));

    // Snapshot analytic gradients and layer inputs before the numeric
    // passes overwrite the caches.
    std::vector<std::vector<Tensor>> analytic_params(net.layer_count());
    std::vector<Tensor> analytic_inputs, inputs;
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
      for (const Tensor& g : net.layer(i).grads()) analytic_params[i].push_back(g);
      analytic_inputs.push_back(net.recorded_input_grad(i));
      inputs.push_back(net.layer(i).cached_input());
    }

    for (std::size_t i = 0; i < net.layer_count(); ++i) {
      double err = 0.0;
      auto ps = net.layer(i).params();
      for (std::size_t p = 0; p < ps.size(); ++p) {
        const Tensor numeric = numeric_grad(ps[p], [&] { return loss_from(net, 0, x, labels); });
        err = std::max(err, norm_rel_error(analytic_params[i][p], numeric));
      }
      Tensor in = inputs[i];
      const Tensor numeric = numeric_grad(in, [&] { return loss_from(net, i, in, labels); });
      const std::vector<bool> skip = spec.layers[i].kind == LayerKind::kMaxPool
                                         ? tied_pool_inputs(inputs[i], spec.layers[i].kernel)
                                         : std::vector<bool>{};
      err = std::max(err, norm_rel_error(analytic_inputs[i], numeric, skip));
      double& w = worst[spec.layers[i].kind];
      w = std::max(w, err);
    }
  }

  GradCheckReport report;
  report.tolerance = tol;
  const ActivationKind act = first_activation(spec);
  for (const auto& [kind, err] : worst)
    report.rows.push_back({name, kind, act, err, trials, err < tol});
  return report;
}

std::vector<NamedSpec> gradcheck_suite_specs() {
  std::vector<NamedSpec> specs;
  for (ActivationKind act : kAllActivations) {
    NetworkSpec dense;
    dense.input = {6};
    dense.layers = {LayerSpec::dense(5), LayerSpec::act(act), LayerSpec::dense(3)};
    dense.classes = 3;
    specs.push_back({"dense-" + std::string(activation_name(act)), dense, 1e-6});
  }
  for (ActivationKind act : kAllActivations) {
    NetworkSpec cnn;
    cnn.input = {2, 8, 8};
    cnn.layers = {LayerSpec::conv(3, 3), LayerSpec::act(act),   LayerSpec::maxpool(2),
                  LayerSpec::dropout(0.5), LayerSpec::flatten(), LayerSpec::dense(8),
                  LayerSpec::act(act),     LayerSpec::dense(4)};
    cnn.classes = 4;
    specs.push_back({"cnn-" + std::string(activation_name(act)), cnn, 1e-4});
  }
  return specs;
}

GradCheckReport grad_check_suite(std::size_t trials, std::uint64_t seed) {
  GradCheckReport all;
  all.tolerance = 1e-4;
  for (const NamedSpec& ns : gradcheck_suite_specs()) {
    GradCheckReport r = grad_check(ns.spec, ns.name, trials, ns.tolerance, mix64(seed ^ all.rows.size()));
    all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
  }
  return all;
}

}  // namespace nforge
