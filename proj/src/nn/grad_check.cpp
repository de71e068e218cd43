// Copyright 2026 The illumkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "illumkit/nn/grad_check.hpp"

#include <cmath>
#include <random>

#include "illumkit/nn/loss.hpp"

namespace illumkit::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult finite_difference_check(const std::vector<FdVariable>& variables,
                                        const std::function<FdEvaluation()>& evaluate, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw ConfigError("grad_check: eps must lie in [1e-7, 1e-3]");
  GradCheckResult result;
  const FdEvaluation base = evaluate();
  for (const auto& var : variables) {
    if (var.value->shape() != var.analytic->shape()) {
      throw ShapeError("grad_check: analytic gradient shape differs for '" + var.name + "'");
    }
    for (std::size_t i = 0; i < var.value->size(); ++i) {
      double& x = (*var.value)[i];
      const double saved = x;
      x = saved + eps;
      const FdEvaluation plus = evaluate();
      x = saved - eps;
      const FdEvaluation minus = evaluate();
      x = saved;
      if (plus.routing != base.routing || minus.routing != base.routing) {
        ++result.skipped;
        continue;
      }
      if (!std::isfinite(plus.loss) || !std::isfinite(minus.loss)) {
        throw NumericError("grad_check: non-finite loss while probing '" + var.name + "'");
      }
      const double numeric = (plus.loss - minus.loss) / (2.0 * eps);
      const double rel = relative_error((*var.analytic)[i], numeric);
      ++result.checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst = var.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

namespace {

// Rows of three when possible so the head is exactly euclidean_loss.
Shape loss_rows(std::size_t n) {
  if (n % 3 == 0) return {n / 3, 3};
  return {1, n};
}

double squared_error(const Tensor<double>& out, const Tensor<double>& target, Tensor<double>* grad) {
  Tensor<double> est = out;
  est.reshape(loss_rows(out.size()));
  if (est.dim(1) == 3) {
    auto r = euclidean_loss(est, target);
    if (grad) {
      *grad = std::move(r.grad);
      grad->reshape(out.shape());
    }
    return r.loss;
  }
  double sum = 0.0;
  if (grad) *grad = Tensor<double>(out.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out[i] - target[i];
    sum += d * d;
    if (grad) (*grad)[i] = 2.0 * d;
  }
  return sum;
}

void require_finite(const Sequential<double>& net, const Sequential<double>::Trace& trace) {
  for (std::size_t i = 1; i < trace.inputs.size(); ++i) {
    if (!trace.inputs[i].all_finite()) {
      throw NumericError("grad_check: non-finite output from layer '" + net.nodes()[i - 1].spec.name + "'");
    }
  }
  if (!trace.output.all_finite()) {
    throw NumericError("grad_check: non-finite output from layer '" + net.nodes().back().spec.name + "'");
  }
}

}  // namespace

GradCheckResult grad_check(const Sequential<double>& net, const Tensor<double>& input, double eps,
                           std::uint64_t target_seed) {
  if (!input.all_finite()) throw NumericError("grad_check: non-finite input");
  Sequential<double>::Trace trace;
  const Tensor<double>& out = net.forward(input, trace);
  require_finite(net, trace);

  std::mt19937_64 rng(target_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<double> target(loss_rows(out.size()));
  for (auto& v : target.data()) v = normal(rng);

  const auto params = net.parameters();
  GradientBuffer<double> buffer(params);
  Tensor<double> grad_out;
  squared_error(out, target, &grad_out);
  Tensor<double> grad_in = net.backward(trace, grad_out, buffer.sink(), true);

  Tensor<double> x = input;
  std::vector<FdVariable> vars;
  vars.push_back({"input", &x, &grad_in});
  for (const auto& p : params) vars.push_back({"param", &p->value, buffer.find(*p)});
  for (std::size_t i = 0; i < net.nodes().size(); ++i) {
    const auto& node = net.nodes()[i];
    for (std::size_t k = 0; k < node.params.size(); ++k) {
      for (auto& v : vars) {
        if (v.value == &node.params[k]->value) v.name = node.spec.name + (k == 0 ? ".weight" : ".bias");
      }
    }
  }

  auto evaluate = [&]() {
    Sequential<double>::Trace t;
    const Tensor<double>& o = net.forward(x, t);
    return FdEvaluation{squared_error(o, target, nullptr), net.routing_signature(t)};
  };
  return finite_difference_check(vars, evaluate, eps);
}

}  // namespace illumkit::nn
