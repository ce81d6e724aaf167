#include "fmh/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace fmh::num {
namespace {

void apply_activation(Activation act, Matrix& m) {
  switch (act) {
    case Activation::kIdentity:
      return;
    case Activation::kRelu:
      for (double& x : m.data) x = x > 0.0 ? x : 0.0;
      return;
    case Activation::kTanh:
      for (double& x : m.data) x = std::tanh(x);
      return;
  }
}

// Activation derivative expressed through the post-activation value, so the
// backward pass only needs the values the trace already stores.
double derivative_from_post(Activation act, double post) {
  switch (act) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kRelu:
      return post > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh:
      return 1.0 - post * post;
  }
  return 1.0;
}

std::vector<Layer> zero_like(const MlpParams& params) {
  std::vector<Layer> out;
  out.reserve(params.layers.size());
  for (const Layer& l : params.layers) {
    out.push_back({Matrix(l.weight.rows, l.weight.cols),
                   std::vector<double>(l.bias.size(), 0.0)});
  }
  return out;
}

}  // namespace

Matrix mlp_forward(const MlpParams& params, const Matrix& input, ForwardTrace* trace) {
  require(!params.layers.empty(), "mlp_forward: network has no layers");
  require(input.cols == params.input_dim(), "mlp_forward: input width mismatch");
  if (trace != nullptr) {
    trace->input = input;
    trace->post.clear();
    trace->post.reserve(params.layers.size());
  }
  Matrix cur = input;
  Matrix next;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const Layer& layer = params.layers[i];
    matmul_nt(cur, layer.weight, next);
    for (int r = 0; r < next.rows; ++r) {
      double* row = next.data.data() + static_cast<std::size_t>(r) * next.cols;
      for (int c = 0; c < next.cols; ++c) row[c] += layer.bias[c];
    }
    const bool last = i + 1 == params.layers.size();
    apply_activation(last ? params.output_activation : params.hidden_activation, next);
    if (trace != nullptr) trace->post.push_back(next);
    cur = std::move(next);
    next = Matrix();
  }
  return cur;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input) {
  Matrix in(1, static_cast<int>(input.size()));
  std::copy(input.begin(), input.end(), in.data.begin());
  Matrix out = mlp_forward(params, in);
  return out.data;
}

BatchGradients mlp_backward(const MlpParams& params, const ForwardTrace& trace,
                            const Matrix& upstream, BackwardOptions opts) {
  const std::size_t n_layers = params.layers.size();
  require(trace.post.size() == n_layers, "mlp_backward: trace does not match network");
  require(upstream.rows == trace.input.rows && upstream.cols == params.output_dim(),
          "mlp_backward: upstream shape mismatch");

  BatchGradients grads;
  if (opts.param_grads) grads.layers = zero_like(params);

  // delta starts as dL/d(pre-activation) of the last layer and is walked
  // back one layer per iteration.
  Matrix delta = upstream;
  Matrix prev_delta;
  for (std::size_t i = n_layers; i-- > 0;) {
    const Layer& layer = params.layers[i];
    const Activation act =
        (i + 1 == n_layers) ? params.output_activation : params.hidden_activation;
    const Matrix& post = trace.post[i];
    for (std::size_t k = 0; k < delta.data.size(); ++k) {
      delta.data[k] *= derivative_from_post(act, post.data[k]);
    }
    const Matrix& layer_input = (i == 0) ? trace.input : trace.post[i - 1];
    if (opts.param_grads) {
      matmul_tn(delta, layer_input, grads.layers[i].weight);
      std::vector<double>& db = grads.layers[i].bias;
      for (int r = 0; r < delta.rows; ++r) {
        const double* row = delta.data.data() + static_cast<std::size_t>(r) * delta.cols;
        for (int c = 0; c < delta.cols; ++c) db[c] += row[c];
      }
    }
    if (i > 0 || opts.input_grads) {
      matmul(delta, layer.weight, prev_delta);
      delta = std::move(prev_delta);
      prev_delta = Matrix();
    }
  }
  if (opts.input_grads) grads.d_input = std::move(delta);
  return grads;
}

Gradients mlp_backward(const MlpParams& params, std::span<const double> input,
                       std::span<const double> upstream) {
  Matrix in(1, static_cast<int>(input.size()));
  std::copy(input.begin(), input.end(), in.data.begin());
  ForwardTrace trace;
  mlp_forward(params, in, &trace);
  Matrix up(1, static_cast<int>(upstream.size()));
  std::copy(upstream.begin(), upstream.end(), up.data.begin());
  BatchGradients batch = mlp_backward(params, trace, up);
  return {std::move(batch.layers), std::move(batch.d_input.data)};
}

AdamState make_adam_state(const MlpParams& params, double lr) {
  AdamState state;
  state.lr = lr;
  state.m = zero_like(params);
  state.v = zero_like(params);
  return state;
}

void adam_step(MlpParams& params, const std::vector<Layer>& grads, AdamState& state) {
  require(grads.size() == params.layers.size(), "adam_step: gradient/layer count mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](double& theta, double g, double& m, double& v, const std::string& where) {
    require(std::isfinite(g), "adam_step: non-finite gradient at " + where);
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    theta -= state.lr * (m / bc1) / (std::sqrt(v / bc2) + state.eps);
  };
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    Layer& layer = params.layers[i];
    const Layer& grad = grads[i];
    require(layer.weight.same_shape(grad.weight) && layer.bias.size() == grad.bias.size(),
            "adam_step: gradient shape mismatch at layer " + std::to_string(i));
    const std::string tag = "layer " + std::to_string(i);
    for (std::size_t k = 0; k < layer.weight.data.size(); ++k) {
      update(layer.weight.data[k], grad.weight.data[k], state.m[i].weight.data[k],
             state.v[i].weight.data[k], tag + " weight");
    }
    for (std::size_t k = 0; k < layer.bias.size(); ++k) {
      update(layer.bias[k], grad.bias[k], state.m[i].bias[k], state.v[i].bias[k],
             tag + " bias");
    }
  }
}

void soft_update(MlpParams& target, const MlpParams& source, double tau) {
  require(same_shapes(target, source), "soft_update: network shapes differ");
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    Layer& t = target.layers[i];
    const Layer& s = source.layers[i];
    for (std::size_t k = 0; k < t.weight.data.size(); ++k) {
      t.weight.data[k] = tau * s.weight.data[k] + (1.0 - tau) * t.weight.data[k];
    }
    for (std::size_t k = 0; k < t.bias.size(); ++k) {
      t.bias[k] = tau * s.bias[k] + (1.0 - tau) * t.bias[k];
    }
  }
}

MlpParams make_mlp(const std::vector<int>& dims, Activation output_activation,
                   std::mt19937_64& rng) {
  require(dims.size() >= 2, "make_mlp: need at least input and output dims");
  MlpParams params;
  params.output_activation = output_activation;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int fan_in = dims[i];
    const int fan_out = dims[i + 1];
    require(fan_in > 0 && fan_out > 0, "make_mlp: dims must be positive");
    Layer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : layer.weight.data) w = dist(rng);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

std::size_t parameter_count(const MlpParams& params) {
  std::size_t n = 0;
  for (const Layer& l : params.layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool same_shapes(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (!a.layers[i].weight.same_shape(b.layers[i].weight)) return false;
    if (a.layers[i].bias.size() != b.layers[i].bias.size()) return false;
  }
  return true;
}

}  // namespace fmh::num
