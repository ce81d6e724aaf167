#pragma once

#include <random>
#include <span>
#include <vector>

#include "fmh/matrix.hpp"

namespace fmh::num {

enum class Activation { kIdentity, kRelu, kTanh };

struct Layer {
  Matrix weight;             // out x in
  std::vector<double> bias;  // out
};

/// Feedforward network parameters. Hidden layers use `hidden_activation`
/// (ReLU everywhere in this project); the last layer uses
/// `output_activation` (identity for critics, tanh for bounded actor heads).
struct MlpParams {
  std::vector<Layer> layers;
  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kIdentity;

  int input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows; }
};

/// Adam optimiser state; `m`/`v` mirror the shapes of the network they train.
struct AdamState {
  long step = 0;
  std::vector<Layer> m;
  std::vector<Layer> v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Exact gradients of a scalar function of the network output with respect
/// to every parameter and to the network input.
struct Gradients {
  std::vector<Layer> layers;
  std::vector<double> d_input;
};

/// Gradients accumulated over a batch: parameter gradients are summed over
/// rows, `d_input` holds one row per batch sample.
struct BatchGradients {
  std::vector<Layer> layers;
  Matrix d_input;
};

/// Post-activation values kept from a forward pass so the matching backward
/// pass does not recompute them. `post[i]` is the output of layer i.
struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> post;
};

struct BackwardOptions {
  bool param_grads = true;
  bool input_grads = true;
};

Matrix mlp_forward(const MlpParams& params, const Matrix& input, ForwardTrace* trace = nullptr);
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input);

/// Gradients of sum_b (upstream_b . output_b). Pass the trace produced by
/// the corresponding forward call.
BatchGradients mlp_backward(const MlpParams& params, const ForwardTrace& trace,
                            const Matrix& upstream, BackwardOptions opts = {});
Gradients mlp_backward(const MlpParams& params, std::span<const double> input,
                       std::span<const double> upstream);

AdamState make_adam_state(const MlpParams& params, double lr);
void adam_step(MlpParams& params, const std::vector<Layer>& grads, AdamState& state);
void soft_update(MlpParams& target, const MlpParams& source, double tau);

/// Fresh network with uniform(+-1/sqrt(fan_in)) weights and zero biases.
MlpParams make_mlp(const std::vector<int>& dims, Activation output_activation,
                   std::mt19937_64& rng);

/// Flat view helpers used by checkpointing and tests.
std::size_t parameter_count(const MlpParams& params);
bool same_shapes(const MlpParams& a, const MlpParams& b);

}  // namespace fmh::num
