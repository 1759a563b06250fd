// Copyright 2026 The toric-rl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "toric/lattice.hpp"
#include "toric/rng.hpp"

namespace toric {

/// Convolution (valid padding) followed by a dense ReLU stack and a linear
/// 4-wide output. standard() gives 512 3x3 filters at stride 2 and dense
/// widths 256-128-64-32, i.e. 573,028 parameters at d = 5 and 1,228,388 at
/// d = 7.
struct Architecture {
  int d = 3;
  int conv_filters = 512;
  int kernel = 3;
  int stride = 2;
  std::vector<int> dense_widths = {256, 128, 64, 32};
  int outputs = 4;

  static Architecture standard(CodeDistance d);

  int conv_side() const { return (d - kernel) / stride + 1; }
  int conv_outputs() const { return conv_side() * conv_side() * conv_filters; }
  int num_dense_layers() const { return static_cast<int>(dense_widths.size()) + 1; }

  /// Shapes in storage order: conv weight {k*k, filters}, conv bias
  /// {filters}, then {in, out} weight and {out} bias per dense layer.
  std::vector<std::vector<int>> parameter_shapes() const;

  void validate() const;

  bool operator==(const Architecture&) const = default;
};

std::size_t param_count(const Architecture& arch);

struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  explicit Tensor(std::vector<int> shape_);
  std::size_t size() const { return values.size(); }
  bool operator==(const Tensor&) const = default;
};

using ParameterSet = std::vector<Tensor>;

ParameterSet zeros_like(const Architecture& arch);

/// Scratch buffers reused across calls; one per thread.
struct Workspace {
  std::vector<double> patches;
  std::vector<std::vector<double>> activations;  // [0] conv output, then one per dense layer
  std::vector<double> grad_a;
  std::vector<double> grad_b;
  std::vector<double> transposed;
};

class QNetwork {
 public:
  /// All parameters zero.
  explicit QNetwork(Architecture arch);

  /// He-normal weights (std sqrt(2 / fan_in)) for the ReLU layers, LeCun
  /// scaling for the linear output layer, zero biases.
  static QNetwork initialized(Architecture arch, Rng& rng);

  const Architecture& architecture() const { return arch_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  std::size_t param_count() const;

  /// Q values ordered (Up, Down, Right, Left) for one d x d binary input.
  std::array<double, 4> forward(std::span<const std::uint8_t> input) const;

  /// `inputs` holds `batch` consecutive d x d grids; `q` receives batch x 4.
  void forward_batch(std::span<const std::uint8_t> inputs, int batch, std::span<double> q, Workspace& ws) const;

  bool operator==(const QNetwork&) const = default;

 private:
  void check_input(std::size_t cells, int batch) const;

  Architecture arch_;
  ParameterSet params_;
};

struct TrainingRow {
  std::span<const std::uint8_t> input;
  int action = 0;
  double target = 0.0;
};

/// Gradient of mean_i (y_i - Q(x_i, a_i))^2, where only the selected action
/// contributes per row. Writes into `grads` (resized as needed) and returns
/// the loss.
double gradients(const QNetwork& net, std::span<const TrainingRow> batch, ParameterSet& grads, Workspace& ws);
ParameterSet gradients(const QNetwork& net, std::span<const TrainingRow> batch);

struct AdamState {
  ParameterSet m;
  ParameterSet v;
  std::uint64_t step = 0;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  /// Inverse-time learning-rate decay per step.
  double decay = 0.0;

  static AdamState for_architecture(const Architecture& arch);
  bool operator==(const AdamState&) const = default;
};

/// Bias-corrected Adam update in place.
void adam_step(QNetwork& net, const ParameterSet& grads, AdamState& opt);

}  // namespace toric
