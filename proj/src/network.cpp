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

#include "toric/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "toric/kernels.hpp"

namespace toric {

Architecture Architecture::standard(CodeDistance d) {
  Architecture a;
  a.d = d.value();
  a.validate();
  const std::size_t count = param_count(a);
  if (a.d == 5 && count != 573'028) throw std::logic_error("d=5 network must have 573,028 parameters");
  if (a.d == 7 && count != 1'228'388) throw std::logic_error("d=7 network must have 1,228,388 parameters");
  return a;
}

void Architecture::validate() const {
  if (d < 1 || kernel < 1 || stride < 1 || d < kernel) throw std::invalid_argument("convolution does not fit input");
  if (conv_filters < 1 || outputs != 4) throw std::invalid_argument("bad convolution filters or output width");
  for (int w : dense_widths) {
    if (w < 1) throw std::invalid_argument("dense widths must be positive");
  }
}

std::vector<std::vector<int>> Architecture::parameter_shapes() const {
  std::vector<std::vector<int>> shapes;
  shapes.push_back({kernel * kernel, conv_filters});
  shapes.push_back({conv_filters});
  int in = conv_outputs();
  std::vector<int> widths = dense_widths;
  widths.push_back(outputs);
  for (int out : widths) {
    shapes.push_back({in, out});
    shapes.push_back({out});
    in = out;
  }
  return shapes;
}

std::size_t param_count(const Architecture& arch) {
  std::size_t total = 0;
  for (const auto& shape : arch.parameter_shapes()) {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    total += n;
  }
  return total;
}

Tensor::Tensor(std::vector<int> shape_) : shape(std::move(shape_)) {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  values.assign(n, 0.0);
}

ParameterSet zeros_like(const Architecture& arch) {
  ParameterSet out;
  for (auto& shape : arch.parameter_shapes()) out.emplace_back(shape);
  return out;
}

QNetwork::QNetwork(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  params_ = zeros_like(arch_);
}

QNetwork QNetwork::initialized(Architecture arch, Rng& rng) {
  QNetwork net(std::move(arch));
  const std::size_t layers = net.params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    Tensor& w = net.params_[2 * l];
    const double fan_in = w.shape[0];
    const bool linear = l + 1 == layers;
    const double stddev = std::sqrt((linear ? 1.0 : 2.0) / fan_in);
    for (double& x : w.values) x = rng.normal(0.0, stddev);
  }
  return net;
}

std::size_t QNetwork::param_count() const {
  std::size_t n = 0;
  for (const auto& t : params_) n += t.size();
  return n;
}

void QNetwork::check_input(std::size_t cells, int batch) const {
  const std::size_t expected = static_cast<std::size_t>(arch_.d) * arch_.d * static_cast<std::size_t>(batch);
  if (batch < 0 || cells != expected) {
    throw std::invalid_argument("network input holds " + std::to_string(cells) + " cells, expected " +
                                std::to_string(expected));
  }
}

namespace {

void fill_patches(const Architecture& arch, std::span<const std::uint8_t> inputs, int batch,
                  std::vector<double>& patches) {
  const int side = arch.conv_side();
  const int k = arch.kernel;
  const int d = arch.d;
  patches.resize(static_cast<std::size_t>(batch) * side * side * k * k);
  double* out = patches.data();
  for (int b = 0; b < batch; ++b) {
    const std::uint8_t* grid = inputs.data() + static_cast<std::size_t>(b) * d * d;
    for (int oy = 0; oy < side; ++oy) {
      for (int ox = 0; ox < side; ++ox) {
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            *out++ = grid[(oy * arch.stride + ky) * d + ox * arch.stride + kx];
          }
        }
      }
    }
  }
}

// Runs the full forward pass and leaves every layer's activation in ws.
void forward_pass(const Architecture& arch, const ParameterSet& params, std::span<const std::uint8_t> inputs,
                  int batch, Workspace& ws) {
  const auto& kt = kernels::active();
  const int positions = arch.conv_side() * arch.conv_side();
  const int kk = arch.kernel * arch.kernel;
  const int layers = arch.num_dense_layers();
  ws.activations.resize(layers + 1);

  fill_patches(arch, inputs, batch, ws.patches);
  auto& conv = ws.activations[0];
  conv.resize(static_cast<std::size_t>(batch) * positions * arch.conv_filters);
  kt.gemm({batch * positions, arch.conv_filters, kk, ws.patches.data(), kk, 1, params[0].values.data(),
           arch.conv_filters, conv.data(), arch.conv_filters, false});
  kt.bias_activation(batch * positions, arch.conv_filters, conv.data(), params[1].values.data(), true);

  for (int l = 0; l < layers; ++l) {
    const Tensor& w = params[2 + 2 * l];
    const Tensor& bias = params[3 + 2 * l];
    const int in = w.shape[0];
    const int out = w.shape[1];
    const auto& x = ws.activations[l];
    auto& y = ws.activations[l + 1];
    y.resize(static_cast<std::size_t>(batch) * out);
    kt.gemm({batch, out, in, x.data(), in, 1, w.values.data(), out, y.data(), out, false});
    kt.bias_activation(batch, out, y.data(), bias.values.data(), l + 1 < layers);
  }
}

}  // namespace

void QNetwork::forward_batch(std::span<const std::uint8_t> inputs, int batch, std::span<double> q,
                             Workspace& ws) const {
  check_input(inputs.size(), batch);
  if (q.size() != static_cast<std::size_t>(batch) * 4) throw std::invalid_argument("output span must hold batch*4");
  if (batch == 0) return;
  forward_pass(arch_, params_, inputs, batch, ws);
  const auto& out = ws.activations.back();
  std::copy(out.begin(), out.end(), q.begin());
}

std::array<double, 4> QNetwork::forward(std::span<const std::uint8_t> input) const {
  Workspace ws;
  std::array<double, 4> q{};
  forward_batch(input, 1, q, ws);
  return q;
}

double gradients(const QNetwork& net, std::span<const TrainingRow> batch_rows, ParameterSet& grads, Workspace& ws) {
  const Architecture& arch = net.architecture();
  const ParameterSet& params = net.parameters();
  const auto& kt = kernels::active();
  const int batch = static_cast<int>(batch_rows.size());
  if (batch == 0) throw std::invalid_argument("gradient batch must be non-empty");
  const std::size_t cells = static_cast<std::size_t>(arch.d) * arch.d;

  if (grads.size() != params.size()) grads = zeros_like(arch);

  std::vector<std::uint8_t> inputs(cells * batch);
  for (int b = 0; b < batch; ++b) {
    const auto& row = batch_rows[b];
    if (row.input.size() != cells) throw std::invalid_argument("training input has the wrong number of cells");
    if (row.action < 0 || row.action >= 4) throw std::invalid_argument("training action index out of range");
    std::copy(row.input.begin(), row.input.end(), inputs.begin() + static_cast<std::ptrdiff_t>(b * cells));
  }
  forward_pass(arch, params, inputs, batch, ws);

  // d loss / d output, nonzero only at the selected action.
  const int layers = arch.num_dense_layers();
  const auto& q = ws.activations.back();
  ws.grad_a.assign(static_cast<std::size_t>(batch) * 4, 0.0);
  double loss = 0.0;
  for (int b = 0; b < batch; ++b) {
    const double diff = q[b * 4 + batch_rows[b].action] - batch_rows[b].target;
    loss += diff * diff;
    ws.grad_a[b * 4 + batch_rows[b].action] = 2.0 * diff / batch;
  }
  loss /= batch;

  // grad_a holds d loss / d pre-activation of the current layer.
  for (int l = layers - 1; l >= 0; --l) {
    const Tensor& w = params[2 + 2 * l];
    const int in = w.shape[0];
    const int out = w.shape[1];
    const auto& x = ws.activations[l];
    kt.gemm({in, out, batch, x.data(), 1, in, ws.grad_a.data(), out, grads[2 + 2 * l].values.data(), out, false});
    kt.column_sums(batch, out, ws.grad_a.data(), grads[3 + 2 * l].values.data(), false);

    ws.transposed.resize(static_cast<std::size_t>(in) * out);
    for (int i = 0; i < in; ++i) {
      for (int o = 0; o < out; ++o) ws.transposed[static_cast<std::size_t>(o) * in + i] = w.values[i * out + o];
    }
    ws.grad_b.resize(static_cast<std::size_t>(batch) * in);
    kt.gemm({batch, in, out, ws.grad_a.data(), out, 1, ws.transposed.data(), in, ws.grad_b.data(), in, false});
    kt.relu_backward(ws.grad_b.size(), ws.grad_b.data(), x.data());
    std::swap(ws.grad_a, ws.grad_b);
  }

  const int rows = batch * arch.conv_side() * arch.conv_side();
  const int kk = arch.kernel * arch.kernel;
  kt.gemm({kk, arch.conv_filters, rows, ws.patches.data(), 1, kk, ws.grad_a.data(), arch.conv_filters,
           grads[0].values.data(), arch.conv_filters, false});
  kt.column_sums(rows, arch.conv_filters, ws.grad_a.data(), grads[1].values.data(), false);
  return loss;
}

ParameterSet gradients(const QNetwork& net, std::span<const TrainingRow> batch) {
  ParameterSet grads;
  Workspace ws;
  gradients(net, batch, grads, ws);
  return grads;
}

AdamState AdamState::for_architecture(const Architecture& arch) {
  AdamState s;
  s.m = zeros_like(arch);
  s.v = zeros_like(arch);
  return s;
}

void adam_step(QNetwork& net, const ParameterSet& grads, AdamState& opt) {
  auto& params = net.parameters();
  if (grads.size() != params.size() || opt.m.size() != params.size() || opt.v.size() != params.size()) {
    throw std::invalid_argument("gradient / optimizer state does not match the network");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape != params[i].shape || opt.m[i].shape != params[i].shape ||
        opt.v[i].shape != params[i].shape) {
      throw std::invalid_argument("gradient / optimizer tensor shape mismatch");
    }
  }
  opt.step += 1;
  const double t = static_cast<double>(opt.step);
  kernels::AdamArgs args;
  args.lr = opt.learning_rate / (1.0 + opt.decay * (t - 1.0));
  args.beta1 = opt.beta1;
  args.beta2 = opt.beta2;
  args.eps = opt.epsilon;
  args.correction1 = 1.0 / (1.0 - std::pow(opt.beta1, t));
  args.correction2 = 1.0 / (1.0 - std::pow(opt.beta2, t));
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    args.n = params[i].size();
    args.param = params[i].values.data();
    args.grad = grads[i].values.data();
    args.m = opt.m[i].values.data();
    args.v = opt.v[i].values.data();
    kt.adam_update(args);
  }
}

}  // namespace toric
