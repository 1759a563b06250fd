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

#include <cmath>

#include "toric/kernels.hpp"

namespace toric::kernels::scalar {

namespace {

void gemm(const GemmArgs& g) {
  for (int i = 0; i < g.m; ++i) {
    double* crow = g.c + i * g.ldc;
    if (!g.accumulate) {
      for (int j = 0; j < g.n; ++j) crow[j] = 0.0;
    }
    for (int p = 0; p < g.k; ++p) {
      const double a = g.a[i * g.a_row + p * g.a_col];
      const double* brow = g.b + p * g.ldb;
      for (int j = 0; j < g.n; ++j) crow[j] += a * brow[j];
    }
  }
}

void bias_activation(int rows, int cols, double* x, const double* bias, bool relu) {
  for (int r = 0; r < rows; ++r) {
    double* row = x + static_cast<std::ptrdiff_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      double v = row[c] + bias[c];
      row[c] = (relu && v < 0.0) ? 0.0 : v;
    }
  }
}

void relu_backward(std::size_t n, double* grad, const double* pre) {
  for (std::size_t i = 0; i < n; ++i) {
    if (pre[i] <= 0.0) grad[i] = 0.0;
  }
}

void column_sums(int rows, int cols, const double* x, double* out, bool accumulate) {
  if (!accumulate) {
    for (int c = 0; c < cols; ++c) out[c] = 0.0;
  }
  for (int r = 0; r < rows; ++r) {
    const double* row = x + static_cast<std::ptrdiff_t>(r) * cols;
    for (int c = 0; c < cols; ++c) out[c] += row[c];
  }
}

void adam_update(const AdamArgs& a) {
  for (std::size_t i = 0; i < a.n; ++i) {
    const double g = a.grad[i];
    a.m[i] = a.beta1 * a.m[i] + (1.0 - a.beta1) * g;
    a.v[i] = a.beta2 * a.v[i] + (1.0 - a.beta2) * g * g;
    const double mhat = a.m[i] * a.correction1;
    const double vhat = a.v[i] * a.correction2;
    a.param[i] -= a.lr * mhat / (std::sqrt(vhat) + a.eps);
  }
}

}  // namespace

const KernelTable kTable{"scalar", gemm, bias_activation, relu_backward, column_sums, adam_update};

}  // namespace toric::kernels::scalar
