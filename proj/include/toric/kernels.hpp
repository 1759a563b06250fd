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

#include <cstddef>
#include <string_view>

namespace toric::kernels {

/// C (M x N, row stride ldc) = [C +] A * B.
/// A is addressed as a[m * a_row + k * a_col], so transposed operands need no
/// copy. B is K x N, row-major with row stride ldb.
struct GemmArgs {
  int m = 0;
  int n = 0;
  int k = 0;
  const double* a = nullptr;
  std::ptrdiff_t a_row = 0;
  std::ptrdiff_t a_col = 0;
  const double* b = nullptr;
  std::ptrdiff_t ldb = 0;
  double* c = nullptr;
  std::ptrdiff_t ldc = 0;
  bool accumulate = false;
};

struct AdamArgs {
  std::size_t n = 0;
  double* param = nullptr;
  const double* grad = nullptr;
  double* m = nullptr;
  double* v = nullptr;
  double lr = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double eps = 0.0;
  // 1 / (1 - beta^t) bias corrections.
  double correction1 = 1.0;
  double correction2 = 1.0;
};

struct KernelTable {
  std::string_view name;
  void (*gemm)(const GemmArgs&);
  /// x[r][c] += bias[c]; then max(x, 0) when relu is set.
  void (*bias_activation)(int rows, int cols, double* x, const double* bias, bool relu);
  /// grad[i] = 0 wherever pre[i] <= 0.
  void (*relu_backward)(std::size_t n, double* grad, const double* pre);
  /// out[c] (+)= sum_r x[r][c].
  void (*column_sums)(int rows, int cols, const double* x, double* out, bool accumulate);
  void (*adam_update)(const AdamArgs&);
};

enum class Backend { Scalar, Avx2 };

bool avx2_supported();

/// Kernel table for a backend; throws std::runtime_error if the CPU lacks it.
const KernelTable& table(Backend backend);

/// Best available backend, chosen once at first use. TORIC_KERNELS=scalar in
/// the environment forces the reference kernels.
Backend active_backend();
void set_active_backend(Backend backend);
const KernelTable& active();

namespace scalar {
extern const KernelTable kTable;
}

namespace avx2 {
extern const KernelTable kTable;
}

}  // namespace toric::kernels
