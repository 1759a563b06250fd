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

// Built with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "toric/kernels.hpp"

namespace toric::kernels::avx2 {

namespace {

constexpr int kMr = 4;
constexpr int kNr = 8;
constexpr int kKc = 256;

template <int MR>
void micro_kernel(int nr, int kc, const double* a, std::ptrdiff_t a_row, std::ptrdiff_t a_col, const double* packed,
                  double* c, std::ptrdiff_t ldc) {
  __m256d acc0[MR];
  __m256d acc1[MR];
  for (int i = 0; i < MR; ++i) {
    acc0[i] = _mm256_setzero_pd();
    acc1[i] = _mm256_setzero_pd();
  }
  for (int p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_load_pd(packed + p * kNr);
    const __m256d b1 = _mm256_load_pd(packed + p * kNr + 4);
    const double* ap = a + p * a_col;
    for (int i = 0; i < MR; ++i) {
      const __m256d av = _mm256_broadcast_sd(ap + i * a_row);
      acc0[i] = _mm256_fmadd_pd(av, b0, acc0[i]);
      acc1[i] = _mm256_fmadd_pd(av, b1, acc1[i]);
    }
  }
  for (int i = 0; i < MR; ++i) {
    double* crow = c + i * ldc;
    if (nr == kNr) {
      _mm256_storeu_pd(crow, _mm256_add_pd(_mm256_loadu_pd(crow), acc0[i]));
      _mm256_storeu_pd(crow + 4, _mm256_add_pd(_mm256_loadu_pd(crow + 4), acc1[i]));
    } else {
      alignas(32) double tmp[kNr];
      _mm256_store_pd(tmp, acc0[i]);
      _mm256_store_pd(tmp + 4, acc1[i]);
      for (int j = 0; j < nr; ++j) crow[j] += tmp[j];
    }
  }
}

struct AlignedPanel {
  AlignedPanel() : storage(kKc * kNr + 4) {
    auto addr = reinterpret_cast<std::uintptr_t>(storage.data());
    data = storage.data() + ((32 - addr % 32) % 32) / sizeof(double);
  }
  std::vector<double> storage;
  double* data;
};

void gemm(const GemmArgs& g) {
  if (!g.accumulate) {
    for (int i = 0; i < g.m; ++i) std::fill_n(g.c + i * g.ldc, g.n, 0.0);
  }
  thread_local AlignedPanel panel;
  double* packed = panel.data;
  for (int k0 = 0; k0 < g.k; k0 += kKc) {
    const int kc = std::min(kKc, g.k - k0);
    for (int n0 = 0; n0 < g.n; n0 += kNr) {
      const int nr = std::min(kNr, g.n - n0);
      for (int p = 0; p < kc; ++p) {
        const double* brow = g.b + (k0 + p) * g.ldb + n0;
        double* dst = packed + p * kNr;
        int j = 0;
        for (; j < nr; ++j) dst[j] = brow[j];
        for (; j < kNr; ++j) dst[j] = 0.0;
      }
      for (int m0 = 0; m0 < g.m; m0 += kMr) {
        const int mr = std::min(kMr, g.m - m0);
        const double* a = g.a + m0 * g.a_row + k0 * g.a_col;
        double* c = g.c + m0 * g.ldc + n0;
        switch (mr) {
          case 4:
            micro_kernel<4>(nr, kc, a, g.a_row, g.a_col, packed, c, g.ldc);
            break;
          case 3:
            micro_kernel<3>(nr, kc, a, g.a_row, g.a_col, packed, c, g.ldc);
            break;
          case 2:
            micro_kernel<2>(nr, kc, a, g.a_row, g.a_col, packed, c, g.ldc);
            break;
          default:
            micro_kernel<1>(nr, kc, a, g.a_row, g.a_col, packed, c, g.ldc);
            break;
        }
      }
    }
  }
}

void bias_activation(int rows, int cols, double* x, const double* bias, bool relu) {
  const __m256d zero = _mm256_setzero_pd();
  for (int r = 0; r < rows; ++r) {
    double* row = x + static_cast<std::ptrdiff_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d v = _mm256_add_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(bias + c));
      if (relu) v = _mm256_max_pd(v, zero);
      _mm256_storeu_pd(row + c, v);
    }
    for (; c < cols; ++c) {
      double v = row[c] + bias[c];
      row[c] = (relu && v < 0.0) ? 0.0 : v;
    }
  }
}

void relu_backward(std::size_t n, double* grad, const double* pre) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(grad + i, _mm256_and_pd(_mm256_loadu_pd(grad + i), keep));
  }
  for (; i < n; ++i) {
    if (pre[i] <= 0.0) grad[i] = 0.0;
  }
}

void column_sums(int rows, int cols, const double* x, double* out, bool accumulate) {
  if (!accumulate) std::fill_n(out, cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    const double* row = x + static_cast<std::ptrdiff_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      _mm256_storeu_pd(out + c, _mm256_add_pd(_mm256_loadu_pd(out + c), _mm256_loadu_pd(row + c)));
    }
    for (; c < cols; ++c) out[c] += row[c];
  }
}

void adam_update(const AdamArgs& a) {
  const __m256d b1 = _mm256_set1_pd(a.beta1);
  const __m256d b2 = _mm256_set1_pd(a.beta2);
  const __m256d one_b1 = _mm256_set1_pd(1.0 - a.beta1);
  const __m256d one_b2 = _mm256_set1_pd(1.0 - a.beta2);
  const __m256d c1 = _mm256_set1_pd(a.correction1);
  const __m256d c2 = _mm256_set1_pd(a.correction2);
  const __m256d lr = _mm256_set1_pd(a.lr);
  const __m256d eps = _mm256_set1_pd(a.eps);
  std::size_t i = 0;
  for (; i + 4 <= a.n; i += 4) {
    const __m256d g = _mm256_loadu_pd(a.grad + i);
    // Same operation order as the scalar kernel, no FMA contraction, so both
    // backends produce identical parameters.
    __m256d m = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(a.m + i)), _mm256_mul_pd(one_b1, g));
    __m256d v = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(a.v + i)),
                              _mm256_mul_pd(_mm256_mul_pd(one_b2, g), g));
    _mm256_storeu_pd(a.m + i, m);
    _mm256_storeu_pd(a.v + i, v);
    const __m256d mhat = _mm256_mul_pd(m, c1);
    const __m256d vhat = _mm256_mul_pd(v, c2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
    _mm256_storeu_pd(a.param + i, _mm256_sub_pd(_mm256_loadu_pd(a.param + i), step));
  }
  for (; i < a.n; ++i) {
    const double g = a.grad[i];
    a.m[i] = a.beta1 * a.m[i] + (1.0 - a.beta1) * g;
    a.v[i] = a.beta2 * a.v[i] + (1.0 - a.beta2) * g * g;
    const double mhat = a.m[i] * a.correction1;
    const double vhat = a.v[i] * a.correction2;
    a.param[i] -= a.lr * mhat / (std::sqrt(vhat) + a.eps);
  }
}

}  // namespace

const KernelTable kTable{"avx2", gemm, bias_activation, relu_backward, column_sums, adam_update};

}  // namespace toric::kernels::avx2
