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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "toric/kernels.hpp"

namespace toric::kernels {

namespace {

Backend detect() {
  if (const char* env = std::getenv("TORIC_KERNELS"); env != nullptr && std::string_view(env) == "scalar") {
    return Backend::Scalar;
  }
  return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported;
#else
  return false;
#endif
}

const KernelTable& table(Backend backend) {
  if (backend == Backend::Avx2) {
    if (!avx2_supported()) throw std::runtime_error("AVX2/FMA kernels requested on a CPU without AVX2/FMA");
    return avx2::kTable;
  }
  return scalar::kTable;
}

Backend active_backend() { return current().load(); }

void set_active_backend(Backend backend) {
  table(backend);
  current().store(backend);
}

const KernelTable& active() { return table(current().load()); }

}  // namespace toric::kernels
