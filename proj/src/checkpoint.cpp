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

#include "toric/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "toric/binary_io.hpp"

namespace toric {

namespace {

constexpr char kMagic[8] = {'T', 'O', 'R', 'I', 'C', 'Q', 'N', '\0'};

using Kind = CheckpointError::Kind;

}  // namespace

void save_checkpoint(const std::string& path, const QNetwork& net, const AdamState& opt,
                     const TrainingCounters& counters) {
  const Architecture& arch = net.architecture();
  binio::Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u32(sizeof(double));
  w.u32(static_cast<std::uint32_t>(arch.d));
  w.u32(static_cast<std::uint32_t>(arch.conv_filters));
  w.u32(static_cast<std::uint32_t>(arch.kernel));
  w.u32(static_cast<std::uint32_t>(arch.stride));
  w.u32(static_cast<std::uint32_t>(arch.outputs));
  w.u32(static_cast<std::uint32_t>(arch.dense_widths.size()));
  for (int width : arch.dense_widths) w.u32(static_cast<std::uint32_t>(width));
  w.u64(counters.learning_steps);
  w.u64(counters.episodes);
  w.u64(counters.steps_since_sync);
  const auto& params = net.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& t : params) {
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (int s : t.shape) w.u32(static_cast<std::uint32_t>(s));
  }
  w.u64(opt.step);
  w.f64(opt.learning_rate);
  w.f64(opt.beta1);
  w.f64(opt.beta2);
  w.f64(opt.epsilon);
  w.f64(opt.decay);
  for (const ParameterSet* set : {&params, &opt.m, &opt.v}) {
    if (set->size() != params.size()) throw std::invalid_argument("optimizer state does not match network");
    for (const auto& t : *set) {
      for (double x : t.values) w.f64(x);
    }
  }
  w.u64(binio::fnv1a(w.buffer()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::Io, "cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw CheckpointError(Kind::Io, "failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path, const std::optional<Architecture>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::Io, "cannot open checkpoint: " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(Kind::Format, "not a checkpoint file (bad magic): " + path);
  }
  binio::Reader r(data);
  try {
    r.skip(sizeof kMagic);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
      throw CheckpointError(Kind::Version, "unsupported checkpoint version " + std::to_string(version));
    }
    if (data.size() < 8 + sizeof(std::uint64_t) ||
        binio::fnv1a(std::span(data).first(data.size() - 8)) != binio::load_u64(data.data() + data.size() - 8)) {
      throw CheckpointError(Kind::Corrupt, "checkpoint checksum mismatch: " + path);
    }
    const std::uint32_t float_width = r.u32();
    if (float_width != sizeof(double)) {
      throw CheckpointError(Kind::Format, "unsupported stored float width " + std::to_string(float_width));
    }
    Architecture arch;
    arch.d = static_cast<int>(r.u32());
    arch.conv_filters = static_cast<int>(r.u32());
    arch.kernel = static_cast<int>(r.u32());
    arch.stride = static_cast<int>(r.u32());
    arch.outputs = static_cast<int>(r.u32());
    const std::uint32_t dense = r.u32();
    if (dense > 64) throw CheckpointError(Kind::Corrupt, "implausible dense layer count");
    arch.dense_widths.resize(dense);
    for (auto& width : arch.dense_widths) width = static_cast<int>(r.u32());
    try {
      arch.validate();
    } catch (const std::invalid_argument& e) {
      throw CheckpointError(Kind::Corrupt, std::string("invalid architecture: ") + e.what());
    }
    if (expected && !(*expected == arch)) {
      throw CheckpointError(Kind::Shape, "checkpoint architecture (d=" + std::to_string(arch.d) +
                                             ") does not match the requested one (d=" +
                                             std::to_string(expected->d) + ")");
    }
    TrainingCounters counters;
    counters.learning_steps = r.u64();
    counters.episodes = r.u64();
    counters.steps_since_sync = r.u64();

    const auto shapes = arch.parameter_shapes();
    const std::uint32_t tensors = r.u32();
    if (tensors != shapes.size()) throw CheckpointError(Kind::Shape, "tensor count does not match architecture");
    for (const auto& shape : shapes) {
      const std::uint32_t rank = r.u32();
      if (rank != shape.size()) throw CheckpointError(Kind::Shape, "tensor rank does not match architecture");
      for (int s : shape) {
        if (r.u32() != static_cast<std::uint32_t>(s)) {
          throw CheckpointError(Kind::Shape, "tensor shape does not match architecture");
        }
      }
    }

    Checkpoint ck{QNetwork(arch), AdamState::for_architecture(arch), counters};
    ck.optimizer.step = r.u64();
    ck.optimizer.learning_rate = r.f64();
    ck.optimizer.beta1 = r.f64();
    ck.optimizer.beta2 = r.f64();
    ck.optimizer.epsilon = r.f64();
    ck.optimizer.decay = r.f64();
    for (ParameterSet* set : {&ck.network.parameters(), &ck.optimizer.m, &ck.optimizer.v}) {
      for (auto& t : *set) {
        for (double& x : t.values) x = r.f64();
      }
    }
    if (r.remaining() != 8) throw CheckpointError(Kind::Corrupt, "trailing bytes in checkpoint");
    return ck;
  } catch (const binio::Truncated&) {
    throw CheckpointError(Kind::Corrupt, "checkpoint is truncated: " + path);
  }
}

}  // namespace toric
