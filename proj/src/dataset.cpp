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

#include "toric/dataset.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "toric/binary_io.hpp"
#include "toric/error.hpp"

namespace toric {

namespace {

constexpr char kMagic[8] = {'T', 'O', 'R', 'I', 'C', 'D', 'S', '\0'};

std::size_t record_bytes(int d) { return (2 * static_cast<std::size_t>(d) * d + 7) / 8; }

}  // namespace

std::vector<HiddenState> sample_states(int d, double p, std::uint64_t seed, std::uint64_t first,
                                       std::uint64_t count) {
  const CodeDistance distance(d);
  std::vector<HiddenState> out;
  out.reserve(count);
  std::uint64_t index = first;
  const std::uint64_t end = first + count;
  while (index < end) {
    const std::uint64_t shard = index / kShardSize;
    Rng rng = Rng::stream(seed, shard);
    const HiddenState zero(distance);
    // Skip the records of this shard that precede `index`.
    for (std::uint64_t i = shard * kShardSize; i < index; ++i) apply_iid_errors(zero, p, rng);
    const std::uint64_t shard_end = std::min(end, (shard + 1) * kShardSize);
    for (; index < shard_end; ++index) out.push_back(apply_iid_errors(zero, p, rng));
  }
  return out;
}

std::vector<HiddenState> sample_states(int d, double p, std::uint64_t seed, std::uint64_t count) {
  return sample_states(d, p, seed, 0, count);
}

void write_dataset(const std::string& path, const Dataset& dataset) {
  binio::Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(dataset.d));
  w.f64(dataset.p);
  w.u64(dataset.states.size());
  w.u64(dataset.seed);
  const std::size_t bytes = record_bytes(dataset.d);
  std::vector<std::uint8_t> record(bytes);
  for (const auto& s : dataset.states) {
    if (s.distance() != dataset.d) throw std::invalid_argument("dataset mixes lattice sizes");
    std::fill(record.begin(), record.end(), 0);
    std::size_t bit = 0;
    for (auto span : {s.top_bits(), s.left_bits()}) {
      for (std::uint8_t v : span) {
        if (v) record[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
        ++bit;
      }
    }
    w.bytes(record.data(), record.size());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open dataset for writing: " + path);
  out.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError("failed writing dataset: " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    throw IoError("not a dataset file (bad magic): " + path);
  }
  binio::Reader r(data);
  try {
    r.skip(sizeof kMagic);
    const std::uint32_t version = r.u32();
    if (version != kDatasetVersion) throw IoError("unsupported dataset version " + std::to_string(version));
    Dataset ds;
    ds.d = static_cast<int>(r.u32());
    const CodeDistance distance(ds.d);
    ds.p = r.f64();
    const std::uint64_t count = r.u64();
    ds.seed = r.u64();
    const std::size_t bytes = record_bytes(ds.d);
    if (r.remaining() != count * bytes) throw IoError("dataset size does not match its header: " + path);
    ds.states.reserve(count);
    const int d = ds.d;
    for (std::uint64_t i = 0; i < count; ++i) {
      auto rec = r.take(bytes);
      HiddenState s(distance);
      std::size_t bit = 0;
      for (int which = 0; which < 2; ++which) {
        for (int row = 0; row < d; ++row) {
          for (int col = 0; col < d; ++col, ++bit) {
            const bool v = (rec[bit / 8] >> (bit % 8)) & 1u;
            if (which == 0) {
              s.set_top(row, col, v);
            } else {
              s.set_left(row, col, v);
            }
          }
        }
      }
      ds.states.push_back(std::move(s));
    }
    return ds;
  } catch (const binio::Truncated&) {
    throw IoError("dataset is truncated: " + path);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("dataset header is invalid: ") + e.what());
  }
}

Dataset generate_dataset(int d, double p, std::uint64_t count, std::uint64_t seed, const std::string& path) {
  Dataset ds{d, p, seed, sample_states(d, p, seed, count)};
  write_dataset(path, ds);
  return ds;
}

}  // namespace toric
