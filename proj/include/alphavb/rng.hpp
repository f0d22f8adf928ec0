// Copyright 2026 The alphavb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef ALPHAVB_RNG_HPP
#define ALPHAVB_RNG_HPP

#include <array>
#include <cstdint>
#include <span>

namespace alphavb {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based generator. The state is (seed, stream, index); draw k of a
/// stream is a pure function of those three numbers, so results do not
/// depend on platform, thread scheduling, or how many other streams exist.
///
/// Non-uniform variates use inversion of a single uniform (never rejection),
/// which keeps the draw-to-counter mapping fixed.
class CounterRng
{
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream)
  {
  }

  /// Independent generator for a sub-task (replication, component, ...).
  [[nodiscard]] CounterRng substream(std::uint64_t stream) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Standard normal via inverse CDF.
  double normal();
  /// Gamma(shape, 1) via inverse regularized incomplete gamma.
  double gamma(double shape);
  /// Index drawn from unnormalized nonnegative weights.
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return index_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  std::uint64_t buffered_ = 0;
  bool has_buffered_ = false;
};

/// SplitMix64 finalizer; used to derive child seeds from (seed, tag).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

} // namespace alphavb

#endif
