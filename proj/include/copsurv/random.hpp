// Copyright 2026 The copsurv Authors
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

#ifndef COPSURV_RANDOM_HPP
#define COPSURV_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace copsurv {

/// Stream tags used to key independent random streams off one master seed.
enum class StreamTag : std::uint64_t {
  impute = 1,
  resample = 2,
  forward = 3,
  permute = 4,
  simulate = 5,
  bootstrap = 6,
  split = 7,
};

namespace detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator: the k-th output is a fixed hash of (key, k), where
/// the key is derived from a master seed and a path of stream identifiers.
/// Draws therefore depend only on (seed, path, k), never on which thread or
/// in which order streams are consumed.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) : key_(detail::mix64(seed)) {
    for (const auto id : path) key_ = detail::mix64(key_ ^ detail::mix64(id + detail::kGolden));
  }

  StreamRng(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0)
      : StreamRng(seed, {static_cast<std::uint64_t>(tag), a, b}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return detail::mix64(key_ + detail::kGolden * ++counter_); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform index in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; bias is < n / 2^64 and irrelevant here.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace copsurv

#endif  // COPSURV_RANDOM_HPP
