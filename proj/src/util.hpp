// src/util.hpp

// Copyright 2026 The FCM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FCM_UTIL_HPP_
#define FCM_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace fcm {

// Writes to "<path>.tmp.<pid>" then renames over path.
void WriteFileAtomic(const std::filesystem::path &path,
                     const std::string &contents);

std::string ReadFile(const std::filesystem::path &path);

// Portable draws from a 64-bit Mersenne twister; the std distributions are
// implementation-defined, which would break cross-platform determinism.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  uint64_t Below(uint64_t n) { return static_cast<uint64_t>(Uniform() * n); }
  bool Bernoulli(double p) { return Uniform() < p; }
  // Index drawn proportionally to weights (all >= 0, sum > 0).
  size_t Categorical(const std::vector<double> &weights);

  template <typename T>
  void Shuffle(std::vector<T> &v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[Below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

// Worker count used by ParallelFor; 0 means hardware concurrency.
void SetThreadCount(int n);
int ThreadCount();

// Runs fn(i) for i in [0, n). Callers write results into slot i so that any
// reduction afterwards happens in index order.
void ParallelFor(size_t n, const std::function<void(size_t)> &fn);

}  // namespace fcm

#endif  // FCM_UTIL_HPP_
