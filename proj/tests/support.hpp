/*
Copyright 2026 The volreg Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "volreg/field.hpp"
#include "volreg/rng.hpp"
#include "volreg/volume.hpp"

namespace volreg::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("volreg_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Volume3 random_volume(Dims d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  SplitMix64 rng(seed);
  Volume3 v(d);
  for (auto& x : v.data()) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

// Sum of a few random low-frequency cosines: smooth, non-constant everywhere.
inline Volume3 smooth_volume(Dims d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double k[4][3], ph[4], amp[4];
  for (int w = 0; w < 4; ++w) {
    for (auto& c : k[w]) c = rng.uniform(-0.6, 0.6);
    ph[w] = rng.uniform(0.0, 6.28);
    amp[w] = rng.uniform(0.5, 1.5);
  }
  Volume3 v(d);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        double s = 2.0;
        for (int w = 0; w < 4; ++w) s += amp[w] * std::cos(k[w][0] * x + k[w][1] * y + k[w][2] * z + ph[w]);
        v.at(x, y, z) = static_cast<float>(s);
      }
  return v;
}

inline VectorField3 constant_field(Dims d, Vec3 c) {
  VectorField3 f(d);
  for (std::size_t n = 0; n < f.size(); ++n) f.set(n, c);
  return f;
}

// Smooth random field with components bounded by amplitude.
inline VectorField3 smooth_field(Dims d, std::uint64_t seed, double amplitude, double max_k = 0.4) {
  SplitMix64 rng(seed);
  VectorField3 f(d);
  double k[3][2][3], ph[3][2];
  for (auto& comp : k)
    for (auto& wave : comp)
      for (auto& c : wave) c = rng.uniform(-max_k, max_k);
  for (auto& comp : ph)
    for (auto& p : comp) p = rng.uniform(0.0, 6.28);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        Vec3 u{};
        for (int c = 0; c < 3; ++c) {
          for (int w = 0; w < 2; ++w) {
            u[static_cast<std::size_t>(c)] +=
                0.5 * amplitude * std::sin(k[c][w][0] * x + k[c][w][1] * y + k[c][w][2] * z + ph[c][w]);
          }
        }
        f.set(d.index(x, y, z), u);
      }
  return f;
}

}  // namespace volreg::testing
