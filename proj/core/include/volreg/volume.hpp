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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "volreg/types.hpp"

namespace volreg {

/// Scalar intensity grid with physical spacing (micrometers) and origin.
///
/// Data is stored as 32-bit floats in x-fastest order. A default-constructed
/// volume is empty; every other constructor establishes the invariants
/// (positive dims, positive spacing, payload length nx*ny*nz).
class Volume3 {
 public:
  Volume3() = default;
  explicit Volume3(Dims dims, Vec3 spacing = {1.0, 1.0, 1.0}, Vec3 origin = {0.0, 0.0, 0.0});
  Volume3(Dims dims, std::vector<float> data, Vec3 spacing = {1.0, 1.0, 1.0},
          Vec3 origin = {0.0, 0.0, 0.0});

  const Dims& dims() const { return dims_; }
  const Vec3& spacing() const { return spacing_; }
  const Vec3& origin() const { return origin_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  float& at(int i, int j, int k) { return data_[dims_.index(i, j, k)]; }
  float at(int i, int j, int k) const { return data_[dims_.index(i, j, k)]; }
  float& operator[](std::size_t n) { return data_[n]; }
  float operator[](std::size_t n) const { return data_[n]; }

  void set_spacing(Vec3 spacing);
  void set_origin(Vec3 origin) { origin_ = origin; }

  // Resolution annotation carried through I/O (e.g. 10 for a 10% volume); 0 when unset.
  int scale_percent() const { return scale_percent_; }
  void set_scale_percent(int percent) { scale_percent_ = percent; }

  float min_value() const;
  float max_value() const;
  double mean() const;

  friend bool operator==(const Volume3&, const Volume3&) = default;

 private:
  Dims dims_{};
  Vec3 spacing_{1.0, 1.0, 1.0};
  Vec3 origin_{0.0, 0.0, 0.0};
  int scale_percent_ = 0;
  std::vector<float> data_;
};

void require_same_dims(const Dims& a, const Dims& b, const char* what);

/// Per-axis output extent of a downscale: round-half-up of factor*n, at least 2.
int scaled_extent(int n, double factor);

/// Box-average downscale by factor in (0, 1]. Output voxels average their
/// preimage with weights proportional to geometric overlap; spacing grows by
/// n_in/n_out per axis.
Volume3 downscale(const Volume3& vol, double factor);

/// Box-average resample to explicit dims, each no larger than the input's.
Volume3 downscale_to(const Volume3& vol, Dims out);

struct FlipAxes {
  bool x = false;
  bool y = false;
  bool z = false;

  bool none() const { return !x && !y && !z; }
  // "", "X", "Y", "Z", "XYZ", any subset in any order; case-insensitive.
  static FlipAxes parse(const std::string& text);
  std::string to_string() const;
  friend bool operator==(const FlipAxes&, const FlipAxes&) = default;
};

Volume3 flip(const Volume3& vol, FlipAxes axes);

/// Deterministic brain-like test volume: ellipsoidal body with internal lobes
/// and band-limited texture. Background is exactly 0; body voxels lie in
/// [100, 1000]. Requires every extent >= 16.
Volume3 make_phantom(Dims dims, std::uint64_t seed);

}  // namespace volreg
