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

#include <array>
#include <span>
#include <vector>

#include "volreg/types.hpp"

namespace volreg {

/// Dense 3-vector field on a voxel grid, stored as three component planes
/// (ux, uy, uz), each x-fastest. Vectors are in voxel units.
class VectorField3 {
 public:
  VectorField3() = default;
  explicit VectorField3(Dims dims);

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return dims_.voxels(); }

  std::span<float> component(int c) { return comp_[static_cast<std::size_t>(c)]; }
  std::span<const float> component(int c) const { return comp_[static_cast<std::size_t>(c)]; }

  Vec3 at(std::size_t n) const { return {comp_[0][n], comp_[1][n], comp_[2][n]}; }
  void set(std::size_t n, const Vec3& v) {
    comp_[0][n] = static_cast<float>(v[0]);
    comp_[1][n] = static_cast<float>(v[1]);
    comp_[2][n] = static_cast<float>(v[2]);
  }

  double max_magnitude() const;
  bool all_finite() const;
  VectorField3& operator*=(double s);

  friend bool operator==(const VectorField3&, const VectorField3&) = default;

 private:
  Dims dims_{};
  std::array<std::vector<float>, 3> comp_;
};

/// Displacement u: the warp maps x to x + u(x).
using DisplacementField3 = VectorField3;

/// Stationary velocity whose flow at t = 1 is a diffeomorphic displacement.
struct VelocityField3 {
  VectorField3 v;
  double max_magnitude() const { return v.max_magnitude(); }
};

}  // namespace volreg
