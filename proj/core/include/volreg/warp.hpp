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

#include "volreg/field.hpp"
#include "volreg/volume.hpp"

namespace volreg {

// Trilinear interpolation at a continuous voxel coordinate. Coordinates
// outside [0, n-1] are clamped to the boundary per axis.
float sample_trilinear(const Volume3& vol, const Vec3& p);

struct IntensityAndGradient {
  double value = 0.0;
  Vec3 gradient{};  // exact derivative of the trilinear interpolant; 0 along clamped axes
};

IntensityAndGradient sample_trilinear_gradient(const Volume3& vol, const Vec3& p);

Vec3 sample_field(const VectorField3& field, const Vec3& p);

/// output(x) = vol(x + u(x)) with trilinear sampling and clamp-to-edge.
Volume3 apply_displacement(const Volume3& vol, const DisplacementField3& u);

/// Displacement of (id + a) o (id + b): result(x) = b(x) + a(x + b(x)).
DisplacementField3 compose(const DisplacementField3& a, const DisplacementField3& b);

/// Smallest step count s >= 1 with max|v| / 2^s <= 0.5 voxel.
int default_exp_steps(const VelocityField3& v);

/// Scaling and squaring. steps <= 0 selects default_exp_steps. Throws
/// InvalidArgument when the chosen step count leaves the initial
/// displacement above half a voxel.
DisplacementField3 exp_velocity(const VelocityField3& v, int steps = 0);

/// det(I + grad u), central differences inside, one-sided at the faces.
Volume3 jacobian_determinant(const DisplacementField3& u);

/// Fraction of interior voxels (one-voxel border excluded) with det > 0.
double positive_jacobian_fraction(const Volume3& det);

/// Transfers a field between pyramid levels. Voxel centres follow the
/// box-average convention of downscale_to, and vectors are rescaled by the
/// per-axis extent ratio so they stay in voxel units of the output grid.
DisplacementField3 resample_field(const DisplacementField3& u, Dims out);

enum class EdgeMode {
  Zero,         // samples outside the grid count as 0
  Renormalize,  // kernel weights are renormalised over in-grid taps
};

/// Separable Gaussian smoothing of every component, truncated at 3 sigma.
void gaussian_smooth(VectorField3& field, double sigma, EdgeMode mode);

/// Converts voxel-unit displacements to physical units using per-axis spacing.
VectorField3 to_physical_units(const DisplacementField3& u, const Vec3& spacing);

}  // namespace volreg
