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
#include <filesystem>
#include <span>
#include <vector>

#include "volreg/field.hpp"
#include "volreg/similarity.hpp"
#include "volreg/volume.hpp"

namespace volreg {

/// x' = A x + b on voxel coordinates, stored row-major as [A | b].
struct AffineTransform {
  std::array<double, 12> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};

  static AffineTransform identity() { return {}; }
  static AffineTransform translation(const Vec3& t);
  // Rotation by angle (radians) about the z axis through centre c.
  static AffineTransform rotation_z(double angle, const Vec3& c);

  double& linear(int r, int c) { return m[static_cast<std::size_t>(4 * r + c)]; }
  double linear(int r, int c) const { return m[static_cast<std::size_t>(4 * r + c)]; }
  double& offset(int r) { return m[static_cast<std::size_t>(4 * r + 3)]; }
  double offset(int r) const { return m[static_cast<std::size_t>(4 * r + 3)]; }

  Vec3 apply(const Vec3& p) const;
  double linear_determinant() const;
  // True when |det A| is below 1e-6, the near-singular warning threshold.
  bool near_singular() const;
};

DisplacementField3 affine_to_displacement(const AffineTransform& t, Dims dims);

struct RegularizerWeights {
  double diffusion = 1.0;
  double bending = 0.01;
};

/// Uniform cubic B-spline basis B0..B3 at local coordinate r in [0, 1).
std::array<double, 4> bspline_basis(double r);

/// Cubic B-spline free-form deformation lattice.
///
/// The lattice is defined on a reference ("domain") grid: control point
/// (i, j, k) sits at ((i-1)δ, (j-1)δ, (k-1)δ) in domain voxels, so one cell of
/// margin surrounds the volume, and each axis holds floor((n-1)/δ) + 4 points.
/// Coefficients are displacements in domain voxel units. Evaluating the grid
/// on a smaller (pyramid) grid maps voxel centres onto the domain and rescales
/// the vectors, which is equivalent to scaling δ with the level.
class FfdGrid {
 public:
  FfdGrid() = default;
  FfdGrid(Dims domain, double spacing);

  const Dims& domain() const { return domain_; }
  double spacing() const { return spacing_; }
  const Dims& lattice() const { return lattice_; }
  std::size_t control_count() const { return lattice_.voxels(); }

  std::span<double> component(int c) { return coeff_[static_cast<std::size_t>(c)]; }
  std::span<const double> component(int c) const { return coeff_[static_cast<std::size_t>(c)]; }
  double& coeff(int c, int i, int j, int k) { return coeff_[static_cast<std::size_t>(c)][lattice_.index(i, j, k)]; }
  double coeff(int c, int i, int j, int k) const {
    return coeff_[static_cast<std::size_t>(c)][lattice_.index(i, j, k)];
  }
  Vec3 control_position(int i, int j, int k) const {
    return {(i - 1) * spacing_, (j - 1) * spacing_, (k - 1) * spacing_};
  }

  friend bool operator==(const FfdGrid&, const FfdGrid&) = default;

 private:
  Dims domain_{};
  double spacing_ = 0.0;
  Dims lattice_{};
  std::array<std::vector<double>, 3> coeff_;
};

/// Text header ("volreg-ffd 1", domain, spacing, lattice) followed by the
/// x, y, z coefficient planes as little-endian float32.
void save_ffd(const FfdGrid& g, const std::filesystem::path& path);
FfdGrid load_ffd(const std::filesystem::path& path);

/// Gradient (or any per-coefficient quantity) with the lattice's layout.
using ControlVectors = std::array<std::vector<double>, 3>;

/// u(x) = sum over the 4x4x4 support of B_l(r) B_m(s) B_n(t) c. dims may be
/// the domain or a smaller pyramid level of it.
DisplacementField3 ffd_to_displacement(const FfdGrid& g, Dims dims);

/// Adjoint of ffd_to_displacement: dE/dc given dE/du on a grid of size dims.
ControlVectors ffd_adjoint(const FfdGrid& g, const DisplacementField3& d_field);

/// Per-axis voxel range [first, last) influenced by lattice index c at dims.
struct SupportRange {
  int first = 0;
  int last = 0;
};
std::array<SupportRange, 3> control_support(const FfdGrid& g, Dims dims, int i, int j, int k);

struct BendingEnergy {
  double value = 0.0;
  ControlVectors gradient;
};

/// Mean over interior lattice nodes of the summed squared second derivatives
/// (u_xx^2 + u_yy^2 + u_zz^2 + 2u_xy^2 + 2u_xz^2 + 2u_yz^2) of every
/// component, evaluated analytically at the nodes.
BendingEnergy bending_energy(const FfdGrid& g);

struct DiffusionEnergy {
  double value = 0.0;
  VectorField3 gradient;
};

/// Mean over voxels of the squared forward differences of every component
/// along every axis (missing forward neighbours contribute nothing).
DiffusionEnergy diffusion_energy(const VectorField3& u);

/// Similarity of fixed against moving warped by the grid, histogrammed with
/// the fixed and moving intensity ranges (warping never leaves the latter).
double ffd_similarity(const Volume3& fixed, const Volume3& moving, const FfdGrid& g, Objective objective,
                      int bins = 64);

/// Central-difference derivative of NMI (or MI) with respect to every
/// control coefficient. Each perturbation re-warps only the support box of
/// its control point and updates the joint histogram incrementally.
ControlVectors similarity_gradient_on_controls(const Volume3& fixed, const Volume3& moving, const FfdGrid& g,
                                               Objective objective, double step = 0.1, int bins = 64);

inline ControlVectors nmi_gradient_on_controls(const Volume3& fixed, const Volume3& moving, const FfdGrid& g,
                                               double step = 0.1, int bins = 64) {
  return similarity_gradient_on_controls(fixed, moving, g, Objective::Nmi, step, bins);
}

}  // namespace volreg
