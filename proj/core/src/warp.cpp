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

#include "volreg/warp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "volreg/error.hpp"
#include "volreg/parallel.hpp"

namespace volreg {
namespace {

struct AxisTap {
  int i0;
  int i1;
  double f;
  bool inside;  // coordinate strictly within the grid, derivative defined
};

inline AxisTap axis_tap(double c, int n) {
  if (n == 1) return {0, 0, 0.0, false};
  bool inside = true;
  if (c <= 0.0) {
    inside = c == 0.0;
    c = 0.0;
  } else if (c >= n - 1) {
    inside = c == n - 1;
    c = n - 1;
  }
  int i0 = static_cast<int>(c);
  if (i0 >= n - 1) i0 = n - 2;
  return {i0, i0 + 1, c - i0, inside};
}

struct Stencil {
  std::size_t idx[8];
  double w[8];
};

inline Stencil make_stencil(const Dims& d, const AxisTap& tx, const AxisTap& ty, const AxisTap& tz) {
  Stencil s{};
  const double wx[2] = {1.0 - tx.f, tx.f};
  const double wy[2] = {1.0 - ty.f, ty.f};
  const double wz[2] = {1.0 - tz.f, tz.f};
  const int ix[2] = {tx.i0, tx.i1};
  const int iy[2] = {ty.i0, ty.i1};
  const int iz[2] = {tz.i0, tz.i1};
  int n = 0;
  for (int c = 0; c < 2; ++c) {
    for (int b = 0; b < 2; ++b) {
      for (int a = 0; a < 2; ++a) {
        s.idx[n] = d.index(ix[a], iy[b], iz[c]);
        s.w[n] = wx[a] * wy[b] * wz[c];
        ++n;
      }
    }
  }
  return s;
}

inline double apply_stencil(const Stencil& s, const float* data) {
  double acc = 0.0;
  for (int n = 0; n < 8; ++n) acc += s.w[n] * data[s.idx[n]];
  return acc;
}

inline Stencil stencil_at(const Dims& d, const Vec3& p) {
  return make_stencil(d, axis_tap(p[0], d.nx), axis_tap(p[1], d.ny), axis_tap(p[2], d.nz));
}

}  // namespace

float sample_trilinear(const Volume3& vol, const Vec3& p) {
  return static_cast<float>(apply_stencil(stencil_at(vol.dims(), p), vol.data().data()));
}

IntensityAndGradient sample_trilinear_gradient(const Volume3& vol, const Vec3& p) {
  const Dims& d = vol.dims();
  const AxisTap t[3] = {axis_tap(p[0], d.nx), axis_tap(p[1], d.ny), axis_tap(p[2], d.nz)};
  const float* data = vol.data().data();
  double corner[2][2][2];
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a)
        corner[c][b][a] = data[d.index(a ? t[0].i1 : t[0].i0, b ? t[1].i1 : t[1].i0, c ? t[2].i1 : t[2].i0)];
  const double fx = t[0].f, fy = t[1].f, fz = t[2].f;
  IntensityAndGradient out;
  double gx = 0.0, gy = 0.0, gz = 0.0, v = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double wz = c ? fz : 1.0 - fz;
    const double dz = c ? 1.0 : -1.0;
    for (int b = 0; b < 2; ++b) {
      const double wy = b ? fy : 1.0 - fy;
      const double dy = b ? 1.0 : -1.0;
      for (int a = 0; a < 2; ++a) {
        const double wx = a ? fx : 1.0 - fx;
        const double dx = a ? 1.0 : -1.0;
        const double val = corner[c][b][a];
        v += wx * wy * wz * val;
        gx += dx * wy * wz * val;
        gy += wx * dy * wz * val;
        gz += wx * wy * dz * val;
      }
    }
  }
  out.value = v;
  out.gradient = {t[0].inside && d.nx > 1 ? gx : 0.0, t[1].inside && d.ny > 1 ? gy : 0.0,
                  t[2].inside && d.nz > 1 ? gz : 0.0};
  return out;
}

Vec3 sample_field(const VectorField3& field, const Vec3& p) {
  const Stencil s = stencil_at(field.dims(), p);
  return {apply_stencil(s, field.component(0).data()), apply_stencil(s, field.component(1).data()),
          apply_stencil(s, field.component(2).data())};
}

Volume3 apply_displacement(const Volume3& vol, const DisplacementField3& u) {
  require_same_dims(vol.dims(), u.dims(), "apply_displacement");
  const Dims d = vol.dims();
  Volume3 out(d, vol.spacing(), vol.origin());
  out.set_scale_percent(vol.scale_percent());
  const float* src = vol.data().data();
  const float* ux = u.component(0).data();
  const float* uy = u.component(1).data();
  const float* uz = u.component(2).data();
  float* dst = out.data().data();
  parallel_for(0, d.nz, [&](int k) {
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        const std::size_t n = d.index(i, j, k);
        const Stencil s = stencil_at(d, {i + static_cast<double>(ux[n]), j + static_cast<double>(uy[n]),
                                         k + static_cast<double>(uz[n])});
        dst[n] = static_cast<float>(apply_stencil(s, src));
      }
    }
  });
  return out;
}

DisplacementField3 compose(const DisplacementField3& a, const DisplacementField3& b) {
  require_same_dims(a.dims(), b.dims(), "compose");
  const Dims d = a.dims();
  DisplacementField3 out(d);
  const float* a_c[3] = {a.component(0).data(), a.component(1).data(), a.component(2).data()};
  const float* b_c[3] = {b.component(0).data(), b.component(1).data(), b.component(2).data()};
  float* o_c[3] = {out.component(0).data(), out.component(1).data(), out.component(2).data()};
  parallel_for(0, d.nz, [&](int k) {
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        const std::size_t n = d.index(i, j, k);
        const double bx = b_c[0][n], by = b_c[1][n], bz = b_c[2][n];
        const Stencil s = stencil_at(d, {i + bx, j + by, k + bz});
        o_c[0][n] = static_cast<float>(bx + apply_stencil(s, a_c[0]));
        o_c[1][n] = static_cast<float>(by + apply_stencil(s, a_c[1]));
        o_c[2][n] = static_cast<float>(bz + apply_stencil(s, a_c[2]));
      }
    }
  });
  return out;
}

int default_exp_steps(const VelocityField3& v) {
  const double m = v.max_magnitude();
  int steps = 1;
  while (m / std::ldexp(1.0, steps) > 0.5) ++steps;
  return steps;
}

DisplacementField3 exp_velocity(const VelocityField3& v, int steps) {
  if (steps <= 0) steps = default_exp_steps(v);
  const double m = v.max_magnitude();
  if (m / std::ldexp(1.0, steps) > 0.5) {
    throw InvalidArgument("exp_velocity: " + std::to_string(steps) + " squaring steps leave max |v|/2^steps = " +
                          std::to_string(m / std::ldexp(1.0, steps)) + " > 0.5 voxel");
  }
  DisplacementField3 u = v.v;
  u *= std::ldexp(1.0, -steps);
  for (int s = 0; s < steps; ++s) u = compose(u, u);
  return u;
}

Volume3 jacobian_determinant(const DisplacementField3& u) {
  const Dims d = u.dims();
  if (d.nx < 3 || d.ny < 3 || d.nz < 3) {
    throw InvalidArgument("jacobian_determinant needs at least 3 voxels per axis, got " + to_string(d));
  }
  Volume3 out(d);
  const float* c[3] = {u.component(0).data(), u.component(1).data(), u.component(2).data()};
  parallel_for(0, d.nz, [&](int k) {
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        const int p[3] = {i, j, k};
        double g[3][3];  // g[comp][axis]
        for (int a = 0; a < 3; ++a) {
          int lo[3] = {i, j, k};
          int hi[3] = {i, j, k};
          double h = 2.0;
          if (p[a] == 0) {
            hi[a] += 1;
            h = 1.0;
          } else if (p[a] == d[a] - 1) {
            lo[a] -= 1;
            h = 1.0;
          } else {
            lo[a] -= 1;
            hi[a] += 1;
          }
          const std::size_t nl = d.index(lo[0], lo[1], lo[2]);
          const std::size_t nh = d.index(hi[0], hi[1], hi[2]);
          for (int comp = 0; comp < 3; ++comp) g[comp][a] = (c[comp][nh] - c[comp][nl]) / h;
        }
        const double m00 = 1.0 + g[0][0], m01 = g[0][1], m02 = g[0][2];
        const double m10 = g[1][0], m11 = 1.0 + g[1][1], m12 = g[1][2];
        const double m20 = g[2][0], m21 = g[2][1], m22 = 1.0 + g[2][2];
        const double det = m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
                           m02 * (m10 * m21 - m11 * m20);
        out.at(i, j, k) = static_cast<float>(det);
      }
    }
  });
  return out;
}

double positive_jacobian_fraction(const Volume3& det) {
  const Dims d = det.dims();
  std::size_t total = 0, positive = 0;
  for (int k = 1; k < d.nz - 1; ++k)
    for (int j = 1; j < d.ny - 1; ++j)
      for (int i = 1; i < d.nx - 1; ++i) {
        ++total;
        if (det.at(i, j, k) > 0.0f) ++positive;
      }
  return total == 0 ? 1.0 : static_cast<double>(positive) / static_cast<double>(total);
}

DisplacementField3 resample_field(const DisplacementField3& u, Dims out) {
  const Dims in = u.dims();
  if (in == out) return u;
  const Vec3 ratio{static_cast<double>(out.nx) / in.nx, static_cast<double>(out.ny) / in.ny,
                   static_cast<double>(out.nz) / in.nz};
  DisplacementField3 result(out);
  parallel_for(0, out.nz, [&](int k) {
    for (int j = 0; j < out.ny; ++j) {
      for (int i = 0; i < out.nx; ++i) {
        const Vec3 p{(i + 0.5) / ratio[0] - 0.5, (j + 0.5) / ratio[1] - 0.5, (k + 0.5) / ratio[2] - 0.5};
        const Vec3 v = sample_field(u, p);
        result.set(out.index(i, j, k), {v[0] * ratio[0], v[1] * ratio[1], v[2] * ratio[2]});
      }
    }
  });
  return result;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double w = std::exp(-0.5 * t * t / (sigma * sigma));
    k[static_cast<std::size_t>(t + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

void smooth_axis(std::vector<double>& buf, const Dims& d, int axis, const std::vector<double>& kernel, EdgeMode mode) {
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> out(buf.size());
  const int n = d[axis];
  parallel_for(0, d.nz, [&](int k) {
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        const int p = axis == 0 ? i : (axis == 1 ? j : k);
        double acc = 0.0, wsum = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int q = p + t;
          if (q < 0 || q >= n) continue;
          const double w = kernel[static_cast<std::size_t>(t + radius)];
          const std::size_t src = axis == 0 ? d.index(q, j, k) : (axis == 1 ? d.index(i, q, k) : d.index(i, j, q));
          acc += w * buf[src];
          wsum += w;
        }
        out[d.index(i, j, k)] = mode == EdgeMode::Renormalize && wsum > 0.0 ? acc / wsum : acc;
      }
    }
  });
  buf.swap(out);
}

}  // namespace

void gaussian_smooth(VectorField3& field, double sigma, EdgeMode mode) {
  if (!(sigma > 0.0)) return;
  const auto kernel = gaussian_kernel(sigma);
  const Dims d = field.dims();
  for (int c = 0; c < 3; ++c) {
    auto comp = field.component(c);
    std::vector<double> buf(comp.begin(), comp.end());
    for (int axis = 0; axis < 3; ++axis) smooth_axis(buf, d, axis, kernel, mode);
    std::transform(buf.begin(), buf.end(), comp.begin(), [](double v) { return static_cast<float>(v); });
  }
}

VectorField3 to_physical_units(const DisplacementField3& u, const Vec3& spacing) {
  VectorField3 out = u;
  for (int c = 0; c < 3; ++c) {
    for (float& v : out.component(c)) v = static_cast<float>(v * spacing[static_cast<std::size_t>(c)]);
  }
  return out;
}

VectorField3::VectorField3(Dims dims) : dims_(dims) {
  if (!dims.positive()) throw InvalidArgument("field dims must be positive, got " + to_string(dims));
  for (auto& c : comp_) c.assign(dims.voxels(), 0.0f);
}

double VectorField3::max_magnitude() const {
  double m = 0.0;
  for (std::size_t n = 0; n < size(); ++n) {
    const double x = comp_[0][n], y = comp_[1][n], z = comp_[2][n];
    m = std::max(m, x * x + y * y + z * z);
  }
  return std::sqrt(m);
}

bool VectorField3::all_finite() const {
  for (const auto& c : comp_)
    for (float v : c)
      if (!std::isfinite(v)) return false;
  return true;
}

VectorField3& VectorField3::operator*=(double s) {
  for (auto& c : comp_)
    for (float& v : c) v = static_cast<float>(v * s);
  return *this;
}

}  // namespace volreg
