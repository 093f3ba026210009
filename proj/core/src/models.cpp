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

#include "volreg/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "volreg/error.hpp"
#include "volreg/parallel.hpp"
#include "volreg/warp.hpp"

namespace volreg {

AffineTransform AffineTransform::translation(const Vec3& t) {
  AffineTransform a;
  for (int r = 0; r < 3; ++r) a.offset(r) = t[static_cast<std::size_t>(r)];
  return a;
}

AffineTransform AffineTransform::rotation_z(double angle, const Vec3& c) {
  AffineTransform a;
  const double cs = std::cos(angle), sn = std::sin(angle);
  a.linear(0, 0) = cs;
  a.linear(0, 1) = -sn;
  a.linear(1, 0) = sn;
  a.linear(1, 1) = cs;
  for (int r = 0; r < 3; ++r) {
    double rc = 0.0;
    for (int k = 0; k < 3; ++k) rc += a.linear(r, k) * c[static_cast<std::size_t>(k)];
    a.offset(r) = c[static_cast<std::size_t>(r)] - rc;
  }
  return a;
}

Vec3 AffineTransform::apply(const Vec3& p) const {
  Vec3 out{};
  for (int r = 0; r < 3; ++r) {
    out[static_cast<std::size_t>(r)] = linear(r, 0) * p[0] + linear(r, 1) * p[1] + linear(r, 2) * p[2] + offset(r);
  }
  return out;
}

double AffineTransform::linear_determinant() const {
  return linear(0, 0) * (linear(1, 1) * linear(2, 2) - linear(1, 2) * linear(2, 1)) -
         linear(0, 1) * (linear(1, 0) * linear(2, 2) - linear(1, 2) * linear(2, 0)) +
         linear(0, 2) * (linear(1, 0) * linear(2, 1) - linear(1, 1) * linear(2, 0));
}

bool AffineTransform::near_singular() const { return std::abs(linear_determinant()) < 1e-6; }

DisplacementField3 affine_to_displacement(const AffineTransform& t, Dims dims) {
  DisplacementField3 u(dims);
  parallel_for(0, dims.nz, [&](int k) {
    for (int j = 0; j < dims.ny; ++j) {
      for (int i = 0; i < dims.nx; ++i) {
        const Vec3 p{static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)};
        const Vec3 q = t.apply(p);
        u.set(dims.index(i, j, k), {q[0] - p[0], q[1] - p[1], q[2] - p[2]});
      }
    }
  });
  return u;
}

std::array<double, 4> bspline_basis(double r) {
  const double r2 = r * r, r3 = r2 * r;
  const double s = 1.0 - r;
  return {s * s * s / 6.0, (3.0 * r3 - 6.0 * r2 + 4.0) / 6.0, (-3.0 * r3 + 3.0 * r2 + 3.0 * r + 1.0) / 6.0,
          r3 / 6.0};
}

FfdGrid::FfdGrid(Dims domain, double spacing) : domain_(domain), spacing_(spacing) {
  if (!domain.positive()) throw InvalidArgument("FFD domain must be positive, got " + to_string(domain));
  if (!(spacing >= 2.0)) throw InvalidArgument("FFD control spacing must be at least 2 voxels");
  auto extent = [&](int n) { return static_cast<int>(std::floor((n - 1) / spacing)) + 4; };
  lattice_ = Dims{extent(domain.nx), extent(domain.ny), extent(domain.nz)};
  for (auto& c : coeff_) c.assign(lattice_.voxels(), 0.0);
}

void save_ffd(const FfdGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const Dims d = g.domain();
  const Dims l = g.lattice();
  char spacing[40];
  std::snprintf(spacing, sizeof(spacing), "%.17g", g.spacing());
  out << "volreg-ffd 1\n"
      << "domain " << d.nx << " " << d.ny << " " << d.nz << "\n"
      << "spacing " << spacing << "\n"
      << "lattice " << l.nx << " " << l.ny << " " << l.nz << "\n";
  for (int c = 0; c < 3; ++c) {
    for (double v : g.component(c)) {
      const auto f = static_cast<float>(v);
      char bytes[4];
      std::memcpy(bytes, &f, 4);
      out.write(bytes, 4);
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

FfdGrid load_ffd(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  auto next = [&](const char* key) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated FFD header");
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word != key) throw FormatError(path.string() + ": expected '" + key + "' in FFD header");
    return ss.str().substr(word.size());
  };
  if (next("volreg-ffd") != " 1") throw FormatError(path.string() + ": unsupported FFD version");
  Dims d{};
  Dims l{};
  double spacing = 0.0;
  std::istringstream(next("domain")) >> d.nx >> d.ny >> d.nz;
  std::istringstream(next("spacing")) >> spacing;
  std::istringstream(next("lattice")) >> l.nx >> l.ny >> l.nz;
  FfdGrid g(d, spacing);
  if (!(g.lattice() == l)) throw FormatError(path.string() + ": lattice does not match domain and spacing");
  for (int c = 0; c < 3; ++c) {
    for (double& v : g.component(c)) {
      char bytes[4];
      if (!in.read(bytes, 4)) throw FormatError(path.string() + ": truncated FFD payload");
      float f = 0.0f;
      std::memcpy(&f, bytes, 4);
      v = f;
    }
  }
  return g;
}

namespace {

// Per-axis evaluation tables: lattice cell and basis weights for every voxel.
struct AxisMap {
  std::vector<int> cell;
  std::vector<std::array<double, 4>> w;
  double ratio = 1.0;  // level extent / domain extent
};

AxisMap axis_map(int level_n, int domain_n, double spacing, int lattice_n) {
  AxisMap m;
  m.ratio = static_cast<double>(level_n) / domain_n;
  m.cell.resize(static_cast<std::size_t>(level_n));
  m.w.resize(static_cast<std::size_t>(level_n));
  for (int x = 0; x < level_n; ++x) {
    const double X = level_n == domain_n ? static_cast<double>(x) : (x + 0.5) / m.ratio - 0.5;
    const double t = X / spacing;
    const int cell = static_cast<int>(std::floor(t));
    if (cell < 0 || cell + 3 >= lattice_n) {
      throw InvalidArgument("FFD lattice too small for grid extent " + std::to_string(level_n));
    }
    m.cell[static_cast<std::size_t>(x)] = cell;
    m.w[static_cast<std::size_t>(x)] = bspline_basis(t - cell);
  }
  return m;
}

std::array<AxisMap, 3> axis_maps(const FfdGrid& g, Dims dims) {
  return {axis_map(dims.nx, g.domain().nx, g.spacing(), g.lattice().nx),
          axis_map(dims.ny, g.domain().ny, g.spacing(), g.lattice().ny),
          axis_map(dims.nz, g.domain().nz, g.spacing(), g.lattice().nz)};
}

SupportRange support_of(const AxisMap& m, int c) {
  // cell is non-decreasing in x; the point influences voxels with cell in [c-3, c].
  const auto lo = std::lower_bound(m.cell.begin(), m.cell.end(), c - 3);
  const auto hi = std::upper_bound(m.cell.begin(), m.cell.end(), c);
  return {static_cast<int>(lo - m.cell.begin()), static_cast<int>(hi - m.cell.begin())};
}

}  // namespace

DisplacementField3 ffd_to_displacement(const FfdGrid& g, Dims dims) {
  const auto maps = axis_maps(g, dims);
  const Dims L = g.lattice();
  DisplacementField3 u(dims);
  const double* cf[3] = {g.component(0).data(), g.component(1).data(), g.component(2).data()};
  float* out[3] = {u.component(0).data(), u.component(1).data(), u.component(2).data()};
  parallel_for(0, dims.nz, [&](int k) {
    const int cz = maps[2].cell[static_cast<std::size_t>(k)];
    const auto& wz = maps[2].w[static_cast<std::size_t>(k)];
    for (int j = 0; j < dims.ny; ++j) {
      const int cy = maps[1].cell[static_cast<std::size_t>(j)];
      const auto& wy = maps[1].w[static_cast<std::size_t>(j)];
      for (int i = 0; i < dims.nx; ++i) {
        const int cx = maps[0].cell[static_cast<std::size_t>(i)];
        const auto& wx = maps[0].w[static_cast<std::size_t>(i)];
        double acc[3] = {0.0, 0.0, 0.0};
        for (int n = 0; n < 4; ++n) {
          for (int m = 0; m < 4; ++m) {
            const double wzy = wz[static_cast<std::size_t>(n)] * wy[static_cast<std::size_t>(m)];
            const std::size_t row = L.index(cx, cy + m, cz + n);
            for (int l = 0; l < 4; ++l) {
              const double w = wzy * wx[static_cast<std::size_t>(l)];
              for (int c = 0; c < 3; ++c) acc[c] += w * cf[c][row + static_cast<std::size_t>(l)];
            }
          }
        }
        const std::size_t q = dims.index(i, j, k);
        for (int c = 0; c < 3; ++c) out[c][q] = static_cast<float>(acc[c] * maps[static_cast<std::size_t>(c)].ratio);
      }
    }
  });
  return u;
}

ControlVectors ffd_adjoint(const FfdGrid& g, const DisplacementField3& d_field) {
  const Dims dims = d_field.dims();
  const auto maps = axis_maps(g, dims);
  const Dims L = g.lattice();
  ControlVectors grad;
  for (auto& c : grad) c.assign(L.voxels(), 0.0);
  const float* df[3] = {d_field.component(0).data(), d_field.component(1).data(), d_field.component(2).data()};
  // Parallel over lattice z-planes: each task owns the control points in its
  // plane and gathers from the voxels they support, so no two tasks write the
  // same coefficient and the summation order is fixed.
  parallel_for(0, L.nz, [&](int pz) {
    const SupportRange sz = support_of(maps[2], pz);
    for (int k = sz.first; k < sz.last; ++k) {
      const int n = pz - maps[2].cell[static_cast<std::size_t>(k)];
      const double wz = maps[2].w[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
      for (int j = 0; j < dims.ny; ++j) {
        const int cy = maps[1].cell[static_cast<std::size_t>(j)];
        const auto& wy = maps[1].w[static_cast<std::size_t>(j)];
        for (int i = 0; i < dims.nx; ++i) {
          const int cx = maps[0].cell[static_cast<std::size_t>(i)];
          const auto& wx = maps[0].w[static_cast<std::size_t>(i)];
          const std::size_t q = dims.index(i, j, k);
          const double v[3] = {df[0][q] * maps[0].ratio, df[1][q] * maps[1].ratio, df[2][q] * maps[2].ratio};
          if (v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0) continue;
          for (int m = 0; m < 4; ++m) {
            const double wzy = wz * wy[static_cast<std::size_t>(m)];
            const std::size_t row = L.index(cx, cy + m, pz);
            for (int l = 0; l < 4; ++l) {
              const double w = wzy * wx[static_cast<std::size_t>(l)];
              for (int c = 0; c < 3; ++c) grad[static_cast<std::size_t>(c)][row + static_cast<std::size_t>(l)] += w * v[c];
            }
          }
        }
      }
    }
  });
  return grad;
}

std::array<SupportRange, 3> control_support(const FfdGrid& g, Dims dims, int i, int j, int k) {
  const auto maps = axis_maps(g, dims);
  return {support_of(maps[0], i), support_of(maps[1], j), support_of(maps[2], k)};
}

BendingEnergy bending_energy(const FfdGrid& g) {
  const Dims L = g.lattice();
  BendingEnergy out;
  for (auto& c : out.gradient) c.assign(L.voxels(), 0.0);
  if (L.nx < 3 || L.ny < 3 || L.nz < 3) return out;

  // Cubic B-spline value, first and second derivative at a knot, offsets -1, 0, +1.
  constexpr double B[3] = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  constexpr double D1[3] = {-0.5, 0.0, 0.5};
  constexpr double D2[3] = {1.0, -2.0, 1.0};
  const double inv_d2 = 1.0 / (g.spacing() * g.spacing());

  struct Term {
    const double* fx;
    const double* fy;
    const double* fz;
    double mult;
  };
  const Term terms[6] = {{D2, B, B, 1.0},   {B, D2, B, 1.0},   {B, B, D2, 1.0},
                         {D1, D1, B, 2.0},  {D1, B, D1, 2.0},  {B, D1, D1, 2.0}};
  double stencil[6][27];
  for (int t = 0; t < 6; ++t)
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) stencil[t][9 * c + 3 * b + a] = terms[t].fx[a] * terms[t].fy[b] * terms[t].fz[c] * inv_d2;

  const double count = static_cast<double>(L.nx - 2) * (L.ny - 2) * (L.nz - 2);
  double total = 0.0;
  for (int comp = 0; comp < 3; ++comp) {
    const auto coeff = g.component(comp);
    auto& grad = out.gradient[static_cast<std::size_t>(comp)];
    for (int k = 1; k < L.nz - 1; ++k) {
      for (int j = 1; j < L.ny - 1; ++j) {
        for (int i = 1; i < L.nx - 1; ++i) {
          std::size_t idx[27];
          double val[27];
          for (int c = 0; c < 3; ++c)
            for (int b = 0; b < 3; ++b)
              for (int a = 0; a < 3; ++a) {
                const int s = 9 * c + 3 * b + a;
                idx[s] = L.index(i + a - 1, j + b - 1, k + c - 1);
                val[s] = coeff[idx[s]];
              }
          for (int t = 0; t < 6; ++t) {
            double deriv = 0.0;
            for (int s = 0; s < 27; ++s) deriv += stencil[t][s] * val[s];
            total += terms[t].mult * deriv * deriv;
            const double scale = 2.0 * terms[t].mult * deriv / count;
            for (int s = 0; s < 27; ++s) grad[idx[s]] += scale * stencil[t][s];
          }
        }
      }
    }
  }
  out.value = total / count;
  return out;
}

DiffusionEnergy diffusion_energy(const VectorField3& u) {
  const Dims d = u.dims();
  DiffusionEnergy out{0.0, VectorField3(d)};
  const double inv_n = 1.0 / static_cast<double>(d.voxels());
  const std::size_t step[3] = {1, static_cast<std::size_t>(d.nx),
                               static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny)};
  std::vector<double> slice_sums(static_cast<std::size_t>(d.nz), 0.0);
  for (int c = 0; c < 3; ++c) {
    const float* v = u.component(c).data();
    float* g = out.gradient.component(c).data();
    parallel_for(0, d.nz, [&](int k) {
      double s = 0.0;
      for (int j = 0; j < d.ny; ++j) {
        for (int i = 0; i < d.nx; ++i) {
          const int p[3] = {i, j, k};
          const std::size_t q = d.index(i, j, k);
          double grad = 0.0;
          for (int a = 0; a < 3; ++a) {
            if (p[a] + 1 < d[a]) {
              const double fwd = static_cast<double>(v[q + step[a]]) - v[q];
              s += fwd * fwd;
              grad -= fwd;
            }
            if (p[a] > 0) grad += static_cast<double>(v[q]) - v[q - step[a]];
          }
          g[q] = static_cast<float>(2.0 * grad * inv_n);
        }
      }
      slice_sums[static_cast<std::size_t>(k)] += s;
    });
  }
  out.value = ordered_sum(slice_sums) * inv_n;
  return out;
}

namespace {

struct HistogramSetup {
  IntensityRange fixed_range;
  IntensityRange moving_range;
};

HistogramSetup histogram_setup(const Volume3& fixed, const Volume3& moving) {
  return {intensity_range(fixed), intensity_range(moving)};
}

void require_histogram_objective(Objective o) {
  if (o != Objective::Nmi && o != Objective::Mi) {
    throw InvalidArgument("control-point finite differences support mi and nmi only, got " + to_string(o));
  }
}

double score_from_entropies(Objective o, double ha, double hb, double hab) {
  if (o == Objective::Mi) return std::max(0.0, (ha + hb) - hab);
  return hab > 0.0 ? (ha + hb) / hab : 1.0;
}

}  // namespace

double ffd_similarity(const Volume3& fixed, const Volume3& moving, const FfdGrid& g, Objective objective, int bins) {
  require_histogram_objective(objective);
  require_same_dims(fixed.dims(), moving.dims(), "ffd_similarity");
  const HistogramSetup hs = histogram_setup(fixed, moving);
  const Volume3 warped = apply_displacement(moving, ffd_to_displacement(g, fixed.dims()));
  const JointHistogram h = joint_histogram(fixed, warped, bins, hs.fixed_range, hs.moving_range);
  return objective == Objective::Mi ? mi_from_histogram(h) : nmi_from_histogram(h);
}

ControlVectors similarity_gradient_on_controls(const Volume3& fixed, const Volume3& moving, const FfdGrid& g,
                                               Objective objective, double step, int bins) {
  require_histogram_objective(objective);
  require_same_dims(fixed.dims(), moving.dims(), "similarity_gradient_on_controls");
  if (!(step > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  if (bins < 2) throw InvalidArgument("histogram needs at least 2 bins");

  const Dims dims = fixed.dims();
  const std::size_t N = dims.voxels();
  const auto maps = axis_maps(g, dims);
  const Dims L = g.lattice();
  const HistogramSetup hs = histogram_setup(fixed, moving);
  const DisplacementField3 u = ffd_to_displacement(g, dims);
  const std::size_t B = static_cast<std::size_t>(bins);

  // n ln n lookup so that entropy updates cost O(1) per changed cell.
  std::vector<double> nlogn(N + 1, 0.0);
  for (std::size_t n = 1; n <= N; ++n) nlogn[n] = static_cast<double>(n) * std::log(static_cast<double>(n));

  std::vector<int> fixed_bin(N), warped_bin(N);
  std::vector<std::int64_t> joint(B * B, 0), marg_f(B, 0), marg_m(B, 0);
  // Trilinear interpolation is linear along an axis inside one cell, so a
  // perturbation that stays in the cell is value + dt * slope exactly.
  std::vector<float> base_value(N);
  std::array<std::vector<float>, 3> slope, room_lo, room_hi;
  for (int a = 0; a < 3; ++a) {
    slope[static_cast<std::size_t>(a)].assign(N, 0.0f);
    room_lo[static_cast<std::size_t>(a)].assign(N, -1.0f);
    room_hi[static_cast<std::size_t>(a)].assign(N, -1.0f);
  }
  {
    const Volume3 warped = apply_displacement(moving, u);
    parallel_for(0, dims.nz, [&](int k) {
      for (int j = 0; j < dims.ny; ++j) {
        for (int i = 0; i < dims.nx; ++i) {
          const std::size_t q = dims.index(i, j, k);
          const Vec3 p{i + static_cast<double>(u.component(0)[q]), j + static_cast<double>(u.component(1)[q]),
                       k + static_cast<double>(u.component(2)[q])};
          base_value[q] = warped[q];
          const IntensityAndGradient vg = sample_trilinear_gradient(moving, p);
          for (std::size_t a = 0; a < 3; ++a) {
            const int n = dims[static_cast<int>(a)];
            if (n < 2 || p[a] < 0.0 || p[a] > n - 1) continue;
            const int i0 = std::min(static_cast<int>(p[a]), n - 2);
            const double f = p[a] - i0;
            slope[a][q] = static_cast<float>(vg.gradient[a]);
            room_lo[a][q] = static_cast<float>(f);
            room_hi[a][q] = static_cast<float>(1.0 - f);
          }
        }
      }
    });
    for (std::size_t q = 0; q < N; ++q) {
      fixed_bin[q] = bin_index(fixed[q], hs.fixed_range, bins);
      warped_bin[q] = bin_index(warped[q], hs.moving_range, bins);
      ++joint[static_cast<std::size_t>(fixed_bin[q]) * B + static_cast<std::size_t>(warped_bin[q])];
      ++marg_f[static_cast<std::size_t>(fixed_bin[q])];
      ++marg_m[static_cast<std::size_t>(warped_bin[q])];
    }
  }
  auto sum_nlogn = [&](const std::vector<std::int64_t>& counts) {
    double s = 0.0;
    for (auto c : counts) s += nlogn[static_cast<std::size_t>(c)];
    return s;
  };
  const double n_total = static_cast<double>(N);
  const double log_n = std::log(n_total);
  const double h_fixed = log_n - sum_nlogn(marg_f) / n_total;
  const double s_joint0 = sum_nlogn(joint);
  const double s_moving0 = sum_nlogn(marg_m);

  ControlVectors grad;
  for (auto& c : grad) c.assign(L.voxels(), 0.0);

  std::array<std::vector<SupportRange>, 3> support;
  for (int a = 0; a < 3; ++a) {
    for (int c = 0; c < L[a]; ++c) support[static_cast<std::size_t>(a)].push_back(support_of(maps[static_cast<std::size_t>(a)], c));
  }
  const float* uc[3] = {u.component(0).data(), u.component(1).data(), u.component(2).data()};
  const int controls = static_cast<int>(L.voxels());

#pragma omp parallel num_threads(thread_count())
  {
    std::vector<std::int64_t> joint_t = joint;
    std::vector<std::int64_t> marg_t = marg_m;
    std::vector<std::size_t> changed;
    std::vector<int> changed_bin;

#pragma omp for schedule(dynamic, 4)
    for (int cp = 0; cp < controls; ++cp) {
      const int ci = cp % L.nx;
      const int cj = (cp / L.nx) % L.ny;
      const int ck = cp / (L.nx * L.ny);
      const SupportRange sx = support[0][static_cast<std::size_t>(ci)];
      const SupportRange sy = support[1][static_cast<std::size_t>(cj)];
      const SupportRange sz = support[2][static_cast<std::size_t>(ck)];
      if (sx.first >= sx.last || sy.first >= sy.last || sz.first >= sz.last) continue;

      for (int d = 0; d < 3; ++d) {
        const auto dd = static_cast<std::size_t>(d);
        double score[2] = {0.0, 0.0};
        for (int side = 0; side < 2; ++side) {
          const double delta = (side == 0 ? step : -step) * maps[static_cast<std::size_t>(d)].ratio;
          double ds_joint = 0.0, ds_moving = 0.0;
          changed.clear();
          changed_bin.clear();
          for (int k = sz.first; k < sz.last; ++k) {
            const double wz = maps[2].w[static_cast<std::size_t>(k)][static_cast<std::size_t>(ck - maps[2].cell[static_cast<std::size_t>(k)])];
            for (int j = sy.first; j < sy.last; ++j) {
              const double wy = maps[1].w[static_cast<std::size_t>(j)][static_cast<std::size_t>(cj - maps[1].cell[static_cast<std::size_t>(j)])];
              for (int i = sx.first; i < sx.last; ++i) {
                const double w = wz * wy * maps[0].w[static_cast<std::size_t>(i)][static_cast<std::size_t>(ci - maps[0].cell[static_cast<std::size_t>(i)])];
                if (w == 0.0) continue;
                const std::size_t q = dims.index(i, j, k);
                const double dt = delta * w;
                float value;
                if (dt >= -room_lo[dd][q] && dt <= room_hi[dd][q]) {
                  value = static_cast<float>(base_value[q] + dt * slope[dd][q]);
                } else {
                  Vec3 p{i + static_cast<double>(uc[0][q]), j + static_cast<double>(uc[1][q]),
                         k + static_cast<double>(uc[2][q])};
                  p[dd] += dt;
                  value = sample_trilinear(moving, p);
                }
                const int nb = bin_index(value, hs.moving_range, bins);
                const int ob = warped_bin[q];
                if (nb == ob) continue;
                const std::size_t row = static_cast<std::size_t>(fixed_bin[q]) * B;
                auto bump = [&](std::vector<std::int64_t>& h, std::size_t cell, int by, double& acc) {
                  const auto before = h[cell];
                  h[cell] += by;
                  acc += nlogn[static_cast<std::size_t>(h[cell])] - nlogn[static_cast<std::size_t>(before)];
                };
                bump(joint_t, row + static_cast<std::size_t>(ob), -1, ds_joint);
                bump(joint_t, row + static_cast<std::size_t>(nb), +1, ds_joint);
                bump(marg_t, static_cast<std::size_t>(ob), -1, ds_moving);
                bump(marg_t, static_cast<std::size_t>(nb), +1, ds_moving);
                changed.push_back(q);
                changed_bin.push_back(nb);
              }
            }
          }
          const double h_moving = log_n - (s_moving0 + ds_moving) / n_total;
          const double h_joint = log_n - (s_joint0 + ds_joint) / n_total;
          score[side] = score_from_entropies(objective, h_fixed, h_moving, h_joint);
          for (std::size_t t = 0; t < changed.size(); ++t) {
            const std::size_t q = changed[t];
            const std::size_t row = static_cast<std::size_t>(fixed_bin[q]) * B;
            --joint_t[row + static_cast<std::size_t>(changed_bin[t])];
            ++joint_t[row + static_cast<std::size_t>(warped_bin[q])];
            --marg_t[static_cast<std::size_t>(changed_bin[t])];
            ++marg_t[static_cast<std::size_t>(warped_bin[q])];
          }
        }
        grad[static_cast<std::size_t>(d)][static_cast<std::size_t>(cp)] = (score[0] - score[1]) / (2.0 * step);
      }
    }
  }
  return grad;
}

}  // namespace volreg
