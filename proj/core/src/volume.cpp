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

#include "volreg/volume.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <utility>

#include "volreg/error.hpp"
#include "volreg/parallel.hpp"
#include "volreg/rng.hpp"

namespace volreg {

Volume3::Volume3(Dims dims, Vec3 spacing, Vec3 origin)
    : Volume3(dims, std::vector<float>(dims.positive() ? dims.voxels() : 0, 0.0f), spacing, origin) {}

Volume3::Volume3(Dims dims, std::vector<float> data, Vec3 spacing, Vec3 origin)
    : dims_(dims), origin_(origin), data_(std::move(data)) {
  if (!dims.positive()) {
    throw InvalidArgument("volume dims must be positive, got " + to_string(dims));
  }
  if (data_.size() != dims.voxels()) {
    throw InvalidArgument("volume payload has " + std::to_string(data_.size()) +
                          " values, expected " + std::to_string(dims.voxels()));
  }
  set_spacing(spacing);
}

void Volume3::set_spacing(Vec3 spacing) {
  for (double s : spacing) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidArgument("volume spacing must be finite and positive");
    }
  }
  spacing_ = spacing;
}

float Volume3::min_value() const {
  return data_.empty() ? 0.0f : *std::min_element(data_.begin(), data_.end());
}

float Volume3::max_value() const {
  return data_.empty() ? 0.0f : *std::max_element(data_.begin(), data_.end());
}

double Volume3::mean() const {
  if (data_.empty()) return 0.0;
  const Dims d = dims_;
  const double total = parallel_sum(d.nz, [&](int k) {
    double s = 0.0;
    const std::size_t base = d.index(0, 0, k);
    const std::size_t n = static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny);
    for (std::size_t q = 0; q < n; ++q) s += data_[base + q];
    return s;
  });
  return total / static_cast<double>(data_.size());
}

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (!(a == b)) {
    throw DimensionMismatch(std::string(what) + ": dims " + to_string(a) + " vs " + to_string(b));
  }
}

int scaled_extent(int n, double factor) {
  const int rounded = static_cast<int>(std::floor(factor * n + 0.5));
  return std::max(2, rounded);
}

namespace {

struct Tap {
  int src;
  double weight;
};

// Overlap weights of output cells [j*r, (j+1)*r) against input cells [i, i+1),
// normalised so each output row sums to one.
std::vector<std::vector<Tap>> box_taps(int n_in, int n_out) {
  const double r = static_cast<double>(n_in) / static_cast<double>(n_out);
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(n_out));
  for (int j = 0; j < n_out; ++j) {
    const double lo = j * r;
    const double hi = (j + 1) * r;
    const int i0 = static_cast<int>(std::floor(lo));
    const int i1 = std::min(n_in - 1, static_cast<int>(std::ceil(hi)) - 1);
    for (int i = i0; i <= i1; ++i) {
      const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      if (overlap > 0.0) taps[static_cast<std::size_t>(j)].push_back({i, overlap / r});
    }
  }
  return taps;
}

// Resamples one axis of a double buffer laid out with the given dims.
std::vector<double> box_pass(const std::vector<double>& in, Dims d, int axis, int n_out, Dims& out_dims) {
  const auto taps = box_taps(d[axis], n_out);
  out_dims = d;
  if (axis == 0) out_dims.nx = n_out;
  if (axis == 1) out_dims.ny = n_out;
  if (axis == 2) out_dims.nz = n_out;
  std::vector<double> out(out_dims.voxels(), 0.0);
  const Dims od = out_dims;
  parallel_for(0, od.nz, [&](int k) {
    for (int j = 0; j < od.ny; ++j) {
      for (int i = 0; i < od.nx; ++i) {
        const int o = axis == 0 ? i : (axis == 1 ? j : k);
        double acc = 0.0;
        for (const Tap& t : taps[static_cast<std::size_t>(o)]) {
          const std::size_t src = axis == 0   ? d.index(t.src, j, k)
                                  : axis == 1 ? d.index(i, t.src, k)
                                              : d.index(i, j, t.src);
          acc += t.weight * in[src];
        }
        out[od.index(i, j, k)] = acc;
      }
    }
  });
  return out;
}

}  // namespace

Volume3 downscale_to(const Volume3& vol, Dims out) {
  const Dims in = vol.dims();
  if (!out.positive() || out.nx > in.nx || out.ny > in.ny || out.nz > in.nz) {
    throw InvalidArgument("downscale target " + to_string(out) + " must be positive and within " +
                          to_string(in));
  }
  if (out == in) return vol;
  std::vector<double> buf(vol.data().begin(), vol.data().end());
  Dims cur = in;
  for (int axis = 0; axis < 3; ++axis) {
    if (cur[axis] == out[axis]) continue;
    Dims next{};
    buf = box_pass(buf, cur, axis, out[axis], next);
    cur = next;
  }
  std::vector<float> data(buf.size());
  std::transform(buf.begin(), buf.end(), data.begin(), [](double v) { return static_cast<float>(v); });
  const Vec3 spacing{vol.spacing()[0] * in.nx / out.nx, vol.spacing()[1] * in.ny / out.ny,
                     vol.spacing()[2] * in.nz / out.nz};
  Volume3 result(out, std::move(data), spacing, vol.origin());
  result.set_scale_percent(vol.scale_percent());
  return result;
}

Volume3 downscale(const Volume3& vol, double factor) {
  if (!(factor > 0.0) || factor > 1.0) {
    throw InvalidArgument("downscale factor must lie in (0, 1], got " + std::to_string(factor));
  }
  const Dims in = vol.dims();
  const Dims out{scaled_extent(in.nx, factor), scaled_extent(in.ny, factor), scaled_extent(in.nz, factor)};
  if (out.nx > in.nx || out.ny > in.ny || out.nz > in.nz) {
    throw InvalidArgument("downscale of " + to_string(in) + " would need at least 2 voxels per axis");
  }
  return downscale_to(vol, out);
}

FlipAxes FlipAxes::parse(const std::string& text) {
  FlipAxes axes;
  for (char c : text) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
      case 'X': axes.x = true; break;
      case 'Y': axes.y = true; break;
      case 'Z': axes.z = true; break;
      case ',':
      case ' ': break;
      default: throw InvalidArgument("unknown flip axis '" + std::string(1, c) + "'");
    }
  }
  return axes;
}

std::string FlipAxes::to_string() const {
  std::string s;
  if (x) s += 'X';
  if (y) s += 'Y';
  if (z) s += 'Z';
  return s;
}

Volume3 flip(const Volume3& vol, FlipAxes axes) {
  if (axes.none()) return vol;
  Volume3 out = vol;
  const Dims d = vol.dims();
  parallel_for(0, d.nz, [&](int k) {
    const int sk = axes.z ? d.nz - 1 - k : k;
    for (int j = 0; j < d.ny; ++j) {
      const int sj = axes.y ? d.ny - 1 - j : j;
      for (int i = 0; i < d.nx; ++i) {
        const int si = axes.x ? d.nx - 1 - i : i;
        out.at(i, j, k) = vol.at(si, sj, sk);
      }
    }
  });
  return out;
}

namespace {

struct Lobe {
  Vec3 center;
  Vec3 radii;
  double delta;
};

struct Wave {
  Vec3 k;
  double phase;
  double amplitude;
};

constexpr double kBlobsPer64Cube = 800.0;
constexpr double kGrainsPer64Cube = 60000.0;

struct Blob {
  Vec3 center;
  double radius;
  double delta;
};

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

Volume3 make_phantom(Dims dims, std::uint64_t seed) {
  if (dims.nx < 16 || dims.ny < 16 || dims.nz < 16) {
    throw InvalidArgument("phantom dims must be at least 16 per axis, got " + to_string(dims));
  }
  SplitMix64 rng(seed);
  const Vec3 n{static_cast<double>(dims.nx), static_cast<double>(dims.ny), static_cast<double>(dims.nz)};

  Vec3 center{};
  Vec3 semi{};
  for (int a = 0; a < 3; ++a) {
    center[a] = 0.5 * (n[a] - 1.0) + rng.uniform(-0.03, 0.03) * n[a];
    semi[a] = rng.uniform(0.42, 0.46) * n[a];
  }
  const double base = rng.uniform(380.0, 460.0);

  const int lobe_count = 3 + static_cast<int>(rng.below(4));
  std::vector<Lobe> lobes;
  for (int l = 0; l < lobe_count; ++l) {
    Lobe lobe{};
    // Lobe centres sit well inside the body so every lobe is enclosed.
    const double rho = 0.55 * std::cbrt(rng.uniform());
    const double theta = std::acos(rng.uniform(-1.0, 1.0));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Vec3 dir{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    for (int a = 0; a < 3; ++a) {
      lobe.center[a] = center[a] + rho * dir[a] * semi[a];
      lobe.radii[a] = rng.uniform(0.18, 0.32) * semi[a];
    }
    const double magnitude = rng.uniform(140.0, 320.0);
    lobe.delta = (rng.uniform() < 0.5 ? -1.0 : 1.0) * magnitude;
    lobes.push_back(lobe);
  }

  std::vector<Wave> waves;
  const double min_extent = dims.min_extent();
  for (int w = 0; w < 8; ++w) {
    const double wavelength = rng.uniform(min_extent / 9.0, min_extent / 5.0);
    const double theta = std::acos(rng.uniform(-1.0, 1.0));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double kmag = 2.0 * std::numbers::pi / wavelength;
    waves.push_back({{kmag * std::sin(theta) * std::cos(phi), kmag * std::sin(theta) * std::sin(phi),
                      kmag * std::cos(theta)},
                     rng.uniform(0.0, 2.0 * std::numbers::pi),
                     rng.uniform(25.0, 45.0)});
  }

  // Small Gaussian cell clusters give texture at the few-voxel scale.
  std::vector<Blob> blobs;
  const auto blob_count = static_cast<int>(std::lround(kBlobsPer64Cube * n[0] * n[1] * n[2] / (64.0 * 64.0 * 64.0)));
  for (int b = 0; b < blob_count; ++b) {
    Blob blob{};
    const double rho = std::cbrt(rng.uniform());
    const double theta = std::acos(rng.uniform(-1.0, 1.0));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Vec3 dir{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    for (int a = 0; a < 3; ++a) blob.center[a] = center[a] + rho * dir[a] * semi[a];
    blob.radius = rng.uniform(0.02, 0.035) * min_extent;
    blob.delta = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(150.0, 300.0);
    blobs.push_back(blob);
  }
  // Near-voxel-scale grain, the analogue of cellular texture.
  const auto grain_count = static_cast<int>(std::lround(kGrainsPer64Cube * n[0] * n[1] * n[2] / (64.0 * 64.0 * 64.0)));
  for (int b = 0; b < grain_count; ++b) {
    Blob grain{};
    const double rho = std::cbrt(rng.uniform());
    const double theta = std::acos(rng.uniform(-1.0, 1.0));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Vec3 dir{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    for (int a = 0; a < 3; ++a) grain.center[a] = center[a] + rho * dir[a] * semi[a];
    grain.radius = rng.uniform(0.010, 0.014) * min_extent;
    grain.delta = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(150.0, 300.0);
    blobs.push_back(grain);
  }

  std::vector<double> field(dims.voxels(), 0.0);
  parallel_for(0, dims.nz, [&](int k) {
    for (int j = 0; j < dims.ny; ++j) {
      for (int i = 0; i < dims.nx; ++i) {
        const Vec3 p{static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)};
        double rho2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double t = (p[a] - center[a]) / semi[a];
          rho2 += t * t;
        }
        double value = base + 120.0 * (1.0 - rho2);
        for (const Lobe& lobe : lobes) {
          double s2 = 0.0;
          for (int a = 0; a < 3; ++a) {
            const double t = (p[a] - lobe.center[a]) / lobe.radii[a];
            s2 += t * t;
          }
          const double mean_radius = (lobe.radii[0] + lobe.radii[1] + lobe.radii[2]) / 3.0;
          value += lobe.delta * logistic((1.0 - std::sqrt(s2)) * mean_radius / 1.2);
        }
        for (const Wave& w : waves) {
          value += w.amplitude * std::cos(w.k[0] * p[0] + w.k[1] * p[1] + w.k[2] * p[2] + w.phase);
        }
        field[dims.index(i, j, k)] = value;
      }
    }
  });

  // Blobs are splatted in order over their 4-sigma boxes.
  for (const Blob& b : blobs) {
    const double reach = 4.0 * b.radius;
    int lo[3];
    int hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::ceil(b.center[a] - reach)));
      hi[a] = std::min(dims[a] - 1, static_cast<int>(std::floor(b.center[a] + reach)));
    }
    const double inv = -0.5 / (b.radius * b.radius);
    for (int k = lo[2]; k <= hi[2]; ++k) {
      for (int j = lo[1]; j <= hi[1]; ++j) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const double d2 = (i - b.center[0]) * (i - b.center[0]) + (j - b.center[1]) * (j - b.center[1]) +
                            (k - b.center[2]) * (k - b.center[2]);
          field[dims.index(i, j, k)] += b.delta * std::exp(d2 * inv);
        }
      }
    }
  }

  Volume3 vol(dims);
  parallel_for(0, dims.nz, [&](int k) {
    for (int j = 0; j < dims.ny; ++j) {
      for (int i = 0; i < dims.nx; ++i) {
        double rho2 = 0.0;
        const Vec3 p{static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)};
        for (int a = 0; a < 3; ++a) {
          const double t = (p[a] - center[a]) / semi[a];
          rho2 += t * t;
        }
        if (rho2 >= 1.0) continue;
        const std::size_t q = dims.index(i, j, k);
        vol[q] = static_cast<float>(std::clamp(field[q], 100.0, 1000.0));
      }
    }
  });
  return vol;
}

}  // namespace volreg
