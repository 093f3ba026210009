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

#include "volreg/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "volreg/error.hpp"
#include "volreg/parallel.hpp"
#include "volreg/warp.hpp"

namespace volreg {

std::string to_string(Objective o) {
  switch (o) {
    case Objective::Msd: return "msd";
    case Objective::Cc: return "cc";
    case Objective::LocalCc: return "local_cc";
    case Objective::Mi: return "mi";
    case Objective::Nmi: return "nmi";
  }
  return "?";
}

Objective parse_objective(const std::string& name) {
  if (name == "msd") return Objective::Msd;
  if (name == "cc") return Objective::Cc;
  if (name == "local_cc" || name == "lcc") return Objective::LocalCc;
  if (name == "mi") return Objective::Mi;
  if (name == "nmi") return Objective::Nmi;
  throw InvalidArgument("unknown objective '" + name + "' (expected msd, cc, local_cc, mi or nmi)");
}

namespace {

std::size_t plane(const Dims& d) { return static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny); }

// Sum over slices of f(n) for every voxel n, reduced in slice order.
template <class F>
double voxel_sum(const Dims& d, F&& f) {
  const std::size_t p = plane(d);
  return parallel_sum(d.nz, [&](int k) {
    double s = 0.0;
    const std::size_t base = static_cast<std::size_t>(k) * p;
    for (std::size_t q = 0; q < p; ++q) s += f(base + q);
    return s;
  });
}

// Sum of in-grid values over the clipped window [x - r, x + r] along each axis.
std::vector<double> box_sum(std::vector<double> buf, const Dims& d, int r) {
  for (int axis = 0; axis < 3; ++axis) {
    const int n = d[axis];
    std::vector<double> out(buf.size());
    const int lines_a = axis == 0 ? d.ny : d.nx;
    const int lines_b = axis == 2 ? d.ny : d.nz;
    parallel_for(0, lines_b, [&](int lb) {
      std::vector<double> prefix(static_cast<std::size_t>(n) + 1);
      for (int la = 0; la < lines_a; ++la) {
        auto idx = [&](int t) {
          if (axis == 0) return d.index(t, la, lb);
          if (axis == 1) return d.index(la, t, lb);
          return d.index(la, lb, t);
        };
        prefix[0] = 0.0;
        for (int t = 0; t < n; ++t) prefix[static_cast<std::size_t>(t) + 1] = prefix[static_cast<std::size_t>(t)] + buf[idx(t)];
        for (int t = 0; t < n; ++t) {
          const int lo = std::max(0, t - r);
          const int hi = std::min(n, t + r + 1);
          out[idx(t)] = prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)];
        }
      }
    });
    buf.swap(out);
  }
  return buf;
}

int window_count(int t, int n, int r) { return std::min(n, t + r + 1) - std::max(0, t - r); }

struct WindowStats {
  std::vector<double> sa, sb, saa, sbb, sab, count;
};

WindowStats window_stats(const Volume3& a, const Volume3& b, int r) {
  const Dims d = a.dims();
  const std::size_t n = d.voxels();
  std::vector<double> va(n), vb(n), vaa(n), vbb(n), vab(n);
  for (std::size_t q = 0; q < n; ++q) {
    const double x = a[q], y = b[q];
    va[q] = x;
    vb[q] = y;
    vaa[q] = x * x;
    vbb[q] = y * y;
    vab[q] = x * y;
  }
  WindowStats s;
  s.sa = box_sum(std::move(va), d, r);
  s.sb = box_sum(std::move(vb), d, r);
  s.saa = box_sum(std::move(vaa), d, r);
  s.sbb = box_sum(std::move(vbb), d, r);
  s.sab = box_sum(std::move(vab), d, r);
  s.count.resize(n);
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i)
        s.count[d.index(i, j, k)] =
            static_cast<double>(window_count(i, d.nx, r)) * window_count(j, d.ny, r) * window_count(k, d.nz, r);
  return s;
}

// Window variance below this fraction of the raw second moment counts as constant.
constexpr double kConstantWindowTolerance = 1e-9;

struct WindowTerms {
  double cc2;
  bool degenerate;
  double C, A, B;
};

inline WindowTerms window_terms(const WindowStats& s, std::size_t q) {
  const double n = s.count[q];
  const double A = s.saa[q] - s.sa[q] * s.sa[q] / n;
  const double B = s.sbb[q] - s.sb[q] * s.sb[q] / n;
  const double C = s.sab[q] - s.sa[q] * s.sb[q] / n;
  const bool const_a = A <= kConstantWindowTolerance * s.saa[q];
  const bool const_b = B <= kConstantWindowTolerance * s.sbb[q];
  if (const_a && const_b) return {1.0, true, C, A, B};
  if (const_a || const_b) return {0.0, true, C, A, B};
  return {std::min(1.0, C * C / (A * B)), false, C, A, B};
}

void check_window(int window) {
  if (window < 3 || window % 2 == 0) {
    throw InvalidArgument("local_cc window must be odd and >= 3, got " + std::to_string(window));
  }
}

struct Moments {
  double mean_a, mean_b, A, B, C;
};

Moments centered_moments(const Volume3& a, const Volume3& b) {
  const Dims d = a.dims();
  const double n = static_cast<double>(d.voxels());
  const double ma = voxel_sum(d, [&](std::size_t q) { return static_cast<double>(a[q]); }) / n;
  const double mb = voxel_sum(d, [&](std::size_t q) { return static_cast<double>(b[q]); }) / n;
  Moments m{ma, mb, 0, 0, 0};
  m.A = voxel_sum(d, [&](std::size_t q) {
    const double t = a[q] - ma;
    return t * t;
  });
  m.B = voxel_sum(d, [&](std::size_t q) {
    const double t = b[q] - mb;
    return t * t;
  });
  m.C = voxel_sum(d, [&](std::size_t q) { return (a[q] - ma) * (b[q] - mb); });
  return m;
}

}  // namespace

double cc_global(const Volume3& a, const Volume3& b) {
  require_same_dims(a.dims(), b.dims(), "cc_global");
  const Moments m = centered_moments(a, b);
  if (!(m.A > 0.0) || !(m.B > 0.0)) return 0.0;
  return std::clamp(m.C / std::sqrt(m.A * m.B), -1.0, 1.0);
}

IntensityRange intensity_range(const Volume3& v) { return {v.min_value(), v.max_value()}; }

std::vector<std::int64_t> JointHistogram::marginal_a() const {
  std::vector<std::int64_t> m(static_cast<std::size_t>(bins), 0);
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) m[static_cast<std::size_t>(i)] += at(i, j);
  return m;
}

std::vector<std::int64_t> JointHistogram::marginal_b() const {
  std::vector<std::int64_t> m(static_cast<std::size_t>(bins), 0);
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) m[static_cast<std::size_t>(j)] += at(i, j);
  return m;
}

JointHistogram joint_histogram(const Volume3& a, const Volume3& b, int bins) {
  require_same_dims(a.dims(), b.dims(), "joint_histogram");
  return joint_histogram(a, b, bins, intensity_range(a), intensity_range(b));
}

JointHistogram joint_histogram(const Volume3& a, const Volume3& b, int bins, IntensityRange range_a,
                               IntensityRange range_b) {
  require_same_dims(a.dims(), b.dims(), "joint_histogram");
  if (bins < 2) throw InvalidArgument("histogram needs at least 2 bins");
  JointHistogram h;
  h.bins = bins;
  h.range_a = range_a;
  h.range_b = range_b;
  h.counts.assign(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins), 0);
  for (std::size_t q = 0; q < a.size(); ++q) {
    const int ia = bin_index(a[q], range_a, bins);
    const int ib = bin_index(b[q], range_b, bins);
    ++h.counts[static_cast<std::size_t>(ia) * static_cast<std::size_t>(bins) + static_cast<std::size_t>(ib)];
  }
  h.total = static_cast<std::int64_t>(a.size());
  return h;
}

double entropy_of_counts(const std::vector<std::int64_t>& counts) {
  std::vector<std::int64_t> nz;
  std::int64_t total = 0;
  for (auto c : counts) {
    if (c > 0) {
      nz.push_back(c);
      total += c;
    }
  }
  if (total == 0) return 0.0;
  std::sort(nz.begin(), nz.end());
  double s = 0.0;
  for (auto c : nz) s += static_cast<double>(c) * std::log(static_cast<double>(c));
  const double n = static_cast<double>(total);
  return std::max(0.0, std::log(n) - s / n);
}

Entropies entropies(const JointHistogram& h) {
  return {entropy_of_counts(h.marginal_a()), entropy_of_counts(h.marginal_b()), entropy_of_counts(h.counts)};
}

double mi_from_histogram(const JointHistogram& h) {
  const Entropies e = entropies(h);
  return std::max(0.0, (e.a + e.b) - e.joint);
}

double nmi_from_histogram(const JointHistogram& h) {
  const Entropies e = entropies(h);
  if (!(e.joint > 0.0)) return 1.0;
  return (e.a + e.b) / e.joint;
}

double mi(const Volume3& a, const Volume3& b, int bins) { return mi_from_histogram(joint_histogram(a, b, bins)); }

double nmi(const Volume3& a, const Volume3& b, int bins) { return nmi_from_histogram(joint_histogram(a, b, bins)); }

double msd(const Volume3& a, const Volume3& b) {
  require_same_dims(a.dims(), b.dims(), "msd");
  const double s = voxel_sum(a.dims(), [&](std::size_t q) {
    const double t = static_cast<double>(a[q]) - b[q];
    return t * t;
  });
  return s / static_cast<double>(a.size());
}

double local_cc(const Volume3& a, const Volume3& b, int window) {
  require_same_dims(a.dims(), b.dims(), "local_cc");
  check_window(window);
  const WindowStats s = window_stats(a, b, window / 2);
  const double total = voxel_sum(a.dims(), [&](std::size_t q) { return window_terms(s, q).cc2; });
  return total / static_cast<double>(a.size());
}

SimilarityReport similarity_report(const Volume3& a, const Volume3& b, int bins) {
  require_same_dims(a.dims(), b.dims(), "similarity_report");
  const JointHistogram h = joint_histogram(a, b, bins);
  return {cc_global(a, b), mi_from_histogram(h), nmi_from_histogram(h), msd(a, b)};
}

std::string similarity_csv_header() { return "method,iteration,brain_id,cc,mi,nmi,msd"; }

std::string similarity_csv_row(const std::string& method, long iteration, const std::string& brain_id,
                               const SimilarityReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), ",%ld,", iteration);
  std::string row = method + buf + brain_id;
  std::snprintf(buf, sizeof(buf), ",%.10f,%.10f,%.10f,%.10g", r.cc, r.mi, r.nmi, r.msd);
  return row + buf;
}

double dense_energy(const Volume3& fixed, const Volume3& warped, Objective objective, int window) {
  switch (objective) {
    case Objective::Msd: return msd(fixed, warped);
    case Objective::Cc: return 1.0 - cc_global(fixed, warped);
    case Objective::LocalCc: return -local_cc(fixed, warped, window);
    default: break;
  }
  throw InvalidArgument("objective " + to_string(objective) +
                        " has no dense gradient; use the ffd engine's control-point gradient");
}

std::vector<double> energy_gradient_wrt_warped(const Volume3& fixed, const Volume3& warped, Objective objective,
                                               int window) {
  require_same_dims(fixed.dims(), warped.dims(), "energy_gradient_wrt_warped");
  const Dims d = fixed.dims();
  const std::size_t n = d.voxels();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> g(n, 0.0);
  switch (objective) {
    case Objective::Msd: {
      for (std::size_t q = 0; q < n; ++q) g[q] = 2.0 * (static_cast<double>(warped[q]) - fixed[q]) * inv_n;
      return g;
    }
    case Objective::Cc: {
      // E = 1 - cc; dcc/dw_y = (f_y - mf)/sqrt(AB) - cc (w_y - mw)/B
      const Moments m = centered_moments(fixed, warped);
      if (!(m.A > 0.0) || !(m.B > 0.0)) return g;
      const double root = std::sqrt(m.A * m.B);
      const double cc = m.C / root;
      for (std::size_t q = 0; q < n; ++q) {
        g[q] = -((fixed[q] - m.mean_a) / root - cc * (warped[q] - m.mean_b) / m.B);
      }
      return g;
    }
    case Objective::LocalCc: {
      check_window(window);
      const int r = window / 2;
      const WindowStats s = window_stats(fixed, warped, r);
      std::vector<double> alpha(n), alpha_mean(n), beta(n), beta_mean(n);
      for (std::size_t q = 0; q < n; ++q) {
        const WindowTerms t = window_terms(s, q);
        if (t.degenerate || t.C * t.C >= t.A * t.B) {
          alpha[q] = alpha_mean[q] = beta[q] = beta_mean[q] = 0.0;
          continue;
        }
        const double al = 2.0 * t.C / (t.A * t.B);
        const double be = 2.0 * t.C * t.C / (t.A * t.B * t.B);
        alpha[q] = al;
        alpha_mean[q] = al * s.sa[q] / s.count[q];
        beta[q] = be;
        beta_mean[q] = be * s.sb[q] / s.count[q];
      }
      const auto box_alpha = box_sum(std::move(alpha), d, r);
      const auto box_alpha_mean = box_sum(std::move(alpha_mean), d, r);
      const auto box_beta = box_sum(std::move(beta), d, r);
      const auto box_beta_mean = box_sum(std::move(beta_mean), d, r);
      for (std::size_t q = 0; q < n; ++q) {
        const double dlcc = fixed[q] * box_alpha[q] - box_alpha_mean[q] - warped[q] * box_beta[q] + box_beta_mean[q];
        g[q] = -dlcc * inv_n;
      }
      return g;
    }
    default: break;
  }
  throw InvalidArgument("objective " + to_string(objective) +
                        " has no dense gradient; use the ffd engine's control-point gradient");
}

DisplacementField3 pull_back_gradient(const Volume3& moving, const DisplacementField3& u,
                                      const std::vector<double>& d_warped) {
  require_same_dims(moving.dims(), u.dims(), "pull_back_gradient");
  const Dims d = u.dims();
  DisplacementField3 out(d);
  const float* c[3] = {u.component(0).data(), u.component(1).data(), u.component(2).data()};
  float* o[3] = {out.component(0).data(), out.component(1).data(), out.component(2).data()};
  parallel_for(0, d.nz, [&](int k) {
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        const std::size_t q = d.index(i, j, k);
        if (d_warped[q] == 0.0) continue;
        const Vec3 p{i + static_cast<double>(c[0][q]), j + static_cast<double>(c[1][q]),
                     k + static_cast<double>(c[2][q])};
        auto s = sample_trilinear_gradient(moving, p);
        // On an interior grid plane the interpolant has a kink; the one-sided
        // slope would stall descent from u = 0, so average both sides there.
        for (std::size_t a = 0; a < 3; ++a) {
          if (p[a] > 0.0 && p[a] < d[static_cast<int>(a)] - 1 && p[a] == std::floor(p[a])) {
            Vec3 left = p;
            left[a] -= 1.0;
            s.gradient[a] = 0.5 * (s.gradient[a] + (s.value - sample_trilinear(moving, left)));
          }
        }
        for (int a = 0; a < 3; ++a) o[a][q] = static_cast<float>(d_warped[q] * s.gradient[static_cast<std::size_t>(a)]);
      }
    }
  });
  return out;
}

DisplacementField3 objective_gradient(const Volume3& fixed, const Volume3& moving, const DisplacementField3& u,
                                      Objective objective, int window) {
  require_same_dims(fixed.dims(), moving.dims(), "objective_gradient");
  require_same_dims(fixed.dims(), u.dims(), "objective_gradient");
  if (objective == Objective::Mi || objective == Objective::Nmi) {
    throw InvalidArgument("objective_gradient: " + to_string(objective) +
                          " is served by FFD control-point finite differences (nmi_gradient_on_controls)");
  }
  const Volume3 warped = apply_displacement(moving, u);
  return pull_back_gradient(moving, u, energy_gradient_wrt_warped(fixed, warped, objective, window));
}

}  // namespace volreg
