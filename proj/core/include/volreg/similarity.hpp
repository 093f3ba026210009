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
#include <string>
#include <vector>

#include "volreg/field.hpp"
#include "volreg/volume.hpp"

namespace volreg {

enum class Objective { Msd, Cc, LocalCc, Mi, Nmi };

std::string to_string(Objective o);
Objective parse_objective(const std::string& name);

/// Global Pearson correlation. Returns 0 when either image is constant.
double cc_global(const Volume3& a, const Volume3& b);

struct IntensityRange {
  float lo = 0.0f;
  float hi = 0.0f;
};

IntensityRange intensity_range(const Volume3& v);

/// Linear min-max binning with the top edge inclusive.
inline int bin_index(float v, IntensityRange r, int bins) {
  if (!(r.hi > r.lo)) return 0;
  const double t = (static_cast<double>(v) - r.lo) / (static_cast<double>(r.hi) - r.lo);
  int b = static_cast<int>(t * bins);
  if (b < 0) b = 0;
  if (b >= bins) b = bins - 1;
  return b;
}

struct JointHistogram {
  int bins = 64;
  IntensityRange range_a;
  IntensityRange range_b;
  std::vector<std::int64_t> counts;  // bins x bins, row = bin of a
  std::int64_t total = 0;

  std::int64_t at(int ia, int ib) const {
    return counts[static_cast<std::size_t>(ia) * static_cast<std::size_t>(bins) + static_cast<std::size_t>(ib)];
  }
  std::vector<std::int64_t> marginal_a() const;
  std::vector<std::int64_t> marginal_b() const;
};

JointHistogram joint_histogram(const Volume3& a, const Volume3& b, int bins = 64);
JointHistogram joint_histogram(const Volume3& a, const Volume3& b, int bins, IntensityRange range_a,
                               IntensityRange range_b);

/// Shannon entropy in nats of a count vector. The result depends only on the
/// multiset of counts, so transposed histograms give bit-identical values.
double entropy_of_counts(const std::vector<std::int64_t>& counts);

struct Entropies {
  double a = 0.0;
  double b = 0.0;
  double joint = 0.0;
};

Entropies entropies(const JointHistogram& h);
double mi_from_histogram(const JointHistogram& h);
double nmi_from_histogram(const JointHistogram& h);

double mi(const Volume3& a, const Volume3& b, int bins = 64);
double nmi(const Volume3& a, const Volume3& b, int bins = 64);
double msd(const Volume3& a, const Volume3& b);

/// Mean over voxels of the squared correlation coefficient in a window^3
/// neighbourhood clipped to the grid. Windows where both images are constant
/// score 1; windows where exactly one is constant score 0.
double local_cc(const Volume3& a, const Volume3& b, int window = 9);

struct SimilarityReport {
  double cc = 0.0;
  double mi = 0.0;   // nats
  double nmi = 1.0;
  double msd = 0.0;
};

SimilarityReport similarity_report(const Volume3& a, const Volume3& b, int bins = 64);

std::string similarity_csv_header();
std::string similarity_csv_row(const std::string& method, long iteration, const std::string& brain_id,
                               const SimilarityReport& r);

/// Dissimilarity minimised by the dense engines:
/// msd -> msd, cc -> 1 - cc_global, local_cc -> -local_cc.
double dense_energy(const Volume3& fixed, const Volume3& warped, Objective objective, int window = 9);

/// dE/dw for each voxel of the warped image w.
std::vector<double> energy_gradient_wrt_warped(const Volume3& fixed, const Volume3& warped, Objective objective,
                                               int window = 9);

/// dE/du where E = dense_energy(fixed, warp(moving, u)). The spatial factor
/// is the exact derivative of the trilinear interpolant of moving at x + u(x).
/// Throws InvalidArgument for mi/nmi (served by FFD control-point gradients).
DisplacementField3 objective_gradient(const Volume3& fixed, const Volume3& moving, const DisplacementField3& u,
                                      Objective objective, int window = 9);

/// Chain rule step shared with the engines: given dE/dw, returns dE/du.
DisplacementField3 pull_back_gradient(const Volume3& moving, const DisplacementField3& u,
                                      const std::vector<double>& d_warped);

}  // namespace volreg
