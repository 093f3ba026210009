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
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "volreg/field.hpp"
#include "volreg/volume.hpp"

namespace volreg {

inline constexpr std::array<int, 3> kFrequencyClasses{25, 35, 45};

/// Parameters of one random smooth deformation.
struct DeformationSpec {
  int n_sites = 150;
  int frequency = 25;       // 25 (low), 35 (medium) or 45 (high)
  double amplitude = 0.0;   // max displacement in voxels; 0 selects 6% of the shortest axis
  std::uint64_t seed = 0;

  double resolved_amplitude(Dims dims) const;
  void validate() const;
  friend bool operator==(const DeformationSpec&, const DeformationSpec&) = default;
};

/// Gaussian width for a frequency class: 200/f voxels on a 64-voxel axis,
/// scaled with the shortest axis (8.0, 5.71, 4.44 at 64^3).
double frequency_sigma(int frequency, Dims dims);

/// Impulses at n_sites distinct random voxels (uniform directions, magnitudes
/// uniform in (0, a]), smoothed with one Gaussian of frequency_sigma, then
/// rescaled so the largest vector has length exactly a.
DisplacementField3 generate_deformation(Dims dims, const DeformationSpec& spec);

struct ManifestEntry {
  std::string source_id;
  std::string brain_id;  // source id plus flip suffix
  FlipAxes flip;
  DeformationSpec spec;
  std::string volume_path;  // relative to the output directory
  std::string field_path;
};

struct DatasetManifest {
  std::vector<std::string> sources;
  int per_brain = 100;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;
  std::map<int, int> counts;  // frequency class -> entry count

  std::size_t expanded_brains() const { return sources.size() * kFlipVariants.size(); }
  static const std::array<FlipAxes, 5> kFlipVariants;
};

/// Split of per_brain deformations over f = 25/35/45 in 20/20/60 proportion;
/// the first two counts round half up and the high class takes the rest.
std::array<int, 3> frequency_split(int per_brain);

/// Five flip variants (identity, X, Y, Z, XYZ) per source, per_brain
/// deformation specs per variant.
DatasetManifest build_manifest(const std::vector<std::string>& source_ids, int per_brain = 100,
                               std::uint64_t seed = 0);

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

struct MaterializeStats {
  int written = 0;  // files written (volumes and fields)
  int skipped = 0;  // files already present with the expected checksum
  std::vector<std::string> failures;  // one line per failed entry
};

/// For each entry: flip the source, generate the deformation, warp, and write
/// volume plus ground-truth field under out_dir. Files whose bytes already
/// match are left untouched. Throws InvalidArgument if a source is missing.
MaterializeStats materialize(const DatasetManifest& manifest, const std::map<std::string, Volume3>& sources,
                             const std::filesystem::path& out_dir);

}  // namespace volreg
