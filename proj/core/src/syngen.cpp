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

#include "volreg/syngen.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "volreg/error.hpp"
#include "volreg/nifti.hpp"
#include "volreg/rng.hpp"
#include "volreg/warp.hpp"

namespace volreg {

const std::array<FlipAxes, 5> DatasetManifest::kFlipVariants{
    FlipAxes{}, FlipAxes{true, false, false}, FlipAxes{false, true, false}, FlipAxes{false, false, true},
    FlipAxes{true, true, true}};

double DeformationSpec::resolved_amplitude(Dims dims) const {
  return amplitude > 0.0 ? amplitude : 0.06 * dims.min_extent();
}

void DeformationSpec::validate() const {
  if (n_sites < 1) throw InvalidArgument("deformation needs at least one site");
  if (frequency != 25 && frequency != 35 && frequency != 45) {
    throw InvalidArgument("frequency class must be 25, 35 or 45, got " + std::to_string(frequency));
  }
  if (amplitude < 0.0 || !std::isfinite(amplitude)) throw InvalidArgument("amplitude must be positive");
}

double frequency_sigma(int frequency, Dims dims) { return 200.0 / frequency * dims.min_extent() / 64.0; }

DisplacementField3 generate_deformation(Dims dims, const DeformationSpec& spec) {
  spec.validate();
  if (dims.nx < 16 || dims.ny < 16 || dims.nz < 16) {
    throw InvalidArgument("deformation grid must be at least 16 per axis, got " + to_string(dims));
  }
  if (static_cast<std::size_t>(spec.n_sites) > dims.voxels()) {
    throw InvalidArgument("more sites than voxels");
  }
  const double a = spec.resolved_amplitude(dims);
  SplitMix64 rng(spec.seed);
  DisplacementField3 u(dims);
  std::set<std::uint64_t> used;
  while (used.size() < static_cast<std::size_t>(spec.n_sites)) {
    const std::uint64_t q = rng.below(dims.voxels());
    if (!used.insert(q).second) continue;
    const double cos_t = rng.uniform(-1.0, 1.0);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double mag = a * (1.0 - rng.uniform());  // (0, a]
    u.set(q, {mag * sin_t * std::cos(phi), mag * sin_t * std::sin(phi), mag * cos_t});
  }
  gaussian_smooth(u, frequency_sigma(spec.frequency, dims), EdgeMode::Zero);
  const double peak = u.max_magnitude();
  if (peak > 0.0) u *= a / peak;
  return u;
}

std::array<int, 3> frequency_split(int per_brain) {
  if (per_brain < 0) throw InvalidArgument("per_brain must be >= 0");
  const int low = static_cast<int>(std::floor(0.2 * per_brain + 0.5));
  const int mid = low;
  return {low, mid, per_brain - low - mid};
}

namespace {

std::string brain_id(const std::string& source, FlipAxes flip) {
  if (flip.none()) return source;
  std::string s = source + "_f";
  for (char c : flip.to_string()) s += static_cast<char>(c - 'A' + 'a');
  return s;
}

}  // namespace

DatasetManifest build_manifest(const std::vector<std::string>& source_ids, int per_brain, std::uint64_t seed) {
  if (source_ids.empty()) throw InvalidArgument("manifest needs at least one source");
  if (per_brain < 1) throw InvalidArgument("per_brain must be >= 1");
  DatasetManifest m;
  m.sources = source_ids;
  m.per_brain = per_brain;
  m.seed = seed;
  for (int f : kFrequencyClasses) m.counts[f] = 0;
  const auto split = frequency_split(per_brain);
  std::uint64_t index = 0;
  for (const auto& src : source_ids) {
    for (const FlipAxes& flip : DatasetManifest::kFlipVariants) {
      const std::string brain = brain_id(src, flip);
      int n = 0;
      for (std::size_t cls = 0; cls < 3; ++cls) {
        for (int r = 0; r < split[cls]; ++r, ++n) {
          ManifestEntry e;
          e.source_id = src;
          e.brain_id = brain;
          e.flip = flip;
          e.spec.frequency = kFrequencyClasses[cls];
          e.spec.seed = derive_seed(seed, index++);
          char name[64];
          std::snprintf(name, sizeof(name), "def%03d_f%d", n, e.spec.frequency);
          e.volume_path = brain + "/" + name + ".nii";
          e.field_path = brain + "/" + name + "_field.nii";
          m.entries.push_back(std::move(e));
          ++m.counts[kFrequencyClasses[cls]];
        }
      }
    }
  }
  return m;
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"source", e.source_id},
                       {"brain", e.brain_id},
                       {"flip", e.flip.to_string()},
                       {"n_sites", e.spec.n_sites},
                       {"frequency", e.spec.frequency},
                       {"amplitude", e.spec.amplitude},
                       {"seed", e.spec.seed},
                       {"volume", e.volume_path},
                       {"field", e.field_path}});
  }
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [f, c] : m.counts) counts[std::to_string(f)] = c;
  return {{"schema_version", 1}, {"seed", m.seed},     {"per_brain", m.per_brain},
          {"sources", m.sources}, {"counts", counts},  {"entries", entries}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != 1) throw InvalidArgument("unsupported manifest schema_version");
    DatasetManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.per_brain = j.at("per_brain").get<int>();
    m.sources = j.at("sources").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("counts").items()) m.counts[std::stoi(k)] = v.get<int>();
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.source_id = je.at("source").get<std::string>();
      e.brain_id = je.at("brain").get<std::string>();
      e.flip = FlipAxes::parse(je.at("flip").get<std::string>());
      e.spec.n_sites = je.at("n_sites").get<int>();
      e.spec.frequency = je.at("frequency").get<int>();
      e.spec.amplitude = je.at("amplitude").get<double>();
      e.spec.seed = je.at("seed").get<std::uint64_t>();
      e.volume_path = je.at("volume").get<std::string>();
      e.field_path = je.at("field").get<std::string>();
      m.entries.push_back(std::move(e));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed manifest: ") + e.what());
  }
}

namespace {

// Returns true if the file was (re)written.
bool write_if_changed(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::error_code ec;
  if (std::filesystem::exists(path, ec) && std::filesystem::file_size(path, ec) == bytes.size() &&
      file_checksum(path) == fnv1a64(bytes.data(), bytes.size())) {
    return false;
  }
  write_bytes(path, bytes);
  return true;
}

}  // namespace

MaterializeStats materialize(const DatasetManifest& manifest, const std::map<std::string, Volume3>& sources,
                             const std::filesystem::path& out_dir) {
  for (const auto& e : manifest.entries) {
    if (!sources.contains(e.source_id)) throw InvalidArgument("missing source volume '" + e.source_id + "'");
  }
  MaterializeStats stats;
  std::map<std::pair<std::string, std::string>, Volume3> flipped;
  for (const auto& e : manifest.entries) {
    try {
      const auto key = std::make_pair(e.source_id, e.flip.to_string());
      auto it = flipped.find(key);
      if (it == flipped.end()) it = flipped.emplace(key, flip(sources.at(e.source_id), e.flip)).first;
      const Volume3& src = it->second;
      const DisplacementField3 field = generate_deformation(src.dims(), e.spec);
      const Volume3 deformed = apply_displacement(src, field);

      const auto vol_path = out_dir / e.volume_path;
      const auto field_path = out_dir / e.field_path;
      std::filesystem::create_directories(vol_path.parent_path());
      const std::string side = field_sidecar_text(field);
      const std::pair<std::filesystem::path, std::vector<unsigned char>> outputs[3] = {
          {vol_path, encode_volume(deformed)},
          {field_path, encode_field(field)},
          {field_sidecar_path(field_path), std::vector<unsigned char>(side.begin(), side.end())}};
      for (const auto& [path, bytes] : outputs) {
        if (write_if_changed(path, bytes)) {
          ++stats.written;
        } else {
          ++stats.skipped;
        }
      }
    } catch (const std::exception& ex) {
      stats.failures.push_back(e.volume_path + ": " + ex.what());
    }
  }
  return stats;
}

}  // namespace volreg
