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
#include <filesystem>
#include <string>
#include <vector>

#include "volreg/field.hpp"
#include "volreg/volume.hpp"

namespace volreg {

// NIfTI-1 datatype codes accepted by the reader.
enum class NiftiDatatype : std::int16_t {
  UInt8 = 2,
  Int16 = 4,
  Float32 = 16,
  Float64 = 64,
  UInt16 = 512,
};

struct VolumeHeader {
  Dims dims{};
  int components = 1;  // dim[4]; 3 for vector-field files
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};
  NiftiDatatype datatype = NiftiDatatype::Float32;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  float vox_offset = 352.0f;
  int scale_percent = 0;
};

inline constexpr int kNiftiHeaderSize = 348;
inline constexpr int kNiftiDataOffset = 352;

/// Reads only the 348-byte header of a single-file ("n+1") NIfTI-1 file.
VolumeHeader read_nifti_header(const std::filesystem::path& path);

/// Loads a 3D single-file NIfTI-1 volume. Integer payloads become float;
/// scl_slope/scl_inter are applied when the slope is non-zero.
Volume3 load_volume(const std::filesystem::path& path);

/// Writes a float32 single-file NIfTI-1 volume (little-endian, vox_offset 352).
void save_volume(const Volume3& vol, const std::filesystem::path& path);

/// Vector fields: a NIfTI-1 file with dim = (4, nx, ny, nz, 3) holding the
/// three float32 component sub-volumes back to back, plus a text sidecar
/// "<path>.txt" naming the component order.
void save_field(const VectorField3& field, const std::filesystem::path& path);
VectorField3 load_field(const std::filesystem::path& path);

std::filesystem::path field_sidecar_path(const std::filesystem::path& path);

/// Exact file contents save_volume / save_field would write.
std::vector<unsigned char> encode_volume(const Volume3& vol);
std::vector<unsigned char> encode_field(const VectorField3& field);
std::string field_sidecar_text(const VectorField3& field);

/// Writes bytes to path, replacing any existing file.
void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

/// FNV-1a 64-bit hash, used to detect already-correct outputs.
std::uint64_t fnv1a64(const unsigned char* data, std::size_t size);
std::uint64_t file_checksum(const std::filesystem::path& path);

}  // namespace volreg
