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

#include "volreg/nifti.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "volreg/error.hpp"

namespace volreg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "NIfTI I/O assumes a little-endian host");

// Byte offsets of the NIfTI-1 header fields used here.
constexpr int kOffSizeofHdr = 0;
constexpr int kOffRegular = 38;
constexpr int kOffDim = 40;
constexpr int kOffDatatype = 70;
constexpr int kOffBitpix = 72;
constexpr int kOffPixdim = 76;
constexpr int kOffVoxOffset = 108;
constexpr int kOffSclSlope = 112;
constexpr int kOffSclInter = 116;
constexpr int kOffXyztUnits = 123;
constexpr int kOffDescrip = 148;
constexpr int kOffQoffset = 268;
constexpr int kOffMagic = 344;

constexpr char kUnitsMicron = 3;

using HeaderBytes = std::array<unsigned char, kNiftiDataOffset>;

template <class T>
T get(const HeaderBytes& h, int off) {
  T v;
  std::memcpy(&v, h.data() + off, sizeof(T));
  return v;
}

template <class T>
void put(HeaderBytes& h, int off, T v) {
  std::memcpy(h.data() + off, &v, sizeof(T));
}

int bytes_per_voxel(NiftiDatatype t) {
  switch (t) {
    case NiftiDatatype::UInt8: return 1;
    case NiftiDatatype::Int16:
    case NiftiDatatype::UInt16: return 2;
    case NiftiDatatype::Float32: return 4;
    case NiftiDatatype::Float64: return 8;
  }
  return 0;
}

HeaderBytes read_raw_header(std::ifstream& in, const std::filesystem::path& path) {
  HeaderBytes h{};
  in.read(reinterpret_cast<char*>(h.data()), kNiftiHeaderSize);
  if (in.gcount() != kNiftiHeaderSize) {
    throw FormatError(path.string() + ": truncated NIfTI header");
  }
  return h;
}

VolumeHeader parse_header(const HeaderBytes& h, const std::filesystem::path& path) {
  const auto sizeof_hdr = get<std::int32_t>(h, kOffSizeofHdr);
  if (sizeof_hdr != kNiftiHeaderSize) {
    const auto u = static_cast<std::uint32_t>(sizeof_hdr);
    const std::uint32_t swapped = (u >> 24) | ((u >> 8) & 0xFF00u) | ((u << 8) & 0xFF0000u) | (u << 24);
    if (swapped == static_cast<std::uint32_t>(kNiftiHeaderSize)) {
      throw FormatError(path.string() + ": big-endian NIfTI files are not supported");
    }
    throw FormatError(path.string() + ": sizeof_hdr is " + std::to_string(sizeof_hdr) + ", expected 348");
  }
  const char* magic = reinterpret_cast<const char*>(h.data() + kOffMagic);
  if (std::memcmp(magic, "ni1\0", 4) == 0) {
    throw FormatError(path.string() + ": two-file NIfTI (magic \"ni1\") is unsupported; expected \"n+1\"");
  }
  if (std::memcmp(magic, "n+1\0", 4) != 0) {
    throw FormatError(path.string() + ": bad NIfTI magic, expected \"n+1\"");
  }

  VolumeHeader hdr;
  const auto ndim = get<std::int16_t>(h, kOffDim);
  std::array<std::int16_t, 8> dim{};
  for (int i = 0; i < 8; ++i) dim[static_cast<std::size_t>(i)] = get<std::int16_t>(h, kOffDim + 2 * i);
  if (ndim == 3) {
    hdr.components = 1;
  } else if (ndim == 4) {
    hdr.components = dim[4];
  } else {
    throw FormatError(path.string() + ": dimension count is " + std::to_string(ndim) + ", expected 3");
  }
  hdr.dims = Dims{dim[1], dim[2], dim[3]};
  if (!hdr.dims.positive() || hdr.components < 1) {
    throw FormatError(path.string() + ": non-positive dims in header");
  }

  const auto dt = get<std::int16_t>(h, kOffDatatype);
  switch (dt) {
    case 2:
    case 4:
    case 16:
    case 64:
    case 512: hdr.datatype = static_cast<NiftiDatatype>(dt); break;
    default:
      throw FormatError(path.string() + ": unsupported NIfTI datatype code " + std::to_string(dt));
  }
  for (int a = 0; a < 3; ++a) {
    const double s = get<float>(h, kOffPixdim + 4 * (a + 1));
    hdr.spacing[static_cast<std::size_t>(a)] = s > 0.0 ? s : 1.0;
    hdr.origin[static_cast<std::size_t>(a)] = get<float>(h, kOffQoffset + 4 * a);
  }
  hdr.vox_offset = get<float>(h, kOffVoxOffset);
  if (hdr.vox_offset < static_cast<float>(kNiftiDataOffset)) {
    throw FormatError(path.string() + ": vox_offset must be at least 352 for single-file NIfTI");
  }
  hdr.scl_slope = get<float>(h, kOffSclSlope);
  hdr.scl_inter = get<float>(h, kOffSclInter);

  std::string descrip(reinterpret_cast<const char*>(h.data() + kOffDescrip), 80);
  descrip = descrip.c_str();
  const auto pos = descrip.find("scale=");
  if (pos != std::string::npos) {
    try {
      hdr.scale_percent = std::stoi(descrip.substr(pos + 6));
    } catch (...) {
      hdr.scale_percent = 0;
    }
  }
  return hdr;
}

HeaderBytes make_header(Dims dims, int components, const Vec3& spacing, const Vec3& origin, int scale_percent,
                        const char* kind) {
  HeaderBytes h{};
  put<std::int32_t>(h, kOffSizeofHdr, kNiftiHeaderSize);
  h[kOffRegular] = 'r';
  const std::int16_t ndim = components == 1 ? 3 : 4;
  put<std::int16_t>(h, kOffDim, ndim);
  put<std::int16_t>(h, kOffDim + 2, static_cast<std::int16_t>(dims.nx));
  put<std::int16_t>(h, kOffDim + 4, static_cast<std::int16_t>(dims.ny));
  put<std::int16_t>(h, kOffDim + 6, static_cast<std::int16_t>(dims.nz));
  for (int i = 4; i < 8; ++i) {
    put<std::int16_t>(h, kOffDim + 2 * i, static_cast<std::int16_t>(i == 4 ? components : 1));
  }
  put<std::int16_t>(h, kOffDatatype, static_cast<std::int16_t>(NiftiDatatype::Float32));
  put<std::int16_t>(h, kOffBitpix, 32);
  put<float>(h, kOffPixdim, 1.0f);
  for (int a = 0; a < 3; ++a) {
    put<float>(h, kOffPixdim + 4 * (a + 1), static_cast<float>(spacing[static_cast<std::size_t>(a)]));
    put<float>(h, kOffQoffset + 4 * a, static_cast<float>(origin[static_cast<std::size_t>(a)]));
  }
  for (int i = 4; i < 8; ++i) put<float>(h, kOffPixdim + 4 * i, 1.0f);
  put<float>(h, kOffVoxOffset, static_cast<float>(kNiftiDataOffset));
  put<float>(h, kOffSclSlope, 0.0f);
  put<float>(h, kOffSclInter, 0.0f);
  h[kOffXyztUnits] = static_cast<unsigned char>(kUnitsMicron);
  std::string descrip = std::string("volreg ") + kind;
  if (scale_percent > 0) descrip += " scale=" + std::to_string(scale_percent);
  std::memcpy(h.data() + kOffDescrip, descrip.data(), std::min<std::size_t>(descrip.size(), 79));
  std::memcpy(h.data() + kOffMagic, "n+1\0", 4);
  return h;
}

void check_extent(Dims dims, const char* what) {
  if (dims.nx > 32767 || dims.ny > 32767 || dims.nz > 32767) {
    throw InvalidArgument(std::string(what) + " dims exceed the NIfTI-1 int16 limit");
  }
}

std::vector<float> read_payload(std::ifstream& in, const VolumeHeader& hdr, const std::filesystem::path& path) {
  const std::size_t count = hdr.dims.voxels() * static_cast<std::size_t>(hdr.components);
  const int bpv = bytes_per_voxel(hdr.datatype);
  std::vector<unsigned char> raw(count * static_cast<std::size_t>(bpv));
  in.seekg(static_cast<std::streamoff>(hdr.vox_offset), std::ios::beg);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw FormatError(path.string() + ": payload shorter than dims imply (" + std::to_string(in.gcount()) +
                      " of " + std::to_string(raw.size()) + " bytes)");
  }
  const bool scaled = hdr.scl_slope != 0.0f && std::isfinite(hdr.scl_slope);
  const double slope = scaled ? hdr.scl_slope : 1.0;
  const double inter = scaled ? hdr.scl_inter : 0.0;
  std::vector<float> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    const unsigned char* p = raw.data() + n * static_cast<std::size_t>(bpv);
    double v = 0.0;
    switch (hdr.datatype) {
      case NiftiDatatype::UInt8: v = *p; break;
      case NiftiDatatype::Int16: {
        std::int16_t x;
        std::memcpy(&x, p, 2);
        v = x;
        break;
      }
      case NiftiDatatype::UInt16: {
        std::uint16_t x;
        std::memcpy(&x, p, 2);
        v = x;
        break;
      }
      case NiftiDatatype::Float32: {
        float x;
        std::memcpy(&x, p, 4);
        v = x;
        break;
      }
      case NiftiDatatype::Float64: {
        double x;
        std::memcpy(&x, p, 8);
        v = x;
        break;
      }
    }
    if (scaled) v = slope * v + inter;
    if (!std::isfinite(v)) {
      throw FormatError(path.string() + ": non-finite intensity at voxel " + std::to_string(n));
    }
    out[n] = static_cast<float>(v);
  }
  return out;
}

std::vector<unsigned char> encode(const HeaderBytes& h, const std::vector<std::span<const float>>& planes) {
  std::size_t total = h.size();
  for (auto p : planes) total += p.size_bytes();
  std::vector<unsigned char> out;
  out.reserve(total);
  out.insert(out.end(), h.begin(), h.end());
  for (auto p : planes) {
    const auto* b = reinterpret_cast<const unsigned char*>(p.data());
    out.insert(out.end(), b, b + p.size_bytes());
  }
  return out;
}

}  // namespace

VolumeHeader read_nifti_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_header(read_raw_header(in, path), path);
}

Volume3 load_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const VolumeHeader hdr = parse_header(read_raw_header(in, path), path);
  if (hdr.components != 1) {
    throw FormatError(path.string() + ": dimension count is 4, expected 3 (is this a vector field?)");
  }
  Volume3 vol(hdr.dims, read_payload(in, hdr, path), hdr.spacing, hdr.origin);
  vol.set_scale_percent(hdr.scale_percent);
  return vol;
}

std::vector<unsigned char> encode_volume(const Volume3& vol) {
  check_extent(vol.dims(), "volume");
  const HeaderBytes h = make_header(vol.dims(), 1, vol.spacing(), vol.origin(), vol.scale_percent(), "volume");
  return encode(h, {vol.data()});
}

std::vector<unsigned char> encode_field(const VectorField3& field) {
  check_extent(field.dims(), "field");
  const HeaderBytes h = make_header(field.dims(), 3, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, 0, "field");
  return encode(h, {field.component(0), field.component(1), field.component(2)});
}

std::string field_sidecar_text(const VectorField3& field) {
  return "format: volreg-field 1\n"
         "components: ux uy uz\n"
         "dims: " +
         std::to_string(field.dims().nx) + " " + std::to_string(field.dims().ny) + " " +
         std::to_string(field.dims().nz) +
         "\n"
         "units: voxel\n"
         "datatype: float32\n";
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::uint64_t fnv1a64(const unsigned char* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64(bytes.data(), bytes.size());
}

void save_volume(const Volume3& vol, const std::filesystem::path& path) { write_bytes(path, encode_volume(vol)); }

std::filesystem::path field_sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".txt");
}

void save_field(const VectorField3& field, const std::filesystem::path& path) {
  write_bytes(path, encode_field(field));
  const std::string side = field_sidecar_text(field);
  write_bytes(field_sidecar_path(path), std::vector<unsigned char>(side.begin(), side.end()));
}

VectorField3 load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const VolumeHeader hdr = parse_header(read_raw_header(in, path), path);
  if (hdr.components != 3) {
    throw FormatError(path.string() + ": vector field must have 3 components, found " +
                      std::to_string(hdr.components));
  }
  const std::vector<float> payload = read_payload(in, hdr, path);
  VectorField3 field(hdr.dims);
  const std::size_t n = hdr.dims.voxels();
  for (int c = 0; c < 3; ++c) {
    auto dst = field.component(c);
    std::copy(payload.begin() + static_cast<std::ptrdiff_t>(c * n),
              payload.begin() + static_cast<std::ptrdiff_t>((c + 1) * n), dst.begin());
  }
  return field;
}

}  // namespace volreg
