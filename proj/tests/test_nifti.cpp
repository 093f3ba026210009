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

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "volreg/error.hpp"
#include "volreg/nifti.hpp"

using namespace volreg;

namespace {

// Hand-built single-file header, independent of the library writer.
struct RawNifti {
  std::vector<unsigned char> bytes = std::vector<unsigned char>(352, 0);

  template <class T>
  void put(std::size_t off, T v) {
    std::memcpy(bytes.data() + off, &v, sizeof(T));
  }
  template <class T>
  T get(std::size_t off) const {
    T v;
    std::memcpy(&v, bytes.data() + off, sizeof(T));
    return v;
  }

  RawNifti(std::int16_t nx, std::int16_t ny, std::int16_t nz, std::int16_t datatype, std::int16_t bitpix) {
    put<std::int32_t>(0, 348);
    const std::int16_t dim[8] = {3, nx, ny, nz, 1, 1, 1, 1};
    for (int i = 0; i < 8; ++i) put<std::int16_t>(40 + 2 * static_cast<std::size_t>(i), dim[i]);
    put<std::int16_t>(70, datatype);
    put<std::int16_t>(72, bitpix);
    for (int i = 0; i < 8; ++i) put<float>(76 + 4 * static_cast<std::size_t>(i), 1.0f);
    put<float>(108, 352.0f);
    std::memcpy(bytes.data() + 344, "n+1\0", 4);
  }

  template <class T>
  void append(const std::vector<T>& payload) {
    const std::size_t at = bytes.size();
    bytes.resize(at + payload.size() * sizeof(T));
    std::memcpy(bytes.data() + at, payload.data(), payload.size() * sizeof(T));
  }

  void write(const std::filesystem::path& p) const {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
};

std::vector<unsigned char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("save then load is bit-exact") {
  testing::TempDir dir("nifti");
  for (Dims d : {Dims{4, 4, 4}, Dims{8, 8, 8}, Dims{3, 5, 7}}) {
    Volume3 v = testing::random_volume(d, static_cast<std::uint64_t>(d.nx), -50.0, 50.0);
    v.set_spacing({0.5, 2.0, 3.5});
    v.set_origin({10.0, -4.0, 2.5});
    v.set_scale_percent(15);
    save_volume(v, dir / "v.nii");
    const Volume3 back = load_volume(dir / "v.nii");
    CHECK(back == v);
  }
}

TEST_CASE("written header layout") {
  testing::TempDir dir("nifti_hdr");
  Volume3 v(Dims{6, 5, 4}, Vec3{6.45, 6.45, 10.0});
  save_volume(v, dir / "v.nii");
  const auto b = slurp(dir / "v.nii");
  REQUIRE(b.size() == 352 + 6 * 5 * 4 * 4);
  RawNifti raw(1, 1, 1, 0, 0);
  std::memcpy(raw.bytes.data(), b.data(), 352);
  CHECK(raw.get<std::int32_t>(0) == 348);
  CHECK(raw.get<std::int16_t>(40) == 3);
  CHECK(raw.get<std::int16_t>(42) == 6);
  CHECK(raw.get<std::int16_t>(70) == 16);
  CHECK(raw.get<std::int16_t>(72) == 32);
  CHECK(raw.get<float>(80) == 6.45f);
  CHECK(raw.get<float>(84) == 6.45f);
  CHECK(raw.get<float>(88) == 10.0f);
  CHECK(raw.get<float>(108) == 352.0f);
  CHECK(std::memcmp(b.data() + 344, "n+1\0", 4) == 0);

  const VolumeHeader h = read_nifti_header(dir / "v.nii");
  CHECK(h.dims == Dims{6, 5, 4});
  CHECK(h.datatype == NiftiDatatype::Float32);
  CHECK(h.spacing[2] == doctest::Approx(10.0));
}

TEST_CASE("integer payloads with slope and intercept") {
  testing::TempDir dir("nifti_int");
  SUBCASE("uint8") {
    RawNifti raw(2, 2, 2, 2, 8);
    raw.put<float>(112, 2.0f);
    raw.put<float>(116, 1.0f);
    raw.append(std::vector<std::uint8_t>{3, 0, 1, 2, 3, 4, 5, 255});
    raw.write(dir / "u8.nii");
    const Volume3 v = load_volume(dir / "u8.nii");
    CHECK(v.at(0, 0, 0) == 7.0f);
    CHECK(v.at(1, 0, 0) == 1.0f);
    CHECK(v.at(1, 1, 1) == 511.0f);
  }
  SUBCASE("int16 without scaling") {
    RawNifti raw(2, 1, 2, 4, 16);
    raw.append(std::vector<std::int16_t>{-300, 0, 12, 32767});
    raw.write(dir / "i16.nii");
    const Volume3 v = load_volume(dir / "i16.nii");
    CHECK(v[0] == -300.0f);
    CHECK(v[3] == 32767.0f);
  }
  SUBCASE("uint16 and float64") {
    RawNifti a(2, 1, 1, 512, 16);
    a.append(std::vector<std::uint16_t>{65535, 7});
    a.write(dir / "u16.nii");
    CHECK(load_volume(dir / "u16.nii")[0] == 65535.0f);
    RawNifti b(1, 1, 2, 64, 64);
    b.put<float>(112, 0.5f);
    b.append(std::vector<double>{4.0, -1.0});
    b.write(dir / "f64.nii");
    const Volume3 v = load_volume(dir / "f64.nii");
    CHECK(v[0] == 2.0f);
    CHECK(v[1] == -0.5f);
  }
}

TEST_CASE("malformed files fail descriptively") {
  testing::TempDir dir("nifti_bad");
  auto message_of = [](const std::filesystem::path& p) {
    try {
      load_volume(p);
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  RawNifti two_file(2, 2, 2, 16, 32);
  std::memcpy(two_file.bytes.data() + 344, "ni1\0", 4);
  two_file.append(std::vector<float>(8, 1.0f));
  two_file.write(dir / "a.nii");
  CHECK(message_of(dir / "a.nii").find("two-file") != std::string::npos);

  RawNifti bad_magic = two_file;
  std::memcpy(bad_magic.bytes.data() + 344, "abc\0", 4);
  bad_magic.write(dir / "b.nii");
  CHECK(message_of(dir / "b.nii").find("magic") != std::string::npos);

  RawNifti int32(2, 2, 2, 8, 32);
  int32.append(std::vector<std::int32_t>(8, 1));
  int32.write(dir / "c.nii");
  CHECK(message_of(dir / "c.nii").find("datatype") != std::string::npos);

  RawNifti two_d(2, 2, 1, 16, 32);
  two_d.put<std::int16_t>(40, 2);
  two_d.append(std::vector<float>(4, 1.0f));
  two_d.write(dir / "d.nii");
  CHECK(message_of(dir / "d.nii").find("dimension count") != std::string::npos);

  RawNifti short_payload(4, 4, 4, 16, 32);
  short_payload.append(std::vector<float>(10, 1.0f));
  short_payload.write(dir / "e.nii");
  CHECK(message_of(dir / "e.nii").find("payload") != std::string::npos);

  RawNifti nan_payload(1, 1, 2, 16, 32);
  nan_payload.append(std::vector<float>{1.0f, std::nanf("")});
  nan_payload.write(dir / "f.nii");
  CHECK(message_of(dir / "f.nii").find("non-finite") != std::string::npos);

  CHECK_THROWS_AS(load_volume(dir / "missing.nii"), IoError);
}

TEST_CASE("unwritable path is an I/O error") {
  const Volume3 v(Dims{2, 2, 2});
  CHECK_THROWS_AS(save_volume(v, "/nonexistent-dir/sub/v.nii"), IoError);
}

TEST_CASE("vector field round trip and sidecar") {
  testing::TempDir dir("nifti_field");
  const VectorField3 f = testing::smooth_field({6, 5, 4}, 3, 2.0);
  save_field(f, dir / "u.nii");
  CHECK(load_field(dir / "u.nii") == f);
  const auto side = slurp(field_sidecar_path(dir / "u.nii"));
  const std::string text(side.begin(), side.end());
  CHECK(text.find("ux") != std::string::npos);
  CHECK(text.find("uz") != std::string::npos);
  CHECK(read_nifti_header(dir / "u.nii").components == 3);
  CHECK_THROWS_AS(load_volume(dir / "u.nii"), FormatError);

  save_volume(Volume3(Dims{2, 2, 2}), dir / "s.nii");
  CHECK_THROWS_AS(load_field(dir / "s.nii"), FormatError);
}

TEST_CASE("encoded bytes match the written file") {
  testing::TempDir dir("nifti_enc");
  const Volume3 v = testing::random_volume({3, 3, 3}, 4);
  save_volume(v, dir / "v.nii");
  const auto bytes = slurp(dir / "v.nii");
  CHECK(bytes == encode_volume(v));
  CHECK(file_checksum(dir / "v.nii") == fnv1a64(bytes.data(), bytes.size()));
  // FNV-1a reference values.
  CHECK(fnv1a64(nullptr, 0) == 0xcbf29ce484222325ULL);
  const unsigned char a[] = {'a'};
  CHECK(fnv1a64(a, 1) == 0xaf63dc4c8601ec8cULL);
}
