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

#include "volreg/png_writer.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <memory>

#include "volreg/error.hpp"

namespace volreg {

void write_png_rgb(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb) {
  if (width <= 0 || height <= 0 || rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw InvalidArgument("png payload does not match " + std::to_string(width) + "x" + std::to_string(height));
  }
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Volume3 axial_slice(const Volume3& vol, int z) {
  const Dims d = vol.dims();
  if (z < 0 || z >= d.nz) throw InvalidArgument("slice index out of range");
  const std::size_t plane = static_cast<std::size_t>(d.nx) * d.ny;
  std::vector<float> data(vol.data().begin() + plane * z, vol.data().begin() + plane * (z + 1));
  return Volume3(Dims{d.nx, d.ny, 1}, std::move(data), vol.spacing(), vol.origin());
}

namespace {

std::uint8_t to_byte(float v, float lo, float hi) {
  if (hi <= lo) return 0;
  const double t = (static_cast<double>(v) - lo) / (static_cast<double>(hi) - lo);
  return static_cast<std::uint8_t>(std::clamp(t, 0.0, 1.0) * 255.0 + 0.5);
}

}  // namespace

std::vector<std::uint8_t> overlay_rgb(const Volume3& reference_slice, const Volume3& warped_slice) {
  const Dims a = reference_slice.dims();
  const Dims b = warped_slice.dims();
  if (a.nx != b.nx || a.ny != b.ny) throw DimensionMismatch("overlay slices differ in extent");
  const std::size_t n = static_cast<std::size_t>(a.nx) * a.ny;
  const auto ra = reference_slice.data().subspan(0, n);
  const auto rb = warped_slice.data().subspan(0, n);
  const auto [alo, ahi] = std::minmax_element(ra.begin(), ra.end());
  const auto [blo, bhi] = std::minmax_element(rb.begin(), rb.end());
  std::vector<std::uint8_t> rgb(n * 3, 0);
  // Flip rows so +y points up in the image.
  for (int y = 0; y < a.ny; ++y) {
    for (int x = 0; x < a.nx; ++x) {
      const std::size_t src = static_cast<std::size_t>(y) * a.nx + x;
      const std::size_t dst = (static_cast<std::size_t>(a.ny - 1 - y) * a.nx + x) * 3;
      rgb[dst] = to_byte(ra[src], *alo, *ahi);
      rgb[dst + 1] = to_byte(rb[src], *blo, *bhi);
    }
  }
  return rgb;
}

}  // namespace volreg
