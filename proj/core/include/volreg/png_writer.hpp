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
#include <vector>

#include "volreg/volume.hpp"

namespace volreg {

/// 8-bit RGB, rows top to bottom, 3 bytes per pixel.
void write_png_rgb(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& rgb);

/// Axial slice z of a volume as a single-slice volume.
Volume3 axial_slice(const Volume3& vol, int z);

/// Red = reference, green = warped target, each min-max scaled to 0..255.
/// Both slices must share x/y extents.
std::vector<std::uint8_t> overlay_rgb(const Volume3& reference_slice, const Volume3& warped_slice);

}  // namespace volreg
