#pragma once

#include <filesystem>

#include "visent/tensor.hpp"

namespace visent {

// Binary PPM (P6) and PGM (P5) with 8-bit samples. The only image codecs in
// the project.
Image read_image(const std::filesystem::path& path);

// Writers round to nearest and clamp to [0, 255].
void write_ppm(const std::filesystem::path& path, const Image& img);
void write_pgm(const std::filesystem::path& path, const Image& img);

}  // namespace visent
