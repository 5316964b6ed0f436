#include "visent/image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "visent/error.hpp"

namespace visent {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in, const std::string& file) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(char(ch));
  }
  if (tok.empty()) throw FormatError(file + ": truncated header");
  return tok;
}

int header_int(std::istream& in, const std::string& file, const char* what) {
  const std::string tok = next_token(in, file);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(file + ": bad " + std::string(what) + " '" + tok + "'");
  }
}

void write_raster(const std::filesystem::path& path, const Image& img,
                  const char* magic, int channels) {
  if (img.channels != channels)
    throw ComputeError(std::string("writer expects ") + std::to_string(channels) +
                       "-channel image");
  std::vector<unsigned char> bytes;
  bytes.reserve(img.pixels.size());
  for (float v : img.pixels) {
    const float r = std::round(v);
    bytes.push_back(static_cast<unsigned char>(r < 0.0f ? 0.0f : (r > 255.0f ? 255.0f : r)));
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << magic << "\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  const std::string file = path.string();

  const std::string magic = next_token(in, file);
  int channels = 0;
  if (magic == "P6")
    channels = 3;
  else if (magic == "P5")
    channels = 1;
  else
    throw FormatError(file + ": unsupported magic '" + magic + "' (P5/P6 only)");

  const int width = header_int(in, file, "width");
  const int height = header_int(in, file, "height");
  const int maxval = header_int(in, file, "maxval");
  if (maxval > 255) throw FormatError(file + ": only 8-bit rasters supported");
  // next_token already consumed the single separator byte after maxval.
  const std::size_t count = std::size_t(width) * std::size_t(height) * std::size_t(channels);
  std::vector<unsigned char> bytes(count);
  in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(count));
  if (std::size_t(in.gcount()) != count)
    throw FormatError(file + ": truncated raster data");

  Image img(height, width, channels);
  for (std::size_t i = 0; i < count; ++i) img.pixels[i] = float(bytes[i]);
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  write_raster(path, img, "P6", 3);
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  write_raster(path, img, "P5", 1);
}

}  // namespace visent
