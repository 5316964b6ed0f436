#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "visent/tensor.hpp"

namespace visent {

// Binary container shared by weight, codebook, feature, and model files.
// Little-endian layout: magic "SNTW", u32 format version, u32 blob count;
// per blob: u16 name length, UTF-8 name, u8 rank, u32 dims, then raw 32-bit
// floats. Reads and writes are bit-exact.
struct Blob {
  std::string name;
  std::vector<std::int64_t> dims;
  std::vector<float> data;

  Tensor to_tensor() const;
  static Blob from_tensor(std::string name, const Tensor& t);
};

class BlobFile {
 public:
  static constexpr std::uint32_t kVersion = 1;

  static BlobFile read(const std::filesystem::path& path);
  // Write-to-temp plus atomic rename; blob order is preserved bit-exactly.
  void write(const std::filesystem::path& path) const;

  void add(Blob blob);  // duplicate names rejected
  const Blob* find(std::string_view name) const;
  const Blob& require(std::string_view name) const;

  const std::vector<Blob>& blobs() const { return blobs_; }
  bool empty() const { return blobs_.empty(); }

 private:
  std::vector<Blob> blobs_;
};

// Helpers for stashing a u64 (e.g. a seed) in an f32-payload blob: the value
// is bit-split into two 32-bit halves, low word first.
Blob u64_blob(std::string name, std::uint64_t value);
std::uint64_t u64_from_blob(const Blob& blob);

}  // namespace visent
