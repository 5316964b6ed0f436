#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace visent {

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(std::string_view text);

// Digest of a file's bytes, streamed; throws IoError if unreadable.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// Lower-case 16-digit hex rendering.
std::string hex64(std::uint64_t value);

}  // namespace visent
