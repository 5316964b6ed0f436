#include "visent/blob_io.hpp"

#include <cstring>
#include <fstream>

#include "visent/error.hpp"

namespace visent {

namespace {

constexpr char kMagic[4] = {'S', 'N', 'T', 'W'};

// All multi-byte fields are little-endian regardless of host order.
template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(char((std::uint64_t(value) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return T(v);
}

struct Cursor {
  const unsigned char* p;
  std::size_t size;
  std::size_t pos = 0;
  std::string file;
  std::string context;  // current blob name for error messages

  void need(std::size_t n) const {
    if (pos + n > size) {
      std::string where = context.empty() ? "header" : "blob '" + context + "'";
      throw FormatError(file + ": truncated at offset " + std::to_string(pos) +
                        " while reading " + where);
    }
  }
  template <typename T>
  T take() {
    need(sizeof(T));
    T v = get_le<T>(p + pos);
    pos += sizeof(T);
    return v;
  }
};

}  // namespace

Tensor Blob::to_tensor() const {
  return Tensor(dims, data);
}

Blob Blob::from_tensor(std::string name, const Tensor& t) {
  Blob b;
  b.name = std::move(name);
  b.dims = t.shape();
  b.data.assign(t.data().begin(), t.data().end());
  return b;
}

BlobFile BlobFile::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());

  Cursor cur{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0,
             path.string(), {}};
  cur.need(4);
  if (std::memcmp(cur.p, kMagic, 4) != 0)
    throw FormatError(path.string() + ": bad magic, not a blob container");
  cur.pos = 4;
  const auto version = cur.take<std::uint32_t>();
  if (version != kVersion)
    throw FormatError(path.string() + ": unsupported format version " +
                      std::to_string(version));
  const auto count = cur.take<std::uint32_t>();

  BlobFile out;
  for (std::uint32_t b = 0; b < count; ++b) {
    const auto name_len = cur.take<std::uint16_t>();
    cur.need(name_len);
    std::string name(reinterpret_cast<const char*>(cur.p + cur.pos), name_len);
    cur.pos += name_len;
    cur.context = name;

    const auto rank = cur.take<std::uint8_t>();
    if (rank < 1 || rank > 4)
      throw FormatError(path.string() + ": blob '" + name + "' has invalid rank " +
                        std::to_string(rank));
    Blob blob;
    blob.name = std::move(name);
    std::uint64_t volume = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      const auto dim = cur.take<std::uint32_t>();
      if (dim == 0)
        throw FormatError(path.string() + ": blob '" + blob.name + "' has a zero dimension");
      blob.dims.push_back(std::int64_t(dim));
      volume *= dim;
    }
    cur.context = blob.name;
    cur.need(volume * 4);
    blob.data.resize(volume);
    std::memcpy(blob.data.data(), cur.p + cur.pos, volume * 4);
    cur.pos += volume * 4;

    if (out.find(blob.name))
      throw FormatError(path.string() + ": duplicate blob name '" + blob.name + "'");
    out.blobs_.push_back(std::move(blob));
  }
  return out;
}

void BlobFile::write(const std::filesystem::path& path) const {
  std::string bytes;
  bytes.append(kMagic, 4);
  put_le(bytes, kVersion);
  put_le(bytes, std::uint32_t(blobs_.size()));
  for (const Blob& b : blobs_) {
    put_le(bytes, std::uint16_t(b.name.size()));
    bytes.append(b.name);
    put_le(bytes, std::uint8_t(b.dims.size()));
    for (std::int64_t d : b.dims) put_le(bytes, std::uint32_t(d));
    const std::size_t off = bytes.size();
    bytes.resize(off + b.data.size() * 4);
    std::memcpy(bytes.data() + off, b.data.data(), b.data.size() * 4);
  }

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void BlobFile::add(Blob blob) {
  if (find(blob.name)) throw ComputeError("duplicate blob name '" + blob.name + "'");
  std::uint64_t volume = 1;
  if (blob.dims.empty() || blob.dims.size() > 4)
    throw ComputeError("blob '" + blob.name + "' rank must be 1..4");
  for (std::int64_t d : blob.dims) {
    if (d <= 0 || d > 0xffffffffLL)
      throw ComputeError("blob '" + blob.name + "' has an out-of-range dimension");
    volume *= std::uint64_t(d);
  }
  if (volume != blob.data.size())
    throw ComputeError("blob '" + blob.name + "' data length does not match dims");
  blobs_.push_back(std::move(blob));
}

const Blob* BlobFile::find(std::string_view name) const {
  for (const Blob& b : blobs_)
    if (b.name == name) return &b;
  return nullptr;
}

const Blob& BlobFile::require(std::string_view name) const {
  if (const Blob* b = find(name)) return *b;
  throw FormatError("missing blob '" + std::string(name) + "'");
}

Blob u64_blob(std::string name, std::uint64_t value) {
  Blob b;
  b.name = std::move(name);
  b.dims = {2};
  b.data.resize(2);
  const std::uint32_t lo = std::uint32_t(value & 0xffffffffULL);
  const std::uint32_t hi = std::uint32_t(value >> 32);
  std::memcpy(&b.data[0], &lo, 4);
  std::memcpy(&b.data[1], &hi, 4);
  return b;
}

std::uint64_t u64_from_blob(const Blob& blob) {
  if (blob.data.size() != 2)
    throw FormatError("blob '" + blob.name + "' does not hold a u64");
  std::uint32_t lo = 0, hi = 0;
  std::memcpy(&lo, &blob.data[0], 4);
  std::memcpy(&hi, &blob.data[1], 4);
  return std::uint64_t(lo) | (std::uint64_t(hi) << 32);
}

}  // namespace visent
