#include <algorithm>
#include <array>
#include <cmath>

#include "visent/error.hpp"
#include "visent/features.hpp"

namespace visent::features {

namespace {

// Circular 0/1 transition count of an 8-bit pattern.
int transitions(int code) {
  int t = 0;
  for (int i = 0; i < 8; ++i) {
    const int a = (code >> i) & 1;
    const int b = (code >> ((i + 1) % 8)) & 1;
    t += a ^ b;
  }
  return t;
}

// code -> histogram bin. Uniform patterns (<= 2 transitions) get their own
// bins in ascending code order; everything else shares the last bin.
const std::array<int, 256>& uniform_bin_table() {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    int next = 0;
    for (int code = 0; code < 256; ++code)
      if (transitions(code) <= 2) t[std::size_t(code)] = next++;
    for (int code = 0; code < 256; ++code)
      if (transitions(code) > 2) t[std::size_t(code)] = next;
    return t;
  }();
  return table;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

int lbp_bins(const DescriptorConfig& cfg) {
  return cfg.lbp_mode == LbpMode::Uniform ? 59 : 256;
}

Tensor rgb_histogram(const Image& img, int bins) {
  if (img.channels != 3)
    throw ComputeError("rgb_histogram requires a 3-channel image");
  if (bins < 1) throw ComputeError("rgb_histogram: bins must be >= 1");
  Tensor out({std::int64_t(3) * bins});
  const std::int64_t pixels = std::int64_t(img.height) * img.width;
  for (int c = 0; c < 3; ++c) {
    float* hist = out.ptr() + c * bins;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const double v = std::clamp(double(img.at(y, x, c)), 0.0, 255.0);
        const int bin = std::min(int(v * bins / 256.0), bins - 1);
        hist[bin] += 1.0f;
      }
    for (int b = 0; b < bins; ++b) hist[b] /= float(pixels);
  }
  return out;
}

Tensor lbp(const Image& img, const DescriptorConfig& cfg) {
  if (cfg.lbp_neighbors != 8 || cfg.lbp_radius != 1)
    throw ComputeError("lbp: only 8 neighbors at radius 1 are supported");
  if (img.height < 3 || img.width < 3)
    throw ComputeError("lbp requires an image of at least 3x3 pixels");
  const Image gray = to_grayscale(img);

  // Clockwise from east in image coordinates (y grows downward).
  static constexpr int dy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  static constexpr int dx[8] = {1, 1, 0, -1, -1, -1, 0, 1};

  const int bins = lbp_bins(cfg);
  Tensor out({std::int64_t(bins)});
  std::int64_t total = 0;
  for (int y = 1; y + 1 < gray.height; ++y) {
    for (int x = 1; x + 1 < gray.width; ++x) {
      const float center = gray.at(y, x, 0);
      int code = 0;
      for (int i = 0; i < 8; ++i)
        if (gray.at(y + dy[i], x + dx[i], 0) >= center) code |= 1 << i;
      const int bin =
          cfg.lbp_mode == LbpMode::Uniform ? uniform_bin_table()[std::size_t(code)] : code;
      out(bin) += 1.0f;
      ++total;
    }
  }
  for (int b = 0; b < bins; ++b) out(b) /= float(total);
  return out;
}

std::vector<PatchDescriptor> dense_patch_descriptors(const Image& img,
                                                     const DescriptorConfig& cfg) {
  const int patch = cfg.patch_size;
  const int stride = cfg.patch_stride;
  if (patch < 4 || patch % 4 != 0 || stride < 1)
    throw ComputeError("dense patches: patch size must be a positive multiple of 4");
  std::vector<PatchDescriptor> out;
  if (img.height < patch || img.width < patch) return out;

  const Image gray = to_grayscale(img);
  const int h = gray.height, w = gray.width;
  // Clamped central differences over the full image so patch borders see
  // their true neighbors.
  std::vector<float> mag(std::size_t(h) * w), bin_of(std::size_t(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float gx = gray.at(y, std::min(x + 1, w - 1), 0) -
                       gray.at(y, std::max(x - 1, 0), 0);
      const float gy = gray.at(std::min(y + 1, h - 1), x, 0) -
                       gray.at(std::max(y - 1, 0), x, 0);
      const std::size_t i = std::size_t(y) * w + x;
      mag[i] = std::sqrt(gx * gx + gy * gy);
      double angle = std::atan2(double(gy), double(gx));
      if (angle < 0) angle += kTwoPi;
      bin_of[i] = float(std::min(int(angle / (kTwoPi / 8.0)), 7));
    }

  const int cell = patch / 4;
  for (int y0 = 0; y0 + patch <= h; y0 += stride) {
    for (int x0 = 0; x0 + patch <= w; x0 += stride) {
      PatchDescriptor pd;
      pd.cx = x0 + patch / 2;
      pd.cy = y0 + patch / 2;
      pd.v.assign(128, 0.0f);
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px) {
          const std::size_t i = std::size_t(y0 + py) * w + (x0 + px);
          const int c = (py / cell) * 4 + (px / cell);
          pd.v[std::size_t(c * 8 + int(bin_of[i]))] += mag[i];
        }
      double norm = 0.0;
      for (float v : pd.v) norm += double(v) * v;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (float& v : pd.v) v = std::min(float(v / norm), 0.2f);
        double n2 = 0.0;
        for (float v : pd.v) n2 += double(v) * v;
        n2 = std::sqrt(n2);
        for (float& v : pd.v) v = float(v / n2);
      }
      out.push_back(std::move(pd));
    }
  }
  return out;
}

Tensor pack_descriptors(const std::vector<PatchDescriptor>& patches) {
  if (patches.empty()) throw ComputeError("pack_descriptors: empty patch list");
  const std::int64_t n = std::int64_t(patches.size());
  const std::int64_t d = std::int64_t(patches[0].v.size());
  Tensor out({n, d});
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& v = patches[std::size_t(i)].v;
    if (std::int64_t(v.size()) != d)
      throw ComputeError("pack_descriptors: inconsistent descriptor dimensions");
    std::copy(v.begin(), v.end(), out.ptr() + i * d);
  }
  return out;
}

Tensor concat_lowlevel(const Image& img, const Codebook& codebook,
                       const DescriptorConfig& cfg) {
  const Tensor hist = rgb_histogram(img, cfg.histogram_bins);
  const Tensor g = gist(img, cfg);
  const Tensor l = lbp(img, cfg);
  const Tensor b = bow_spatial_pyramid(img, codebook, cfg);
  Tensor out({hist.size() + g.size() + l.size() + b.size()});
  float* dst = out.ptr();
  for (const Tensor* part : {&hist, &g, &l, &b}) {
    std::copy(part->data().begin(), part->data().end(), dst);
    dst += part->size();
  }
  return out;
}

}  // namespace visent::features
