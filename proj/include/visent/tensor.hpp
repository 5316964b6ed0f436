#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace visent {

// Dense row-major 32-bit float array with rank 1..4.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape);  // zero-filled
  Tensor(std::vector<std::int64_t> shape, std::vector<float> data);

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t dim(int i) const { return shape_[std::size_t(i)]; }
  int rank() const { return int(shape_.size()); }
  std::int64_t size() const { return std::int64_t(data_.size()); }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }
  const float* ptr() const { return data_.data(); }
  float* ptr() { return data_.data(); }

  float operator()(std::int64_t i) const { return data_[std::size_t(i)]; }
  float& operator()(std::int64_t i) { return data_[std::size_t(i)]; }
  float operator()(std::int64_t i, std::int64_t j) const {
    return data_[std::size_t(i * shape_[1] + j)];
  }
  float& operator()(std::int64_t i, std::int64_t j) {
    return data_[std::size_t(i * shape_[1] + j)];
  }
  float operator()(std::int64_t c, std::int64_t y, std::int64_t x) const {
    return data_[std::size_t((c * shape_[1] + y) * shape_[2] + x)];
  }
  float& operator()(std::int64_t c, std::int64_t y, std::int64_t x) {
    return data_[std::size_t((c * shape_[1] + y) * shape_[2] + x)];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

 private:
  std::vector<std::int64_t> shape_;
  std::vector<float> data_;
};

// 8-bit-range raster held in floats so resampled values keep fractions.
// Row-major, channels interleaved; channel order for color is R, G, B.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 or 3
  std::vector<float> pixels;

  Image() = default;
  Image(int h, int w, int c);

  float at(int y, int x, int c) const {
    return pixels[std::size_t((y * width + x) * channels + c)];
  }
  float& at(int y, int x, int c) {
    return pixels[std::size_t((y * width + x) * channels + c)];
  }
};

// Bilinear resampling with half-pixel centers: source coordinate of output
// pixel i is (i + 0.5) * in/out - 0.5, clamped to the source bounds.
Image resize_bilinear(const Image& img, int out_h, int out_w);

// Centered size x size window; offset = floor((dim - size) / 2) per axis.
Image center_crop(const Image& img, int size);

// Luminance conversion 0.299 R + 0.587 G + 0.114 B; identity on grayscale.
Image to_grayscale(const Image& img);

// [3, H, W] channel-major tensor of pixel - channel_mean. 3-channel input
// only.
Tensor to_input_tensor(const Image& img, const std::array<float, 3>& channel_means);

// 2-D matrix product through the active kernel table. Per output element the
// inner products accumulate left to right in 32-bit floats.
Tensor gemm(const Tensor& a, const Tensor& b);

}  // namespace visent
