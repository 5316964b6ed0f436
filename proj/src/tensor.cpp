#include "visent/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "visent/error.hpp"
#include "visent/kernels.hpp"

namespace visent {

namespace {

std::int64_t checked_volume(const std::vector<std::int64_t>& shape) {
  if (shape.empty() || shape.size() > 4)
    throw ComputeError("tensor rank must be between 1 and 4, got " +
                       std::to_string(shape.size()));
  std::int64_t vol = 1;
  for (std::int64_t d : shape) {
    if (d <= 0) throw ComputeError("tensor dimensions must be positive");
    vol *= d;
  }
  return vol;
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
  data_.assign(std::size_t(checked_volume(shape_)), 0.0f);
}

Tensor::Tensor(std::vector<std::int64_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_volume(shape_) != std::int64_t(data_.size()))
    throw ComputeError("tensor data length does not match shape " + shape_str());
}

std::string Tensor::shape_str() const {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) ss << ',';
    ss << shape_[i];
  }
  ss << ']';
  return ss.str();
}

Image::Image(int h, int w, int c) : height(h), width(w), channels(c) {
  if (h <= 0 || w <= 0 || (c != 1 && c != 3))
    throw ComputeError("invalid image dimensions " + std::to_string(h) + "x" +
                       std::to_string(w) + "x" + std::to_string(c));
  pixels.assign(std::size_t(h) * std::size_t(w) * std::size_t(c), 0.0f);
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1)
    throw ComputeError("resize target must be at least 1x1");
  if (img.pixels.empty()) throw ComputeError("resize of empty image");
  Image out(out_h, out_w, img.channels);
  const double scale_y = double(img.height) / double(out_h);
  const double scale_x = double(img.width) / double(out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    double sy = (oy + 0.5) * scale_y - 0.5;
    sy = std::clamp(sy, 0.0, double(img.height - 1));
    const int y0 = int(sy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      double sx = (ox + 0.5) * scale_x - 0.5;
      sx = std::clamp(sx, 0.0, double(img.width - 1));
      const int x0 = int(sx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = sx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
        const double bot = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
        out.at(oy, ox, c) = float(top * (1.0 - fy) + bot * fy);
      }
    }
  }
  return out;
}

Image center_crop(const Image& img, int size) {
  if (size < 1 || size > img.height || size > img.width)
    throw ComputeError("crop size " + std::to_string(size) + " exceeds image " +
                       std::to_string(img.height) + "x" + std::to_string(img.width));
  const int oy = (img.height - size) / 2;
  const int ox = (img.width - size) / 2;
  Image out(size, size, img.channels);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(oy + y, ox + x, c);
  return out;
}

Image to_grayscale(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(y, x, 0) = float(0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                              0.114 * img.at(y, x, 2));
  return out;
}

Tensor to_input_tensor(const Image& img, const std::array<float, 3>& channel_means) {
  if (img.channels != 3)
    throw ComputeError("network input requires a 3-channel image");
  Tensor out({3, img.height, img.width});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out(c, y, x) = img.at(y, x, c) - channel_means[std::size_t(c)];
  return out;
}

Tensor gemm(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ComputeError("gemm requires 2-D tensors, got " + a.shape_str() + " and " +
                       b.shape_str());
  if (a.dim(1) != b.dim(0))
    throw ComputeError("gemm inner dimensions disagree: " + a.shape_str() + " x " +
                       b.shape_str());
  Tensor c({a.dim(0), b.dim(1)});
  kernels::active().gemm(a.ptr(), b.ptr(), c.ptr(), a.dim(0), a.dim(1), b.dim(1));
  return c;
}

}  // namespace visent
