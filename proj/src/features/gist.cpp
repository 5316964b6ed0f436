#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "visent/error.hpp"
#include "visent/features.hpp"

namespace visent::features {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 transform; n must be a power of two.
void fft(std::complex<double>* a, int n, bool inverse) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[std::size_t(i)], a[std::size_t(j)]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 1.0 : -1.0) * kTwoPi / len;
    const std::complex<double> step(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[std::size_t(i + j)];
        const std::complex<double> v = a[std::size_t(i + j + len / 2)] * w;
        a[std::size_t(i + j)] = u + v;
        a[std::size_t(i + j + len / 2)] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) a[std::size_t(i)] *= inv;
  }
}

void fft2d(std::vector<std::complex<double>>& a, int n, bool inverse) {
  for (int y = 0; y < n; ++y) fft(a.data() + std::size_t(y) * n, n, inverse);
  std::vector<std::complex<double>> col(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) col[std::size_t(y)] = a[std::size_t(y) * n + x];
    fft(col.data(), n, inverse);
    for (int y = 0; y < n; ++y) a[std::size_t(y) * n + x] = col[std::size_t(y)];
  }
}

using FilterBank = std::vector<std::vector<double>>;

// Log-polar Gaussian bumps in the frequency plane, one per (scale,
// orientation). The angular width pi/orientations makes each filter
// effectively one-sided, so inverse-transform magnitudes trace the local
// envelope; the DC sample is zeroed so constant images respond with ~0.
std::shared_ptr<const FilterBank> gabor_bank(int scales, int orientations, int size) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const FilterBank>> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(scales, orientations, size);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto bank = std::make_shared<FilterBank>();
  const double sigma_theta = kTwoPi / 2.0 / orientations;  // pi / orientations
  for (int s = 0; s < scales; ++s) {
    const double f0 = 0.25 / double(1 << s);
    const double sigma_r = f0 / 2.0;
    for (int o = 0; o < orientations; ++o) {
      const double theta = kTwoPi / 2.0 * o / orientations;
      std::vector<double> h(std::size_t(size) * size);
      for (int v = 0; v < size; ++v) {
        const double fv = double(v < size / 2 ? v : v - size) / size;
        for (int u = 0; u < size; ++u) {
          const double fu = double(u < size / 2 ? u : u - size) / size;
          const double r = std::hypot(fu, fv);
          const double d = std::remainder(std::atan2(fv, fu) - theta, kTwoPi);
          h[std::size_t(v) * size + u] =
              std::exp(-(r - f0) * (r - f0) / (2.0 * sigma_r * sigma_r) -
                       d * d / (2.0 * sigma_theta * sigma_theta));
        }
      }
      h[0] = 0.0;
      bank->push_back(std::move(h));
    }
  }
  cache[key] = bank;
  return bank;
}

}  // namespace

Tensor gist(const Image& img, const DescriptorConfig& cfg) {
  const int n = cfg.gist_size;
  const int grid = cfg.gist_grid;
  if (!is_pow2(n)) throw ComputeError("gist working size must be a power of two");
  if (cfg.gist_scales < 1 || cfg.gist_orientations < 1 || grid < 1 || n % grid != 0)
    throw ComputeError("gist: invalid scale/orientation/grid configuration");

  const Image gray = resize_bilinear(to_grayscale(img), n, n);
  std::vector<std::complex<double>> freq(std::size_t(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      freq[std::size_t(y) * n + x] = double(gray.at(y, x, 0)) / 255.0;
  fft2d(freq, n, false);

  const auto bank = gabor_bank(cfg.gist_scales, cfg.gist_orientations, n);
  const int cell = n / grid;
  const double cell_area = double(cell) * cell;
  Tensor out({std::int64_t(cfg.gist_scales) * cfg.gist_orientations * grid * grid});
  std::vector<std::complex<double>> resp(std::size_t(n) * n);
  for (std::size_t f = 0; f < bank->size(); ++f) {
    const std::vector<double>& h = (*bank)[f];
    for (std::size_t i = 0; i < resp.size(); ++i) resp[i] = freq[i] * h[i];
    fft2d(resp, n, true);
    float* block = out.ptr() + f * std::size_t(grid) * grid;
    for (int gy = 0; gy < grid; ++gy)
      for (int gx = 0; gx < grid; ++gx) {
        double sum = 0.0;
        for (int y = gy * cell; y < (gy + 1) * cell; ++y)
          for (int x = gx * cell; x < (gx + 1) * cell; ++x)
            sum += std::abs(resp[std::size_t(y) * n + x]);
        block[gy * grid + gx] = float(sum / cell_area);
      }
  }
  return out;
}

}  // namespace visent::features
