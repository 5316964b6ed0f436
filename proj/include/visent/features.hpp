#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "visent/tensor.hpp"

namespace visent::features {

enum class LbpMode { Uniform, Full };

// Knobs for the low-level descriptor suite. Defaults give the standard
// dimensions: 768 histogram + 512 gist + 59 lbp + 5000 bow = 6339.
struct DescriptorConfig {
  int histogram_bins = 256;  // per channel

  int gist_scales = 4;
  int gist_orientations = 8;
  int gist_grid = 4;   // grid x grid pooling cells
  int gist_size = 128; // square working image, power of two

  int lbp_neighbors = 8;  // only 8 supported
  int lbp_radius = 1;     // only 1 supported
  LbpMode lbp_mode = LbpMode::Uniform;

  int patch_size = 16;
  int patch_stride = 8;
  int bow_k = 1000;  // codebook size; pyramid is fixed at {1x1, 2x2}
};

// Number of lbp histogram bins for the mode: 59 uniform, 256 full.
int lbp_bins(const DescriptorConfig& cfg);

// Per-channel intensity histograms over [0,255] concatenated R||G||B, each
// channel L1-normalized to sum 1. 3-channel input only.
Tensor rgb_histogram(const Image& img, int bins = 256);

// Gabor-bank scene descriptor: grayscale warp to a fixed square working
// size, frequency-domain filtering at scales x orientations, mean magnitude
// response per cell of a grid x grid partition. Order: scale-major, then
// orientation, then cells row-major. Default dimension 4*8*16 = 512.
Tensor gist(const Image& img, const DescriptorConfig& cfg = {});

// Local binary patterns on luminance: per interior pixel the 8-neighbor
// comparison code (neighbor >= center, clockwise from east), histogrammed
// with uniform patterns (<= 2 circular transitions) in their own bins and
// the rest shared. L1-normalized.
Tensor lbp(const Image& img, const DescriptorConfig& cfg = {});

// One gradient-orientation patch descriptor with its patch center.
struct PatchDescriptor {
  int cx = 0;
  int cy = 0;
  std::vector<float> v;
};

// Dense grid of patch_size x patch_size patches at patch_stride: 4x4 cells
// x 8 orientation bins of gradient magnitude (128 dims), L2-normalized with
// a 0.2 clamp then renormalized. Zero-gradient patches stay zero. Images
// smaller than one patch yield an empty list.
std::vector<PatchDescriptor> dense_patch_descriptors(const Image& img,
                                                     const DescriptorConfig& cfg = {});

// Stacks descriptor vectors into an [n, d] matrix.
Tensor pack_descriptors(const std::vector<PatchDescriptor>& patches);

// Visual-word dictionary plus the settings that trained it.
struct Codebook {
  Tensor centroids;  // [k, d]
  std::uint64_t seed = 0;
  int iterations = 0;
  std::vector<double> inertia_trace;  // inertia after each assignment step

  static Codebook load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Nearest-centroid index per row of descriptors [n, d]; Euclidean metric,
// lowest index wins ties. Scoring runs through the shared gemm kernel as
// |c|^2 - 2 x.c so scalar and simd builds pick identical winners.
std::vector<int> assign_to_codebook(const Tensor& descriptors, const Tensor& centroids);

// k-means with k-means++ seeding; Lloyd iterations until the largest
// centroid movement drops below 1e-4 or 100 iterations. Empty clusters are
// reseeded to the point farthest from its centroid. Deterministic for a
// fixed seed and input order. Requires at least k distinct rows.
Codebook train_codebook(const Tensor& descriptors, int k, std::uint64_t seed);

// Bag of visual words over a two-level pyramid {whole, 2x2 quadrants}: one
// hot nearest-word code per patch, max-pooled per region, concatenated
// level 0 then quadrants row-major. Values are exactly 0 or 1; dimension
// 5k. An image with no patches gives the zero vector.
Tensor bow_spatial_pyramid(const Image& img, const Codebook& codebook,
                           const DescriptorConfig& cfg = {});

// [rgb_histogram || gist || lbp || bow]; 6339 dims for the defaults.
Tensor concat_lowlevel(const Image& img, const Codebook& codebook,
                       const DescriptorConfig& cfg = {});

// Feature matrix persisted as one [n, dim] blob named after the extraction
// method, with a "<path>.idx" text sidecar mapping row number to sample id.
struct FeatureSet {
  std::string method;
  Tensor matrix;                 // [n, dim]
  std::vector<std::string> ids;  // ids[i] labels row i
};

void save_features(const std::filesystem::path& path, const FeatureSet& fs);
FeatureSet load_features(const std::filesystem::path& path);

}  // namespace visent::features
