#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "visent/blob_io.hpp"
#include "visent/tensor.hpp"

namespace visent::net {

enum class LayerKind { Convolution, Relu, Lrn, MaxPool, FullyConnected, Softmax };

const char* layer_kind_name(LayerKind kind);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Relu;
  // An inplace layer (relu/softmax) overwrites its producer's buffer, so a
  // tap on the producer's name reads the post-activation values.
  bool inplace = false;

  // convolution
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  int groups = 1;

  // lrn
  int lrn_n = 5;
  float lrn_k = 2.0f;
  float lrn_alpha = 1e-4f;
  float lrn_beta = 0.75f;

  // maxpool
  int window = 0;
  int pool_stride = 1;

  // fullyconnected
  int out_features = 0;
};

struct NetworkSpec {
  std::array<std::int64_t, 3> input_shape = {3, 224, 224};
  std::vector<LayerSpec> layers;

  // Parses the text format: one directive per line, `input shape=CxHxW` or
  // `layer kind=<kind> name=<name> key=value...`. Errors cite line numbers.
  static NetworkSpec parse_file(const std::filesystem::path& path);
  static NetworkSpec parse_text(const std::string& text, const std::string& file);

  const LayerSpec* find(std::string_view name) const;
  void validate() const;  // unique names, parameter ranges
};

// Per-layer output shapes; validates the whole chain. Result[i] is the
// output shape of layers[i].
std::vector<std::vector<std::int64_t>> chain_shapes(const NetworkSpec& spec);

// Named (weights, bias) pairs stored as "<layer>.w" / "<layer>.b" blobs.
class WeightStore {
 public:
  static WeightStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void add(const std::string& layer, Tensor weights, Tensor bias);
  bool has(std::string_view layer) const;
  const Tensor& weights(std::string_view layer) const;
  const Tensor& bias(std::string_view layer) const;

  // Every convolution / fullyconnected layer must have shape-consistent
  // blobs; throws ComputeError naming the first offending layer.
  void validate_against(const NetworkSpec& spec) const;

  std::vector<std::string> layer_names() const;  // insertion order

 private:
  struct Entry {
    std::string layer;
    Tensor w;
    Tensor b;
  };
  std::vector<Entry> entries_;
  const Entry* find(std::string_view layer) const;
};

// Layer primitives. All are pure; shapes are validated.
Tensor conv_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                    int stride, int pad, int groups);
Tensor relu(const Tensor& input);
Tensor lrn(const Tensor& input, int n, float k, float alpha, float beta);
Tensor max_pool(const Tensor& input, int window, int stride);
Tensor fc_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
Tensor softmax(const Tensor& input);

// Runs the network and returns the post-activation output of every tapped
// layer name. Validates spec, weights, and taps before any computation.
std::map<std::string, Tensor> forward(const NetworkSpec& spec, const WeightStore& weights,
                                      const Tensor& input,
                                      const std::set<std::string>& taps);

// Preprocessing fixed by convention: resize the shortest side to
// crop * 8 / 7 (256 for a 224 crop) with bilinear sampling, then center-crop
// to the declared input size. Mean subtraction happens when the crop is packed
// into the input tensor.
Image preprocess(const Image& img, int crop_h, int crop_w);

// Batch feature extraction: row i holds the tapped activation for image i.
// Rows are written in input order regardless of thread count. Errors are
// annotated with the image index.
Tensor extract_features(const NetworkSpec& spec, const WeightStore& weights,
                        const std::vector<Image>& images, const std::string& tap,
                        const std::array<float, 3>& channel_means, int threads = 1);

}  // namespace visent::net
