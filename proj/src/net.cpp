#include "visent/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "visent/error.hpp"
#include "visent/kernels.hpp"
#include "visent/parallel.hpp"
#include "visent/textkv.hpp"

namespace visent::net {

namespace {

// Unpacks conv windows into columns: col is [C*kh*kw, OH*OW], zero padding.
void im2col(const float* in, std::int64_t channels, std::int64_t height, std::int64_t width,
            int kernel, int stride, int pad, std::int64_t out_h, std::int64_t out_w,
            float* col) {
  const std::int64_t out_area = out_h * out_w;
  for (std::int64_t c = 0; c < channels; ++c) {
    const float* plane = in + c * height * width;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        float* row = col + ((c * kernel + ky) * kernel + kx) * out_area;
        for (std::int64_t oy = 0; oy < out_h; ++oy) {
          const std::int64_t sy = oy * stride - pad + ky;
          float* dst = row + oy * out_w;
          if (sy < 0 || sy >= height) {
            std::fill(dst, dst + out_w, 0.0f);
            continue;
          }
          const float* src = plane + sy * width;
          for (std::int64_t ox = 0; ox < out_w; ++ox) {
            const std::int64_t sx = ox * stride - pad + kx;
            dst[ox] = (sx >= 0 && sx < width) ? src[sx] : 0.0f;
          }
        }
      }
    }
  }
}

std::int64_t conv_out_dim(std::int64_t in, int kernel, int stride, int pad) {
  return (in + 2 * std::int64_t(pad) - kernel) / stride + 1;
}

int to_int(const std::string& s, const std::string& file, int line) {
  const long long v = parse_int(s, file, line);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw FormatError(file, line, "integer out of range: " + s);
  return int(v);
}

LayerKind kind_from_name(const std::string& s, const std::string& file, int line) {
  if (s == "convolution") return LayerKind::Convolution;
  if (s == "relu") return LayerKind::Relu;
  if (s == "lrn") return LayerKind::Lrn;
  if (s == "maxpool") return LayerKind::MaxPool;
  if (s == "fullyconnected") return LayerKind::FullyConnected;
  if (s == "softmax") return LayerKind::Softmax;
  throw FormatError(file, line, "unknown layer kind '" + s + "'");
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Convolution: return "convolution";
    case LayerKind::Relu: return "relu";
    case LayerKind::Lrn: return "lrn";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::FullyConnected: return "fullyconnected";
    case LayerKind::Softmax: return "softmax";
  }
  return "?";
}

NetworkSpec NetworkSpec::parse_file(const std::filesystem::path& path) {
  return parse_text(read_text_file(path), path.string());
}

NetworkSpec NetworkSpec::parse_text(const std::string& text, const std::string& file) {
  NetworkSpec spec;
  bool saw_input = false;
  std::set<std::string> names;
  const std::vector<std::string> lines = split_lines(text);
  for (int ln = 1; ln <= int(lines.size()); ++ln) {
    const std::string& raw = lines[std::size_t(ln - 1)];
    const std::size_t first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;

    std::vector<std::string> tokens;
    const KvLine kv = parse_kv_line(raw, &tokens);
    if (tokens.size() != 1)
      throw FormatError(file, ln, "expected one directive ('input' or 'layer') per line");

    if (tokens[0] == "input") {
      if (saw_input) throw FormatError(file, ln, "duplicate input directive");
      saw_input = true;
      const std::string shape = kv.require("shape", file, ln);
      std::array<std::int64_t, 3> dims{};
      std::size_t pos = 0;
      for (int i = 0; i < 3; ++i) {
        const std::size_t next = (i < 2) ? shape.find('x', pos) : std::string::npos;
        if (i < 2 && next == std::string::npos)
          throw FormatError(file, ln, "input shape must be CxHxW, got '" + shape + "'");
        const std::string part =
            shape.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        dims[std::size_t(i)] = parse_int(part, file, ln);
        if (dims[std::size_t(i)] < 1)
          throw FormatError(file, ln, "input dimensions must be positive");
        pos = next + 1;
      }
      spec.input_shape = dims;
      for (const auto& [key, value] : kv.pairs)
        if (key != "shape")
          throw FormatError(file, ln, "unknown key '" + key + "' for input directive");
      continue;
    }

    if (tokens[0] != "layer")
      throw FormatError(file, ln, "unknown directive '" + tokens[0] + "'");

    LayerSpec layer;
    layer.kind = kind_from_name(kv.require("kind", file, ln), file, ln);
    layer.name = kv.require("name", file, ln);
    if (!names.insert(layer.name).second)
      throw FormatError(file, ln, "duplicate layer name '" + layer.name + "'");

    for (const auto& [key, value] : kv.pairs) {
      if (key == "kind" || key == "name") continue;
      bool ok = false;
      switch (layer.kind) {
        case LayerKind::Convolution:
          if (key == "out_channels") layer.out_channels = to_int(value, file, ln), ok = true;
          else if (key == "kernel") layer.kernel = to_int(value, file, ln), ok = true;
          else if (key == "stride") layer.stride = to_int(value, file, ln), ok = true;
          else if (key == "pad") layer.pad = to_int(value, file, ln), ok = true;
          else if (key == "groups") layer.groups = to_int(value, file, ln), ok = true;
          break;
        case LayerKind::Relu:
        case LayerKind::Softmax:
          if (key == "inplace") layer.inplace = to_int(value, file, ln) != 0, ok = true;
          break;
        case LayerKind::Lrn:
          if (key == "n") layer.lrn_n = to_int(value, file, ln), ok = true;
          else if (key == "k") layer.lrn_k = float(parse_real(value, file, ln)), ok = true;
          else if (key == "alpha")
            layer.lrn_alpha = float(parse_real(value, file, ln)), ok = true;
          else if (key == "beta")
            layer.lrn_beta = float(parse_real(value, file, ln)), ok = true;
          break;
        case LayerKind::MaxPool:
          if (key == "window") layer.window = to_int(value, file, ln), ok = true;
          else if (key == "stride") layer.pool_stride = to_int(value, file, ln), ok = true;
          break;
        case LayerKind::FullyConnected:
          if (key == "out_features") layer.out_features = to_int(value, file, ln), ok = true;
          break;
      }
      if (!ok)
        throw FormatError(file, ln, "unknown key '" + key + "' for kind " +
                                        layer_kind_name(layer.kind));
    }

    switch (layer.kind) {
      case LayerKind::Convolution:
        if (layer.out_channels < 1 || layer.kernel < 1 || layer.stride < 1 ||
            layer.pad < 0 || layer.groups < 1)
          throw FormatError(file, ln, "invalid convolution parameters");
        break;
      case LayerKind::Lrn:
        if (layer.lrn_n < 1 || layer.lrn_n % 2 == 0)
          throw FormatError(file, ln, "lrn n must be odd and >= 1");
        break;
      case LayerKind::MaxPool:
        if (layer.window < 1 || layer.pool_stride < 1)
          throw FormatError(file, ln, "invalid pool parameters");
        break;
      case LayerKind::FullyConnected:
        if (layer.out_features < 1)
          throw FormatError(file, ln, "out_features must be >= 1");
        break;
      case LayerKind::Relu:
      case LayerKind::Softmax:
        break;
    }
    spec.layers.push_back(std::move(layer));
  }
  if (spec.layers.empty()) throw FormatError(file, 0, "no layers defined");
  return spec;
}

Tensor conv_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                    int stride, int pad, int groups) {
  if (input.rank() != 3)
    throw ComputeError("conv_forward expects [C,H,W] input, got " + input.shape_str());
  if (weights.rank() != 4)
    throw ComputeError("conv weights must be [C_out, C_in/g, kh, kw], got " +
                       weights.shape_str());
  if (stride < 1 || pad < 0 || groups < 1)
    throw ComputeError("conv_forward: stride must be >= 1, pad >= 0, groups >= 1");
  const std::int64_t in_c = input.dim(0), in_h = input.dim(1), in_w = input.dim(2);
  const std::int64_t out_c = weights.dim(0);
  const std::int64_t kh = weights.dim(2), kw = weights.dim(3);
  if (kh != kw) throw ComputeError("only square conv kernels are supported");
  if (in_c % groups != 0 || out_c % groups != 0)
    throw ComputeError("groups=" + std::to_string(groups) +
                       " does not divide channel counts " + std::to_string(in_c) + "/" +
                       std::to_string(out_c));
  if (weights.dim(1) != in_c / groups)
    throw ComputeError("conv weight channel dim " + std::to_string(weights.dim(1)) +
                       " != input channels / groups = " + std::to_string(in_c / groups));
  if (bias.rank() != 1 || bias.dim(0) != out_c)
    throw ComputeError("conv bias must have length " + std::to_string(out_c));
  const std::int64_t out_h = conv_out_dim(in_h, int(kh), stride, pad);
  const std::int64_t out_w = conv_out_dim(in_w, int(kw), stride, pad);
  if (out_h < 1 || out_w < 1)
    throw ComputeError("conv output would be empty for input " + input.shape_str());

  const std::int64_t group_in = in_c / groups;
  const std::int64_t group_out = out_c / groups;
  const std::int64_t col_rows = group_in * kh * kw;
  const std::int64_t out_area = out_h * out_w;

  Tensor out({out_c, out_h, out_w});
  std::vector<float> col(std::size_t(col_rows * out_area));
  const auto& kt = kernels::active();
  for (int g = 0; g < groups; ++g) {
    const float* in_block = input.ptr() + g * group_in * in_h * in_w;
    im2col(in_block, group_in, in_h, in_w, int(kh), stride, pad, out_h, out_w, col.data());
    const float* w_block = weights.ptr() + g * group_out * col_rows;
    float* out_block = out.ptr() + g * group_out * out_area;
    kt.gemm(w_block, col.data(), out_block, group_out, col_rows, out_area);
  }
  for (std::int64_t c = 0; c < out_c; ++c) {
    const float b = bias(c);
    float* plane = out.ptr() + c * out_area;
    for (std::int64_t i = 0; i < out_area; ++i) plane[i] += b;
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out(input.shape());
  kernels::active().relu(input.ptr(), out.ptr(), std::size_t(input.size()));
  return out;
}

Tensor lrn(const Tensor& input, int n, float k, float alpha, float beta) {
  if (input.rank() != 3)
    throw ComputeError("lrn expects [C,H,W] input, got " + input.shape_str());
  if (n < 1 || n % 2 == 0) throw ComputeError("lrn window must be odd and >= 1");
  const std::int64_t channels = input.dim(0);
  const std::int64_t area = input.dim(1) * input.dim(2);
  const int half = n / 2;
  Tensor out(input.shape());
  const float* in = input.ptr();
  float* dst = out.ptr();
  for (std::int64_t c = 0; c < channels; ++c) {
    const std::int64_t lo = std::max<std::int64_t>(0, c - half);
    const std::int64_t hi = std::min<std::int64_t>(channels - 1, c + half);
    for (std::int64_t i = 0; i < area; ++i) {
      float sum = 0.0f;
      for (std::int64_t j = lo; j <= hi; ++j) {
        const float v = in[j * area + i];
        sum += v * v;
      }
      dst[c * area + i] = in[c * area + i] / std::pow(k + alpha * sum, beta);
    }
  }
  return out;
}

Tensor max_pool(const Tensor& input, int window, int stride) {
  if (input.rank() != 3)
    throw ComputeError("max_pool expects [C,H,W] input, got " + input.shape_str());
  if (window < 1 || stride < 1) throw ComputeError("max_pool window and stride must be >= 1");
  const std::int64_t channels = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (window > h || window > w)
    throw ComputeError("pool window " + std::to_string(window) + " exceeds input " +
                       input.shape_str());
  const std::int64_t out_h = (h - window) / stride + 1;
  const std::int64_t out_w = (w - window) / stride + 1;
  Tensor out({channels, out_h, out_w});
  for (std::int64_t c = 0; c < channels; ++c) {
    for (std::int64_t oy = 0; oy < out_h; ++oy) {
      for (std::int64_t ox = 0; ox < out_w; ++ox) {
        const std::int64_t y0 = oy * stride, x0 = ox * stride;
        float best = input(c, y0, x0);
        for (int ky = 0; ky < window; ++ky)
          for (int kx = 0; kx < window; ++kx)
            best = std::max(best, input(c, y0 + ky, x0 + kx));
        out(c, oy, ox) = best;
      }
    }
  }
  return out;
}

Tensor fc_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2)
    throw ComputeError("fc weights must be [out, in], got " + weights.shape_str());
  const std::int64_t out_n = weights.dim(0), in_n = weights.dim(1);
  if (input.size() != in_n)
    throw ComputeError("fc input length " + std::to_string(input.size()) +
                       " != weight inner dim " + std::to_string(in_n));
  if (bias.rank() != 1 || bias.dim(0) != out_n)
    throw ComputeError("fc bias must have length " + std::to_string(out_n));
  Tensor out({out_n});
  kernels::active().gemm(weights.ptr(), input.ptr(), out.ptr(), out_n, in_n, 1);
  for (std::int64_t i = 0; i < out_n; ++i) out(i) += bias(i);
  return out;
}

Tensor softmax(const Tensor& input) {
  const std::int64_t n = input.size();
  const float* x = input.ptr();
  float mx = x[0];
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) throw ComputeError("softmax input contains a non-finite value");
    mx = std::max(mx, x[i]);
  }
  Tensor out(input.shape());
  float* y = out.ptr();
  double denom = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    denom += y[i];
  }
  const float inv = float(1.0 / denom);
  for (std::int64_t i = 0; i < n; ++i) y[i] *= inv;
  return out;
}

const LayerSpec* NetworkSpec::find(std::string_view name) const {
  for (const LayerSpec& l : layers)
    if (l.name == name) return &l;
  return nullptr;
}

void NetworkSpec::validate() const {
  for (std::int64_t d : input_shape)
    if (d < 1) throw ComputeError("network input shape must be positive");
  std::set<std::string> seen;
  for (const LayerSpec& l : layers) {
    if (l.name.empty()) throw ComputeError("layer with empty name");
    if (!seen.insert(l.name).second)
      throw ComputeError("duplicate layer name '" + l.name + "'");
    switch (l.kind) {
      case LayerKind::Convolution:
        if (l.out_channels < 1 || l.kernel < 1 || l.stride < 1 || l.pad < 0 || l.groups < 1)
          throw ComputeError("layer '" + l.name + "': invalid convolution parameters");
        break;
      case LayerKind::Lrn:
        if (l.lrn_n < 1 || l.lrn_n % 2 == 0)
          throw ComputeError("layer '" + l.name + "': lrn n must be odd and >= 1");
        break;
      case LayerKind::MaxPool:
        if (l.window < 1 || l.pool_stride < 1)
          throw ComputeError("layer '" + l.name + "': invalid pool parameters");
        break;
      case LayerKind::FullyConnected:
        if (l.out_features < 1)
          throw ComputeError("layer '" + l.name + "': out_features must be >= 1");
        break;
      case LayerKind::Relu:
      case LayerKind::Softmax:
        break;
    }
    if (l.inplace && l.kind != LayerKind::Relu && l.kind != LayerKind::Softmax)
      throw ComputeError("layer '" + l.name + "': only relu/softmax may be inplace");
  }
}

std::vector<std::vector<std::int64_t>> chain_shapes(const NetworkSpec& spec) {
  spec.validate();
  std::vector<std::vector<std::int64_t>> shapes;
  std::vector<std::int64_t> cur(spec.input_shape.begin(), spec.input_shape.end());
  for (const LayerSpec& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::Convolution: {
        if (cur.size() != 3)
          throw ComputeError("layer '" + l.name + "': convolution needs [C,H,W] input");
        if (cur[0] % l.groups != 0 || l.out_channels % l.groups != 0)
          throw ComputeError("layer '" + l.name + "': groups do not divide channels");
        const std::int64_t oh = conv_out_dim(cur[1], l.kernel, l.stride, l.pad);
        const std::int64_t ow = conv_out_dim(cur[2], l.kernel, l.stride, l.pad);
        if (oh < 1 || ow < 1)
          throw ComputeError("layer '" + l.name + "': output shape collapses to zero");
        cur = {l.out_channels, oh, ow};
        break;
      }
      case LayerKind::Lrn:
        if (cur.size() != 3)
          throw ComputeError("layer '" + l.name + "': lrn needs [C,H,W] input");
        break;
      case LayerKind::MaxPool: {
        if (cur.size() != 3)
          throw ComputeError("layer '" + l.name + "': maxpool needs [C,H,W] input");
        if (l.window > cur[1] || l.window > cur[2])
          throw ComputeError("layer '" + l.name + "': pool window exceeds input");
        cur = {cur[0], (cur[1] - l.window) / l.pool_stride + 1,
               (cur[2] - l.window) / l.pool_stride + 1};
        break;
      }
      case LayerKind::FullyConnected:
        cur = {l.out_features};
        break;
      case LayerKind::Relu:
        break;
      case LayerKind::Softmax:
        if (cur.size() != 1)
          throw ComputeError("layer '" + l.name + "': softmax needs a flat input");
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

WeightStore WeightStore::load(const std::filesystem::path& path) {
  const BlobFile file = BlobFile::read(path);
  WeightStore store;
  for (const Blob& b : file.blobs()) {
    if (b.name.size() > 2 && b.name.ends_with(".w")) {
      const std::string layer = b.name.substr(0, b.name.size() - 2);
      const Blob& bias = file.require(layer + ".b");
      store.add(layer, b.to_tensor(), bias.to_tensor());
    }
  }
  return store;
}

void WeightStore::save(const std::filesystem::path& path) const {
  BlobFile file;
  for (const Entry& e : entries_) {
    file.add(Blob::from_tensor(e.layer + ".w", e.w));
    file.add(Blob::from_tensor(e.layer + ".b", e.b));
  }
  file.write(path);
}

void WeightStore::add(const std::string& layer, Tensor weights, Tensor bias) {
  if (find(layer)) throw ComputeError("duplicate weight entry '" + layer + "'");
  entries_.push_back({layer, std::move(weights), std::move(bias)});
}

const WeightStore::Entry* WeightStore::find(std::string_view layer) const {
  for (const Entry& e : entries_)
    if (e.layer == layer) return &e;
  return nullptr;
}

bool WeightStore::has(std::string_view layer) const { return find(layer) != nullptr; }

const Tensor& WeightStore::weights(std::string_view layer) const {
  if (const Entry* e = find(layer)) return e->w;
  throw ComputeError("no weights for layer '" + std::string(layer) + "'");
}

const Tensor& WeightStore::bias(std::string_view layer) const {
  if (const Entry* e = find(layer)) return e->b;
  throw ComputeError("no bias for layer '" + std::string(layer) + "'");
}

std::vector<std::string> WeightStore::layer_names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const Entry& e : entries_) names.push_back(e.layer);
  return names;
}

void WeightStore::validate_against(const NetworkSpec& spec) const {
  const auto shapes = chain_shapes(spec);
  std::vector<std::int64_t> cur(spec.input_shape.begin(), spec.input_shape.end());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (l.kind == LayerKind::Convolution) {
      const Entry* e = find(l.name);
      if (!e) throw ComputeError("missing weight blob for layer '" + l.name + "'");
      const std::vector<std::int64_t> expect = {l.out_channels, cur[0] / l.groups,
                                                l.kernel, l.kernel};
      if (e->w.shape() != expect)
        throw ComputeError("layer '" + l.name + "': weight shape " + e->w.shape_str() +
                           " does not match spec");
      if (e->b.rank() != 1 || e->b.dim(0) != l.out_channels)
        throw ComputeError("layer '" + l.name + "': bias length mismatch");
    } else if (l.kind == LayerKind::FullyConnected) {
      const Entry* e = find(l.name);
      if (!e) throw ComputeError("missing weight blob for layer '" + l.name + "'");
      std::int64_t in_n = 1;
      for (std::int64_t d : cur) in_n *= d;
      const std::vector<std::int64_t> expect = {l.out_features, in_n};
      if (e->w.shape() != expect)
        throw ComputeError("layer '" + l.name + "': weight shape " + e->w.shape_str() +
                           " does not match expected [" + std::to_string(l.out_features) +
                           "," + std::to_string(in_n) + "]");
      if (e->b.rank() != 1 || e->b.dim(0) != l.out_features)
        throw ComputeError("layer '" + l.name + "': bias length mismatch");
    }
    cur = shapes[i];
  }
}

std::map<std::string, Tensor> forward(const NetworkSpec& spec, const WeightStore& weights,
                                      const Tensor& input,
                                      const std::set<std::string>& taps) {
  // Validate everything up front so failures precede any computation.
  chain_shapes(spec);
  weights.validate_against(spec);
  const std::vector<std::int64_t> expect(spec.input_shape.begin(), spec.input_shape.end());
  if (input.shape() != expect)
    throw ComputeError("input shape " + input.shape_str() + " does not match network input");
  for (const std::string& t : taps)
    if (!spec.find(t)) throw ComputeError("tap '" + t + "' is not a layer name");

  // Buffers are shared between a producer and its inplace successors, so a
  // tap resolves to post-activation values.
  std::map<std::string, std::shared_ptr<Tensor>> named;
  auto cur = std::make_shared<Tensor>(input);
  for (const LayerSpec& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::Convolution:
        cur = std::make_shared<Tensor>(conv_forward(*cur, weights.weights(l.name),
                                                    weights.bias(l.name), l.stride, l.pad,
                                                    l.groups));
        break;
      case LayerKind::Relu: {
        Tensor r = relu(*cur);
        if (l.inplace)
          *cur = std::move(r);
        else
          cur = std::make_shared<Tensor>(std::move(r));
        break;
      }
      case LayerKind::Lrn:
        cur = std::make_shared<Tensor>(lrn(*cur, l.lrn_n, l.lrn_k, l.lrn_alpha, l.lrn_beta));
        break;
      case LayerKind::MaxPool:
        cur = std::make_shared<Tensor>(max_pool(*cur, l.window, l.pool_stride));
        break;
      case LayerKind::FullyConnected: {
        Tensor flat(std::vector<std::int64_t>{cur->size()},
                    std::vector<float>(cur->data().begin(), cur->data().end()));
        cur = std::make_shared<Tensor>(fc_forward(flat, weights.weights(l.name),
                                                  weights.bias(l.name)));
        break;
      }
      case LayerKind::Softmax: {
        Tensor s = softmax(*cur);
        if (l.inplace)
          *cur = std::move(s);
        else
          cur = std::make_shared<Tensor>(std::move(s));
        break;
      }
    }
    named[l.name] = cur;
  }

  std::map<std::string, Tensor> out;
  for (const std::string& t : taps) out.emplace(t, *named.at(t));
  return out;
}

Image preprocess(const Image& img, int crop_h, int crop_w) {
  const int crop = std::max(crop_h, crop_w);
  const int target_short = std::max(1, crop * 8 / 7);
  int rh, rw;
  if (img.height <= img.width) {
    rh = target_short;
    rw = std::max(target_short,
                  int(std::lround(double(img.width) * target_short / img.height)));
  } else {
    rw = target_short;
    rh = std::max(target_short,
                  int(std::lround(double(img.height) * target_short / img.width)));
  }
  Image resized = resize_bilinear(img, rh, rw);
  return center_crop(resized, crop);
}

Tensor extract_features(const NetworkSpec& spec, const WeightStore& weights,
                        const std::vector<Image>& images, const std::string& tap,
                        const std::array<float, 3>& channel_means, int threads) {
  if (images.empty()) throw ComputeError("extract_features: no images");
  if (!spec.find(tap)) throw ComputeError("tap '" + tap + "' is not a layer name");
  const auto shapes = chain_shapes(spec);
  weights.validate_against(spec);

  std::int64_t dim = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].name == tap) {
      dim = 1;
      for (std::int64_t d : shapes[i]) dim *= d;
      break;
    }
  }

  const std::int64_t n = std::int64_t(images.size());
  Tensor out({n, dim});
  parallel_for(n, threads, [&](std::int64_t i) {
    try {
      const Image pre = preprocess(images[std::size_t(i)], int(spec.input_shape[1]),
                                   int(spec.input_shape[2]));
      const Tensor in = to_input_tensor(pre, channel_means);
      auto tapped = forward(spec, weights, in, {tap});
      const Tensor& feat = tapped.at(tap);
      std::copy(feat.data().begin(), feat.data().end(), out.ptr() + i * dim);
    } catch (const std::exception& e) {
      throw ComputeError("image " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace visent::net
