// Generates a weight store for a network definition: He-scaled Gaussian
// weights, zero biases. Deterministic for a fixed seed; used to exercise the
// forward pass and the extraction pipeline without shipping trained weights.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "visent/net.hpp"
#include "visent/rng.hpp"
#include "visent/tensor.hpp"

namespace {

int usage(std::ostream& err) {
  err << "usage: visent-make-weights --net FILE --out FILE [--seed N]\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::string net_path, out_path;
  std::uint64_t seed = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "flag " << arg << " needs a value\n";
        std::exit(usage(std::cerr));
      }
      return argv[++i];
    };
    if (arg == "--net") {
      net_path = value();
    } else if (arg == "--out") {
      out_path = value();
    } else if (arg == "--seed") {
      seed = std::stoull(value());
    } else {
      std::cerr << "unknown flag " << arg << '\n';
      return usage(std::cerr);
    }
  }
  if (net_path.empty() || out_path.empty()) return usage(std::cerr);

  try {
    using visent::Rng;
    using visent::Tensor;
    namespace net = visent::net;

    net::NetworkSpec spec = net::NetworkSpec::parse_file(net_path);
    const auto shapes = net::chain_shapes(spec);
    const std::vector<std::int64_t> input_shape(spec.input_shape.begin(),
                                                spec.input_shape.end());

    net::WeightStore ws;
    Rng rng(seed);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      const net::LayerSpec& l = spec.layers[i];
      const std::vector<std::int64_t>& in_shape = i == 0 ? input_shape : shapes[i - 1];
      if (l.kind == net::LayerKind::Convolution) {
        const std::int64_t in_per_group = in_shape[0] / l.groups;
        const double fan_in = static_cast<double>(in_per_group) * l.kernel * l.kernel;
        const float scale = static_cast<float>(std::sqrt(2.0 / fan_in));
        Tensor w({l.out_channels, in_per_group, l.kernel, l.kernel});
        for (std::int64_t j = 0; j < w.size(); ++j)
          w.ptr()[j] = scale * static_cast<float>(rng.next_gauss());
        Tensor b({l.out_channels});
        ws.add(l.name, std::move(w), std::move(b));
      } else if (l.kind == net::LayerKind::FullyConnected) {
        std::int64_t flat = 1;
        for (std::int64_t d : in_shape) flat *= d;
        const float scale = static_cast<float>(std::sqrt(2.0 / static_cast<double>(flat)));
        Tensor w({l.out_features, flat});
        for (std::int64_t j = 0; j < w.size(); ++j)
          w.ptr()[j] = scale * static_cast<float>(rng.next_gauss());
        Tensor b({l.out_features});
        ws.add(l.name, std::move(w), std::move(b));
      }
    }
    ws.save(out_path);
    std::cout << "wrote " << out_path << " (seed " << seed << ")\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
