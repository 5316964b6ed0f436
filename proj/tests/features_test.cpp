#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "visent/error.hpp"
#include "visent/features.hpp"
#include "visent/kernels.hpp"
#include "visent/rng.hpp"
#include "visent/tensor.hpp"
#include "visent/textkv.hpp"

using namespace visent;
namespace feat = visent::features;
namespace fsys = std::filesystem;

namespace {

struct KernelGuard {
  ~KernelGuard() { kernels::select("auto"); }
};

Image random_image(Rng& rng, int h, int w) {
  Image img(h, w, 3);
  for (float& p : img.pixels) p = float(rng.next_below(256));
  return img;
}

// Independent brute-force uniform-LBP histogram from the written contract:
// luminance, 8 neighbors clockwise from east, neighbor >= center sets bit i,
// uniform codes (<= 2 circular transitions) own ascending bins, rest shared.
std::vector<double> lbp_brute(const Image& img) {
  const int dy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  const int dx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  auto transitions = [](int code) {
    int t = 0;
    for (int i = 0; i < 8; ++i) {
      const int a = (code >> i) & 1;
      const int b = (code >> ((i + 1) % 8)) & 1;
      if (a != b) ++t;
    }
    return t;
  };
  std::map<int, int> bin_of;
  for (int code = 0; code < 256; ++code)
    if (transitions(code) <= 2) {
      const int bin = int(bin_of.size());
      bin_of[code] = bin;
    }
  const int shared = int(bin_of.size());
  std::vector<double> hist(std::size_t(shared) + 1, 0.0);

  Image gray(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      gray.at(y, x, 0) =
          img.channels == 1
              ? img.at(y, x, 0)
              : float(0.299 * double(img.at(y, x, 0)) + 0.587 * double(img.at(y, x, 1)) +
                      0.114 * double(img.at(y, x, 2)));
  double total = 0.0;
  for (int y = 1; y + 1 < img.height; ++y)
    for (int x = 1; x + 1 < img.width; ++x) {
      int code = 0;
      for (int i = 0; i < 8; ++i)
        if (gray.at(y + dy[i], x + dx[i], 0) >= gray.at(y, x, 0)) code |= 1 << i;
      auto it = bin_of.find(code);
      hist[it == bin_of.end() ? std::size_t(shared) : std::size_t(it->second)] += 1.0;
      total += 1.0;
    }
  for (double& h : hist) h /= total;
  return hist;
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("rgb histogram is three per-channel distributions") {
    Rng rng(60);
    Image img = random_image(rng, 13, 9);
    Tensor h = feat::rgb_histogram(img);
    REQUIRE(h.size() == 768);
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (int b = 0; b < 256; ++b) sum += h(c * 256 + b);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    }

    Image red(4, 4, 3);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) red.at(y, x, 0) = 255.0f;
    Tensor hr = feat::rgb_histogram(red);
    CHECK(hr(255) == doctest::Approx(1.0));   // all red mass in the top bin
    CHECK(hr(256) == doctest::Approx(1.0));   // all green mass in bin 0
    CHECK(hr(512) == doctest::Approx(1.0));   // all blue mass in bin 0

    Tensor h8 = feat::rgb_histogram(img, 8);
    CHECK(h8.size() == 24);
  }

  TEST_CASE("gist has 512 dimensions and is deterministic") {
    Rng rng(61);
    Image img = random_image(rng, 100, 140);  // non-square, non-power-of-two
    Tensor a = feat::gist(img);
    Tensor b = feat::gist(img);
    REQUIRE(a.size() == 512);
    for (std::int64_t i = 0; i < a.size(); ++i) REQUIRE(a.ptr()[i] == b.ptr()[i]);
  }

  TEST_CASE("gist ignores constant images") {
    Image flat(64, 64, 3);
    for (float& p : flat.pixels) p = 153.0f;
    Tensor g = feat::gist(flat);
    for (std::int64_t i = 0; i < g.size(); ++i) CHECK(std::abs(g(i)) < 1e-3);
  }

  TEST_CASE("gist separates orientations") {
    Image horiz(128, 128, 1), vert(128, 128, 1);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) {
        horiz.at(y, x, 0) = 127.5f * (1.0f + std::sin(float(y) * 0.785398f));
        vert.at(y, x, 0) = 127.5f * (1.0f + std::sin(float(x) * 0.785398f));
      }
    Tensor gh = feat::gist(horiz);
    Tensor gv = feat::gist(vert);
    double diff = 0.0;
    for (std::int64_t i = 0; i < gh.size(); ++i)
      diff += (gh(i) - gv(i)) * (gh(i) - gv(i));
    CHECK(std::sqrt(diff) > 0.05);
  }

  TEST_CASE("uniform lbp matches the brute-force histogram") {
    feat::DescriptorConfig cfg;
    Rng rng(62);
    for (int trial = 0; trial < 20; ++trial) {
      Image img = random_image(rng, 8 + int(rng.next_below(6)), 8 + int(rng.next_below(6)));
      Tensor got = feat::lbp(img, cfg);
      std::vector<double> want = lbp_brute(img);
      REQUIRE(got.size() == 59);
      REQUIRE(want.size() == 59);
      double sum = 0.0;
      for (int i = 0; i < 59; ++i) {
        CHECK(got(i) == doctest::Approx(want[std::size_t(i)]).epsilon(1e-6));
        sum += got(i);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("lbp on a flat image collapses to the all-ones pattern bin") {
    Image flat(6, 6, 3);
    for (float& p : flat.pixels) p = 80.0f;
    Tensor h = feat::lbp(flat, {});
    // code 255 is uniform (0 transitions) and owns the last uniform bin
    CHECK(h(57) == doctest::Approx(1.0));
    double sum = 0.0;
    for (int i = 0; i < 59; ++i) sum += h(i);
    CHECK(sum == doctest::Approx(1.0));
  }

  TEST_CASE("full-pattern lbp uses 256 bins") {
    feat::DescriptorConfig cfg;
    cfg.lbp_mode = feat::LbpMode::Full;
    CHECK(feat::lbp_bins(cfg) == 256);
    Rng rng(63);
    Tensor h = feat::lbp(random_image(rng, 9, 9), cfg);
    REQUIRE(h.size() == 256);
    double sum = 0.0;
    for (int i = 0; i < 256; ++i) sum += h(i);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("lbp rejects unsupported geometry") {
    Image tiny(2, 2, 1);
    CHECK_THROWS_AS(feat::lbp(tiny, {}), ComputeError);
    feat::DescriptorConfig cfg;
    cfg.lbp_neighbors = 4;
    Rng rng(64);
    CHECK_THROWS_AS(feat::lbp(random_image(rng, 8, 8), cfg), ComputeError);
  }

  TEST_CASE("dense patches tile the grid with unit or zero norms") {
    feat::DescriptorConfig cfg;
    Rng rng(65);
    Image img = random_image(rng, 128, 128);
    auto patches = feat::dense_patch_descriptors(img, cfg);
    REQUIRE(patches.size() == 225);  // (128-16)/8+1 = 15 per side
    CHECK(patches.front().cx == 8);
    CHECK(patches.front().cy == 8);
    CHECK(patches.back().cx == 120);
    CHECK(patches.back().cy == 120);
    for (const auto& p : patches) {
      REQUIRE(p.v.size() == 128);
      double norm = 0.0;
      for (float x : p.v) norm += double(x) * x;
      CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-4));
    }

    Image flat(64, 64, 3);
    auto zero_patches = feat::dense_patch_descriptors(flat, cfg);
    for (const auto& p : zero_patches)
      for (float x : p.v) CHECK(x == 0.0f);

    Image small(10, 10, 3);
    CHECK(feat::dense_patch_descriptors(small, cfg).empty());
  }

  TEST_CASE("descriptor packing preserves order") {
    feat::DescriptorConfig cfg;
    Rng rng(66);
    auto patches = feat::dense_patch_descriptors(random_image(rng, 40, 40), cfg);
    Tensor m = feat::pack_descriptors(patches);
    REQUIRE(m.dim(0) == std::int64_t(patches.size()));
    REQUIRE(m.dim(1) == 128);
    for (std::size_t i = 0; i < patches.size(); ++i)
      for (int j = 0; j < 128; ++j)
        REQUIRE(m(std::int64_t(i), j) == patches[i].v[std::size_t(j)]);
    CHECK_THROWS_AS(feat::pack_descriptors({}), ComputeError);
  }

  TEST_CASE("k-means recovers separated clusters deterministically") {
    Rng rng(67);
    const int per = 12;
    Tensor data({3 * per, 4});
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < per; ++i)
        for (int d = 0; d < 4; ++d)
          data(c * per + i, d) = 10.0f * float(c) + 0.5f * float(rng.next_gauss());
    feat::Codebook cb = feat::train_codebook(data, 3, 5);
    REQUIRE(cb.centroids.dim(0) == 3);
    REQUIRE(cb.centroids.dim(1) == 4);

    std::vector<int> assign = feat::assign_to_codebook(data, cb.centroids);
    for (int c = 0; c < 3; ++c)
      for (int i = 1; i < per; ++i)
        REQUIRE(assign[std::size_t(c * per + i)] == assign[std::size_t(c * per)]);
    std::set<int> distinct(assign.begin(), assign.end());
    CHECK(distinct.size() == 3);

    feat::Codebook cb2 = feat::train_codebook(data, 3, 5);
    for (std::int64_t i = 0; i < cb.centroids.size(); ++i)
      REQUIRE(cb.centroids.ptr()[i] == cb2.centroids.ptr()[i]);

    REQUIRE(!cb.inertia_trace.empty());
    for (std::size_t i = 1; i < cb.inertia_trace.size(); ++i)
      REQUIRE(cb.inertia_trace[i] <=
              cb.inertia_trace[i - 1] + 1e-9 + 1e-7 * cb.inertia_trace[i - 1]);
  }

  TEST_CASE("k-means needs k distinct points") {
    Tensor data({5, 3});
    for (std::int64_t i = 0; i < 5; ++i)
      for (std::int64_t j = 0; j < 3; ++j) data(i, j) = 1.0f;
    CHECK_THROWS_AS(feat::train_codebook(data, 2, 0), ComputeError);
  }

  TEST_CASE("assignment agrees with double-precision brute force") {
    Rng rng(68);
    Tensor data({80, 16});
    for (std::int64_t i = 0; i < data.size(); ++i) data.ptr()[i] = float(rng.next_gauss());
    Tensor cents({7, 16});
    for (std::int64_t i = 0; i < cents.size(); ++i) cents.ptr()[i] = float(rng.next_gauss());
    std::vector<int> got = feat::assign_to_codebook(data, cents);
    for (std::int64_t i = 0; i < 80; ++i) {
      int best = 0;
      double best_d = 1e300;
      for (std::int64_t c = 0; c < 7; ++c) {
        double d = 0.0;
        for (std::int64_t j = 0; j < 16; ++j) {
          const double diff = double(data(i, j)) - double(cents(c, j));
          d += diff * diff;
        }
        if (d < best_d) {
          best_d = d;
          best = int(c);
        }
      }
      REQUIRE(got[std::size_t(i)] == best);
    }
  }

  TEST_CASE("k-means is kernel-variant invariant") {
    if (kernels::avx2_table() == nullptr) {
      MESSAGE("avx2 unavailable; variant invariance untestable here");
      return;
    }
    KernelGuard guard;
    Rng rng(69);
    Tensor data({60, 8});
    for (std::int64_t i = 0; i < data.size(); ++i) data.ptr()[i] = float(rng.next_gauss());
    kernels::select("scalar");
    feat::Codebook a = feat::train_codebook(data, 6, 1);
    kernels::select("avx2");
    feat::Codebook b = feat::train_codebook(data, 6, 1);
    REQUIRE(a.centroids.same_shape(b.centroids));
    for (std::int64_t i = 0; i < a.centroids.size(); ++i)
      REQUIRE(a.centroids.ptr()[i] == b.centroids.ptr()[i]);
  }

  TEST_CASE("codebooks round-trip through blob files") {
    Rng rng(70);
    Tensor data({30, 5});
    for (std::int64_t i = 0; i < data.size(); ++i) data.ptr()[i] = float(rng.next_gauss());
    feat::Codebook cb = feat::train_codebook(data, 4, 9);
    const fsys::path path = fsys::temp_directory_path() / "visent_cb_test.blob";
    cb.save(path);
    feat::Codebook back = feat::Codebook::load(path);
    CHECK(back.seed == 9);
    CHECK(back.iterations == cb.iterations);
    REQUIRE(back.centroids.same_shape(cb.centroids));
    for (std::int64_t i = 0; i < cb.centroids.size(); ++i)
      REQUIRE(back.centroids.ptr()[i] == cb.centroids.ptr()[i]);
  }

  TEST_CASE("spatial pyramid pools word indicators over quadrants") {
    feat::DescriptorConfig cfg;
    cfg.bow_k = 6;
    Rng rng(71);
    Image img = random_image(rng, 64, 64);
    auto patches = feat::dense_patch_descriptors(img, cfg);
    feat::Codebook cb = feat::train_codebook(feat::pack_descriptors(patches), 6, 2);

    Tensor bow = feat::bow_spatial_pyramid(img, cb, cfg);
    REQUIRE(bow.size() == 5 * 6);
    for (std::int64_t i = 0; i < bow.size(); ++i)
      REQUIRE((bow(i) == 0.0f || bow(i) == 1.0f));
    for (int w = 0; w < 6; ++w) {
      float qmax = 0.0f;
      for (int q = 0; q < 4; ++q) qmax = std::max(qmax, bow(6 + q * 6 + w));
      CHECK(bow(w) == qmax);
    }
  }

  TEST_CASE("single-patch images light exactly one quadrant") {
    feat::DescriptorConfig cfg;
    cfg.bow_k = 3;
    Rng rng(72);
    Image img = random_image(rng, 16, 16);  // one 16x16 patch centered at (8,8)
    auto patches = feat::dense_patch_descriptors(img, cfg);
    REQUIRE(patches.size() == 1);
    Tensor packed = feat::pack_descriptors(patches);
    Tensor cents({3, 128});
    for (std::int64_t j = 0; j < 128; ++j) cents(0, j) = packed(0, j);
    for (std::int64_t j = 0; j < 128; ++j) cents(1, j) = float(rng.next_gauss());
    for (std::int64_t j = 0; j < 128; ++j) cents(2, j) = float(rng.next_gauss()) + 3.0f;
    feat::Codebook cb;
    cb.centroids = cents;
    Tensor bow = feat::bow_spatial_pyramid(img, cb, cfg);
    REQUIRE(bow.size() == 15);
    // center (8,8) of a 16x16 image sits in the lower-right quadrant
    CHECK(bow(0) == 1.0f);   // level 0, word 0
    CHECK(bow(12) == 1.0f);  // quadrant (1,1), word 0
    float rest = 0.0f;
    for (std::int64_t i = 0; i < 15; ++i)
      if (i != 0 && i != 12) rest += bow(i);
    CHECK(rest == 0.0f);
  }

  TEST_CASE("concatenated descriptor stacks its four segments") {
    feat::DescriptorConfig cfg;
    cfg.bow_k = 10;
    Rng rng(73);
    Image img = random_image(rng, 96, 96);
    feat::Codebook cb =
        feat::train_codebook(feat::pack_descriptors(feat::dense_patch_descriptors(img, cfg)),
                             10, 3);
    Tensor all = feat::concat_lowlevel(img, cb, cfg);
    REQUIRE(all.size() == 768 + 512 + 59 + 50);
    Tensor hist = feat::rgb_histogram(img, cfg.histogram_bins);
    Tensor g = feat::gist(img, cfg);
    Tensor l = feat::lbp(img, cfg);
    Tensor bow = feat::bow_spatial_pyramid(img, cb, cfg);
    for (std::int64_t i = 0; i < 768; ++i) REQUIRE(all(i) == hist(i));
    for (std::int64_t i = 0; i < 512; ++i) REQUIRE(all(768 + i) == g(i));
    for (std::int64_t i = 0; i < 59; ++i) REQUIRE(all(1280 + i) == l(i));
    for (std::int64_t i = 0; i < 50; ++i) REQUIRE(all(1339 + i) == bow(i));
  }

  TEST_CASE("feature stores round-trip and validate their sidecar") {
    Rng rng(74);
    feat::FeatureSet fs;
    fs.method = "lowlevel";
    fs.matrix = Tensor({3, 7});
    for (std::int64_t i = 0; i < fs.matrix.size(); ++i)
      fs.matrix.ptr()[i] = float(rng.next_gauss());
    fs.ids = {"a", "b", "c"};
    const fsys::path dir = fsys::temp_directory_path() / "visent_feat_test";
    fsys::create_directories(dir);
    const fsys::path path = dir / "f.feat";
    feat::save_features(path, fs);
    feat::FeatureSet back = feat::load_features(path);
    CHECK(back.method == "lowlevel");
    CHECK(back.ids == fs.ids);
    REQUIRE(back.matrix.same_shape(fs.matrix));
    for (std::int64_t i = 0; i < fs.matrix.size(); ++i)
      REQUIRE(back.matrix.ptr()[i] == fs.matrix.ptr()[i]);

    CHECK_THROWS_AS(feat::load_features(dir / "missing.feat"), IoError);

    // Sidecar row count disagreeing with the blob is a format error.
    atomic_write_text(path.string() + ".idx", "0\ta\n");
    CHECK_THROWS_AS(feat::load_features(path), FormatError);
  }
}
