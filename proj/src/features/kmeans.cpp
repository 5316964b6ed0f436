#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_set>

#include "visent/blob_io.hpp"
#include "visent/error.hpp"
#include "visent/features.hpp"
#include "visent/kernels.hpp"
#include "visent/rng.hpp"
#include "visent/textkv.hpp"

namespace visent::features {

namespace {

double sq_dist(const float* a, const float* b, std::int64_t d) {
  double s = 0.0;
  for (std::int64_t i = 0; i < d; ++i) {
    const double diff = double(a[i]) - double(b[i]);
    s += diff * diff;
  }
  return s;
}

std::int64_t count_distinct_rows(const Tensor& m) {
  std::unordered_set<std::string> seen;
  const std::size_t row_bytes = std::size_t(m.dim(1)) * sizeof(float);
  for (std::int64_t i = 0; i < m.dim(0); ++i)
    seen.emplace(reinterpret_cast<const char*>(m.ptr() + i * m.dim(1)), row_bytes);
  return std::int64_t(seen.size());
}

}  // namespace

std::vector<int> assign_to_codebook(const Tensor& descriptors, const Tensor& centroids) {
  if (descriptors.rank() != 2 || centroids.rank() != 2)
    throw ComputeError("assign_to_codebook expects [n,d] descriptors and [k,d] centroids");
  if (descriptors.dim(1) != centroids.dim(1))
    throw ComputeError("descriptor dimension " + std::to_string(descriptors.dim(1)) +
                       " != centroid dimension " + std::to_string(centroids.dim(1)));
  const std::int64_t n = descriptors.dim(0), d = descriptors.dim(1), k = centroids.dim(0);

  Tensor transposed({d, k});
  for (std::int64_t j = 0; j < k; ++j)
    for (std::int64_t c = 0; c < d; ++c) transposed(c, j) = centroids(j, c);
  const Tensor dots = gemm(descriptors, transposed);  // [n, k]

  std::vector<float> cnorm(static_cast<std::size_t>(k));
  for (std::int64_t j = 0; j < k; ++j) {
    float s = 0.0f;
    for (std::int64_t c = 0; c < d; ++c) s += centroids(j, c) * centroids(j, c);
    cnorm[std::size_t(j)] = s;
  }

  std::vector<int> assign(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    int best = 0;
    float best_score = cnorm[0] - 2.0f * dots(i, 0);
    for (std::int64_t j = 1; j < k; ++j) {
      const float score = cnorm[std::size_t(j)] - 2.0f * dots(i, j);
      if (score < best_score) {
        best_score = score;
        best = int(j);
      }
    }
    assign[std::size_t(i)] = best;
  }
  return assign;
}

Codebook train_codebook(const Tensor& descriptors, int k, std::uint64_t seed) {
  if (descriptors.rank() != 2)
    throw ComputeError("train_codebook expects an [n, d] descriptor matrix");
  const std::int64_t n = descriptors.dim(0), d = descriptors.dim(1);
  if (k < 1) throw ComputeError("train_codebook: k must be >= 1");
  if (count_distinct_rows(descriptors) < k)
    throw ComputeError("train_codebook: need at least " + std::to_string(k) +
                       " distinct descriptors");

  // k-means++ seeding: next centroid sampled with probability proportional
  // to the squared distance from the nearest one chosen so far.
  Rng rng(seed);
  Tensor centroids({std::int64_t(k), d});
  const auto copy_row = [&](std::int64_t src, std::int64_t dst) {
    std::copy(descriptors.ptr() + src * d, descriptors.ptr() + (src + 1) * d,
              centroids.ptr() + dst * d);
  };
  copy_row(std::int64_t(rng.next_below(std::uint64_t(n))), 0);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    d2[std::size_t(i)] = sq_dist(descriptors.ptr() + i * d, centroids.ptr(), d);
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    double r = rng.next_double() * total;
    std::int64_t pick = -1;
    for (std::int64_t i = 0; i < n; ++i) {
      r -= d2[std::size_t(i)];
      if (r < 0.0) {
        pick = i;
        break;
      }
    }
    if (pick < 0) {  // rounding pushed r past the last positive cell
      for (std::int64_t i = n - 1; i >= 0; --i)
        if (d2[std::size_t(i)] > 0.0) {
          pick = i;
          break;
        }
    }
    copy_row(pick, j);
    const float* c = centroids.ptr() + std::int64_t(j) * d;
    for (std::int64_t i = 0; i < n; ++i)
      d2[std::size_t(i)] = std::min(d2[std::size_t(i)], sq_dist(descriptors.ptr() + i * d, c, d));
  }

  Codebook cb;
  cb.seed = seed;
  std::vector<double> sums(std::size_t(k) * std::size_t(d));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k));
  std::vector<double> point_d2(static_cast<std::size_t>(n));
  for (int iter = 0; iter < 100; ++iter) {
    const std::vector<int> assign = assign_to_codebook(descriptors, centroids);

    double inertia = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      point_d2[std::size_t(i)] =
          sq_dist(descriptors.ptr() + i * d, centroids.ptr() + std::int64_t(assign[std::size_t(i)]) * d, d);
      inertia += point_d2[std::size_t(i)];
    }
    if (!cb.inertia_trace.empty()) {
      const double prev = cb.inertia_trace.back();
      if (inertia > prev + 1e-9 + 1e-7 * prev)
        throw ComputeError("k-means inertia increased between iterations");
    }
    cb.inertia_trace.push_back(inertia);
    cb.iterations = iter + 1;

    // Means accumulate in doubles in ascending point order.
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::int64_t i = 0; i < n; ++i) {
      const std::size_t j = std::size_t(assign[std::size_t(i)]);
      ++counts[j];
      double* s = sums.data() + j * std::size_t(d);
      const float* x = descriptors.ptr() + i * d;
      for (std::int64_t c = 0; c < d; ++c) s[std::size_t(c)] += double(x[c]);
    }
    double movement = 0.0;
    for (std::int64_t j = 0; j < k; ++j) {
      float* c = centroids.ptr() + j * d;
      if (counts[std::size_t(j)] == 0) {
        // Reseed to the point currently worst served; zeroing its distance
        // keeps a second empty cluster from grabbing the same point.
        std::int64_t far = 0;
        for (std::int64_t i = 1; i < n; ++i)
          if (point_d2[std::size_t(i)] > point_d2[std::size_t(far)]) far = i;
        point_d2[std::size_t(far)] = 0.0;
        double move = sq_dist(descriptors.ptr() + far * d, c, d);
        std::copy(descriptors.ptr() + far * d, descriptors.ptr() + (far + 1) * d, c);
        movement = std::max(movement, std::sqrt(move));
        continue;
      }
      const double* s = sums.data() + std::size_t(j) * std::size_t(d);
      double move = 0.0;
      for (std::int64_t cc = 0; cc < d; ++cc) {
        const float next = float(s[std::size_t(cc)] / double(counts[std::size_t(j)]));
        const double diff = double(next) - double(c[cc]);
        move += diff * diff;
        c[cc] = next;
      }
      movement = std::max(movement, std::sqrt(move));
    }
    if (movement < 1e-4) break;
  }
  cb.centroids = std::move(centroids);
  return cb;
}

Codebook Codebook::load(const std::filesystem::path& path) {
  const BlobFile file = BlobFile::read(path);
  Codebook cb;
  cb.centroids = file.require("codebook").to_tensor();
  if (cb.centroids.rank() != 2)
    throw FormatError(path.string() + ": codebook blob must be rank 2");
  cb.seed = u64_from_blob(file.require("seed"));
  cb.iterations = int(u64_from_blob(file.require("iterations")));
  return cb;
}

void Codebook::save(const std::filesystem::path& path) const {
  BlobFile file;
  file.add(Blob::from_tensor("codebook", centroids));
  file.add(u64_blob("seed", seed));
  file.add(u64_blob("iterations", std::uint64_t(iterations)));
  file.write(path);
}

Tensor bow_spatial_pyramid(const Image& img, const Codebook& codebook,
                           const DescriptorConfig& cfg) {
  if (codebook.centroids.rank() != 2)
    throw ComputeError("bow_spatial_pyramid: codebook centroids must be [k, d]");
  const std::int64_t k = codebook.centroids.dim(0);
  Tensor out({5 * k});
  const std::vector<PatchDescriptor> patches = dense_patch_descriptors(img, cfg);
  if (patches.empty()) return out;
  const std::vector<int> words =
      assign_to_codebook(pack_descriptors(patches), codebook.centroids);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const int w = words[i];
    const int qx = 2 * patches[i].cx >= img.width ? 1 : 0;
    const int qy = 2 * patches[i].cy >= img.height ? 1 : 0;
    out(w) = 1.0f;
    out(k + (qy * 2 + qx) * k + w) = 1.0f;
  }
  return out;
}

void save_features(const std::filesystem::path& path, const FeatureSet& fs) {
  if (fs.matrix.rank() != 2)
    throw ComputeError("save_features: matrix must be [n, dim]");
  if (std::int64_t(fs.ids.size()) != fs.matrix.dim(0))
    throw ComputeError("save_features: id count does not match matrix rows");
  if (fs.method.empty()) throw ComputeError("save_features: empty method name");
  // Index first: a store only exists once the blob file lands, so a failure
  // in between leaves no loadable partial store.
  std::string idx;
  for (std::size_t i = 0; i < fs.ids.size(); ++i)
    idx += std::to_string(i) + "\t" + fs.ids[i] + "\n";
  atomic_write_text(path.string() + ".idx", idx);
  BlobFile file;
  file.add(Blob::from_tensor(fs.method, fs.matrix));
  file.write(path);
}

FeatureSet load_features(const std::filesystem::path& path) {
  const BlobFile file = BlobFile::read(path);
  if (file.blobs().size() != 1)
    throw FormatError(path.string() + ": expected exactly one feature blob");
  FeatureSet fs;
  fs.method = file.blobs()[0].name;
  fs.matrix = file.blobs()[0].to_tensor();
  if (fs.matrix.rank() != 2)
    throw FormatError(path.string() + ": feature blob must be rank 2");

  const std::string idx_name = path.string() + ".idx";
  const std::vector<std::string> lines = split_lines(read_text_file(idx_name));
  for (int ln = 1; ln <= int(lines.size()); ++ln) {
    const std::string& line = lines[std::size_t(ln - 1)];
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError(idx_name, ln, "expected 'row<TAB>id'");
    const long long row = parse_int(line.substr(0, tab), idx_name, ln);
    if (row != std::int64_t(fs.ids.size()))
      throw FormatError(idx_name, ln, "rows must be consecutive from 0");
    fs.ids.push_back(line.substr(tab + 1));
  }
  if (std::int64_t(fs.ids.size()) != fs.matrix.dim(0))
    throw FormatError(idx_name + ": id count does not match matrix rows");
  return fs;
}

}  // namespace visent::features
