#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "visent/tensor.hpp"

namespace visent::model {

// Solver settings. batch_size 0 selects full-batch gradient descent; a
// positive value selects mini-batch SGD with seeded shuffling.
struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  int batch_size = 0;
  double lambda = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;  // learning_rate > 0, epochs >= 1, rest nonnegative
};

// Numerically stable logistic link, branch by sign.
double sigmoid(double z);

// Binary logistic regression with the standardization that produced it.
// Training internals run in doubles so the finite-difference gradient
// contract holds at 1e-4.
struct LRModel {
  std::vector<double> w;
  double b = 0.0;
  double lambda = 0.0;
  std::vector<double> mu;     // per-dimension training mean
  std::vector<double> sigma;  // per-dimension training std, floored at 1e-8
  std::vector<double> loss_trace;

  std::int64_t dim() const { return std::int64_t(w.size()); }
};

// Row-major double matrix holding standardized features.
struct DMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> values;

  DMatrix() = default;
  DMatrix(std::int64_t r, std::int64_t c)
      : rows(r), cols(c), values(std::size_t(r) * std::size_t(c)) {}
  double at(std::int64_t i, std::int64_t j) const {
    return values[std::size_t(i * cols + j)];
  }
  double& at(std::int64_t i, std::int64_t j) { return values[std::size_t(i * cols + j)]; }
};

// Captures population mean / std per dimension into the model.
void fit_standardization(const Tensor& features, LRModel& m);

// (x - mu) / sigma with the model's stored statistics.
DMatrix standardize(const Tensor& features, const LRModel& m);

// Mean cross-entropy + (lambda/2)|w|^2 (bias unregularized) and its
// gradient, laid out [dw..., db]. Labels must be 0/1; log arguments are
// clamped at 1e-12.
std::pair<double, std::vector<double>> lr_loss_grad(const LRModel& m, const DMatrix& x,
                                                    const std::vector<int>& y);

// Fits from zero init on standardized features. The loss trace records the
// full-data loss before every epoch plus one final entry.
LRModel train_lr(const Tensor& features, const std::vector<int>& y, const TrainConfig& cfg);

// sigmoid(w . standardize(x) + b) per row.
std::vector<double> predict_scores(const LRModel& m, const Tensor& features);

// One binary model per label, keyed and ordered by ascending label value.
struct OneVsRestModel {
  std::vector<std::pair<int, LRModel>> models;
  std::vector<int> skipped;  // requested labels that had no positive example

  const LRModel* find(int label) const;

  // Blob layout per label L: "L:w", "L:b", "L:mu", "L:sigma", "L:lambda".
  void save(const std::filesystem::path& path) const;
  static OneVsRestModel load(const std::filesystem::path& path);
};

// Trains y=1-iff-label==L models for every label in label_universe (or for
// every distinct label present when the universe is empty). Universe labels
// without positives are recorded in `skipped` rather than trained.
OneVsRestModel train_one_vs_rest(const Tensor& features, const std::vector<int>& labels,
                                 const TrainConfig& cfg,
                                 const std::vector<int>& label_universe = {});

}  // namespace visent::model
