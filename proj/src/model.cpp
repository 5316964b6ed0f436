#include "visent/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "visent/blob_io.hpp"
#include "visent/error.hpp"
#include "visent/rng.hpp"

namespace visent::model {

namespace {

constexpr double kSigmaFloor = 1e-8;
constexpr double kLogClamp = 1e-12;

double clamped_log(double v) { return std::log(std::max(v, kLogClamp)); }

// One gradient step over the rows in batch (all rows when batch is empty is
// not a case here; callers always pass a non-empty batch).
void sgd_step(const DMatrix& x, const std::vector<int>& y,
              const std::vector<std::int64_t>& batch, double lr, double lambda,
              std::vector<double>& w, double& b) {
  const std::int64_t d = x.cols;
  std::vector<double> gw(std::size_t(d), 0.0);
  double gb = 0.0;
  for (const std::int64_t i : batch) {
    double z = b;
    for (std::int64_t j = 0; j < d; ++j) z += w[std::size_t(j)] * x.at(i, j);
    const double err = sigmoid(z) - double(y[std::size_t(i)]);
    for (std::int64_t j = 0; j < d; ++j) gw[std::size_t(j)] += err * x.at(i, j);
    gb += err;
  }
  const double inv = 1.0 / double(batch.size());
  for (std::int64_t j = 0; j < d; ++j)
    w[std::size_t(j)] -= lr * (gw[std::size_t(j)] * inv + lambda * w[std::size_t(j)]);
  b -= lr * gb * inv;
}

double full_loss(const DMatrix& x, const std::vector<int>& y, const std::vector<double>& w,
                 double b, double lambda) {
  double loss = 0.0;
  for (std::int64_t i = 0; i < x.rows; ++i) {
    double z = b;
    for (std::int64_t j = 0; j < x.cols; ++j) z += w[std::size_t(j)] * x.at(i, j);
    const double p = sigmoid(z);
    loss -= y[std::size_t(i)] ? clamped_log(p) : clamped_log(1.0 - p);
  }
  loss /= double(x.rows);
  double reg = 0.0;
  for (const double v : w) reg += v * v;
  return loss + 0.5 * lambda * reg;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ComputeError("learning rate must be > 0");
  if (epochs < 1) throw ComputeError("epochs must be >= 1");
  if (batch_size < 0) throw ComputeError("batch size must be >= 0");
  if (lambda < 0.0) throw ComputeError("lambda must be >= 0");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void fit_standardization(const Tensor& features, LRModel& m) {
  if (features.rank() != 2)
    throw ComputeError("fit_standardization expects an [n, d] matrix");
  const std::int64_t n = features.dim(0), d = features.dim(1);
  if (n < 1) throw ComputeError("fit_standardization: empty feature matrix");
  m.mu.assign(std::size_t(d), 0.0);
  m.sigma.assign(std::size_t(d), 0.0);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < d; ++j) m.mu[std::size_t(j)] += double(features(i, j));
  for (std::int64_t j = 0; j < d; ++j) m.mu[std::size_t(j)] /= double(n);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < d; ++j) {
      const double diff = double(features(i, j)) - m.mu[std::size_t(j)];
      m.sigma[std::size_t(j)] += diff * diff;
    }
  for (std::int64_t j = 0; j < d; ++j)
    m.sigma[std::size_t(j)] = std::max(std::sqrt(m.sigma[std::size_t(j)] / double(n)),
                                       kSigmaFloor);
}

DMatrix standardize(const Tensor& features, const LRModel& m) {
  if (features.rank() != 2) throw ComputeError("standardize expects an [n, d] matrix");
  const std::int64_t n = features.dim(0), d = features.dim(1);
  if (std::int64_t(m.mu.size()) != d)
    throw ComputeError("standardize: model statistics have dimension " +
                       std::to_string(m.mu.size()) + ", features have " + std::to_string(d));
  DMatrix x(n, d);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < d; ++j)
      x.at(i, j) = (double(features(i, j)) - m.mu[std::size_t(j)]) / m.sigma[std::size_t(j)];
  return x;
}

std::pair<double, std::vector<double>> lr_loss_grad(const LRModel& m, const DMatrix& x,
                                                    const std::vector<int>& y) {
  const std::int64_t n = x.rows, d = x.cols;
  if (m.dim() != d)
    throw ComputeError("lr_loss_grad: weight dimension " + std::to_string(m.dim()) +
                       " != feature dimension " + std::to_string(d));
  if (std::int64_t(y.size()) != n || n < 1)
    throw ComputeError("lr_loss_grad: need one 0/1 label per row");

  std::vector<double> grad(std::size_t(d) + 1, 0.0);
  double loss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double z = m.b;
    for (std::int64_t j = 0; j < d; ++j) z += m.w[std::size_t(j)] * x.at(i, j);
    const double p = sigmoid(z);
    loss -= y[std::size_t(i)] ? clamped_log(p) : clamped_log(1.0 - p);
    const double err = p - double(y[std::size_t(i)]);
    for (std::int64_t j = 0; j < d; ++j) grad[std::size_t(j)] += err * x.at(i, j);
    grad[std::size_t(d)] += err;
  }
  loss /= double(n);
  double reg = 0.0;
  for (std::int64_t j = 0; j < d; ++j) {
    grad[std::size_t(j)] = grad[std::size_t(j)] / double(n) + m.lambda * m.w[std::size_t(j)];
    reg += m.w[std::size_t(j)] * m.w[std::size_t(j)];
  }
  grad[std::size_t(d)] /= double(n);
  return {loss + 0.5 * m.lambda * reg, std::move(grad)};
}

LRModel train_lr(const Tensor& features, const std::vector<int>& y, const TrainConfig& cfg) {
  cfg.validate();
  if (features.rank() != 2) throw ComputeError("train_lr expects an [n, d] matrix");
  const std::int64_t n = features.dim(0), d = features.dim(1);
  if (std::int64_t(y.size()) != n) throw ComputeError("train_lr: label count != row count");
  bool has0 = false, has1 = false;
  for (const int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw ComputeError("train_lr: labels must be 0 or 1");
  }
  if (!has0 || !has1)
    throw ComputeError("train_lr: both classes must be present in the training set");

  LRModel m;
  m.lambda = cfg.lambda;
  fit_standardization(features, m);
  const DMatrix x = standardize(features, m);
  m.w.assign(std::size_t(d), 0.0);
  m.b = 0.0;

  if (cfg.batch_size == 0) {
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      auto [loss, grad] = lr_loss_grad(m, x, y);
      m.loss_trace.push_back(loss);
      for (std::int64_t j = 0; j < d; ++j)
        m.w[std::size_t(j)] -= cfg.learning_rate * grad[std::size_t(j)];
      m.b -= cfg.learning_rate * grad[std::size_t(d)];
    }
  } else {
    Rng rng(cfg.seed);
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) order[std::size_t(i)] = i;
    std::vector<std::int64_t> batch;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      m.loss_trace.push_back(full_loss(x, y, m.w, m.b, cfg.lambda));
      rng.shuffle(order);
      for (std::int64_t start = 0; start < n; start += cfg.batch_size) {
        const std::int64_t stop = std::min<std::int64_t>(start + cfg.batch_size, n);
        batch.assign(order.begin() + start, order.begin() + stop);
        sgd_step(x, y, batch, cfg.learning_rate, cfg.lambda, m.w, m.b);
      }
    }
  }
  m.loss_trace.push_back(full_loss(x, y, m.w, m.b, cfg.lambda));
  return m;
}

std::vector<double> predict_scores(const LRModel& m, const Tensor& features) {
  const DMatrix x = standardize(features, m);
  if (m.dim() != x.cols)
    throw ComputeError("predict_scores: weight dimension != feature dimension");
  std::vector<double> scores(std::size_t(x.rows));
  for (std::int64_t i = 0; i < x.rows; ++i) {
    double z = m.b;
    for (std::int64_t j = 0; j < x.cols; ++j) z += m.w[std::size_t(j)] * x.at(i, j);
    scores[std::size_t(i)] = sigmoid(z);
  }
  return scores;
}

const LRModel* OneVsRestModel::find(int label) const {
  for (const auto& [l, m] : models)
    if (l == label) return &m;
  return nullptr;
}

OneVsRestModel train_one_vs_rest(const Tensor& features, const std::vector<int>& labels,
                                 const TrainConfig& cfg,
                                 const std::vector<int>& label_universe) {
  if (features.rank() != 2) throw ComputeError("train_one_vs_rest expects an [n, d] matrix");
  if (std::int64_t(labels.size()) != features.dim(0))
    throw ComputeError("train_one_vs_rest: label count != row count");

  std::vector<int> targets = label_universe;
  if (targets.empty()) targets.assign(labels.begin(), labels.end());
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  const std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2)
    throw ComputeError("train_one_vs_rest: need at least 2 distinct labels");

  OneVsRestModel ovr;
  std::vector<int> y(labels.size());
  for (const int target : targets) {
    if (!present.count(target)) {
      ovr.skipped.push_back(target);
      continue;
    }
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == target ? 1 : 0;
    ovr.models.emplace_back(target, train_lr(features, y, cfg));
  }
  return ovr;
}

void OneVsRestModel::save(const std::filesystem::path& path) const {
  BlobFile file;
  for (const auto& [label, m] : models) {
    const std::string p = std::to_string(label) + ":";
    const std::int64_t d = m.dim();
    Tensor w({d}), mu({d}), sigma({d});
    for (std::int64_t j = 0; j < d; ++j) {
      w(j) = float(m.w[std::size_t(j)]);
      mu(j) = float(m.mu[std::size_t(j)]);
      sigma(j) = float(m.sigma[std::size_t(j)]);
    }
    file.add(Blob::from_tensor(p + "w", w));
    file.add(Blob::from_tensor(p + "b", Tensor({1}, {float(m.b)})));
    file.add(Blob::from_tensor(p + "mu", mu));
    file.add(Blob::from_tensor(p + "sigma", sigma));
    file.add(Blob::from_tensor(p + "lambda", Tensor({1}, {float(m.lambda)})));
  }
  file.write(path);
}

OneVsRestModel OneVsRestModel::load(const std::filesystem::path& path) {
  const BlobFile file = BlobFile::read(path);
  OneVsRestModel ovr;
  for (const Blob& blob : file.blobs()) {
    if (!blob.name.ends_with(":w")) continue;
    const std::string token = blob.name.substr(0, blob.name.size() - 2);
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad label token '" + token + "'");
    }
    LRModel m;
    m.w.assign(blob.data.begin(), blob.data.end());
    const Blob& mu = file.require(token + ":mu");
    const Blob& sigma = file.require(token + ":sigma");
    if (mu.data.size() != blob.data.size() || sigma.data.size() != blob.data.size())
      throw FormatError(path.string() + ": statistics dimension mismatch for label " + token);
    m.mu.assign(mu.data.begin(), mu.data.end());
    m.sigma.assign(sigma.data.begin(), sigma.data.end());
    m.b = double(file.require(token + ":b").data.at(0));
    m.lambda = double(file.require(token + ":lambda").data.at(0));
    ovr.models.emplace_back(label, std::move(m));
  }
  if (ovr.models.empty())
    throw FormatError(path.string() + ": no model blobs found");
  std::sort(ovr.models.begin(), ovr.models.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return ovr;
}

}  // namespace visent::model
