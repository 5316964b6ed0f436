#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "visent/data.hpp"
#include "visent/model.hpp"
#include "visent/tensor.hpp"

namespace visent::eval {

// Mann-Whitney statistic: P(pos > neg) with ties counted 0.5, computed by
// sort-and-rank but exactly equal to exhaustive pair counting. Both lists
// must be non-empty and finite.
double auc(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

struct Partition {
  std::uint64_t seed = 0;
  std::vector<std::int64_t> train;
  std::vector<std::int64_t> test;
};

// Per-class seeded shuffle; per-class test count = round(size * fraction)
// clamped to [1, size - 1]. Every class therefore lands in both splits.
// Classes of size 1 are rejected.
Partition stratified_split(const std::vector<int>& labels, double test_fraction,
                           std::uint64_t seed);

// k disjoint stratified folds from one seeded shuffle; partition i uses
// fold i as the test side. Every class needs at least k members.
std::vector<Partition> stratified_kfold(const std::vector<int>& labels, int k,
                                        std::uint64_t seed);

struct RunValue {
  bool defined = false;
  double value = 0.0;
};

struct EvalReport {
  std::string method;
  std::vector<int> labels;                   // ascending
  std::vector<std::vector<RunValue>> values; // values[label_index][run]
  std::vector<double> label_mean;            // NaN when undefined in all runs
  double overall = 0.0;                      // unweighted mean of defined label means
  int run_count = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> run_seeds;
  std::vector<std::string> warnings;
};

struct ProtocolConfig {
  int runs = 5;
  double test_fraction = 0.2;
  std::uint64_t base_seed = 0;
  bool kfold = false;  // cross-validation folds instead of independent splits
  model::TrainConfig train;
};

// For each run r (seed base_seed + r): split, train one-vs-rest on the
// train side, score the test side, per-label AUC with positives = test
// items of that label. Undefined label/run combinations are excluded from
// the means with a warning. Bit-reproducible for fixed seeds.
EvalReport run_protocol(const Tensor& features, const std::vector<int>& labels,
                        const std::string& method, const ProtocolConfig& cfg);

// Fixed-width text table: one row per method, columns per label plus
// Overall, values to 3 decimals. All reports must share one label set.
std::string render_table(const std::vector<EvalReport>& reports, data::LabelScheme scheme);

// Machine-readable TSV: one record per method x label x run.
std::string render_records(const std::vector<EvalReport>& reports, data::LabelScheme scheme);

}  // namespace visent::eval
