#include "visent/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "visent/error.hpp"
#include "visent/rng.hpp"

namespace visent::eval {

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::map<int, std::vector<std::int64_t>> by_class(const std::vector<int>& labels) {
  std::map<int, std::vector<std::int64_t>> classes;
  for (std::size_t i = 0; i < labels.size(); ++i)
    classes[labels[i]].push_back(static_cast<std::int64_t>(i));
  return classes;
}

Tensor gather_rows(const Tensor& m, const std::vector<std::int64_t>& rows) {
  const std::int64_t cols = m.dim(1);
  Tensor out({static_cast<std::int64_t>(rows.size()), cols});
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::int64_t c = 0; c < cols; ++c)
      out(static_cast<std::int64_t>(r), c) = m(rows[r], c);
  return out;
}

}  // namespace

double auc(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
  if (pos_scores.empty() || neg_scores.empty())
    throw ComputeError("auc undefined: a class has no test examples");
  struct Entry {
    double score;
    bool positive;
  };
  std::vector<Entry> all;
  all.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) {
    if (!std::isfinite(s)) throw ComputeError("auc: non-finite score");
    all.push_back({s, true});
  }
  for (double s : neg_scores) {
    if (!std::isfinite(s)) throw ComputeError("auc: non-finite score");
    all.push_back({s, false});
  }
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Average ranks over tie groups, then the rank-sum form of the statistic.
  const std::size_t n = all.size();
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && all[j].score == all[i].score) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (all[t].positive) pos_rank_sum += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(pos_scores.size());
  const double nn = static_cast<double>(neg_scores.size());
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

Partition stratified_split(const std::vector<int>& labels, double test_fraction,
                           std::uint64_t seed) {
  if (labels.empty()) throw ComputeError("stratified_split: no labels");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ComputeError("stratified_split: test fraction must be in (0, 1)");
  auto classes = by_class(labels);
  Partition p;
  p.seed = seed;
  Rng rng(seed);
  for (auto& [label, members] : classes) {
    const std::int64_t size = static_cast<std::int64_t>(members.size());
    if (size < 2)
      throw ComputeError("stratified_split: class " + std::to_string(label) +
                         " has a single member");
    rng.shuffle(members);
    std::int64_t want = std::llround(static_cast<double>(size) * test_fraction);
    want = std::clamp<std::int64_t>(want, 1, size - 1);
    for (std::int64_t i = 0; i < size; ++i)
      (i < want ? p.test : p.train).push_back(members[static_cast<std::size_t>(i)]);
  }
  std::sort(p.train.begin(), p.train.end());
  std::sort(p.test.begin(), p.test.end());
  return p;
}

std::vector<Partition> stratified_kfold(const std::vector<int>& labels, int k,
                                        std::uint64_t seed) {
  if (labels.empty()) throw ComputeError("stratified_kfold: no labels");
  if (k < 2) throw ComputeError("stratified_kfold: need at least 2 folds");
  auto classes = by_class(labels);
  std::vector<std::vector<std::int64_t>> folds(static_cast<std::size_t>(k));
  Rng rng(seed);
  for (auto& [label, members] : classes) {
    if (members.size() < static_cast<std::size_t>(k))
      throw ComputeError("stratified_kfold: class " + std::to_string(label) +
                         " has fewer members than folds");
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i)
      folds[i % static_cast<std::size_t>(k)].push_back(members[i]);
  }
  std::vector<Partition> parts(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    Partition& p = parts[static_cast<std::size_t>(f)];
    p.seed = seed;
    p.test = folds[static_cast<std::size_t>(f)];
    for (int g = 0; g < k; ++g)
      if (g != f)
        p.train.insert(p.train.end(), folds[static_cast<std::size_t>(g)].begin(),
                       folds[static_cast<std::size_t>(g)].end());
    std::sort(p.train.begin(), p.train.end());
    std::sort(p.test.begin(), p.test.end());
  }
  return parts;
}

EvalReport run_protocol(const Tensor& features, const std::vector<int>& labels,
                        const std::string& method, const ProtocolConfig& cfg) {
  if (features.rank() != 2)
    throw ComputeError("run_protocol: features must be rank 2, got " + features.shape_str());
  if (features.dim(0) != static_cast<std::int64_t>(labels.size()))
    throw ComputeError("run_protocol: feature rows and labels misaligned");
  if (cfg.runs < 1) throw ComputeError("run_protocol: need at least one run");

  EvalReport rep;
  rep.method = method;
  rep.run_count = cfg.runs;
  rep.base_seed = cfg.base_seed;
  {
    std::set<int> distinct(labels.begin(), labels.end());
    rep.labels.assign(distinct.begin(), distinct.end());
  }
  rep.values.assign(rep.labels.size(), std::vector<RunValue>(static_cast<std::size_t>(cfg.runs)));

  std::vector<Partition> parts;
  if (cfg.kfold) {
    parts = stratified_kfold(labels, cfg.runs, cfg.base_seed);
  } else {
    for (int r = 0; r < cfg.runs; ++r)
      parts.push_back(stratified_split(labels, cfg.test_fraction,
                                       cfg.base_seed + static_cast<std::uint64_t>(r)));
  }

  for (int r = 0; r < cfg.runs; ++r) {
    const std::uint64_t run_seed = cfg.base_seed + static_cast<std::uint64_t>(r);
    rep.run_seeds.push_back(run_seed);
    const Partition& part = parts[static_cast<std::size_t>(r)];

    Tensor train_x = gather_rows(features, part.train);
    std::vector<int> train_y;
    train_y.reserve(part.train.size());
    for (std::int64_t i : part.train) train_y.push_back(labels[static_cast<std::size_t>(i)]);

    model::TrainConfig tc = cfg.train;
    tc.seed = run_seed;
    model::OneVsRestModel ovr = model::train_one_vs_rest(train_x, train_y, tc, rep.labels);
    for (int skipped : ovr.skipped)
      rep.warnings.push_back("run " + std::to_string(r) + ": label " +
                             std::to_string(skipped) +
                             " had no positives in the training split");

    Tensor test_x = gather_rows(features, part.test);
    std::vector<int> test_y;
    test_y.reserve(part.test.size());
    for (std::int64_t i : part.test) test_y.push_back(labels[static_cast<std::size_t>(i)]);

    for (std::size_t li = 0; li < rep.labels.size(); ++li) {
      const int label = rep.labels[li];
      const model::LRModel* m = ovr.find(label);
      if (m == nullptr) continue;  // skipped above; stays undefined
      std::vector<double> scores = model::predict_scores(*m, test_x);
      std::vector<double> pos, neg;
      for (std::size_t t = 0; t < test_y.size(); ++t)
        (test_y[t] == label ? pos : neg).push_back(scores[t]);
      if (pos.empty() || neg.empty()) {
        rep.warnings.push_back("run " + std::to_string(r) + ": label " +
                               std::to_string(label) +
                               " undefined on the test split (one-sided)");
        continue;
      }
      rep.values[li][static_cast<std::size_t>(r)] = {true, auc(pos, neg)};
    }
  }

  rep.label_mean.assign(rep.labels.size(), std::numeric_limits<double>::quiet_NaN());
  double overall_sum = 0.0;
  int overall_n = 0;
  for (std::size_t li = 0; li < rep.labels.size(); ++li) {
    double sum = 0.0;
    int n = 0;
    for (const RunValue& rv : rep.values[li])
      if (rv.defined) {
        sum += rv.value;
        ++n;
      }
    if (n > 0) {
      rep.label_mean[li] = sum / n;
      overall_sum += rep.label_mean[li];
      ++overall_n;
    } else {
      rep.warnings.push_back("label " + std::to_string(rep.labels[li]) +
                             " undefined in every run; excluded from the overall mean");
    }
  }
  rep.overall = overall_n > 0 ? overall_sum / overall_n
                              : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

namespace {

// Scheme display order filtered to the labels the reports carry.
std::vector<std::size_t> column_order(const std::vector<int>& labels, data::LabelScheme scheme) {
  std::vector<std::size_t> order;
  for (int want : data::scheme_label_order(scheme)) {
    auto it = std::find(labels.begin(), labels.end(), want);
    if (it != labels.end())
      order.push_back(static_cast<std::size_t>(it - labels.begin()));
  }
  if (order.size() != labels.size())
    throw ComputeError("report labels do not fit the label scheme");
  return order;
}

}  // namespace

std::string render_table(const std::vector<EvalReport>& reports, data::LabelScheme scheme) {
  if (reports.empty()) throw ComputeError("render_table: no reports");
  for (const EvalReport& r : reports)
    if (r.labels != reports.front().labels)
      throw ComputeError("render_table: reports carry different label sets");

  const std::vector<std::size_t> order = column_order(reports.front().labels, scheme);
  std::vector<std::string> headers{"Method"};
  for (std::size_t li : order)
    headers.push_back(data::label_display(reports.front().labels[li], scheme));
  headers.push_back("Overall");

  std::vector<std::vector<std::string>> rows;
  for (const EvalReport& r : reports) {
    std::vector<std::string> row{r.method};
    for (std::size_t li : order)
      row.push_back(std::isnan(r.label_mean[li]) ? "NA" : fmt3(r.label_mean[li]));
    row.push_back(std::isnan(r.overall) ? "NA" : fmt3(r.overall));
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < headers.size(); ++c) {
    std::size_t w = headers[c].size();
    for (const auto& row : rows) w = std::max(w, row[c].size());
    widths.push_back(w);
  }

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out << row[c] << std::string(widths[c] - row[c].size(), ' ');
      } else {
        out << "  " << std::string(widths[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  };
  emit(headers);
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::string render_records(const std::vector<EvalReport>& reports, data::LabelScheme scheme) {
  std::ostringstream out;
  out << "method\tlabel\trun\tseed\tauc\n";
  for (const EvalReport& r : reports) {
    const std::vector<std::size_t> order = column_order(r.labels, scheme);
    for (std::size_t li : order) {
      for (int run = 0; run < r.run_count; ++run) {
        const RunValue& rv = r.values[li][static_cast<std::size_t>(run)];
        out << r.method << '\t' << data::label_token(r.labels[li], scheme) << '\t' << run
            << '\t' << r.run_seeds[static_cast<std::size_t>(run)] << '\t'
            << (rv.defined ? fmt_full(rv.value) : "NA") << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace visent::eval
