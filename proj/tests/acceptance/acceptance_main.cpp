// Release gate: nine acceptance criteria, one PASS/FAIL line each, exit 1 on
// any failure. Criteria 1-5 and 9 run in-process against independent
// reference implementations; criteria 6-8 drive the command-line binaries on
// a synthetic corpus in a scratch directory.
//
// usage: visent_acceptance <visent-bin> <make-weights-bin> <configs-dir> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <utility>
#include <vector>

#include "support/reference.hpp"
#include "visent/eval.hpp"
#include "visent/features.hpp"
#include "visent/image_io.hpp"
#include "visent/model.hpp"
#include "visent/net.hpp"
#include "visent/rng.hpp"
#include "visent/tensor.hpp"
#include "visent/textkv.hpp"

using namespace visent;
namespace fsys = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// ---- tolerances, pinned ------------------------------------------------------
constexpr double kPrimitiveRelTol = 1e-5;   // criterion 1
constexpr double kPrimitiveBudgetS = 30.0;  // criterion 1
constexpr double kSoftmaxSumTol = 1e-6;     // criterion 2
constexpr double kForwardBudgetS = 2.0;     // criterion 3
constexpr double kGradRelTol = 1e-4;        // criterion 4
constexpr double kComplementTol = 1e-12;    // criterion 5
constexpr double kLowlevelAucFloor = 0.95;  // criterion 6
constexpr double kFc7AucFloor = 0.80;       // criterion 6
constexpr double kPipelineBudgetS = 600.0;  // criterion 6

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---- shell plumbing ----------------------------------------------------------

void must_run(const std::string& cmd, const fsys::path& log) {
  const std::string full = cmd + " >> \"" + log.string() + "\" 2>&1";
  const int rc = std::system(full.c_str());
  const int code = rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -2);
  if (code != 0)
    throw std::runtime_error("command exited " + std::to_string(code) + ": " + cmd +
                             " (log: " + log.string() + ")");
}

// Overall column of the named method's row in an evaluation report.
double overall_of(const fsys::path& report, const std::string& method) {
  for (const std::string& line : split_lines(read_text_file(report))) {
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> toks;
    while (ss >> tok) toks.push_back(tok);
    if (toks.size() >= 2 && toks.front() == method) {
      if (toks.back() == "NA")
        throw std::runtime_error("overall AUC for " + method + " is undefined");
      return std::stod(toks.back());
    }
  }
  throw std::runtime_error("no '" + method + "' row in " + report.string());
}

// ---- criterion 1: layer primitives vs naive references ------------------------

Tensor gauss_tensor(Rng& rng, std::vector<std::int64_t> shape) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t.ptr()[i] = float(rng.next_gauss());
  return t;
}

std::pair<bool, std::string> criterion_primitives() {
  const auto t0 = Clock::now();
  Rng rng(1000);
  double worst = 0.0;
  int cases = 0;

  for (int i = 0; i < 40; ++i) {  // convolution
    const int groups = 1 + int(rng.next_below(2));
    const int in_c = groups * (1 + int(rng.next_below(4)));
    const int out_c = groups * (1 + int(rng.next_below(4)));
    const int k = 1 + int(rng.next_below(5));
    const int pad = int(rng.next_below(3));
    const int stride = 1 + int(rng.next_below(3));
    const int min_side = std::max(1, k - 2 * pad);
    const int h = min_side + int(rng.next_below(std::uint64_t(17 - min_side)));
    const int w = min_side + int(rng.next_below(std::uint64_t(17 - min_side)));
    Tensor in = gauss_tensor(rng, {in_c, h, w});
    Tensor wt = gauss_tensor(rng, {out_c, in_c / groups, k, k});
    Tensor b = gauss_tensor(rng, {out_c});
    worst = std::max(worst, refimpl::max_rel_err(net::conv_forward(in, wt, b, stride, pad, groups),
                                                 refimpl::conv_ref(in, wt, b, stride, pad, groups)));
    ++cases;
  }
  for (int i = 0; i < 20; ++i) {  // max pooling
    const int c = 1 + int(rng.next_below(8));
    const int window = 2 + int(rng.next_below(2));
    const int stride = 1 + int(rng.next_below(3));
    const int h = window + int(rng.next_below(std::uint64_t(17 - window)));
    const int w = window + int(rng.next_below(std::uint64_t(17 - window)));
    Tensor in = gauss_tensor(rng, {c, h, w});
    worst = std::max(worst, refimpl::max_rel_err(net::max_pool(in, window, stride),
                                                 refimpl::pool_ref(in, window, stride)));
    ++cases;
  }
  for (int i = 0; i < 20; ++i) {  // cross-channel normalization
    const int c = 1 + int(rng.next_below(8));
    const int h = 1 + int(rng.next_below(16));
    const int w = 1 + int(rng.next_below(16));
    const int n = rng.next_below(2) ? 5 : 3;
    const float k = 1.0f + float(rng.next_double());
    const float alpha = 1e-4f + 2e-3f * float(rng.next_double());
    Tensor in = gauss_tensor(rng, {c, h, w});
    worst = std::max(worst, refimpl::max_rel_err(net::lrn(in, n, k, alpha, 0.75f),
                                                 refimpl::lrn_ref(in, n, k, alpha, 0.75f)));
    ++cases;
  }
  for (int i = 0; i < 20; ++i) {  // fully connected
    const int c = 1 + int(rng.next_below(8));
    const int h = 1 + int(rng.next_below(16));
    const int w = 1 + int(rng.next_below(16));
    const int out = 1 + int(rng.next_below(32));
    Tensor in = gauss_tensor(rng, {c, h, w});
    Tensor wt = gauss_tensor(rng, {out, std::int64_t(c) * h * w});
    Tensor b = gauss_tensor(rng, {out});
    worst = std::max(worst, refimpl::max_rel_err(net::fc_forward(in, wt, b),
                                                 refimpl::fc_ref(in, wt, b)));
    ++cases;
  }

  const double secs = seconds_since(t0);
  const bool ok = cases >= 100 && worst < kPrimitiveRelTol && secs < kPrimitiveBudgetS;
  return {ok, std::to_string(cases) + " randomized cases, max rel err " +
                  fmt("%.2e", worst) + " (tol " + fmt("%.0e", kPrimitiveRelTol) + "), " +
                  fmt("%.1f", secs) + "s (budget " + fmt("%.0f", kPrimitiveBudgetS) + "s)"};
}

// ---- criteria 2 and 3: canonical network -------------------------------------

struct Canonical {
  net::NetworkSpec spec;
  net::WeightStore ws;
  Tensor input;
};

Canonical build_canonical(const fsys::path& configs) {
  Canonical c;
  c.spec = net::NetworkSpec::parse_file(configs / "alexnet.net");
  c.ws = refimpl::he_weights(c.spec, 0);
  Rng rng(77);
  c.input = gauss_tensor(rng, {c.spec.input_shape[0], c.spec.input_shape[1],
                               c.spec.input_shape[2]});
  for (std::int64_t i = 0; i < c.input.size(); ++i) c.input.ptr()[i] *= 50.0f;
  return c;
}

std::pair<bool, std::string> criterion_taps(const Canonical& c) {
  const auto taps = net::forward(c.spec, c.ws, c.input, {"fc7", "fc8"});
  const Tensor& fc7 = taps.at("fc7");
  const Tensor& fc8 = taps.at("fc8");
  double sum = 0.0;
  for (std::int64_t i = 0; i < fc8.size(); ++i) sum += double(fc8.ptr()[i]);
  const bool ok = fc7.size() == 4096 && fc8.size() == 1000 &&
                  std::abs(sum - 1.0) <= kSoftmaxSumTol;
  return {ok, "fc7 dim " + std::to_string(fc7.size()) + ", fc8 dim " +
                  std::to_string(fc8.size()) + ", softmax sum off by " +
                  fmt("%.2e", std::abs(sum - 1.0)) + " (tol " +
                  fmt("%.0e", kSoftmaxSumTol) + ")"};
}

std::pair<bool, std::string> criterion_latency(const Canonical& c) {
  const auto t0 = Clock::now();
  const auto taps = net::forward(c.spec, c.ws, c.input, {"fc8"});
  const double secs = seconds_since(t0);
  (void)taps;
  return {secs < kForwardBudgetS, "one 3x224x224 forward in " + fmt("%.3f", secs) +
                                      "s (budget " + fmt("%.1f", kForwardBudgetS) +
                                      "s, single-threaded)"};
}

// ---- criterion 4: analytic gradient vs finite differences ---------------------

std::pair<bool, std::string> criterion_gradient() {
  Rng rng(2000);
  double worst = 0.0;
  int problems = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t n = 3 + std::int64_t(rng.next_below(16));
    const std::int64_t d = 1 + std::int64_t(rng.next_below(8));
    model::DMatrix x(n, d);
    for (double& v : x.values) v = rng.next_gauss();
    std::vector<int> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = int(rng.next_below(2));
    model::LRModel m;
    m.w.resize(std::size_t(d));
    for (double& v : m.w) v = 0.5 * rng.next_gauss();
    m.b = 0.5 * rng.next_gauss();
    m.lambda = 0.003 * double(trial % 4);

    const auto [loss, grad] = model::lr_loss_grad(m, x, y);
    (void)loss;
    const double h = 1e-6;
    for (std::int64_t j = 0; j <= d; ++j) {
      model::LRModel lo = m, hi = m;
      if (j < d) {
        lo.w[std::size_t(j)] -= h;
        hi.w[std::size_t(j)] += h;
      } else {
        lo.b -= h;
        hi.b += h;
      }
      const double fd =
          (model::lr_loss_grad(hi, x, y).first - model::lr_loss_grad(lo, x, y).first) /
          (2.0 * h);
      worst = std::max(worst,
                       std::abs(grad[std::size_t(j)] - fd) / std::max(1.0, std::abs(fd)));
    }
    ++problems;
  }
  return {problems >= 50 && worst < kGradRelTol,
          std::to_string(problems) + " problems, max rel err " + fmt("%.2e", worst) +
              " (tol " + fmt("%.0e", kGradRelTol) + ")"};
}

// ---- criterion 5: rank AUC vs pair counting -----------------------------------

std::pair<bool, std::string> criterion_auc() {
  Rng rng(3000);
  int exact = 0;
  double worst_complement = 0.0;
  const int instances = 1000;
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t np = 1 + rng.next_below(200);
    const std::size_t nn = 1 + rng.next_below(200);
    const double denom = double(2 + rng.next_below(12));  // coarse grid forces ties
    std::vector<double> pos(np), neg(nn);
    for (double& s : pos) s = double(rng.next_below(std::uint64_t(denom))) / denom;
    for (double& s : neg) s = double(rng.next_below(std::uint64_t(denom))) / denom;
    const double fast = eval::auc(pos, neg);
    if (fast == refimpl::auc_pairs(pos, neg)) ++exact;
    worst_complement =
        std::max(worst_complement, std::abs(fast + eval::auc(neg, pos) - 1.0));
  }
  return {exact == instances && worst_complement <= kComplementTol,
          std::to_string(exact) + "/" + std::to_string(instances) +
              " instances exactly equal, complement off by at most " +
              fmt("%.2e", worst_complement) + " (tol " + fmt("%.0e", kComplementTol) + ")"};
}

// ---- criteria 6-8: synthetic corpus through the binaries ----------------------

struct Pipeline {
  bool ran = false;
  fsys::path corpus, images, work, log;
  fsys::path annotated, lexicon, samples, low, fc7, cb, alex_w, report, records;
  std::string prepare_cmd, extract_low_cmd, evaluate_cmd;
};

void write_synthetic_corpus(Pipeline& p) {
  fsys::create_directories(p.images);
  Rng rng(2024);
  std::string manifest = "id\timage\ttags\ta1\ta2\ta3\n";
  for (int i = 0; i < 400; ++i) {
    const bool warm = i < 200;
    const float hot = 150.0f + float(rng.next_below(60));
    const float mid = 40.0f + float(rng.next_below(40));
    const float low = 20.0f + float(rng.next_below(40));
    Image img(128, 128, 3);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) {
        // Warm images carry horizontal stripes, cool ones vertical.
        const bool on = ((warm ? y : x) / 8) % 2 != 0;
        const float bump = on ? 50.0f : 0.0f;
        const float n0 = float(rng.next_below(51)) - 25.0f;
        const float n1 = float(rng.next_below(51)) - 25.0f;
        const float n2 = float(rng.next_below(51)) - 25.0f;
        img.at(y, x, 0) = (warm ? hot + bump : low) + n0;
        img.at(y, x, 1) = mid + n1;
        img.at(y, x, 2) = (warm ? low : hot + bump) + n2;
      }
    char name[24];
    std::snprintf(name, sizeof(name), "p%04d.ppm", i);
    write_ppm(p.images / name, img);
    char row[96];
    std::snprintf(row, sizeof(row), "p%04d\timages/%s\tLove,photo\t%d\t%d\t%d\n", i, name,
                  warm ? 1 : -1, warm ? 1 : -1, warm ? 1 : -1);
    manifest += row;
  }
  atomic_write_text(p.annotated, manifest);
  atomic_write_text(p.lexicon, "type=strongsubj word1=love priorpolarity=positive\n");
}

std::pair<bool, std::string> criterion_pipeline(Pipeline& p, const std::string& visent_bin,
                                                const std::string& weights_bin,
                                                const fsys::path& configs) {
  const auto t0 = Clock::now();
  fsys::create_directories(p.work);
  write_synthetic_corpus(p);

  const int threads =
      std::clamp(int(std::thread::hardware_concurrency()), 1, 8);
  const std::string tflag = " --threads " + std::to_string(threads);
  const std::string net_path = (configs / "alexnet.net").string();

  p.prepare_cmd = visent_bin + " prepare --manifest \"" + p.annotated.string() +
                  "\" --lexicon \"" + p.lexicon.string() + "\" --out \"" +
                  p.samples.string() + "\"";
  must_run(p.prepare_cmd, p.log);

  p.extract_low_cmd = visent_bin + tflag + " extract --samples \"" + p.samples.string() +
                      "\" --method lowlevel --codebook \"" + p.cb.string() +
                      "\" --out \"" + p.low.string() + "\" --image-root \"" +
                      p.corpus.string() + "\"";
  must_run(p.extract_low_cmd, p.log);

  must_run(weights_bin + " --net \"" + net_path + "\" --out \"" + p.alex_w.string() +
               "\" --seed 0",
           p.log);
  must_run(visent_bin + tflag + " extract --samples \"" + p.samples.string() +
               "\" --method fc7 --net \"" + net_path + "\" --weights \"" +
               p.alex_w.string() + "\" --out \"" + p.fc7.string() + "\" --image-root \"" +
               p.corpus.string() + "\"",
           p.log);

  p.evaluate_cmd = visent_bin + " --seed 0 evaluate --features \"" + p.low.string() + "," +
                   p.fc7.string() + "\" --samples \"" + p.samples.string() +
                   "\" --out \"" + p.report.string() + "\" --records \"" +
                   p.records.string() + "\"";
  must_run(p.evaluate_cmd, p.log);

  const double low_auc = overall_of(p.report, "lowlevel");
  const double fc7_auc = overall_of(p.report, "fc7");
  const double secs = seconds_since(t0);
  p.ran = true;
  const bool ok =
      low_auc >= kLowlevelAucFloor && fc7_auc >= kFc7AucFloor && secs < kPipelineBudgetS;
  return {ok, "5 runs, seeds 0-4: lowlevel AUC " + fmt("%.3f", low_auc) + " (floor " +
                  fmt("%.2f", kLowlevelAucFloor) + "), fc7 AUC " + fmt("%.3f", fc7_auc) +
                  " (floor " + fmt("%.2f", kFc7AucFloor) + "), " + fmt("%.0f", secs) +
                  "s (budget " + fmt("%.0f", kPipelineBudgetS) + "s)"};
}

struct Curation {
  bool ran = false;
  fsys::path dir, log, annotated, lexicon, samples, report;
  std::string prepare_cmd;
};

std::pair<bool, std::string> criterion_curation(Curation& c, const std::string& visent_bin) {
  fsys::create_directories(c.dir);
  atomic_write_text(c.lexicon, "type=strongsubj word1=love priorpolarity=positive\n");

  // 1110 majority posts across the target histogram, 69 without a majority,
  // 21 without a sentiment-bearing tag.
  const std::pair<int, int> counts[] = {{-2, 165}, {-1, 190}, {0, 90}, {1, 465}, {2, 200}};
  const int distinct_triples[][3] = {{-2, -1, 0}, {-1, 0, 1}, {0, 1, 2},  {-2, 0, 2},
                                     {-2, -1, 1}, {-2, 1, 2}, {-1, 0, 2}, {-2, -1, 2},
                                     {-2, 0, 1},  {-1, 1, 2}};
  std::string manifest = "id\timage\ttags\ta1\ta2\ta3\n";
  int id = 0;
  auto add = [&](const char* tags, int a1, int a2, int a3) {
    char row[96];
    std::snprintf(row, sizeof(row), "q%04d\timages/q%04d.ppm\t%s\t%d\t%d\t%d\n", id, id,
                  tags, a1, a2, a3);
    manifest += row;
    ++id;
  };
  for (const auto& [label, count] : counts)
    for (int i = 0; i < count; ++i) add("love,day", label, label, label);
  for (int i = 0; i < 69; ++i) {
    const int* t = distinct_triples[i % 10];
    add("love,day", t[0], t[1], t[2]);
  }
  for (int i = 0; i < 21; ++i) add("table,day", 1, 1, 1);
  atomic_write_text(c.annotated, manifest);

  c.prepare_cmd = visent_bin + " prepare --manifest \"" + c.annotated.string() +
                  "\" --lexicon \"" + c.lexicon.string() + "\" --out \"" +
                  c.samples.string() + "\" --report \"" + c.report.string() + "\"";
  must_run(c.prepare_cmd, c.log);
  c.ran = true;

  const std::string expected =
      "posts=1200\n"
      "kept=1179\n"
      "resolved=1110\n"
      "agreement_rate=0.941476\n"
      "label_-2=165\n"
      "label_-1=190\n"
      "label_0=90\n"
      "label_1=465\n"
      "label_2=200\n";
  const std::string got = read_text_file(c.report);
  if (got != expected) {
    std::string first_diff = "report mismatch";
    const std::vector<std::string> a = split_lines(got), b = split_lines(expected);
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
      const std::string ga = i < a.size() ? a[i] : "<missing>";
      const std::string gb = i < b.size() ? b[i] : "<missing>";
      if (ga != gb) {
        first_diff = "expected '" + gb + "', got '" + ga + "'";
        break;
      }
    }
    return {false, first_diff};
  }
  return {true, "1179/1200 kept, histogram (165,190,90,465,200), agreement 1110/1179 = 0.941476"};
}

std::pair<bool, std::string> criterion_rerun(const Pipeline& p, const Curation& c) {
  if (!p.ran || !c.ran)
    return {false, "earlier pipeline criteria did not complete; nothing to re-run"};

  const std::vector<fsys::path> watched = {p.report, p.records, p.samples,
                                           fsys::path(p.low.string() + ".idx"), p.low,
                                           c.report, c.samples};
  std::vector<std::string> before;
  for (const fsys::path& f : watched) before.push_back(read_text_file(f));

  must_run(p.prepare_cmd, p.log);
  must_run(p.extract_low_cmd, p.log);  // codebook now exists and is reused
  must_run(p.evaluate_cmd, p.log);
  must_run(c.prepare_cmd, c.log);

  int identical = 0;
  std::string first_diff;
  for (std::size_t i = 0; i < watched.size(); ++i) {
    if (read_text_file(watched[i]) == before[i])
      ++identical;
    else if (first_diff.empty())
      first_diff = watched[i].filename().string();
  }
  const bool ok = identical == int(watched.size());
  return {ok, ok ? std::to_string(identical) + " output files byte-identical after re-running"
                 : "file changed across identical reruns: " + first_diff};
}

// ---- criterion 9: descriptor dimensions ---------------------------------------

std::pair<bool, std::string> criterion_dims(const Pipeline& p) {
  Rng rng(4000);
  Image img(64, 64, 3);
  for (float& px : img.pixels) px = float(rng.next_below(256));

  const features::DescriptorConfig cfg;
  const std::int64_t hist = features::rgb_histogram(img, cfg.histogram_bins).size();
  const std::int64_t gist = features::gist(img, cfg).size();
  const std::int64_t lbp_dim = features::lbp(img, cfg).size();
  features::Codebook book;
  book.centroids = Tensor({1000, 128});
  const std::int64_t bow = features::bow_spatial_pyramid(img, book, cfg).size();

  std::int64_t store_dim = -1;
  if (p.ran) store_dim = features::load_features(p.low).matrix.dim(1);

  const bool ok = hist == 768 && gist == 512 && lbp_dim == features::lbp_bins(cfg) &&
                  features::lbp_bins(cfg) == 59 && bow == 5000 &&
                  (!p.ran || store_dim == 6339);
  std::string detail = "histogram " + std::to_string(hist) + ", gist " +
                       std::to_string(gist) + ", lbp " + std::to_string(lbp_dim) +
                       ", bow pyramid " + std::to_string(bow);
  detail += p.ran ? ", extracted store " + std::to_string(store_dim) : "";
  return {ok, detail};
}

// ---- driver -------------------------------------------------------------------

struct Gate {
  int passed = 0;
  int total = 0;

  template <typename F>
  void criterion(int id, F&& f) {
    ++total;
    bool ok = false;
    std::string detail;
    try {
      std::tie(ok, detail) = f();
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    passed += ok ? 1 : 0;
    std::printf("criterion %d: %s - %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
  }
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 5) {
    std::fprintf(stderr,
                 "usage: visent_acceptance <visent-bin> <make-weights-bin> <configs-dir> "
                 "<scratch-dir>\n");
    return 2;
  }
  const std::string visent_bin = argv[1];
  const std::string weights_bin = argv[2];
  const fsys::path configs = argv[3];
  const fsys::path scratch = argv[4];
  fsys::remove_all(scratch);
  fsys::create_directories(scratch);

  Gate gate;

  gate.criterion(1, criterion_primitives);

  std::optional<Canonical> canonical;
  gate.criterion(2, [&] {
    canonical.emplace(build_canonical(configs));
    return criterion_taps(*canonical);
  });
  gate.criterion(3, [&]() -> std::pair<bool, std::string> {
    if (!canonical) return {false, "canonical network unavailable (criterion 2 failed)"};
    return criterion_latency(*canonical);
  });
  canonical.reset();  // free ~250 MB before the pipeline runs

  gate.criterion(4, criterion_gradient);
  gate.criterion(5, criterion_auc);

  Pipeline p;
  p.corpus = scratch / "corpus";
  p.images = p.corpus / "images";
  p.work = scratch / "work";
  p.log = scratch / "pipeline.log";
  p.annotated = p.corpus / "posts.tsv";
  p.lexicon = p.corpus / "lexicon.tff";
  p.samples = p.work / "samples.tsv";
  p.low = p.work / "low.feat";
  p.fc7 = p.work / "fc7.feat";
  p.cb = p.work / "codebook.blob";
  p.alex_w = p.work / "alexnet.w";
  p.report = p.work / "report.txt";
  p.records = p.work / "records.tsv";
  gate.criterion(6, [&] { return criterion_pipeline(p, visent_bin, weights_bin, configs); });

  Curation c;
  c.dir = scratch / "curation";
  c.log = c.dir / "curation.log";
  c.annotated = c.dir / "posts.tsv";
  c.lexicon = c.dir / "lexicon.tff";
  c.samples = c.dir / "samples.tsv";
  c.report = c.dir / "report.txt";
  gate.criterion(7, [&] { return criterion_curation(c, visent_bin); });

  gate.criterion(8, [&] { return criterion_rerun(p, c); });
  gate.criterion(9, [&] { return criterion_dims(p); });

  std::printf("%d/%d criteria passed\n", gate.passed, gate.total);
  return gate.passed == gate.total ? 0 : 1;
}
