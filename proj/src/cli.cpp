#include "visent/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "visent/data.hpp"
#include "visent/digest.hpp"
#include "visent/error.hpp"
#include "visent/eval.hpp"
#include "visent/features.hpp"
#include "visent/image_io.hpp"
#include "visent/kernels.hpp"
#include "visent/model.hpp"
#include "visent/net.hpp"
#include "visent/parallel.hpp"
#include "visent/rng.hpp"
#include "visent/textkv.hpp"

namespace visent::cli {
namespace {

namespace fsys = std::filesystem;

const char* usage_text() {
  return
      "usage: visent [--seed N] [--threads N] [--config FILE] <command> [flags]\n"
      "\n"
      "commands:\n"
      "  prepare   --manifest FILE --lexicon FILE --out FILE [--report FILE]\n"
      "            filter annotated posts by sentiment-bearing tags, resolve\n"
      "            majority-vote labels, write a samples manifest\n"
      "  extract   --samples FILE --method fc7|fc8|lowlevel --out FILE\n"
      "            [--net FILE --weights FILE] [--codebook FILE] [--image-root DIR]\n"
      "            compute one feature row per sample image\n"
      "  train     --features FILE --samples FILE --out FILE\n"
      "            fit one-vs-rest logistic classifiers on a feature store\n"
      "  evaluate  --features FILE[,FILE...] --samples FILE --out FILE\n"
      "            [--records FILE] [--runs N] [--test-fraction X] [--kfold]\n"
      "            repeated stratified splits, per-label AUC table\n"
      "  net-info  --net FILE [--weights FILE]\n"
      "            print layer output shapes and parameter counts\n"
      "\n"
      "Global flags may also follow the command name. --config FILE supplies\n"
      "key=value settings: learning_rate, epochs, batch_size, lambda, runs,\n"
      "test_fraction, kfold, bow_train_budget, mean_r, mean_g, mean_b.\n"
      "Explicit flags win over config values; every output file gets a .run\n"
      "sibling recording inputs, digests, seeds, and timings.\n";
}

// ---- command-line tokens ---------------------------------------------------

long long flag_int(const std::string& name, const std::string& value) {
  long long v = 0;
  const char* b = value.data();
  const char* e = b + value.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw UsageError("flag --" + name + ": expected an integer, got '" + value + "'");
  return v;
}

double flag_real(const std::string& name, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("flag --" + name + ": expected a number, got '" + value + "'");
  }
}

struct FlagSpec {
  const char* name;
  bool takes_value;
};

using FlagMap = std::map<std::string, std::string>;

// `--name value` and `--name=value`; unknown or duplicate flags are usage
// errors. Boolean flags store "1".
FlagMap parse_flags(const std::vector<std::string>& tokens, std::size_t start,
                    const std::string& command, const std::vector<FlagSpec>& specs) {
  FlagMap flags;
  for (std::size_t i = start; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tok.size() < 3 || tok.rfind("--", 0) != 0)
      throw UsageError("unexpected argument '" + tok + "' for command '" + command + "'");
    std::string name = tok.substr(2);
    std::optional<std::string> inline_value;
    if (auto eq = name.find('='); eq != std::string::npos) {
      inline_value = name.substr(eq + 1);
      name = name.substr(0, eq);
    }
    const FlagSpec* spec = nullptr;
    for (const FlagSpec& s : specs)
      if (name == s.name) spec = &s;
    if (spec == nullptr)
      throw UsageError("unknown flag --" + name + " for command '" + command + "'");
    if (flags.count(name)) throw UsageError("duplicate flag --" + name);
    if (!spec->takes_value) {
      if (inline_value) throw UsageError("flag --" + name + " takes no value");
      flags[name] = "1";
    } else if (inline_value) {
      flags[name] = *inline_value;
    } else {
      if (i + 1 >= tokens.size()) throw UsageError("flag --" + name + " needs a value");
      flags[name] = tokens[++i];
    }
  }
  return flags;
}

const std::string& need(const FlagMap& flags, const std::string& name,
                        const std::string& command) {
  auto it = flags.find(name);
  if (it == flags.end())
    throw UsageError("command '" + command + "' requires --" + name);
  return it->second;
}

// ---- settings ---------------------------------------------------------------

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<fsys::path> config_path;
};

struct Settings {
  double learning_rate = 0.1;
  int epochs = 500;
  int batch_size = 0;  // 0 = full batch
  double lambda = 1e-4;
  int runs = 5;
  double test_fraction = 0.2;
  bool kfold = false;
  int bow_train_budget = 20000;
  // Input means in RGB order, subtracted before the network.
  double mean_r = 123.0, mean_g = 117.0, mean_b = 104.0;
};

void apply_config_pair(Settings& s, const std::string& key, const std::string& value,
                       const std::string& file, int line) {
  if (key == "learning_rate") {
    s.learning_rate = parse_real(value, file, line);
    if (!(s.learning_rate > 0)) throw FormatError(file, line, "learning_rate must be > 0");
  } else if (key == "epochs") {
    s.epochs = static_cast<int>(parse_int(value, file, line));
    if (s.epochs < 1) throw FormatError(file, line, "epochs must be >= 1");
  } else if (key == "batch_size") {
    s.batch_size = static_cast<int>(parse_int(value, file, line));
    if (s.batch_size < 0) throw FormatError(file, line, "batch_size must be >= 0");
  } else if (key == "lambda") {
    s.lambda = parse_real(value, file, line);
    if (s.lambda < 0) throw FormatError(file, line, "lambda must be >= 0");
  } else if (key == "runs") {
    s.runs = static_cast<int>(parse_int(value, file, line));
    if (s.runs < 1) throw FormatError(file, line, "runs must be >= 1");
  } else if (key == "test_fraction") {
    s.test_fraction = parse_real(value, file, line);
    if (!(s.test_fraction > 0 && s.test_fraction < 1))
      throw FormatError(file, line, "test_fraction must be in (0, 1)");
  } else if (key == "kfold") {
    const long long v = parse_int(value, file, line);
    if (v != 0 && v != 1) throw FormatError(file, line, "kfold must be 0 or 1");
    s.kfold = v == 1;
  } else if (key == "bow_train_budget") {
    s.bow_train_budget = static_cast<int>(parse_int(value, file, line));
    if (s.bow_train_budget < 1)
      throw FormatError(file, line, "bow_train_budget must be >= 1");
  } else if (key == "mean_r") {
    s.mean_r = parse_real(value, file, line);
  } else if (key == "mean_g") {
    s.mean_g = parse_real(value, file, line);
  } else if (key == "mean_b") {
    s.mean_b = parse_real(value, file, line);
  } else {
    throw FormatError(file, line, "unknown config key '" + key + "'");
  }
}

Settings load_settings(const std::optional<fsys::path>& config_path) {
  Settings s;
  if (!config_path) return s;
  const std::string file = config_path->string();
  const std::string text = read_text_file(*config_path);
  const std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i + 1);
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> bare;
    KvLine kv = parse_kv_line(line, &bare);
    if (!bare.empty())
      throw FormatError(file, line_no, "expected key=value, got '" + bare.front() + "'");
    for (const auto& [key, value] : kv.pairs) apply_config_pair(s, key, value, file, line_no);
  }
  return s;
}

model::TrainConfig train_config(const Settings& s, std::uint64_t seed) {
  model::TrainConfig tc;
  tc.learning_rate = s.learning_rate;
  tc.epochs = s.epochs;
  tc.batch_size = s.batch_size;
  tc.lambda = s.lambda;
  tc.seed = seed;
  return tc;
}

// ---- run manifests ----------------------------------------------------------

using PathList = std::vector<std::pair<std::string, fsys::path>>;
using TimingList = std::vector<std::pair<std::string, double>>;

class StageClock {
 public:
  StageClock() : last_(std::chrono::steady_clock::now()) {}
  void lap(TimingList& timings, const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    timings.emplace_back(stage, ms);
    last_ = now;
  }

 private:
  std::chrono::steady_clock::time_point last_;
};

std::string fmt_ms(double ms) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", ms);
  return buf;
}

// Sibling "<primary output>.run" with digests of everything read and
// written. Timings live here and never inside report files, which must be
// byte-identical across reruns.
void write_run_manifest(const fsys::path& primary_output, const std::string& command,
                        const GlobalOptions& g, const PathList& inputs,
                        const PathList& outputs, const TimingList& timings) {
  std::ostringstream s;
  s << "command=" << command << '\n';
  s << "seed=" << g.seed << '\n';
  s << "threads=" << g.threads << '\n';
  s << "kernels=" << kernels::active().name << '\n';
  if (g.config_path)
    s << "config=" << g.config_path->string()
      << " fnv1a=" << hex64(fnv1a64_file(*g.config_path)) << '\n';
  for (const auto& [role, path] : inputs)
    s << "input." << role << '=' << path.string() << " fnv1a=" << hex64(fnv1a64_file(path))
      << '\n';
  for (const auto& [role, path] : outputs)
    s << "output." << role << '=' << path.string() << " fnv1a=" << hex64(fnv1a64_file(path))
      << '\n';
  for (const auto& [stage, ms] : timings) s << "timing_ms." << stage << '=' << fmt_ms(ms) << '\n';
  atomic_write_text(fsys::path(primary_output.string() + ".run"), s.str());
}

// ---- shared pieces ----------------------------------------------------------

std::string fmt6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

data::Manifest load_samples_manifest(const fsys::path& path, const std::string& command) {
  data::Manifest man = data::load_manifest(path);
  if (man.annotated)
    throw ComputeError("command '" + command +
                       "' needs a samples manifest (id, image, label), got annotated posts");
  return man;
}

// Feature rows must cover exactly the manifest's sample set; labels come back
// aligned to the store's row order.
std::vector<int> align_labels(const features::FeatureSet& store, const data::Manifest& man,
                              const std::string& store_name) {
  if (store.ids.size() != man.samples.size())
    throw ComputeError("feature store " + store_name + " has " +
                       std::to_string(store.ids.size()) + " rows but the manifest has " +
                       std::to_string(man.samples.size()) + " samples");
  std::unordered_map<std::string, int> by_id;
  by_id.reserve(man.samples.size());
  for (const data::Sample& s : man.samples) by_id.emplace(s.id, s.label);
  std::vector<int> labels;
  labels.reserve(store.ids.size());
  for (const std::string& id : store.ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw ComputeError("feature store " + store_name + " row id '" + id +
                         "' is not in the samples manifest");
    labels.push_back(it->second);
  }
  return labels;
}

std::vector<Image> load_sample_images(const data::Manifest& man, const fsys::path& root) {
  std::vector<Image> images;
  images.reserve(man.samples.size());
  for (const data::Sample& s : man.samples) images.push_back(read_image(root / s.image));
  return images;
}

// ---- commands ---------------------------------------------------------------

int cmd_prepare(const GlobalOptions& g, const FlagMap& flags, std::ostream& out,
                std::ostream& err) {
  const fsys::path manifest_path = need(flags, "manifest", "prepare");
  const fsys::path lexicon_path = need(flags, "lexicon", "prepare");
  const fsys::path out_path = need(flags, "out", "prepare");

  TimingList timings;
  StageClock clock;
  data::Lexicon lex = data::parse_lexicon(lexicon_path);
  for (const std::string& w : lex.warnings) err << "warning: " << w << '\n';
  data::Manifest man = data::load_manifest(manifest_path);
  if (!man.annotated)
    throw ComputeError("prepare needs an annotated manifest (id, image, tags, a1..a3)");
  clock.lap(timings, "parse");

  std::vector<data::PostRecord> kept = data::filter_posts(man.posts, lex);
  data::ResolveResult rr = data::resolve_dataset(kept);
  clock.lap(timings, "resolve");

  data::write_samples(out_path, rr.samples, data::LabelScheme::FiveScale);

  std::ostringstream rep;
  rep << "posts=" << man.posts.size() << '\n';
  rep << "kept=" << rr.total << '\n';
  rep << "resolved=" << rr.resolved << '\n';
  rep << "agreement_rate=" << fmt6(rr.agreement_rate) << '\n';
  for (const auto& [label, count] : rr.histogram)
    rep << "label_" << data::label_token(label, data::LabelScheme::FiveScale) << '='
        << count << '\n';
  out << rep.str();

  PathList outputs{{"samples", out_path}};
  if (auto it = flags.find("report"); it != flags.end()) {
    const fsys::path report_path = it->second;
    atomic_write_text(report_path, rep.str());
    outputs.emplace_back("report", report_path);
  }
  clock.lap(timings, "write");
  write_run_manifest(out_path, "prepare", g,
                     {{"manifest", manifest_path}, {"lexicon", lexicon_path}}, outputs,
                     timings);
  return 0;
}

int cmd_extract(const GlobalOptions& g, const Settings& settings, const FlagMap& flags,
                std::ostream& out, std::ostream& err) {
  const fsys::path samples_path = need(flags, "samples", "extract");
  const std::string method = need(flags, "method", "extract");
  const fsys::path out_path = need(flags, "out", "extract");
  if (method != "fc7" && method != "fc8" && method != "lowlevel")
    throw UsageError("extract --method must be fc7, fc8, or lowlevel, got '" + method + "'");

  data::Manifest man = load_samples_manifest(samples_path, "extract");
  const fsys::path image_root = flags.count("image-root")
                                    ? fsys::path(flags.at("image-root"))
                                    : samples_path.parent_path();

  TimingList timings;
  StageClock clock;
  std::vector<Image> images = load_sample_images(man, image_root);
  clock.lap(timings, "load_images");

  std::vector<std::string> ids;
  ids.reserve(man.samples.size());
  for (const data::Sample& s : man.samples) ids.push_back(s.id);

  PathList inputs{{"samples", samples_path}};
  PathList outputs;
  Tensor matrix;

  if (method == "lowlevel") {
    if (!flags.count("codebook"))
      throw UsageError("extract --method lowlevel requires --codebook");
    const fsys::path cb_path = flags.at("codebook");
    features::DescriptorConfig dcfg;
    features::Codebook cb;
    if (fsys::exists(cb_path)) {
      cb = features::Codebook::load(cb_path);
      inputs.emplace_back("codebook", cb_path);
    } else {
      // Train a visual-word codebook from this corpus, subsampled to the
      // descriptor budget, and persist it for later runs.
      std::vector<features::PatchDescriptor> all;
      for (const Image& img : images) {
        std::vector<features::PatchDescriptor> d = features::dense_patch_descriptors(img, dcfg);
        all.insert(all.end(), d.begin(), d.end());
      }
      if (all.empty())
        throw ComputeError("no dense patch descriptors available to train a codebook");
      Tensor packed;
      if (all.size() > static_cast<std::size_t>(settings.bow_train_budget)) {
        std::vector<std::size_t> idx(all.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng(g.seed);
        rng.shuffle(idx);
        idx.resize(static_cast<std::size_t>(settings.bow_train_budget));
        std::sort(idx.begin(), idx.end());
        std::vector<features::PatchDescriptor> sub;
        sub.reserve(idx.size());
        for (std::size_t i : idx) sub.push_back(all[i]);
        packed = features::pack_descriptors(sub);
      } else {
        packed = features::pack_descriptors(all);
      }
      err << "training codebook: " << packed.dim(0) << " descriptors, k=" << dcfg.bow_k
          << ", seed=" << g.seed << '\n';
      cb = features::train_codebook(packed, dcfg.bow_k, g.seed);
      cb.save(cb_path);
      outputs.emplace_back("codebook", cb_path);
    }
    clock.lap(timings, "codebook");

    const std::int64_t dim =
        3 * dcfg.histogram_bins +
        static_cast<std::int64_t>(dcfg.gist_scales) * dcfg.gist_orientations *
            dcfg.gist_grid * dcfg.gist_grid +
        features::lbp_bins(dcfg) + 5 * cb.centroids.dim(0);
    matrix = Tensor({static_cast<std::int64_t>(images.size()), dim});
    parallel_for(static_cast<std::int64_t>(images.size()), g.threads, [&](std::int64_t i) {
      Tensor row = features::concat_lowlevel(images[static_cast<std::size_t>(i)], cb, dcfg);
      if (row.size() != dim)
        throw ComputeError("descriptor length mismatch: " + std::to_string(row.size()) +
                           " vs " + std::to_string(dim));
      for (std::int64_t c = 0; c < dim; ++c) matrix(i, c) = row(c);
    });
    clock.lap(timings, "features");
  } else {
    if (!flags.count("net") || !flags.count("weights"))
      throw UsageError("extract --method " + method + " requires --net and --weights");
    const fsys::path net_path = flags.at("net");
    const fsys::path weights_path = flags.at("weights");
    inputs.emplace_back("net", net_path);
    inputs.emplace_back("weights", weights_path);
    net::NetworkSpec spec = net::NetworkSpec::parse_file(net_path);
    net::WeightStore ws = net::WeightStore::load(weights_path);
    const std::array<float, 3> means{static_cast<float>(settings.mean_r),
                                     static_cast<float>(settings.mean_g),
                                     static_cast<float>(settings.mean_b)};
    matrix = net::extract_features(spec, ws, images, method, means, g.threads);
    clock.lap(timings, "features");
  }

  features::FeatureSet store;
  store.method = method;
  store.matrix = std::move(matrix);
  store.ids = std::move(ids);
  features::save_features(out_path, store);
  clock.lap(timings, "write");

  out << "extracted " << store.matrix.dim(0) << " x " << store.matrix.dim(1) << " '" << method
      << "' features\n";
  outputs.emplace_back("features", out_path);
  write_run_manifest(out_path, "extract", g, inputs, outputs, timings);
  return 0;
}

int cmd_train(const GlobalOptions& g, const Settings& settings, const FlagMap& flags,
              std::ostream& out, std::ostream& err) {
  const fsys::path features_path = need(flags, "features", "train");
  const fsys::path samples_path = need(flags, "samples", "train");
  const fsys::path out_path = need(flags, "out", "train");

  TimingList timings;
  StageClock clock;
  features::FeatureSet store = features::load_features(features_path);
  data::Manifest man = load_samples_manifest(samples_path, "train");
  std::vector<int> labels = align_labels(store, man, features_path.string());
  clock.lap(timings, "load");

  std::vector<int> universe = data::scheme_label_order(man.scheme);
  model::OneVsRestModel ovr =
      model::train_one_vs_rest(store.matrix, labels, train_config(settings, g.seed), universe);
  clock.lap(timings, "train");

  ovr.save(out_path);
  clock.lap(timings, "write");

  out << "trained " << ovr.models.size() << " one-vs-rest classifiers on "
      << store.matrix.dim(0) << " rows of " << store.matrix.dim(1) << " '" << store.method
      << "' features\n";
  for (const auto& [label, m] : ovr.models)
    out << "label " << data::label_token(label, man.scheme) << ": final loss "
        << fmt6(m.loss_trace.back()) << '\n';
  for (int label : ovr.skipped)
    err << "warning: label " << data::label_token(label, man.scheme)
        << " has no positive examples; classifier skipped\n";

  write_run_manifest(out_path, "train", g,
                     {{"features", features_path}, {"samples", samples_path}},
                     {{"model", out_path}}, timings);
  return 0;
}

std::vector<std::string> split_list(const std::string& joined) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= joined.size()) {
    const std::size_t comma = joined.find(',', start);
    const std::size_t end = comma == std::string::npos ? joined.size() : comma;
    if (end > start) parts.push_back(joined.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

int cmd_evaluate(const GlobalOptions& g, const Settings& settings, const FlagMap& flags,
                 std::ostream& out, std::ostream& err) {
  (void)err;
  const std::string features_arg = need(flags, "features", "evaluate");
  const fsys::path samples_path = need(flags, "samples", "evaluate");
  const fsys::path out_path = need(flags, "out", "evaluate");
  const std::vector<std::string> store_paths = split_list(features_arg);
  if (store_paths.empty()) throw UsageError("evaluate --features lists no files");

  Settings s = settings;
  if (auto it = flags.find("runs"); it != flags.end()) {
    s.runs = static_cast<int>(flag_int("runs", it->second));
    if (s.runs < 1) throw UsageError("flag --runs must be >= 1");
  }
  if (auto it = flags.find("test-fraction"); it != flags.end()) {
    s.test_fraction = flag_real("test-fraction", it->second);
    if (!(s.test_fraction > 0 && s.test_fraction < 1))
      throw UsageError("flag --test-fraction must be in (0, 1)");
  }
  if (flags.count("kfold")) s.kfold = true;

  TimingList timings;
  StageClock clock;
  data::Manifest man = load_samples_manifest(samples_path, "evaluate");
  PathList inputs;
  std::vector<eval::EvalReport> reports;
  eval::ProtocolConfig pc;
  pc.runs = s.runs;
  pc.test_fraction = s.test_fraction;
  pc.base_seed = g.seed;
  pc.kfold = s.kfold;
  pc.train = train_config(s, g.seed);

  std::vector<features::FeatureSet> stores;
  std::vector<std::vector<int>> store_labels;
  for (const std::string& p : store_paths) {
    features::FeatureSet store = features::load_features(p);
    store_labels.push_back(align_labels(store, man, p));
    stores.push_back(std::move(store));
    inputs.emplace_back("features", fsys::path(p));
  }
  inputs.emplace_back("samples", samples_path);
  clock.lap(timings, "load");

  for (std::size_t i = 0; i < stores.size(); ++i)
    reports.push_back(
        eval::run_protocol(stores[i].matrix, store_labels[i], stores[i].method, pc));
  clock.lap(timings, "protocol");

  std::ostringstream rep;
  rep << "samples=" << man.samples.size() << '\n';
  rep << "runs=" << pc.runs << '\n';
  rep << "mode=" << (pc.kfold ? "kfold" : "split") << '\n';
  if (!pc.kfold) rep << "test_fraction=" << fmt6(pc.test_fraction) << '\n';
  rep << "base_seed=" << pc.base_seed << '\n';
  rep << "epochs=" << pc.train.epochs << " learning_rate=" << pc.train.learning_rate
      << " batch_size=" << pc.train.batch_size << " lambda=" << pc.train.lambda << '\n';
  rep << '\n';
  rep << eval::render_table(reports, man.scheme);
  bool any_warning = false;
  for (const eval::EvalReport& r : reports)
    for (const std::string& w : r.warnings) {
      if (!any_warning) rep << '\n';
      any_warning = true;
      rep << "warning: " << r.method << ": " << w << '\n';
    }
  out << rep.str();
  atomic_write_text(out_path, rep.str());

  PathList outputs{{"report", out_path}};
  if (auto it = flags.find("records"); it != flags.end()) {
    const fsys::path records_path = it->second;
    atomic_write_text(records_path, eval::render_records(reports, man.scheme));
    outputs.emplace_back("records", records_path);
  }
  clock.lap(timings, "write");
  write_run_manifest(out_path, "evaluate", g, inputs, outputs, timings);
  return 0;
}

int cmd_net_info(const FlagMap& flags, std::ostream& out) {
  const fsys::path net_path = need(flags, "net", "net-info");
  net::NetworkSpec spec = net::NetworkSpec::parse_file(net_path);
  const std::vector<std::vector<std::int64_t>> shapes = net::chain_shapes(spec);

  auto shape_str = [](const std::vector<std::int64_t>& s) {
    std::string t;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) t += 'x';
      t += std::to_string(s[i]);
    }
    return t;
  };

  std::vector<std::array<std::string, 4>> rows;
  const std::vector<std::int64_t> input_shape(spec.input_shape.begin(),
                                              spec.input_shape.end());
  rows.push_back({"input", "", shape_str(input_shape), ""});
  std::int64_t total_params = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const net::LayerSpec& l = spec.layers[i];
    const std::vector<std::int64_t>& in_shape = i == 0 ? input_shape : shapes[i - 1];
    std::int64_t params = 0;
    if (l.kind == net::LayerKind::Convolution) {
      params = static_cast<std::int64_t>(l.out_channels) * (in_shape[0] / l.groups) *
                   l.kernel * l.kernel +
               l.out_channels;
    } else if (l.kind == net::LayerKind::FullyConnected) {
      std::int64_t flat = 1;
      for (std::int64_t d : in_shape) flat *= d;
      params = static_cast<std::int64_t>(l.out_features) * flat + l.out_features;
    }
    total_params += params;
    rows.push_back({l.name, net::layer_kind_name(l.kind), shape_str(shapes[i]),
                    params ? std::to_string(params) : ""});
  }

  std::array<std::size_t, 4> widths{};
  const std::array<std::string, 4> headers{"layer", "kind", "output", "parameters"};
  for (std::size_t c = 0; c < 4; ++c) {
    widths[c] = headers[c].size();
    for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
  }
  auto emit = [&](const std::array<std::string, 4>& row) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (c) out << "  ";
      if (c == 3)
        out << std::string(widths[c] - row[c].size(), ' ') << row[c];
      else
        out << row[c] << std::string(widths[c] - row[c].size(), ' ');
    }
    out << '\n';
  };
  emit(headers);
  for (const auto& row : rows) emit(row);
  out << "total parameters: " << total_params << '\n';

  if (auto it = flags.find("weights"); it != flags.end()) {
    net::WeightStore ws = net::WeightStore::load(it->second);
    ws.validate_against(spec);
    out << "weights: " << it->second << ": consistent with the topology\n";
  }
  return 0;
}

// ---- dispatch ---------------------------------------------------------------

const std::vector<FlagSpec> kGlobalFlags{{"seed", true}, {"threads", true}, {"config", true}};

std::vector<FlagSpec> with_global(std::initializer_list<FlagSpec> own) {
  std::vector<FlagSpec> all(own);
  all.insert(all.end(), kGlobalFlags.begin(), kGlobalFlags.end());
  return all;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // Global flags may precede the command; find the command token first.
  std::size_t i = 0;
  std::vector<std::string> head;
  while (i < args.size() && args[i].rfind("--", 0) == 0) {
    head.push_back(args[i]);
    if (args[i] == "--seed" || args[i] == "--threads" || args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("flag " + args[i] + " needs a value");
      head.push_back(args[++i]);
    }
    ++i;
  }
  if (i >= args.size()) {
    if (!head.empty() && (head.front() == "--help" || head.front() == "-h")) {
      out << usage_text();
      return 0;
    }
    throw UsageError("missing command");
  }
  const std::string command = args[i];
  if (command == "help" || command == "-h" || command == "--help") {
    out << usage_text();
    return 0;
  }

  std::vector<std::string> tokens = head;
  tokens.insert(tokens.end(), args.begin() + static_cast<std::ptrdiff_t>(i) + 1, args.end());

  std::vector<FlagSpec> specs;
  if (command == "prepare")
    specs = with_global({{"manifest", true}, {"lexicon", true}, {"out", true}, {"report", true}});
  else if (command == "extract")
    specs = with_global({{"samples", true},
                         {"method", true},
                         {"out", true},
                         {"net", true},
                         {"weights", true},
                         {"codebook", true},
                         {"image-root", true}});
  else if (command == "train")
    specs = with_global({{"features", true}, {"samples", true}, {"out", true}});
  else if (command == "evaluate")
    specs = with_global({{"features", true},
                         {"samples", true},
                         {"out", true},
                         {"records", true},
                         {"runs", true},
                         {"test-fraction", true},
                         {"kfold", false}});
  else if (command == "net-info")
    specs = with_global({{"net", true}, {"weights", true}});
  else
    throw UsageError("unknown command '" + command + "'");

  FlagMap flags = parse_flags(tokens, 0, command, specs);

  GlobalOptions g;
  if (auto it = flags.find("seed"); it != flags.end()) {
    const long long v = flag_int("seed", it->second);
    if (v < 0) throw UsageError("flag --seed must be >= 0");
    g.seed = static_cast<std::uint64_t>(v);
  }
  if (auto it = flags.find("threads"); it != flags.end()) {
    const long long v = flag_int("threads", it->second);
    if (v < 1) throw UsageError("flag --threads must be >= 1");
    g.threads = static_cast<int>(v);
  }
  if (auto it = flags.find("config"); it != flags.end()) g.config_path = fsys::path(it->second);

  const Settings settings = load_settings(g.config_path);

  if (command == "prepare") return cmd_prepare(g, flags, out, err);
  if (command == "extract") return cmd_extract(g, settings, flags, out, err);
  if (command == "train") return cmd_train(g, settings, flags, out, err);
  if (command == "evaluate") return cmd_evaluate(g, settings, flags, out, err);
  return cmd_net_info(flags, out);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return dispatch(args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << usage_text();
    return 2;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const ComputeError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace visent::cli
