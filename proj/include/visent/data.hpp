#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace visent::data {

// Binary polarity (positive +1 / negative -1, tokens "pos" / "neg") or the
// five-point scale -2..2 written as plain integers.
enum class LabelScheme { Binary, FiveScale };

std::string label_token(int label, LabelScheme scheme);    // manifest form
std::string label_display(int label, LabelScheme scheme);  // table-header form
int parse_label(const std::string& token, LabelScheme scheme, const std::string& file,
                int line);

// Column order used by report tables: Positive, Negative for binary;
// ascending -2..2 for the five-point scale.
std::vector<int> scheme_label_order(LabelScheme scheme);

enum class Strength { Strong, Weak };
enum class Polarity { Positive, Negative, Neutral };

struct LexiconEntry {
  std::string word;
  Strength strength = Strength::Weak;
  Polarity polarity = Polarity::Neutral;
};

struct Lexicon {
  std::vector<LexiconEntry> entries;
  std::vector<std::string> warnings;  // unknown keys, duplicate words

  // True when the token names a strongly subjective positive/negative word.
  bool strong_polar(const std::string& token) const;
};

// Whitespace-separated key=value records, one per line. Keys: type
// (strongsubj|weaksubj), word1, priorpolarity (positive|negative|neutral|
// both). "both" expands to a positive and a negative entry; duplicate words
// are resolved last-entry-wins with a warning; unknown keys warn once per
// key name.
Lexicon parse_lexicon(const std::filesystem::path& path);

struct PostRecord {
  std::string id;
  std::string image;
  std::vector<std::string> tags;  // lowercased
  std::vector<int> annotations;   // three scores in [-2, 2] when annotated
};

struct Sample {
  std::string id;
  std::string image;
  int label = 0;
};

// One parsed manifest: either annotated posts (header id/image/tags/a1/a2/
// a3) or direct samples (header id/image/label).
struct Manifest {
  bool annotated = false;
  std::vector<PostRecord> posts;    // annotated form
  std::vector<Sample> samples;      // direct form
  LabelScheme scheme = LabelScheme::FiveScale;  // meaningful for direct form
};

Manifest load_manifest(const std::filesystem::path& path);

// Keeps posts whose tags include at least one strongly subjective polar
// lexicon word; exact lowercase token match, input order preserved.
std::vector<PostRecord> filter_posts(const std::vector<PostRecord>& posts,
                                     const Lexicon& lexicon);

// Label agreed on by >= 2 of exactly 3 annotators, or nullopt.
std::optional<int> majority_vote(std::span<const int> scores);

struct ResolveResult {
  std::vector<Sample> samples;
  std::int64_t total = 0;
  std::int64_t resolved = 0;
  double agreement_rate = 0.0;
  std::map<int, std::int64_t> histogram;  // label -> resolved count
};

// Majority-votes every post; posts without a majority are dropped.
ResolveResult resolve_dataset(const std::vector<PostRecord>& posts);

// Direct-form manifest writer (header id/image/label), atomic.
void write_samples(const std::filesystem::path& path, const std::vector<Sample>& samples,
                   LabelScheme scheme);

}  // namespace visent::data
