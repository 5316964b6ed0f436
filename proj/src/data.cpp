#include "visent/data.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "visent/error.hpp"
#include "visent/textkv.hpp"

namespace visent::data {

namespace {

constexpr const char* kAnnotatedHeader = "id\timage\ttags\ta1\ta2\ta3";
constexpr const char* kDirectHeader = "id\timage\tlabel";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

std::vector<std::string> split_commas_lower(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string tok =
        s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) out.push_back(to_lower(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool is_integer_token(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

void check_no_tabs(const std::string& field, const char* what) {
  if (field.find('\t') != std::string::npos || field.find('\n') != std::string::npos)
    throw ComputeError(std::string(what) + " must not contain tabs or newlines: '" + field +
                       "'");
}

}  // namespace

std::string label_token(int label, LabelScheme scheme) {
  if (scheme == LabelScheme::Binary) {
    if (label == 1) return "pos";
    if (label == -1) return "neg";
    throw ComputeError("binary labels are +1/-1, got " + std::to_string(label));
  }
  if (label < -2 || label > 2)
    throw ComputeError("five-scale labels lie in [-2, 2], got " + std::to_string(label));
  return std::to_string(label);
}

std::string label_display(int label, LabelScheme scheme) {
  if (scheme == LabelScheme::Binary) {
    if (label == 1) return "Positive";
    if (label == -1) return "Negative";
    throw ComputeError("binary labels are +1/-1, got " + std::to_string(label));
  }
  if (label < -2 || label > 2)
    throw ComputeError("five-scale labels lie in [-2, 2], got " + std::to_string(label));
  return std::to_string(label);
}

int parse_label(const std::string& token, LabelScheme scheme, const std::string& file,
                int line) {
  if (scheme == LabelScheme::Binary) {
    if (token == "pos") return 1;
    if (token == "neg") return -1;
    throw FormatError(file, line, "binary label must be 'pos' or 'neg', got '" + token + "'");
  }
  const long long v = parse_int(token, file, line);
  if (v < -2 || v > 2)
    throw FormatError(file, line, "five-scale label out of range [-2, 2]: '" + token + "'");
  return int(v);
}

std::vector<int> scheme_label_order(LabelScheme scheme) {
  if (scheme == LabelScheme::Binary) return {1, -1};
  return {-2, -1, 0, 1, 2};
}

bool Lexicon::strong_polar(const std::string& token) const {
  for (const LexiconEntry& e : entries)
    if (e.strength == Strength::Strong &&
        (e.polarity == Polarity::Positive || e.polarity == Polarity::Negative) &&
        e.word == token)
      return true;
  return false;
}

Lexicon parse_lexicon(const std::filesystem::path& path) {
  const std::string file = path.string();
  const std::vector<std::string> lines = split_lines(read_text_file(path));
  Lexicon lex;
  std::unordered_set<std::string> warned_keys;
  std::unordered_map<std::string, std::size_t> first_of;  // word -> entries index
  for (int ln = 1; ln <= int(lines.size()); ++ln) {
    const std::string& line = lines[std::size_t(ln - 1)];
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const KvLine kv = parse_kv_line(line);
    for (const auto& [key, value] : kv.pairs) {
      if (key != "type" && key != "word1" && key != "priorpolarity" &&
          warned_keys.insert(key).second)
        lex.warnings.push_back("ignoring unknown lexicon key '" + key + "'");
    }
    const std::string type = kv.require("type", file, ln);
    const std::string word = to_lower(kv.require("word1", file, ln));
    const std::string prior = kv.require("priorpolarity", file, ln);
    if (word.empty()) throw FormatError(file, ln, "empty word1");

    Strength strength;
    if (type == "strongsubj") strength = Strength::Strong;
    else if (type == "weaksubj") strength = Strength::Weak;
    else throw FormatError(file, ln, "type must be strongsubj or weaksubj, got '" + type + "'");

    std::vector<Polarity> polarities;
    if (prior == "positive") polarities = {Polarity::Positive};
    else if (prior == "negative") polarities = {Polarity::Negative};
    else if (prior == "neutral") polarities = {Polarity::Neutral};
    else if (prior == "both") polarities = {Polarity::Positive, Polarity::Negative};
    else
      throw FormatError(file, ln,
                        "priorpolarity must be positive/negative/neutral/both, got '" +
                            prior + "'");

    if (auto it = first_of.find(word); it != first_of.end()) {
      lex.warnings.push_back("duplicate lexicon word '" + word + "'; keeping the last entry");
      // Tombstone the earlier entries (word emptied), compacted below.
      for (LexiconEntry& e : lex.entries)
        if (e.word == word) e.word.clear();
    }
    first_of[word] = lex.entries.size();
    for (const Polarity p : polarities) lex.entries.push_back({word, strength, p});
  }
  lex.entries.erase(std::remove_if(lex.entries.begin(), lex.entries.end(),
                                   [](const LexiconEntry& e) { return e.word.empty(); }),
                    lex.entries.end());
  return lex;
}

Manifest load_manifest(const std::filesystem::path& path) {
  const std::string file = path.string();
  const std::vector<std::string> lines = split_lines(read_text_file(path));
  if (lines.empty()) throw FormatError(file, 1, "missing manifest header");

  Manifest mf;
  if (lines[0] == kAnnotatedHeader) mf.annotated = true;
  else if (lines[0] == kDirectHeader) mf.annotated = false;
  else
    throw FormatError(file, 1,
                      "header must be '" + std::string(kAnnotatedHeader) + "' or '" +
                          std::string(kDirectHeader) + "'");

  std::unordered_set<std::string> seen_ids;
  bool scheme_known = false;
  for (int ln = 2; ln <= int(lines.size()); ++ln) {
    const std::string& line = lines[std::size_t(ln - 1)];
    if (line.empty()) continue;
    const std::vector<std::string> f = split_tabs(line);
    const std::size_t expected = mf.annotated ? 6 : 3;
    if (f.size() != expected)
      throw FormatError(file, ln,
                        "expected " + std::to_string(expected) + " tab-separated fields, got " +
                            std::to_string(f.size()));
    if (f[0].empty()) throw FormatError(file, ln, "empty id");
    if (!seen_ids.insert(f[0]).second)
      throw FormatError(file, ln, "duplicate id '" + f[0] + "'");
    if (f[1].empty()) throw FormatError(file, ln, "empty image path");

    if (mf.annotated) {
      PostRecord post;
      post.id = f[0];
      post.image = f[1];
      post.tags = split_commas_lower(f[2]);
      for (int a = 0; a < 3; ++a) {
        const long long v = parse_int(f[std::size_t(3 + a)], file, ln);
        if (v < -2 || v > 2)
          throw FormatError(file, ln,
                            "annotation out of range [-2, 2]: " + f[std::size_t(3 + a)]);
        post.annotations.push_back(int(v));
      }
      mf.posts.push_back(std::move(post));
    } else {
      const bool integer_form = is_integer_token(f[2]);
      const LabelScheme scheme = integer_form ? LabelScheme::FiveScale : LabelScheme::Binary;
      if (!scheme_known) {
        mf.scheme = scheme;
        scheme_known = true;
      } else if (scheme != mf.scheme) {
        throw FormatError(file, ln, "mixed binary and five-scale labels in one manifest");
      }
      mf.samples.push_back({f[0], f[1], parse_label(f[2], mf.scheme, file, ln)});
    }
  }
  return mf;
}

std::vector<PostRecord> filter_posts(const std::vector<PostRecord>& posts,
                                     const Lexicon& lexicon) {
  std::vector<PostRecord> kept;
  for (const PostRecord& post : posts) {
    const bool match = std::any_of(post.tags.begin(), post.tags.end(),
                                   [&](const std::string& t) { return lexicon.strong_polar(t); });
    if (match) kept.push_back(post);
  }
  return kept;
}

std::optional<int> majority_vote(std::span<const int> scores) {
  if (scores.size() != 3)
    throw ComputeError("majority_vote expects exactly 3 scores, got " +
                       std::to_string(scores.size()));
  if (scores[0] == scores[1] || scores[0] == scores[2]) return scores[0];
  if (scores[1] == scores[2]) return scores[1];
  return std::nullopt;
}

ResolveResult resolve_dataset(const std::vector<PostRecord>& posts) {
  ResolveResult result;
  result.total = std::int64_t(posts.size());
  for (const PostRecord& post : posts) {
    const auto label = majority_vote(post.annotations);
    if (!label) continue;
    result.samples.push_back({post.id, post.image, *label});
    ++result.histogram[*label];
  }
  result.resolved = std::int64_t(result.samples.size());
  result.agreement_rate =
      result.total == 0 ? 1.0 : double(result.resolved) / double(result.total);
  return result;
}

void write_samples(const std::filesystem::path& path, const std::vector<Sample>& samples,
                   LabelScheme scheme) {
  std::string text = std::string(kDirectHeader) + "\n";
  for (const Sample& s : samples) {
    check_no_tabs(s.id, "sample id");
    check_no_tabs(s.image, "image path");
    text += s.id + "\t" + s.image + "\t" + label_token(s.label, scheme) + "\n";
  }
  atomic_write_text(path, text);
}

}  // namespace visent::data
