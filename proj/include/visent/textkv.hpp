#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace visent {

// One whitespace-separated key=value token stream, as used by the lexicon,
// network definition, and config file formats.
struct KvLine {
  std::vector<std::pair<std::string, std::string>> pairs;

  std::optional<std::string> get(std::string_view key) const;
  // Throws FormatError naming `file`:`line` when the key is missing.
  std::string require(std::string_view key, const std::string& file, int line) const;
};

// Splits `line` into key=value pairs. `tokens_out`, when non-null, receives
// bare tokens (ones without '='), which callers may treat as directives.
KvLine parse_kv_line(std::string_view line, std::vector<std::string>* tokens_out = nullptr);

std::string read_text_file(const std::filesystem::path& path);

// Writes through a sibling temp file plus rename so readers never observe a
// half-written file.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

// Line splitter that keeps 1-based numbering intact for error reporting.
std::vector<std::string> split_lines(std::string_view text);

std::string to_lower(std::string_view s);

// Parses helpers that throw FormatError with file:line context on bad input.
long long parse_int(const std::string& s, const std::string& file, int line);
double parse_real(const std::string& s, const std::string& file, int line);

}  // namespace visent
