#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fdlab/exponents.hpp"

namespace fdlab {

/// Flat key=value configuration. One pair per line, '#' starts a comment.
/// Keys are case-sensitive; values are kept as trimmed text and parsed on
/// access with locale-independent routines.
class RunConfig {
 public:
  /// Keys accepted by any subcommand.
  static std::span<const std::string_view> known_keys();

  /// Throws PreconditionError on malformed lines, duplicate keys and keys
  /// outside known_keys().
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  /// Adds or replaces one pair ("key=value"); same key checks as parse().
  void set(std::string_view assignment);
  void set(std::string_view key, std::string_view value);

  bool has(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  std::string text_or(std::string_view key, std::string_view fallback) const;
  double number(std::string_view key) const;
  std::optional<double> number_opt(std::string_view key) const;
  double number_or(std::string_view key, double fallback) const;
  std::int64_t integer(std::string_view key) const;
  std::int64_t integer_or(std::string_view key, std::int64_t fallback) const;
  /// Comma-separated list of numbers.
  std::vector<double> numbers(std::string_view key) const;

  /// Sorted "key=value\n" lines with numbers in shortest round-trip form and
  /// m in reduced rational form when it is exact.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical(), as 16 hex digits.
  std::string run_id() const;

  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Reads n and m; throws PreconditionError when either is missing or outside
/// the admissible regime.
ExponentSet exponents_from(const RunConfig& config);

/// Locale-independent decimal parse of the whole string.
std::optional<double> parse_number(std::string_view text);

struct RunManifest {
  std::string version;
  std::string command;
  std::string run_id;
  std::string config_echo;  // canonical form
  std::optional<ExponentSet> exps;

  /// "# "-prefixed comment block that opens every output file.
  std::string header() const;
};

RunManifest make_manifest(std::string_view command, const RunConfig& config);

}  // namespace fdlab
