#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sentinel {

/// Sectioned `key = value` text. Lines starting with '#' or ';' are comments.
/// Duplicate sections, duplicate keys and keys outside a section are errors.
class IniDocument {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
    int line = 0;
  };

  /// Throws ConfigError with the line number on malformed input.
  [[nodiscard]] static IniDocument parse(std::string_view text);
  [[nodiscard]] std::string serialize() const;

  Section& add_section(std::string name);
  [[nodiscard]] const std::vector<Section>& sections() const { return sections_; }
  [[nodiscard]] const Section* find(std::string_view name) const;

 private:
  std::vector<Section> sections_;
};

/// Typed, consuming view of one section: every key must be read exactly once or
/// finish() reports it as unknown.
class SectionReader {
 public:
  explicit SectionReader(const IniDocument::Section& section);

  [[nodiscard]] bool has(std::string_view key) const;
  [[nodiscard]] std::optional<std::string> text(std::string_view key);
  [[nodiscard]] std::optional<double> number(std::string_view key);
  [[nodiscard]] std::optional<long long> integer(std::string_view key);
  /// Comma- or whitespace-separated integers.
  [[nodiscard]] std::optional<std::vector<long long>> integers(std::string_view key);
  [[nodiscard]] std::optional<bool> boolean(std::string_view key);

  /// Throws ConfigError for any key that was never read.
  void finish() const;
  [[nodiscard]] const std::string& name() const { return section_.name; }

 private:
  const IniDocument::Entry* take(std::string_view key);
  [[noreturn]] void fail(const IniDocument::Entry& entry, const std::string& why) const;

  const IniDocument::Section& section_;
  std::vector<bool> used_;
};

[[nodiscard]] std::optional<double> parse_double(std::string_view text);
[[nodiscard]] std::optional<long long> parse_integer(std::string_view text);
/// Shortest decimal that reads back to the same double.
[[nodiscard]] std::string format_double(double value);

}  // namespace sentinel
