#include "sentinel/ini.hpp"

#include <fmt/format.h>

#include <charconv>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::string format_double(double value) { return fmt::format("{}", value); }

IniDocument IniDocument::parse(std::string_view text) {
  IniDocument doc;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("line {}: unterminated section header", line_no));
      const auto name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(fmt::format("line {}: empty section name", line_no));
      if (doc.find(name)) throw ConfigError(fmt::format("line {}: duplicate section [{}]", line_no, name));
      doc.add_section(std::string(name)).line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("line {}: expected key = value", line_no));
    if (doc.sections_.empty()) throw ConfigError(fmt::format("line {}: key outside any section", line_no));
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_no));
    auto& section = doc.sections_.back();
    for (const auto& e : section.entries) {
      if (e.key == key) throw ConfigError(fmt::format("line {}: duplicate key '{}' in [{}]", line_no, key, section.name));
    }
    section.entries.push_back(Entry{std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return doc;
}

std::string IniDocument::serialize() const {
  std::string out;
  for (const auto& section : sections_) {
    if (!out.empty()) out += '\n';
    out += fmt::format("[{}]\n", section.name);
    for (const auto& e : section.entries) out += fmt::format("{} = {}\n", e.key, e.value);
  }
  return out;
}

IniDocument::Section& IniDocument::add_section(std::string name) {
  sections_.push_back(Section{std::move(name), {}, 0});
  return sections_.back();
}

const IniDocument::Section* IniDocument::find(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

SectionReader::SectionReader(const IniDocument::Section& section)
    : section_(section), used_(section.entries.size(), false) {}

bool SectionReader::has(std::string_view key) const {
  for (const auto& e : section_.entries) {
    if (e.key == key) return true;
  }
  return false;
}

const IniDocument::Entry* SectionReader::take(std::string_view key) {
  for (std::size_t i = 0; i < section_.entries.size(); ++i) {
    if (section_.entries[i].key == key) {
      used_[i] = true;
      return &section_.entries[i];
    }
  }
  return nullptr;
}

void SectionReader::fail(const IniDocument::Entry& entry, const std::string& why) const {
  throw ConfigError(fmt::format("line {}: [{}] {}: {}", entry.line, section_.name, entry.key, why));
}

std::optional<std::string> SectionReader::text(std::string_view key) {
  const auto* e = take(key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<double> SectionReader::number(std::string_view key) {
  const auto* e = take(key);
  if (!e) return std::nullopt;
  const auto v = parse_double(e->value);
  if (!v) fail(*e, "expected a number, got '" + e->value + "'");
  return v;
}

std::optional<long long> SectionReader::integer(std::string_view key) {
  const auto* e = take(key);
  if (!e) return std::nullopt;
  const auto v = parse_integer(e->value);
  if (!v) fail(*e, "expected an integer, got '" + e->value + "'");
  return v;
}

std::optional<std::vector<long long>> SectionReader::integers(std::string_view key) {
  const auto* e = take(key);
  if (!e) return std::nullopt;
  std::vector<long long> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const auto v = parse_integer(token);
    if (!v) fail(*e, "expected integers, got '" + e->value + "'");
    out.push_back(*v);
    token.clear();
  };
  for (char c : e->value) {
    if (c == ',' || c == ' ' || c == '\t') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return out;
}

std::optional<bool> SectionReader::boolean(std::string_view key) {
  const auto* e = take(key);
  if (!e) return std::nullopt;
  if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
  if (e->value == "false" || e->value == "no" || e->value == "0") return false;
  fail(*e, "expected true or false, got '" + e->value + "'");
}

void SectionReader::finish() const {
  for (std::size_t i = 0; i < used_.size(); ++i) {
    if (!used_[i]) fail(section_.entries[i], "unknown key");
  }
}

}  // namespace sentinel
