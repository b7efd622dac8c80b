#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace idp {

enum class CaseKind { kpp, psystem_rarefaction, leblanc, sod, custom_scalar };

std::string to_string(CaseKind kind);
CaseKind parse_case_kind(const std::string& text);

/// An INI-style case description.
///
///   [case]
///   name = psystem_rarefaction
///   [mesh]
///   cells = 2000
///
/// Entries are stored as written, keyed "section.key"; keys that are not
/// given fall back to per-case defaults in the typed accessors. Full-line
/// comments start with '#' or ';'.
class CaseFile {
 public:
  CaseFile() = default;
  explicit CaseFile(CaseKind kind) : kind_(kind) {}

  CaseKind kind() const { return kind_; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Validates and stores one entry. Throws idp::Error for unknown keys,
  /// keys that do not apply to this case, or malformed values.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string text(const std::string& key) const;
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<long> integers(const std::string& key) const;

  /// Keys applicable to this case, in canonical order.
  std::vector<std::string> keys() const;

  bool operator==(const CaseFile& other) const = default;

 private:
  std::string resolved(const std::string& key) const;

  CaseKind kind_ = CaseKind::kpp;
  std::map<std::string, std::string> entries_;
};

/// Parses a case file. Errors carry `source:line:`.
CaseFile parse_case(std::istream& in, const std::string& source = "<input>");
CaseFile read_case_file(const std::string& path);

/// Writes the explicitly set entries in canonical order.
void write_case(std::ostream& out, const CaseFile& c);

/// Applies `section.key=value`.
void apply_override(CaseFile& c, const std::string& assignment);

}  // namespace idp
