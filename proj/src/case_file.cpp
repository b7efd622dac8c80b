#include "idp/case_file.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "idp/format.hpp"
#include "idp/types.hpp"

namespace idp {

namespace {

enum class ValueType { real, integer, flag, text, real_list, integer_list };

constexpr int kCaseKinds = 5;

// One schema row. `defaults` is indexed by CaseKind; nullptr marks a key that
// does not apply to that case.
struct KeySpec {
  const char* key;
  ValueType type;
  std::array<const char*, kCaseKinds> defaults;
  const char* choices = nullptr;  // '|'-separated, text keys only
};

// Defaults in CaseKind order: kpp, psystem_rarefaction, leblanc, sod, custom_scalar.
const KeySpec kSchema[] = {
    {"mesh.cells", ValueType::integer, {nullptr, "1000", "5000", "1000", "200"}},
    {"mesh.nx", ValueType::integer, {"70", nullptr, nullptr, nullptr, nullptr}},
    {"mesh.ny", ValueType::integer, {"70", nullptr, nullptr, nullptr, nullptr}},
    {"mesh.x_min", ValueType::real, {"-2", "0", "0", "0", "0"}},
    {"mesh.x_max", ValueType::real, {"2", "1", "1", "1", "1"}},
    {"mesh.y_min", ValueType::real, {"-2.5", nullptr, nullptr, nullptr, nullptr}},
    {"mesh.y_max", ValueType::real, {"1.5", nullptr, nullptr, nullptr, nullptr}},
    {"mesh.perturbation", ValueType::real, {"0.2", nullptr, nullptr, nullptr, nullptr}},
    {"mesh.seed", ValueType::integer, {"1", nullptr, nullptr, nullptr, nullptr}},
    {"mesh.periodic", ValueType::flag, {nullptr, nullptr, nullptr, nullptr, "false"}},
    {"model.gamma", ValueType::real, {nullptr, "3", "1.6666666666666667", "1.4", nullptr}},
    {"model.r", ValueType::real, {nullptr, "", nullptr, nullptr, nullptr}},
    {"model.flux", ValueType::text, {nullptr, nullptr, nullptr, nullptr, "burgers"}, "linear|burgers|buckley_leverett"},
    {"model.velocity", ValueType::real, {nullptr, nullptr, nullptr, nullptr, "1"}},
    {"initial.x0", ValueType::real, {nullptr, "0.75", "0.5", "0.5", "0.5"}},
    {"initial.radius", ValueType::real, {"1", nullptr, nullptr, nullptr, nullptr}},
    {"initial.inner", ValueType::real, {"10.995574287564276", nullptr, nullptr, nullptr, nullptr}},
    {"initial.outer", ValueType::real, {"0.7853981633974483", nullptr, nullptr, nullptr, nullptr}},
    {"initial.rho_left", ValueType::real, {nullptr, nullptr, "1", "1", nullptr}},
    {"initial.u_left", ValueType::real, {nullptr, nullptr, "0", "0", nullptr}},
    {"initial.p_left", ValueType::real, {nullptr, nullptr, "0.1", "1", nullptr}},
    {"initial.rho_right", ValueType::real, {nullptr, nullptr, "0.001", "0.125", nullptr}},
    {"initial.u_right", ValueType::real, {nullptr, nullptr, "0", "0", nullptr}},
    {"initial.p_right", ValueType::real, {nullptr, nullptr, "1e-15", "0.1", nullptr}},
    {"initial.profile", ValueType::text, {nullptr, nullptr, nullptr, nullptr, "step"}, "step|sine"},
    {"initial.left", ValueType::real, {nullptr, nullptr, nullptr, nullptr, "1"}},
    {"initial.right", ValueType::real, {nullptr, nullptr, nullptr, nullptr, "0"}},
    {"solver.viscosity", ValueType::text, {"graph", "graph", "graph", "graph", "graph"}, "graph|cell|algebraic"},
    {"solver.integrator", ValueType::text, {"ssp3", "ssp3", "ssp3", "ssp3", "ssp3"}, "euler|ssp2|ssp3"},
    {"solver.cfl", ValueType::real, {"0.5", "0.5", "0.5", "0.5", "0.5"}},
    {"solver.final_time", ValueType::real, {"1", "0.75", "0.1", "0.2", "0.5"}},
    {"solver.max_steps", ValueType::integer, {"10000000", "10000000", "10000000", "10000000", "10000000"}},
    {"solver.freeze_viscosity", ValueType::flag, {"false", "false", "false", "false", "false"}},
    {"diagnostics.invariance", ValueType::flag, {"true", "true", "true", "true", "true"}},
    {"diagnostics.entropy", ValueType::flag, {"true", "true", "true", "true", "true"}},
    {"output.directory", ValueType::text, {"", "", "", "", ""}},
    {"output.snapshot_times", ValueType::real_list, {"", "", "", "", ""}},
    {"convergence.meshes", ValueType::integer_list, {nullptr, "1000,2000,4000", nullptr, nullptr, nullptr}},
};

const KeySpec* find_spec(const std::string& key) {
  for (const auto& spec : kSchema) {
    if (key == spec.key) return &spec;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  if (trim(text).empty()) return items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

long parse_integer(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  long value = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size()) {
    throw Error(context + ": expected an integer, got '" + text + "'");
  }
  return value;
}

bool parse_flag(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  if (t == "true") return true;
  if (t == "false") return false;
  throw Error(context + ": expected true or false, got '" + text + "'");
}

void validate_value(const KeySpec& spec, const std::string& value) {
  const std::string context = spec.key;
  switch (spec.type) {
    case ValueType::real: parse_double(value, context); break;
    case ValueType::integer: parse_integer(value, context); break;
    case ValueType::flag: parse_flag(value, context); break;
    case ValueType::real_list:
      for (const auto& item : split_list(value)) parse_double(item, context);
      break;
    case ValueType::integer_list:
      for (const auto& item : split_list(value)) parse_integer(item, context);
      break;
    case ValueType::text:
      if (spec.choices) {
        const std::string choices = spec.choices;
        std::stringstream ss(choices);
        std::string option;
        bool found = false;
        while (std::getline(ss, option, '|')) found = found || option == value;
        if (!found) throw Error(context + ": '" + value + "' is not one of " + choices);
      }
      break;
  }
}

}  // namespace

std::string to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::kpp: return "kpp";
    case CaseKind::psystem_rarefaction: return "psystem_rarefaction";
    case CaseKind::leblanc: return "leblanc";
    case CaseKind::sod: return "sod";
    case CaseKind::custom_scalar: return "custom_scalar";
  }
  return "kpp";
}

CaseKind parse_case_kind(const std::string& text) {
  for (int k = 0; k < kCaseKinds; ++k) {
    if (to_string(static_cast<CaseKind>(k)) == text) return static_cast<CaseKind>(k);
  }
  throw Error("unknown case '" + text + "' (expected kpp, psystem_rarefaction, leblanc, sod or custom_scalar)");
}

void CaseFile::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(key);
  if (!spec) throw Error("unknown key '" + key + "'");
  if (!spec->defaults[static_cast<int>(kind_)]) {
    throw Error("key '" + key + "' does not apply to case " + to_string(kind_));
  }
  const std::string v = trim(value);
  validate_value(*spec, v);
  entries_[key] = v;
}

std::string CaseFile::resolved(const std::string& key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  const KeySpec* spec = find_spec(key);
  if (!spec || !spec->defaults[static_cast<int>(kind_)]) {
    throw Error("key '" + key + "' is not defined for case " + to_string(kind_));
  }
  return spec->defaults[static_cast<int>(kind_)];
}

std::string CaseFile::text(const std::string& key) const { return resolved(key); }
double CaseFile::real(const std::string& key) const { return parse_double(resolved(key), key); }
long CaseFile::integer(const std::string& key) const { return parse_integer(resolved(key), key); }
bool CaseFile::flag(const std::string& key) const { return parse_flag(resolved(key), key); }

std::vector<double> CaseFile::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(resolved(key))) out.push_back(parse_double(item, key));
  return out;
}

std::vector<long> CaseFile::integers(const std::string& key) const {
  std::vector<long> out;
  for (const auto& item : split_list(resolved(key))) out.push_back(parse_integer(item, key));
  return out;
}

std::vector<std::string> CaseFile::keys() const {
  std::vector<std::string> out;
  for (const auto& spec : kSchema) {
    if (spec.defaults[static_cast<int>(kind_)]) out.emplace_back(spec.key);
  }
  return out;
}

CaseFile parse_case(std::istream& in, const std::string& source) {
  struct Pending {
    std::string key, value;
    int line;
  };
  std::vector<Pending> pending;
  std::optional<std::string> name;
  int name_line = 0;
  std::string section;
  std::string raw;
  int line_no = 0;
  const auto fail = [&](int line, const std::string& msg) {
    throw Error(source + ":" + std::to_string(line) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    if (section.empty()) fail(line_no, "entry outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    const std::string full = section + "." + key;
    if (full == "case.name") {
      if (name) fail(line_no, "duplicate key 'case.name'");
      name = value;
      name_line = line_no;
      continue;
    }
    for (const auto& p : pending) {
      if (p.key == full) fail(line_no, "duplicate key '" + full + "' (first set on line " + std::to_string(p.line) + ")");
    }
    pending.push_back({full, value, line_no});
  }
  if (!name) throw Error(source + ": missing [case] name");
  CaseFile c;
  try {
    c = CaseFile(parse_case_kind(*name));
  } catch (const Error& e) {
    fail(name_line, e.what());
  }
  for (const auto& p : pending) {
    try {
      c.set(p.key, p.value);
    } catch (const Error& e) {
      fail(p.line, e.what());
    }
  }
  return c;
}

CaseFile read_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open case file " + path);
  return parse_case(in, path);
}

void write_case(std::ostream& out, const CaseFile& c) {
  out << "[case]\nname = " << to_string(c.kind()) << '\n';
  std::string section;
  for (const auto& key : c.keys()) {
    auto it = c.entries().find(key);
    if (it == c.entries().end()) continue;
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      out << "\n[" << s << "]\n";
      section = s;
    }
    out << key.substr(dot + 1) << " = " << it->second << '\n';
  }
}

void apply_override(CaseFile& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error("override '" + assignment + "' is not of the form section.key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.find('.') == std::string::npos) throw Error("override key '" + key + "' needs a section, e.g. solver.cfl");
  c.set(key, assignment.substr(eq + 1));
}

}  // namespace idp
