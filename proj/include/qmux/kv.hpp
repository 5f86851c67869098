#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qmux/core.hpp"

// Structured-text config format: nested key/value sections, one entry per line.
//
//   # comment
//   target = eg_gain
//   seed = 42
//   eg {
//     eta_a = 0.1
//     grid = [1e-4, 2e-4, 4e-4]
//   }
//
// Values are numbers (integer tokens keep 64-bit precision), quoted strings,
// booleans, or flat numeric lists. Duplicate keys are rejected; unknown keys
// are rejected when a schema binds the tree. Doubles are written with 17
// significant digits so that write/parse round-trips are bitwise exact.

namespace qmux::kv {

struct Scalar {
  enum class Kind { number, integer, text, boolean, number_list };
  Kind kind = Kind::number;
  double num = 0.0;
  std::uint64_t uint = 0;
  std::string str;
  bool flag = false;
  std::vector<double> list;

  static Scalar number_of(double v);
  static Scalar integer_of(std::uint64_t v);
  static Scalar text_of(std::string v);
  static Scalar boolean_of(bool v);
  static Scalar list_of(std::vector<double> v);

  /// Numeric view: integer scalars convert to double.
  double as_number(const std::string& path) const;
};

struct Node {
  std::map<std::string, Scalar> values;
  std::map<std::string, Node> sections;

  bool has_value(const std::string& key) const { return values.count(key) != 0; }
  bool has_section(const std::string& key) const { return sections.count(key) != 0; }

  void set_number(const std::string& key, double v);
  void set_integer(const std::string& key, std::uint64_t v);
  void set_text(const std::string& key, const std::string& v);
  void set_boolean(const std::string& key, bool v);
  void set_list(const std::string& key, std::vector<double> v);
};

/// Parses config text. Throws ConfigError with line/column on malformed input
/// and on duplicate keys.
Node parse(const std::string& text);

/// Reads and parses a config file. Throws IoError if unreadable.
Node parse_file(const std::string& path);

/// Canonical emission: sorted keys, two-space indentation, %.17g doubles.
std::string write(const Node& node);

/// Formats one double with 17 significant digits (round-trip safe).
std::string format_double(double v);

/// FNV-1a 64-bit hash of a string, hex-formatted; used as the config hash.
std::string fnv1a_hex(const std::string& text);

/// Schema binding with unknown-key rejection. Typical use:
///   Binder b(root, "");
///   double eta = b.number("eta", 0.1);
///   Binder eg = b.section("eg");
///   ...
///   b.finish();   // throws if any key was never consumed
class Binder {
 public:
  Binder(const Node& node, std::string path);

  bool has(const std::string& key) const;

  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  std::int64_t integer(const std::string& key);
  std::int64_t integer(const std::string& key, std::int64_t fallback);
  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback);
  std::string text(const std::string& key);
  std::string text(const std::string& key, const std::string& fallback);
  bool boolean(const std::string& key, bool fallback);
  std::vector<double> list(const std::string& key);
  std::vector<double> list(const std::string& key, std::vector<double> fallback);

  /// Child binder for a section; creates nothing if missing (throws).
  Binder section(const std::string& key);
  bool has_section(const std::string& key) const;

  /// Verifies every key and section at this level was consumed; call it on
  /// each section binder as well. Throws ConfigError naming the stray key.
  void finish();

 private:
  const Scalar& fetch(const std::string& key);
  std::string full(const std::string& key) const;

  const Node* node_;
  std::string path_;
  std::set<std::string> used_values_;
  std::set<std::string> used_sections_;
};

}  // namespace qmux::kv
