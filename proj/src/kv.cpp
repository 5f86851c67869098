#include "qmux/kv.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qmux::kv {

namespace {

[[noreturn]] void fail(int line, int col, const std::string& what) {
  std::ostringstream os;
  os << "config parse error at line " << line << ", column " << col << ": " << what;
  throw ConfigError(os.str());
}

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

bool looks_integer(const std::string& tok) {
  if (tok.empty() || tok.size() > 20) return false;
  for (char c : tok) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }
  void skip_ws_inline() {
    while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }
};

double parse_number_token(const std::string& tok, int line, int col) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) fail(line, col, "malformed number '" + tok + "'");
  return v;
}

std::string read_token(Cursor& c) {
  std::string tok;
  while (!c.done()) {
    char ch = c.peek();
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == ',' || ch == ']' ||
        ch == '#') {
      break;
    }
    tok.push_back(ch);
    c.advance();
  }
  return tok;
}

Scalar parse_value(Cursor& c) {
  c.skip_ws_inline();
  if (c.done() || c.peek() == '\n' || c.peek() == '#') fail(c.line, c.col, "missing value");
  const int vline = c.line, vcol = c.col;
  char ch = c.peek();
  if (ch == '"') {
    c.advance();
    std::string s;
    while (!c.done() && c.peek() != '"') {
      if (c.peek() == '\\') {
        c.advance();
        if (c.done()) fail(c.line, c.col, "unterminated escape");
        char e = c.peek();
        if (e == '"' || e == '\\') {
          s.push_back(e);
        } else {
          fail(c.line, c.col, "unsupported escape");
        }
        c.advance();
      } else if (c.peek() == '\n') {
        fail(vline, vcol, "unterminated string");
      } else {
        s.push_back(c.peek());
        c.advance();
      }
    }
    if (c.done()) fail(vline, vcol, "unterminated string");
    c.advance();  // closing quote
    return Scalar::text_of(s);
  }
  if (ch == '[') {
    c.advance();
    std::vector<double> items;
    while (true) {
      c.skip_ws_inline();
      while (!c.done() && c.peek() == '\n') c.advance();  // allow multi-line lists
      c.skip_ws_inline();
      if (c.done()) fail(vline, vcol, "unterminated list");
      if (c.peek() == ']') {
        c.advance();
        break;
      }
      const int tline = c.line, tcol = c.col;
      std::string tok = read_token(c);
      if (tok.empty()) fail(tline, tcol, "expected number in list");
      items.push_back(parse_number_token(tok, tline, tcol));
      c.skip_ws_inline();
      while (!c.done() && c.peek() == '\n') c.advance();
      c.skip_ws_inline();
      if (!c.done() && c.peek() == ',') c.advance();
    }
    return Scalar::list_of(std::move(items));
  }
  std::string tok = read_token(c);
  if (tok == "true") return Scalar::boolean_of(true);
  if (tok == "false") return Scalar::boolean_of(false);
  if (looks_integer(tok)) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long u = std::strtoull(tok.c_str(), &end, 10);
    if (errno == 0 && end == tok.c_str() + tok.size()) return Scalar::integer_of(u);
  }
  {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() + tok.size()) return Scalar::number_of(v);
  }
  // Bare identifiers are accepted as strings ("target = eg_gain").
  bool word = !tok.empty() && !std::isdigit(static_cast<unsigned char>(tok[0]));
  for (char ch2 : tok) {
    if (!is_key_char(ch2)) word = false;
  }
  if (word) return Scalar::text_of(tok);
  fail(vline, vcol, "malformed value '" + tok + "'");
}

void parse_into(Cursor& c, Node& node, int depth) {
  while (!c.done()) {
    c.skip_ws_inline();
    if (c.done()) break;
    char ch = c.peek();
    if (ch == '\n') {
      c.advance();
      continue;
    }
    if (ch == '#') {
      while (!c.done() && c.peek() != '\n') c.advance();
      continue;
    }
    if (ch == '}') {
      if (depth == 0) fail(c.line, c.col, "unmatched '}'");
      c.advance();
      return;
    }
    const int kline = c.line, kcol = c.col;
    std::string key;
    while (!c.done() && is_key_char(c.peek())) {
      key.push_back(c.peek());
      c.advance();
    }
    if (key.empty()) fail(kline, kcol, "expected a key");
    c.skip_ws_inline();
    if (c.done()) fail(kline, kcol, "key '" + key + "' has no value");
    if (c.peek() == '{') {
      c.advance();
      if (node.sections.count(key) || node.values.count(key)) {
        fail(kline, kcol, "duplicate key '" + key + "'");
      }
      parse_into(c, node.sections[key], depth + 1);
      continue;
    }
    if (c.peek() != '=') fail(c.line, c.col, "expected '=' or '{' after key '" + key + "'");
    c.advance();
    Scalar v = parse_value(c);
    if (node.values.count(key) || node.sections.count(key)) {
      fail(kline, kcol, "duplicate key '" + key + "'");
    }
    node.values.emplace(key, std::move(v));
    c.skip_ws_inline();
    if (!c.done() && c.peek() == '#') {
      while (!c.done() && c.peek() != '\n') c.advance();
    }
    if (!c.done() && c.peek() != '\n') fail(c.line, c.col, "trailing characters after value");
  }
  if (depth != 0) fail(c.line, c.col, "missing closing '}'");
}

void write_node(const Node& node, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  for (const auto& [key, v] : node.values) {
    out += pad;
    out += key;
    out += " = ";
    switch (v.kind) {
      case Scalar::Kind::number:
        out += format_double(v.num);
        break;
      case Scalar::Kind::integer: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v.uint));
        out += buf;
        break;
      }
      case Scalar::Kind::text: {
        out += '"';
        for (char c : v.str) {
          if (c == '"' || c == '\\') out += '\\';
          out += c;
        }
        out += '"';
        break;
      }
      case Scalar::Kind::boolean:
        out += v.flag ? "true" : "false";
        break;
      case Scalar::Kind::number_list: {
        out += '[';
        for (std::size_t i = 0; i < v.list.size(); ++i) {
          if (i) out += ", ";
          out += format_double(v.list[i]);
        }
        out += ']';
        break;
      }
    }
    out += '\n';
  }
  for (const auto& [key, child] : node.sections) {
    out += pad;
    out += key;
    out += " {\n";
    write_node(child, out, indent + 1);
    out += pad;
    out += "}\n";
  }
}

}  // namespace

Scalar Scalar::number_of(double v) {
  require_finite(v, "config value");
  Scalar s;
  s.kind = Kind::number;
  s.num = v;
  return s;
}

Scalar Scalar::integer_of(std::uint64_t v) {
  Scalar s;
  s.kind = Kind::integer;
  s.uint = v;
  return s;
}

Scalar Scalar::text_of(std::string v) {
  Scalar s;
  s.kind = Kind::text;
  s.str = std::move(v);
  return s;
}

Scalar Scalar::boolean_of(bool v) {
  Scalar s;
  s.kind = Kind::boolean;
  s.flag = v;
  return s;
}

Scalar Scalar::list_of(std::vector<double> v) {
  for (double x : v) require_finite(x, "config list entry");
  Scalar s;
  s.kind = Kind::number_list;
  s.list = std::move(v);
  return s;
}

double Scalar::as_number(const std::string& path) const {
  if (kind == Kind::number) return num;
  if (kind == Kind::integer) return static_cast<double>(uint);
  throw ConfigError("field '" + path + "': expected a number");
}

void Node::set_number(const std::string& key, double v) { values[key] = Scalar::number_of(v); }
void Node::set_integer(const std::string& key, std::uint64_t v) {
  values[key] = Scalar::integer_of(v);
}
void Node::set_text(const std::string& key, const std::string& v) {
  values[key] = Scalar::text_of(v);
}
void Node::set_boolean(const std::string& key, bool v) { values[key] = Scalar::boolean_of(v); }
void Node::set_list(const std::string& key, std::vector<double> v) {
  values[key] = Scalar::list_of(std::move(v));
}

Node parse(const std::string& text) {
  Node root;
  Cursor c{text};
  parse_into(c, root, 0);
  return root;
}

Node parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

std::string write(const Node& node) {
  std::string out;
  write_node(node, out, 0);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Binder::Binder(const Node& node, std::string path) : node_(&node), path_(std::move(path)) {}

std::string Binder::full(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool Binder::has(const std::string& key) const { return node_->has_value(key); }
bool Binder::has_section(const std::string& key) const { return node_->has_section(key); }

const Scalar& Binder::fetch(const std::string& key) {
  auto it = node_->values.find(key);
  if (it == node_->values.end()) {
    throw ConfigError("missing required field '" + full(key) + "'");
  }
  used_values_.insert(key);
  return it->second;
}

double Binder::number(const std::string& key) { return fetch(key).as_number(full(key)); }

double Binder::number(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  return number(key);
}

std::int64_t Binder::integer(const std::string& key) {
  const Scalar& s = fetch(key);
  if (s.kind == Scalar::Kind::integer) return static_cast<std::int64_t>(s.uint);
  if (s.kind == Scalar::Kind::number) {
    const double r = std::round(s.num);
    if (std::abs(s.num - r) > 1e-9) {
      throw ConfigError("field '" + full(key) + "': expected an integer");
    }
    return static_cast<std::int64_t>(r);
  }
  throw ConfigError("field '" + full(key) + "': expected an integer");
}

std::int64_t Binder::integer(const std::string& key, std::int64_t fallback) {
  if (!has(key)) return fallback;
  return integer(key);
}

std::uint64_t Binder::uinteger(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const Scalar& s = fetch(key);
  if (s.kind == Scalar::Kind::integer) return s.uint;
  if (s.kind == Scalar::Kind::number && s.num >= 0 && s.num == std::round(s.num)) {
    return static_cast<std::uint64_t>(s.num);
  }
  throw ConfigError("field '" + full(key) + "': expected an unsigned integer");
}

std::string Binder::text(const std::string& key) {
  const Scalar& s = fetch(key);
  if (s.kind != Scalar::Kind::text) {
    throw ConfigError("field '" + full(key) + "': expected a string");
  }
  return s.str;
}

std::string Binder::text(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  return text(key);
}

bool Binder::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const Scalar& s = fetch(key);
  if (s.kind != Scalar::Kind::boolean) {
    throw ConfigError("field '" + full(key) + "': expected true/false");
  }
  return s.flag;
}

std::vector<double> Binder::list(const std::string& key) {
  const Scalar& s = fetch(key);
  if (s.kind == Scalar::Kind::number_list) return s.list;
  // A bare number is accepted as a one-element list.
  if (s.kind == Scalar::Kind::number || s.kind == Scalar::Kind::integer) {
    return {s.as_number(full(key))};
  }
  throw ConfigError("field '" + full(key) + "': expected a numeric list");
}

std::vector<double> Binder::list(const std::string& key, std::vector<double> fallback) {
  if (!has(key)) return fallback;
  return list(key);
}

Binder Binder::section(const std::string& key) {
  auto it = node_->sections.find(key);
  if (it == node_->sections.end()) {
    throw ConfigError("missing required section '" + full(key) + "'");
  }
  used_sections_.insert(key);
  return Binder(it->second, full(key));
}

void Binder::finish() {
  for (const auto& [key, v] : node_->values) {
    (void)v;
    if (!used_values_.count(key)) {
      throw ConfigError("unknown key '" + full(key) + "'");
    }
  }
  for (const auto& [key, s] : node_->sections) {
    (void)s;
    if (!used_sections_.count(key)) {
      throw ConfigError("unknown section '" + full(key) + "'");
    }
  }
}

}  // namespace qmux::kv
