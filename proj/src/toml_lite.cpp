#include "rouleau/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "rouleau/errors.hpp"

namespace rouleau {

namespace {

using json = nlohmann::ordered_json;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  json run() {
    json root = json::object();
    json* table = &root;
    for (;;) {
      skip_ws_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++i_;
        if (peek() == '[') fail("arrays of tables are not supported");
        auto path = key_path(']');
        expect(']');
        table = &root;
        for (const auto& k : path) {
          json& next = (*table)[k];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("'" + k + "' is not a table");
          table = &next;
        }
        end_of_line();
        continue;
      }
      auto path = key_path('=');
      expect('=');
      skip_spaces();
      json v = value();
      json* t = table;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        json& next = (*t)[path[k]];
        if (next.is_null()) next = json::object();
        t = &next;
      }
      if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
      (*t)[path.back()] = std::move(v);
      end_of_line();
    }
    return root;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  bool eof() const { return i_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[i_]; }

  int line() const {
    int n = 1;
    for (std::size_t k = 0; k < i_ && k < s_.size(); ++k) n += s_[k] == '\n';
    return n;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("toml line " + std::to_string(line()) + ": " + msg);
  }
  void expect(char c) {
    skip_spaces();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }
  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++i_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++i_;
  }
  void skip_ws_lines() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (!eof() && (peek() == '\n' || peek() == '\r')) {
        ++i_;
        continue;
      }
      return;
    }
  }
  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (peek() == '\r') ++i_;
    if (!eof() && peek() != '\n') fail("unexpected text after value");
  }

  std::string key() {
    skip_spaces();
    if (peek() == '"') return string_value();
    std::size_t b = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++i_;
    if (b == i_) fail("expected a key");
    return s_.substr(b, i_ - b);
  }
  std::vector<std::string> key_path(char stop) {
    std::vector<std::string> p{key()};
    skip_spaces();
    while (peek() == '.') {
      ++i_;
      p.push_back(key());
      skip_spaces();
    }
    if (peek() != stop) fail(std::string("expected '") + stop + "'");
    return p;
  }

  std::string string_value() {
    ++i_;  // opening quote
    std::string out;
    while (!eof() && peek() != '"') {
      char c = s_[i_++];
      if (c == '\n') fail("newline in string");
      if (c == '\\') {
        char e = s_[i_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail("unsupported escape");
        }
      } else {
        out += c;
      }
    }
    if (eof()) fail("unterminated string");
    ++i_;
    return out;
  }

  json value() {
    skip_spaces();
    char c = peek();
    if (c == '"') return string_value();
    if (c == '[') return array();
    if (c == '{') return inline_table();
    if (s_.compare(i_, 4, "true") == 0) {
      i_ += 4;
      return true;
    }
    if (s_.compare(i_, 5, "false") == 0) {
      i_ += 5;
      return false;
    }
    return number();
  }

  json number() {
    std::size_t b = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_'))
      ++i_;
    std::string tok;
    for (std::size_t k = b; k < i_; ++k)
      if (s_[k] != '_') tok += s_[k];
    if (tok.empty()) fail("expected a value");
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (!is_float) {
      long long v = 0;
      auto r = std::from_chars(first, last, v);
      if (r.ec == std::errc() && r.ptr == last) return v;
    } else {
      double v = 0;
      auto r = std::from_chars(first, last, v);
      if (r.ec == std::errc() && r.ptr == last) return v;
    }
    fail("malformed value '" + tok + "'");
  }

  json array() {
    ++i_;
    json a = json::array();
    for (;;) {
      skip_ws_lines();
      if (peek() == ']') {
        ++i_;
        return a;
      }
      a.push_back(value());
      skip_ws_lines();
      if (peek() == ',') {
        ++i_;
        continue;
      }
      skip_ws_lines();
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  json inline_table() {
    ++i_;
    json t = json::object();
    skip_spaces();
    if (peek() == '}') {
      ++i_;
      return t;
    }
    for (;;) {
      auto k = key();
      expect('=');
      t[k] = value();
      skip_spaces();
      if (peek() == ',') {
        ++i_;
        continue;
      }
      expect('}');
      return t;
    }
  }
};

}  // namespace

nlohmann::ordered_json parse_toml(const std::string& text) { return Parser(text).run(); }

nlohmann::ordered_json parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

}  // namespace rouleau
