#pragma once

// Minimal s-expression reader shared by the formula, structure and forest
// file formats.  Comments run from ';' to end of line.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace auf1 {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) +
                           ": " + msg),
        line(line_), col(col_) {}
};

struct Sexpr {
  // An atom when list == false, otherwise a list of children.
  bool is_list = false;
  std::string atom;
  std::vector<Sexpr> items;
  int line = 0, col = 0;

  bool is_atom() const { return !is_list; }
  size_t size() const { return items.size(); }
  const Sexpr& operator[](size_t i) const { return items[i]; }
};

namespace detail {

struct SexprReader {
  const std::string& text;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit SexprReader(const std::string& t) : text(t) {}

  void advance() {
    if (pos < text.size() && text[pos] == '\n') { ++line; col = 1; }
    else ++col;
    ++pos;
  }

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {
        while (pos < text.size() && text[pos] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  bool at_end() { skip_ws(); return pos >= text.size(); }

  Sexpr read() {
    skip_ws();
    if (pos >= text.size()) throw ParseError("unexpected end of input", line, col);
    Sexpr e;
    e.line = line; e.col = col;
    char c = text[pos];
    if (c == '(') {
      advance();
      e.is_list = true;
      while (true) {
        skip_ws();
        if (pos >= text.size()) throw ParseError("unclosed '('", e.line, e.col);
        if (text[pos] == ')') { advance(); break; }
        e.items.push_back(read());
      }
    } else if (c == ')') {
      throw ParseError("unexpected ')'", line, col);
    } else {
      while (pos < text.size()) {
        char d = text[pos];
        if (d == '(' || d == ')' || d == ';' || d == ' ' || d == '\t' ||
            d == '\r' || d == '\n') break;
        e.atom.push_back(d);
        advance();
      }
    }
    return e;
  }
};

} // namespace detail

inline std::vector<Sexpr> read_sexprs(const std::string& text) {
  detail::SexprReader r(text);
  std::vector<Sexpr> out;
  while (!r.at_end()) out.push_back(r.read());
  return out;
}

} // namespace auf1
