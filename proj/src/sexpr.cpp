#include "bnforge/sexpr.hpp"

#include <cctype>
#include <charconv>

namespace bnforge {

namespace {

struct Reader {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  SourceLoc loc() const { return SourceLoc{line, col}; }

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }
  bool done() const { return pos >= text.size(); }

  char next() {
    char c = text[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  void skip_blank() {
    while (!done()) {
      char c = peek();
      if (c == ';') {
        while (!done() && peek() != '\n') next();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        next();
      } else {
        return;
      }
    }
  }

  static bool atom_char(char c) {
    if (std::isspace(static_cast<unsigned char>(c))) return false;
    switch (c) {
      case '(':
      case ')':
      case '|':
      case ';':
      case '"':
      case '\0':
        return false;
      default:
        return true;
    }
  }

  SExpr read_string(SourceLoc at) {
    next();  // opening quote
    std::string out;
    while (true) {
      if (done()) throw Error(ErrorCode::ParseError, "unterminated string", at);
      char c = next();
      if (c == '"') break;
      if (c == '\\') {
        if (done()) throw Error(ErrorCode::ParseError, "unterminated string", at);
        char e = next();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: out += e; break;
        }
      } else {
        out += c;
      }
    }
    SExpr s;
    s.kind = SExpr::Kind::String;
    s.text = std::move(out);
    s.loc = at;
    return s;
  }

  SExpr read_atom(SourceLoc at) {
    std::string word;
    while (!done() && atom_char(peek())) word += next();
    SExpr s;
    s.loc = at;
    // Numbers: full-token parse; anything else is a symbol ("-><-", ":p", "?x").
    double value = 0.0;
    const char* begin = word.data();
    const char* end = word.data() + word.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec == std::errc() && ptr == end) {
      s.kind = SExpr::Kind::Number;
      s.number = value;
    } else {
      s.kind = SExpr::Kind::Symbol;
      s.text = std::move(word);
    }
    return s;
  }

  SExpr read_form() {
    skip_blank();
    if (done()) throw Error(ErrorCode::ParseError, "unexpected end of input", loc());
    SourceLoc at = loc();
    char c = peek();
    if (c == '(') {
      next();
      SExpr list;
      list.kind = SExpr::Kind::List;
      list.loc = at;
      while (true) {
        skip_blank();
        if (done())
          throw Error(ErrorCode::ParseError, "unbalanced '(' — missing ')'", at);
        if (peek() == ')') {
          next();
          return list;
        }
        list.items.push_back(read_form());
      }
    }
    if (c == ')') throw Error(ErrorCode::ParseError, "unexpected ')'", at);
    if (c == '"') return read_string(at);
    if (c == '|') {
      next();
      SExpr s;
      s.kind = SExpr::Kind::Symbol;
      s.text = "|";
      s.loc = at;
      return s;
    }
    return read_atom(at);
  }
};

}  // namespace

std::vector<SExpr> read_forms(std::string_view text) {
  Reader r{text};
  std::vector<SExpr> out;
  while (true) {
    r.skip_blank();
    if (r.done()) break;
    out.push_back(r.read_form());
  }
  return out;
}

}  // namespace bnforge
