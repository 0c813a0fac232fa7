#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

#include "linpi/types.hpp"

namespace linpi {

namespace {

enum class TTok {
  KwInt, KwRec, Ident, Number, LBracket, RBracket, LBrace, RBrace,
  LParen, RParen, SumOp, Star, Dot, Comma, Colon, End,
};

struct TToken {
  TTok tok;
  std::string text;
  int line = 1, column = 1;
};

std::vector<TToken> lex_type(const std::string& src, int start_line = 1) {
  std::vector<TToken> out;
  size_t i = 0;
  int line = start_line, column = 1;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') { ++line; column = 1; } else { ++column; }
    }
    i += n;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { advance(1); continue; }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    TToken t;
    t.line = line;
    t.column = column;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.tok = TTok::Number;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' ||
              src[j] == '\'')) {
        ++j;
      }
      t.text = src.substr(i, j - i);
      t.tok = t.text == "int" ? TTok::KwInt
            : t.text == "rec" ? TTok::KwRec
                              : TTok::Ident;
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (c == '(' && i + 2 < src.size() && src[i + 1] == '+' && src[i + 2] == ')') {
      t.tok = TTok::SumOp;
      t.text = "(+)";
      advance(3);
      out.push_back(t);
      continue;
    }
    auto sym = [&](TTok k) {
      t.tok = k;
      t.text = std::string(1, c);
      advance(1);
      out.push_back(t);
    };
    switch (c) {
      case '[': sym(TTok::LBracket); continue;
      case ']': sym(TTok::RBracket); continue;
      case '{': sym(TTok::LBrace); continue;
      case '}': sym(TTok::RBrace); continue;
      case '(': sym(TTok::LParen); continue;
      case ')': sym(TTok::RParen); continue;
      case '*': sym(TTok::Star); continue;
      case '.': sym(TTok::Dot); continue;
      case ',': sym(TTok::Comma); continue;
      case ':': sym(TTok::Colon); continue;
      default:
        throw ParseError(line, column, {"type token"}, "'" + std::string(1, c) + "'");
    }
  }
  TToken end;
  end.tok = TTok::End;
  end.line = line;
  end.column = column;
  out.push_back(end);
  return out;
}

// Parses the type grammar into an equation system: every rec binder
// becomes one equation and the rec expression itself a reference, so
// unguarded recursion surfaces as an ill-formed system.
class TypeParser {
 public:
  TypeParser(std::vector<TToken> tokens) : tokens_(std::move(tokens)) {}

  TypeTermPtr parse_full(std::vector<TypeEquation>& equations) {
    equations_ = &equations;
    TypeTermPtr t = parse_sum();
    expect(TTok::End, "end of type");
    return t;
  }

 private:
  std::vector<TToken> tokens_;
  size_t pos_ = 0;
  std::vector<TypeEquation>* equations_ = nullptr;
  std::vector<std::pair<std::string, std::string>> scope_;  // source name -> unique
  int unique_counter_ = 0;

  const TToken& peek() const { return tokens_[pos_]; }
  const TToken& get() { return tokens_[pos_++]; }
  bool accept(TTok k) {
    if (peek().tok == k) { ++pos_; return true; }
    return false;
  }
  [[noreturn]] void fail(const std::string& expected) {
    const TToken& t = peek();
    std::string found = t.tok == TTok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.line, t.column, {expected}, found);
  }
  void expect(TTok k, const std::string& what) {
    if (!accept(k)) fail(what);
  }

  TypeTermPtr parse_sum() {
    TypeTermPtr left = parse_prod();
    while (accept(TTok::SumOp)) left = tt_sum(left, parse_prod());
    return left;
  }

  TypeTermPtr parse_prod() {
    TypeTermPtr left = parse_atom();
    while (accept(TTok::Star)) left = tt_prod(left, parse_atom());
    return left;
  }

  Use parse_use() {
    const TToken& t = peek();
    if (t.tok == TTok::Number && t.text == "0") { get(); return Use::Zero; }
    if (t.tok == TTok::Number && t.text == "1") { get(); return Use::One; }
    if (t.tok == TTok::Ident && t.text == "w") { get(); return Use::Omega; }
    fail("use (0, 1 or w)");
  }

  TypeTermPtr parse_atom() {
    switch (peek().tok) {
      case TTok::KwInt:
        get();
        return tt_int();
      case TTok::LBracket: {
        get();
        TypeTermPtr payload = parse_sum();
        expect(TTok::RBracket, "']'");
        expect(TTok::LBrace, "'{'");
        Use in_use = parse_use();
        expect(TTok::Comma, "','");
        Use out_use = parse_use();
        expect(TTok::RBrace, "'}'");
        return tt_chan(in_use, out_use, payload);
      }
      case TTok::LParen: {
        get();
        TypeTermPtr t = parse_sum();
        expect(TTok::RParen, "')'");
        return t;
      }
      case TTok::KwRec: {
        get();
        if (peek().tok != TTok::Ident) fail("type variable");
        std::string source = get().text;
        expect(TTok::Dot, "'.'");
        std::string unique = source + "#" + std::to_string(++unique_counter_);
        scope_.emplace_back(source, unique);
        TypeTermPtr body = parse_sum();
        scope_.pop_back();
        equations_->push_back(TypeEquation{unique, body});
        return tt_ref(unique);
      }
      case TTok::Ident: {
        const TToken& t = get();
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
          if (it->first == t.text) return tt_ref(it->second);
        }
        throw ParseError(t.line, t.column, {"bound type variable"},
                         "'" + t.text + "'");
      }
      default:
        fail("type");
    }
  }
};

}  // namespace

TypeId parse_type(TypeStore& store, const std::string& source) {
  TypeParser parser(lex_type(source));
  std::vector<TypeEquation> equations;
  TypeTermPtr top = parser.parse_full(equations);
  if (top->kind == TypeTermKind::Ref) {
    // The whole type is one rec binder; promote its equation to the root.
    for (size_t i = 0; i < equations.size(); ++i) {
      if (equations[i].name == top->ref) {
        std::rotate(equations.begin(), equations.begin() + i, equations.begin() + i + 1);
        break;
      }
    }
    return make_type(store, equations);
  }
  equations.insert(equations.begin(), TypeEquation{"#root", top});
  return make_type(store, equations);
}

Env parse_env(TypeStore& store, const std::string& source) {
  Env env;
  std::istringstream in(source);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    size_t comment = line.find("--");
    if (comment != std::string::npos) line = line.substr(0, comment);
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
    }
    if (blank) continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw ParseError(line_no, 1, {"'name : type' binding"}, "'" + raw + "'");
    }
    std::string name = line.substr(0, colon);
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) {
      name.pop_back();
    }
    size_t start = 0;
    while (start < name.size() && std::isspace(static_cast<unsigned char>(name[start]))) {
      ++start;
    }
    name = name.substr(start);
    if (name.empty()) {
      throw ParseError(line_no, 1, {"name"}, "':'");
    }
    try {
      env[name] = parse_type(store, line.substr(colon + 1));
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.column(), e.expected(), "(in binding for '" + name + "')");
    }
  }
  return env;
}

}  // namespace linpi
