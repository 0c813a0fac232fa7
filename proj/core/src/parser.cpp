#include <cctype>
#include <optional>
#include <set>
#include <sstream>

#include "linpi/ast.hpp"

namespace linpi {

namespace {

enum class Tok {
  Ident, Int, KwIdle, KwNew, KwIn, KwCase, KwOf, KwInl, KwInr, KwLet,
  KwFst, KwSnd, Bang, Query, Dot, Bar, Star, LParen, RParen, Comma,
  Semi, LBrace, RBrace, Arrow, Plus, Assign, End,
};

struct Token {
  Tok tok;
  std::string text;
  long long value = 0;
  int line = 1;
  int column = 1;
};

std::string token_label(const Token& t) {
  switch (t.tok) {
    case Tok::Ident: return "identifier '" + t.text + "'";
    case Tok::Int: return "integer";
    case Tok::End: return "end of input";
    default: return "'" + t.text + "'";
  }
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, column = 1;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    i += n;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = column;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.tok = Tok::Int;
      t.text = src.substr(i, j - i);
      t.value = std::stoll(t.text);
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
      if (t.text == "idle") t.tok = Tok::KwIdle;
      else if (t.text == "new") t.tok = Tok::KwNew;
      else if (t.text == "in") t.tok = Tok::KwIn;
      else if (t.text == "case") t.tok = Tok::KwCase;
      else if (t.text == "of") t.tok = Tok::KwOf;
      else if (t.text == "inl") t.tok = Tok::KwInl;
      else if (t.text == "inr") t.tok = Tok::KwInr;
      else if (t.text == "let") t.tok = Tok::KwLet;
      else if (t.text == "fst") t.tok = Tok::KwFst;
      else if (t.text == "snd") t.tok = Tok::KwSnd;
      else t.tok = Tok::Ident;
      advance(j - i);
      out.push_back(t);
      continue;
    }
    auto sym = [&](Tok k, size_t n) {
      t.tok = k;
      t.text = src.substr(i, n);
      advance(n);
      out.push_back(t);
    };
    if (c == '=' && i + 1 < src.size() && src[i + 1] == '>') { sym(Tok::Arrow, 2); continue; }
    switch (c) {
      case '!': sym(Tok::Bang, 1); continue;
      case '?': sym(Tok::Query, 1); continue;
      case '.': sym(Tok::Dot, 1); continue;
      case '|': sym(Tok::Bar, 1); continue;
      case '*': sym(Tok::Star, 1); continue;
      case '(': sym(Tok::LParen, 1); continue;
      case ')': sym(Tok::RParen, 1); continue;
      case ',': sym(Tok::Comma, 1); continue;
      case ';': sym(Tok::Semi, 1); continue;
      case '{': sym(Tok::LBrace, 1); continue;
      case '}': sym(Tok::RBrace, 1); continue;
      case '+': sym(Tok::Plus, 1); continue;
      case '=': sym(Tok::Assign, 1); continue;
      default:
        throw ParseError(line, column, {"token"},
                         "'" + std::string(1, c) + "'");
    }
  }
  Token end;
  end.tok = Tok::End;
  end.text = "";
  end.line = line;
  end.column = column;
  out.push_back(end);
  return out;
}

// Recursive descent with one backtracking point: a '(' at process position
// is first tried as a grouped process, then as an expression subject.
// Failures record the furthest position reached so errors point at the
// real problem rather than the backtrack site.
class Parser {
 public:
  explicit Parser(const std::string& src) : tokens_(lex(src)) {
    for (const Token& t : tokens_) {
      if (t.tok == Tok::Ident) used_idents_.insert(t.text);
    }
  }

  ProcPtr parse_program() {
    ProcPtr p = parse_par();
    expect(Tok::End, "end of input");
    return p;
  }

  ExprPtr parse_expression_program() {
    ExprPtr e = parse_expr();
    expect(Tok::End, "end of input");
    return e;
  }

 private:
  std::vector<Token> tokens_;
  size_t pos_ = 0;
  std::set<std::string> used_idents_;
  int wildcard_counter_ = 0;
  // Best (furthest) failure seen, for error reporting after backtracking.
  std::optional<ParseError> best_error_;
  size_t best_error_pos_ = 0;

  const Token& peek() const { return tokens_[pos_]; }
  const Token& get() { return tokens_[pos_++]; }
  bool at(Tok k) const { return peek().tok == k; }
  bool accept(Tok k) {
    if (at(k)) { ++pos_; return true; }
    return false;
  }

  [[noreturn]] void fail(const std::vector<std::string>& expected) {
    ParseError err(peek().line, peek().column, expected, token_label(peek()));
    if (!best_error_ || pos_ >= best_error_pos_) {
      best_error_ = err;
      best_error_pos_ = pos_;
    }
    throw *best_error_;
  }

  void expect(Tok k, const std::string& what) {
    if (!accept(k)) fail({what});
  }

  std::string expect_binder() {
    if (!at(Tok::Ident)) fail({"identifier"});
    std::string text = get().text;
    if (text == "_") return fresh_wildcard();
    return text;
  }

  std::string fresh_wildcard() {
    std::string candidate;
    do {
      candidate = "_" + std::to_string(++wildcard_counter_);
    } while (used_idents_.count(candidate));
    used_idents_.insert(candidate);
    return candidate;
  }

  /* processes */

  ProcPtr parse_par() {
    ProcPtr left = parse_prefix();
    while (accept(Tok::Bar)) {
      ProcPtr right = parse_prefix();
      left = make_par(std::move(left), std::move(right));
    }
    return left;
  }

  ProcPtr parse_prefix() {
    switch (peek().tok) {
      case Tok::KwIdle:
        get();
        return make_idle();
      case Tok::Star:
        get();
        return make_repl(parse_prefix());
      case Tok::KwNew: {
        get();
        std::vector<std::string> binders;
        binders.push_back(expect_binder());
        while (accept(Tok::Comma)) binders.push_back(expect_binder());
        expect(Tok::KwIn, "'in'");
        ProcPtr body = parse_prefix();
        for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
          body = make_new(*it, std::move(body));
        }
        return body;
      }
      case Tok::KwCase: {
        get();
        ExprPtr scrutinee = parse_expr();
        expect(Tok::KwOf, "'of'");
        expect(Tok::LBrace, "'{'");
        expect(Tok::KwInl, "'inl'");
        expect(Tok::LParen, "'('");
        std::string lb = expect_binder();
        expect(Tok::RParen, "')'");
        expect(Tok::Arrow, "'=>'");
        ProcPtr lbody = parse_par();
        expect(Tok::Semi, "';'");
        expect(Tok::KwInr, "'inr'");
        expect(Tok::LParen, "'('");
        std::string rb = expect_binder();
        expect(Tok::RParen, "')'");
        expect(Tok::Arrow, "'=>'");
        ProcPtr rbody = parse_par();
        expect(Tok::RBrace, "'}'");
        return make_case(scrutinee, lb, lbody, rb, rbody);
      }
      case Tok::KwLet: {
        get();
        expect(Tok::LParen, "'('");
        std::string b1 = expect_binder();
        expect(Tok::Comma, "','");
        std::string b2 = expect_binder();
        expect(Tok::RParen, "')'");
        expect(Tok::Assign, "'='");
        ExprPtr scrutinee = parse_expr();
        expect(Tok::KwIn, "'in'");
        ProcPtr body = parse_prefix();
        return make_split(scrutinee, b1, b2, body);
      }
      case Tok::LParen: {
        // Either a grouped process or a parenthesized subject expression.
        size_t save = pos_;
        try {
          get();  // '('
          ProcPtr group = parse_par();
          expect(Tok::RParen, "')'");
          if (at(Tok::Query) || at(Tok::Bang)) {
            // A subject after all; reparse on the expression path below.
            pos_ = save;
          } else {
            return group;
          }
        } catch (const ParseError&) {
          pos_ = save;
        }
        return parse_io();
      }
      default:
        return parse_io();
    }
  }

  ProcPtr parse_io() {
    ExprPtr subject = parse_expr();
    if (accept(Tok::Query)) {
      expect(Tok::LParen, "'('");
      std::string binder = expect_binder();
      expect(Tok::RParen, "')'");
      expect(Tok::Dot, "'.'");
      ProcPtr body = parse_prefix();
      return make_input(subject, binder, body);
    }
    if (accept(Tok::Bang)) {
      ExprPtr object = parse_expr();
      return make_output(subject, object);
    }
    fail({"'?'", "'!'"});
  }

  /* expressions */

  ExprPtr parse_expr() { return parse_additive(); }

  ExprPtr parse_additive() {
    ExprPtr left = parse_unary();
    while (accept(Tok::Plus)) {
      ExprPtr right = parse_unary();
      left = make_add(std::move(left), std::move(right));
    }
    return left;
  }

  ExprPtr parse_unary() {
    switch (peek().tok) {
      case Tok::KwFst: get(); return make_fst(parse_unary());
      case Tok::KwSnd: get(); return make_snd(parse_unary());
      case Tok::KwInl: get(); return make_inl(parse_unary());
      case Tok::KwInr: get(); return make_inr(parse_unary());
      default: return parse_primary();
    }
  }

  ExprPtr parse_primary() {
    if (at(Tok::Int)) return make_int(get().value);
    if (at(Tok::Ident)) return make_name(NameKind::Variable, get().text);
    if (accept(Tok::LParen)) {
      ExprPtr first = parse_expr();
      if (accept(Tok::Comma)) {
        ExprPtr second = parse_expr();
        expect(Tok::RParen, "')'");
        return make_pair(first, second);
      }
      expect(Tok::RParen, "')'");
      return first;
    }
    fail({"expression"});
  }
};

}  // namespace

ParseError::ParseError(int line, int column, std::vector<std::string> expected,
                       const std::string& found)
    : Error(ErrorCode::Parse,
            [&] {
              std::ostringstream os;
              os << "parse error at " << line << ":" << column << ": expected ";
              for (size_t i = 0; i < expected.size(); ++i) {
                if (i) os << (i + 1 == expected.size() ? " or " : ", ");
                os << expected[i];
              }
              os << ", found " << found;
              return os.str();
            }()),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

ProcPtr parse_process(const std::string& source) {
  Parser parser(source);
  return parser.parse_program();
}

ExprPtr parse_expression(const std::string& source) {
  Parser parser(source);
  return parser.parse_expression_program();
}

}  // namespace linpi
