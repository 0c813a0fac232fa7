#include <doctest.h>

#include "support.hpp"

using namespace linpi;
using testsup::parse_fixture;

TEST_SUITE("ast") {

TEST_CASE("parser handles the full grammar and rendering round-trips") {
  const char* sources[] = {
      "idle",
      "a!3",
      "a?(x).x!1",
      "a!3 | a?(x).idle",
      "*succ?(p).let (x,y) = p in y!(x+1)",
      "new a in (a!3 | a?(x).idle)",
      "new a,b in (a!1 | b!2 | a?(x).b?(y).r!(x+y))",
      "case inl 3 of { inl(n) => r!n; inr(m) => r!(m+1) }",
      "let (x,y) = (1,2) in r!(x+y)",
      "(fst x)?(y).(snd x)!(y+1)",
      "a!(1,(2,3))",
      "a!(inr (1,2))",
      "*a?(x).(x!1 | a!x)",
  };
  for (const char* src : sources) {
    CAPTURE(src);
    ProcPtr p = parse_process(src);
    ProcPtr q = parse_process(render_process(p));
    CHECK(alpha_equal(p, q));
  }
}

TEST_CASE("parenthesized process versus subject expression is disambiguated") {
  // A leading parenthesis may open a grouped process or an I/O subject.
  ProcPtr subject = parse_process("(fst x)!1");
  CHECK(subject->kind == ProcKind::Output);
  CHECK(subject->subject->kind == ExprKind::Fst);

  ProcPtr grouped = parse_process("(a!1 | b!2)");
  CHECK(grouped->kind == ProcKind::Par);
}

TEST_CASE("parallel composition is left-associative and binds looser than prefixes") {
  ProcPtr p = parse_process("a!1 | b!2 | c!3");
  REQUIRE(p->kind == ProcKind::Par);
  CHECK(p->body->kind == ProcKind::Par);
  CHECK(p->body2->kind == ProcKind::Output);

  ProcPtr q = parse_process("a?(x).x!1 | b!2");
  REQUIRE(q->kind == ProcKind::Par);
  CHECK(q->body->kind == ProcKind::Input);
}

TEST_CASE("multi-binder restriction desugars to nested single restrictions") {
  ProcPtr p = parse_process("new a,b,c in idle");
  REQUIRE(p->kind == ProcKind::New);
  CHECK(p->binder == "a");
  REQUIRE(p->body->kind == ProcKind::New);
  CHECK(p->body->binder == "b");
  REQUIRE(p->body->body->kind == ProcKind::New);
  CHECK(p->body->body->binder == "c");
}

TEST_CASE("wildcard binders become fresh names that do not collide") {
  ProcPtr p = parse_process("a?(_).case inl 1 of { inl(_) => idle; inr(_) => idle }");
  REQUIRE(p->kind == ProcKind::Input);
  std::set<std::string> binders{p->binder, p->body->binder, p->body->binder2};
  CHECK(binders.size() == 3);  // all distinct
  for (const auto& b : binders) CHECK(b.find('_') != std::string::npos);
}

TEST_CASE("expression precedence: addition above projections above atoms") {
  ExprPtr e = parse_expression("fst x + 1");
  REQUIRE(e->kind == ExprKind::Add);
  CHECK(e->a->kind == ExprKind::Fst);

  ExprPtr f = parse_expression("fst (x + 1)");
  REQUIRE(f->kind == ExprKind::Fst);
  CHECK(f->a->kind == ExprKind::Add);

  ExprPtr g = parse_expression("1 + 2 + 3");
  REQUIRE(g->kind == ExprKind::Add);
  CHECK(g->a->kind == ExprKind::Add);
}

TEST_CASE("comments and layout are skipped") {
  ProcPtr p = parse_process("-- leading note\n a!3 -- trailing\n | idle\n");
  CHECK(p->kind == ProcKind::Par);
}

TEST_CASE("parse errors carry line and column of the offending token") {
  try {
    parse_process("new in idle");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 5);
    CHECK(!e.expected().empty());
  }

  try {
    parse_process("a!3 |\n| b!2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("free names ignore bound occurrences") {
  ProcPtr p = parse_process("new a in (a!b | c?(x).x!a)");
  auto fn = free_names(p);
  CHECK(fn == std::set<std::string>{"b", "c"});

  ProcPtr q = parse_process("let (x,y) = z in x!y");
  CHECK(free_names(q) == std::set<std::string>{"z"});
}

TEST_CASE("substitution avoids capturing bound names") {
  // Substituting a for x must not let the restriction capture it.
  ProcPtr p = parse_process("new a in x!a");
  ProcPtr s = substitute(p, "x", make_name(NameKind::Channel, "a"));
  REQUIRE(s->kind == ProcKind::New);
  CHECK(s->binder != "a");  // binder renamed away
  REQUIRE(s->body->kind == ProcKind::Output);
  CHECK(s->body->subject->name.text == "a");
  CHECK(s->body->object->name.text == s->binder);
}

TEST_CASE("substituting a non-value is rejected") {
  ProcPtr p = parse_process("x!1");
  CHECK_THROWS_AS(substitute(p, "x", parse_expression("1+2")), Error);
}

TEST_CASE("alpha equality identifies renamed binders and nothing more") {
  CHECK(alpha_equal(parse_process("a?(x).x!1"), parse_process("a?(y).y!1")));
  CHECK(alpha_equal(parse_process("new a in a!1"), parse_process("new b in b!1")));
  CHECK(!alpha_equal(parse_process("a?(x).x!1"), parse_process("a?(x).x!2")));
  CHECK(!alpha_equal(parse_process("a!1 | b!2"), parse_process("b!2 | a!1")));
}

TEST_CASE("values are literals, names, and value pairs or injections") {
  CHECK(is_value(parse_expression("1")));
  CHECK(is_value(parse_expression("(1,(2,x))")));
  CHECK(is_value(parse_expression("inl (1,2)")));
  CHECK(!is_value(parse_expression("1+2")));
  CHECK(!is_value(parse_expression("fst x")));
  CHECK(!is_value(parse_expression("(1, fst x)")));
}

}  // TEST_SUITE
