#include <doctest.h>

#include "support.hpp"

using namespace linpi;

namespace {

ProcPtr fixture_proc(const std::string& name) {
  return parse_process(testsup::read_file(testsup::data_path(name)));
}

Env fixture_env(TypeStore& store, const std::string& name) {
  return parse_env(store, testsup::read_file(testsup::data_path(name)));
}

}  // namespace

TEST_SUITE("typecheck") {

TEST_CASE("the successor program admits its reference environment") {
  TypeStore store;
  Env env = fixture_env(store, "eq1_env.txt");
  CHECK(check_process(store, env, fixture_proc("eq1.pi")));
  CHECK(check_process(store, env, fixture_proc("eq2.pi")));
}

TEST_CASE("weakened or twisted declarations are rejected") {
  TypeStore store;
  ProcPtr p = fixture_proc("eq1.pi");

  Env no_print = fixture_env(store, "eq1_env.txt");
  no_print["print"] = parse_type(store, "[int]{0,0}");
  CHECK(!check_process(store, no_print, p));

  Env in_only = fixture_env(store, "eq1_env.txt");
  in_only["print"] = parse_type(store, "[int]{1,0}");  // wrong polarity
  CHECK(!check_process(store, in_only, p));

  Env weak_succ = fixture_env(store, "eq1_env.txt");
  weak_succ["succ"] = parse_type(store, "[int * [int]{0,1}]{w,0}");
  CHECK(!check_process(store, weak_succ, p));
}

TEST_CASE("declared names that are not free must be unlimited") {
  TypeStore store;
  ProcPtr closed = fixture_proc("ex41.pi");
  CHECK(check_process(store, Env{}, closed));

  Env harmless{{"spare", parse_type(store, "[int]{w,w}")}};
  CHECK(check_process(store, harmless, closed));
  Env zeroed{{"spare", parse_type(store, "[int]{0,0}")}};
  CHECK(check_process(store, zeroed, closed));

  Env dangling{{"spare", parse_type(store, "[int]{1,0}")}};
  CHECK(!check_process(store, dangling, closed));
}

TEST_CASE("a free name without a declaration is an error, not a rejection") {
  TypeStore store;
  try {
    check_process(store, Env{}, fixture_proc("ex41_unrestricted.pi"));
    FAIL("expected an unbound name error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundName);
    CHECK(testsup::contains(e.what(), "a"));
  }
}

TEST_CASE("forwarding requires matching polarities on both ends") {
  TypeStore store;
  ProcPtr fwd = fixture_proc("discuss5.pi");  // a?(x).b!x

  Env good{{"a", parse_type(store, "[int]{1,0}")},
           {"b", parse_type(store, "[int]{0,1}")}};
  CHECK(check_process(store, good, fwd));

  Env flipped{{"a", parse_type(store, "[int]{0,1}")},
              {"b", parse_type(store, "[int]{0,1}")}};
  CHECK(!check_process(store, flipped, fwd));

  // The forwarded payload may itself be linear when the polarities align.
  Env chan_payload{{"a", parse_type(store, "[[int]{0,1}]{1,0}")},
                   {"b", parse_type(store, "[[int]{0,1}]{0,1}")}};
  CHECK(check_process(store, chan_payload, fwd));

  Env mismatched{{"a", parse_type(store, "[[int]{0,1}]{1,0}")},
                 {"b", parse_type(store, "[[int]{1,0}]{0,1}")}};
  CHECK(!check_process(store, mismatched, fwd));
}

TEST_CASE("received channels are consumed according to the declared payload") {
  TypeStore store;
  ProcPtr p = parse_process("a?(x).x?(y).print!y");
  Env env{{"a", parse_type(store, "[[int]{1,0}]{1,0}")},
          {"print", parse_type(store, "[int]{0,1}")}};
  CHECK(check_process(store, env, p));

  Env wrong{{"a", parse_type(store, "[[int]{0,1}]{1,0}")},
            {"print", parse_type(store, "[int]{0,1}")}};
  CHECK(!check_process(store, wrong, p));

  // Dropping a received linear channel is not allowed.
  ProcPtr drop = parse_process("a?(x).idle");
  Env linear_payload{{"a", parse_type(store, "[[int]{1,0}]{1,0}")}};
  CHECK(!check_process(store, linear_payload, drop));
  Env unlimited_payload{{"a", parse_type(store, "[[int]{w,w}]{1,0}")}};
  CHECK(check_process(store, unlimited_payload, drop));
}

TEST_CASE("sharing a channel-free recursive value twice is out of scope") {
  TypeStore store;
  TypeId spine = make_type(store, {{"x", tt_prod(tt_int(), tt_ref("x"))}});
  Env env{{"z", spine}};

  // A single destructuring is fine: the components are determined exactly.
  ProcPtr once = parse_process("let (u,v) = z in idle");
  CHECK(check_process(store, env, once));

  // Two independent shares force a fresh-use instantiation of the spine,
  // which has no channel to put the uses on.
  ProcPtr twice =
      parse_process("(let (u,v) = z in idle) | (let (p,q) = z in idle)");
  try {
    check_process(store, env, twice);
    FAIL("expected the spine instantiation to be refused");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedGround);
  }

  // The same sharing is supported when a channel guards the recursion.
  TypeId guarded = make_type(
      store,
      {{"x", tt_chan(Use::Omega, Use::Omega, tt_prod(tt_int(), tt_ref("x")))}});
  Env genv{{"z", guarded}};
  ProcPtr shared = parse_process("z?(x).idle | z?(y).idle");
  CHECK(check_process(store, genv, shared));
}

TEST_CASE("expressions check against an expected type") {
  TypeStore store;
  TypeId int_t = store.intern_int();
  CHECK(check_expression(store, Env{}, parse_expression("(1, 2)"),
                         store.intern_prod(int_t, int_t)));
  CHECK(!check_expression(store, Env{}, parse_expression("(1, 2)"), int_t));

  Env env{{"x", int_t}};
  CHECK(check_expression(store, env, parse_expression("x + 1"), int_t));
  Env chan_env{{"x", parse_type(store, "[int]{1,0}")}};
  CHECK(!check_expression(store, chan_env, parse_expression("x + 1"), int_t));

  // A channel name checks against exactly its declared type.
  Env a_env{{"a", parse_type(store, "[int]{1,0}")}};
  CHECK(check_expression(store, a_env, parse_expression("a"),
                         parse_type(store, "[int]{1,0}")));
  CHECK(!check_expression(store, a_env, parse_expression("a"),
                          parse_type(store, "[int]{w,w}")));
}

TEST_CASE("grounding a type expression requires a covering substitution") {
  TypeStore store;
  GroundSubstitution subst;
  subst.type_bindings[0] = store.intern_int();
  subst.use_bindings[0] = Use::One;
  subst.use_bindings[1] = Use::Omega;

  TypeId t = ground_type_expr(
      store, te_chan(UseExpr::twice(0), UseExpr::one_plus(1), te_var(0)),
      subst);
  CHECK(type_equal(store, t, parse_type(store, "[int]{w,w}")));

  CHECK_THROWS_AS(
      ground_type_expr(store, te_prod(te_var(0), te_var(1)), subst), Error);
  try {
    ground_type_expr(store, te_chan(UseExpr::var(9), UseExpr::var(9), te_int()),
                     subst);
    FAIL("expected a covering failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotCovering);
  }
}

TEST_CASE("inference output always re-checks against its own program") {
  TypeStore store;
  for (const char* name :
       {"eq1.pi", "eq2.pi", "ex43.pi", "filter.pi", "oddeven.pi"}) {
    CAPTURE(name);
    ProcPtr p = fixture_proc(name);
    testsup::Inferred inf(store, p);
    CHECK(check_process(store, inf.env, p));
  }
}

}  // TEST_SUITE
