#include <doctest.h>

#include <sstream>
#include <vector>

#include "support.hpp"

using namespace linpi;

namespace {

ProcPtr fixture_proc(const std::string& name) {
  return parse_process(testsup::read_file(testsup::data_path(name)));
}

UseEquation ueq(UseExpr l, UseExpr r) { return UseEquation{std::move(l), std::move(r)}; }

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("closure classifies variables by where their shape comes from") {
  TypeStore store;
  VarSupply supply;
  GenResult gen = gen_process(supply, fixture_proc("ex43.pi"));
  SolveContext ctx(store, supply);
  close(ctx, gen.constraints);

  VarClassification cls = classify_variables(ctx);
  CHECK(cls.eq_defined.size() == 5);
  CHECK(cls.coh_defined_only.size() == 3);
  CHECK(cls.undefined.size() == 0);
}

TEST_CASE("closure reports a constructor clash with both constructors named") {
  TypeStore store;
  VarSupply supply;
  TypeVarId v = supply.fresh_type_var();
  UseVarId r = supply.fresh_use_var();
  std::vector<Constraint> cs = {
      make_eq(te_var(v), te_int()),
      make_eq(te_var(v),
              te_chan(UseExpr::var(r), UseExpr::var(r), te_int())),
  };
  SolveContext ctx(store, supply);
  try {
    close(ctx, cs);
    FAIL("expected a clash");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unsatisfiable);
    CHECK(testsup::contains(e.what(), "int"));
    CHECK(testsup::contains(e.what(), "channel"));
  }

  VarSupply supply2;
  TypeVarId w = supply2.fresh_type_var();
  std::vector<Constraint> cs2 = {
      make_eq(te_var(w), te_prod(te_int(), te_int())),
      make_eq(te_var(w), te_sum(te_int(), te_int())),
  };
  SolveContext ctx2(store, supply2);
  try {
    close(ctx2, cs2);
    FAIL("expected a clash");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unsatisfiable);
    CHECK(testsup::contains(e.what(), "product"));
    CHECK(testsup::contains(e.what(), "sum"));
  }
}

TEST_CASE("a variable with no shape anywhere defaults to int") {
  TypeStore store;
  VarSupply supply;
  TypeVarId v = supply.fresh_type_var();
  std::vector<Constraint> cs = {make_unlimited(te_var(v))};

  SolveContext ctx(store, supply);
  close(ctx, cs);
  VarClassification before = classify_variables(ctx);
  REQUIRE(before.undefined.size() == 1);
  CHECK(before.undefined[0] == v);

  default_undefined_to_int(ctx);
  VarClassification after = classify_variables(ctx);
  CHECK(after.undefined.empty());
  CHECK(after.eq_defined.size() == 1);

  // And through the whole pipeline the binding is int.
  VarSupply supply2;
  TypeVarId v2 = supply2.fresh_type_var();
  SolveResult res =
      solve(store, supply2, {make_unlimited(te_var(v2))}, SolveOptions{});
  CHECK(res.subst.type_bindings.at(v2) == store.intern_int());
}

TEST_CASE("completion gives every coherence-only variable a definition") {
  TypeStore store;
  testsup::Inferred inf(store, fixture_proc("ex43.pi"));
  CHECK(inf.result.completion_additions.size() == 8);
  CHECK(inf.result.use_equations.size() == 8);
  CHECK(type_equal(
      store, inf.env.at("x"),
      parse_type(store, "[int]{1,0} * [int]{0,1}")));
}

TEST_CASE("an unrestricted linear exchange infers one use of each polarity") {
  // Regression: the partition here has a variable that survives in no
  // residual equation; it must default rather than crash back-substitution.
  TypeStore store;
  testsup::Inferred inf(store, fixture_proc("ex41_unrestricted.pi"));
  CHECK(type_equal(store, inf.env.at("a"), parse_type(store, "[int]{1,1}")));
}

TEST_CASE("determined variables are eliminated and restored by back-substitution") {
  UsePartition part;
  part.vars = {0, 1};
  part.equations = {ueq(UseExpr::var(0), UseExpr::one_plus(1))};

  EliminationResult elim = eliminate_determined(part);
  CHECK(elim.steps.size() == 1);
  CHECK(elim.steps[0].var == 0);
  CHECK(elim.residual.empty());

  PartitionSolution sol = solve_uses(part);
  CHECK(sol.assignment.at(1) == Use::Zero);  // unconstrained, least use
  CHECK(sol.assignment.at(0) == Use::One);   // 1 + 0 through the elimination

  SolveOptions all_omega;
  all_omega.force_omega_uses = true;
  PartitionSolution forced = solve_uses(part, all_omega);
  CHECK(forced.assignment.at(1) == Use::Omega);
  CHECK(forced.assignment.at(0) == Use::Omega);
}

TEST_CASE("the rank search returns the least assignment that satisfies the equations") {
  // 1 + u = 2v forces both sides to w, and the least such point is u=v=1.
  UsePartition part;
  part.vars = {0, 1};
  part.equations = {ueq(UseExpr::one_plus(0), UseExpr::twice(1))};

  PartitionSolution sol = solve_uses(part);
  CHECK(sol.assignment.at(0) == Use::One);
  CHECK(sol.assignment.at(1) == Use::One);
  CHECK(sol.residual_rank == 2);

  auto value_of = [&](UseVarId v) { return sol.assignment.at(v); };
  CHECK(eval_use_expr(part.equations[0].lhs, value_of) ==
        eval_use_expr(part.equations[0].rhs, value_of));
}

TEST_CASE("an unsatisfiable use partition reports no solution") {
  UsePartition part;
  part.vars = {0};
  part.equations = {ueq(UseExpr::one_plus(0), UseExpr::literal(Use::Zero))};
  CHECK_THROWS_AS(solve_uses(part), Error);
  try {
    solve_uses(part);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSolution);
  }
}

TEST_CASE("a residual beyond the limit aborts unless the fallback is allowed") {
  UsePartition part;
  part.vars = {0, 1};
  part.equations = {ueq(UseExpr::one_plus(0), UseExpr::twice(1))};

  SolveOptions tight;
  tight.residual_limit = 1;
  try {
    solve_uses(part, tight);
    FAIL("expected the search to refuse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SearchSpace);
  }

  tight.omega_fallback = true;
  PartitionSolution sol = solve_uses(part, tight);
  CHECK(sol.used_omega_fallback);
  CHECK(sol.assignment.at(0) == Use::Omega);
  CHECK(sol.assignment.at(1) == Use::Omega);
}

TEST_CASE("use equations split into independent partitions by shared variables") {
  std::vector<UseEquation> eqs = {
      ueq(UseExpr::var(0), UseExpr::var(1)),
      ueq(UseExpr::var(4), UseExpr::literal(Use::One)),
      ueq(UseExpr::var(2), UseExpr::one_plus(3)),
      ueq(UseExpr::var(1), UseExpr::twice(0)),
  };
  std::vector<UsePartition> parts = partition_uses(eqs);
  REQUIRE(parts.size() == 3);
  std::set<std::vector<UseVarId>> vars;
  for (const UsePartition& p : parts) vars.insert(p.vars);
  CHECK(vars.count({0, 1}) == 1);
  CHECK(vars.count({2, 3}) == 1);
  CHECK(vars.count({4}) == 1);
  for (const UsePartition& p : parts) {
    size_t expected = p.vars == std::vector<UseVarId>{0, 1} ? 2 : 1;
    CHECK(p.equations.size() == expected);
  }
}

TEST_CASE("already-built channel types participate in combinations") {
  TypeStore store;
  VarSupply supply;
  TypeVarId v = supply.fresh_type_var();
  TypeId in1 = store.intern_chan(Use::One, Use::Zero, store.intern_int());
  TypeId out1 = store.intern_chan(Use::Zero, Use::One, store.intern_int());
  std::vector<Constraint> cs = {
      make_comb(te_var(v), te_ground(in1), te_ground(out1))};

  SolveResult res = solve(store, supply, cs, SolveOptions{});
  TypeId got = ground_type_expr(store, te_var(v), res.subst);
  CHECK(type_equal(store, got, store.intern_chan(Use::One, Use::One,
                                                 store.intern_int())));
}

TEST_CASE("a channel-free recursive spine cannot be instantiated") {
  TypeStore store;
  VarSupply supply;
  TypeVarId v = supply.fresh_type_var();
  TypeId spine = make_type(store, {{"x", tt_prod(tt_int(), tt_ref("x"))}});
  std::vector<Constraint> cs = {
      make_comb(te_var(v), te_ground(spine), te_ground(spine))};
  try {
    solve(store, supply, cs, SolveOptions{});
    FAIL("expected the spine to be rejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedGround);
  }

  // The same shape guarded by a channel is fine: instantiation stops at the
  // channel and keeps its payload.
  VarSupply supply2;
  TypeVarId w = supply2.fresh_type_var();
  TypeId guarded =
      make_type(store, {{"x", tt_chan(Use::One, Use::Zero,
                                      tt_prod(tt_int(), tt_ref("x")))}});
  std::vector<Constraint> cs2 = {
      make_comb(te_var(w), te_ground(guarded), te_ground(guarded))};
  SolveResult res = solve(store, supply2, cs2, SolveOptions{});
  TypeId got = ground_type_expr(store, te_var(w), res.subst);
  CHECK(store.node(got).tag == TypeTag::Chan);
  CHECK(store.node(got).in_use == Use::Omega);  // 1 + 1
  CHECK(store.node(got).out_use == Use::Zero);
  CHECK(type_equal(store, store.node(got).a, store.node(guarded).a));
}

TEST_CASE("solutions are checked against the original constraints") {
  TypeStore store;
  VarSupply supply;
  TypeVarId v = supply.fresh_type_var();
  UseVarId r0 = supply.fresh_use_var();
  UseVarId r1 = supply.fresh_use_var();
  std::vector<Constraint> cs = {make_eq(
      te_var(v),
      te_chan(UseExpr::twice(r0), UseExpr::one_plus(r1), te_int()))};

  SolveResult res = solve(store, supply, cs, SolveOptions{});
  CHECK(verify_solution(store, cs, res.subst));

  GroundSubstitution bad = res.subst;
  bad.type_bindings[v] =
      store.intern_chan(Use::Zero, Use::Zero, store.intern_int());
  for (auto& [var, use] : bad.use_bindings) use = Use::Zero;
  CHECK(!verify_solution(store, cs, bad));
}

TEST_CASE("the dump stream describes classes and partitions when requested") {
  TypeStore store;
  std::ostringstream dump;
  SolveOptions opts;
  opts.dump_level = 2;
  opts.dump_stream = &dump;
  testsup::Inferred inf(store, fixture_proc("ex41.pi"), GenOptions{}, opts);
  CHECK(!dump.str().empty());
}

}  // TEST_SUITE
