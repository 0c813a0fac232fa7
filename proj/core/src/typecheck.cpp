#include "linpi/typecheck.hpp"

#include "linpi/error.hpp"
#include "linpi/solver.hpp"

namespace linpi {

TypeId ground_type_expr(TypeStore& store, const TypeExprPtr& e,
                        const GroundSubstitution& subst) {
  switch (e->kind) {
    case TypeExprKind::Var: {
      auto it = subst.type_bindings.find(e->var);
      if (it == subst.type_bindings.end()) {
        throw Error(ErrorCode::NotCovering,
                    "no binding for a type variable in the substitution");
      }
      return it->second;
    }
    case TypeExprKind::Int:
      return store.intern_int();
    case TypeExprKind::Chan: {
      auto value = [&](UseVarId v) {
        auto it = subst.use_bindings.find(v);
        if (it == subst.use_bindings.end()) {
          throw Error(ErrorCode::NotCovering,
                      "no binding for a use variable in the substitution");
        }
        return it->second;
      };
      TypeId payload = ground_type_expr(store, e->child0, subst);
      return store.intern_chan(eval_use_expr(e->in_use, value),
                               eval_use_expr(e->out_use, value), payload);
    }
    case TypeExprKind::Prod:
      return store.intern_prod(ground_type_expr(store, e->child0, subst),
                               ground_type_expr(store, e->child1, subst));
    case TypeExprKind::Sum:
      return store.intern_sum(ground_type_expr(store, e->child0, subst),
                              ground_type_expr(store, e->child1, subst));
    case TypeExprKind::Ground:
      return e->ground;
  }
  throw Error(ErrorCode::Internal, "ground: unknown type expression kind");
}

bool verify_solution(TypeStore& store, const std::vector<Constraint>& constraints,
                     const GroundSubstitution& subst) {
  auto value = [&](UseVarId v) {
    auto it = subst.use_bindings.find(v);
    if (it == subst.use_bindings.end()) {
      throw Error(ErrorCode::NotCovering,
                  "no binding for a use variable in the substitution");
    }
    return it->second;
  };
  for (const Constraint& c : constraints) {
    switch (c.kind) {
      case ConstraintKind::Eq: {
        TypeId a = ground_type_expr(store, c.a, subst);
        TypeId b = ground_type_expr(store, c.b, subst);
        if (!type_equal(store, a, b)) return false;
        break;
      }
      case ConstraintKind::Comb: {
        TypeId t = ground_type_expr(store, c.a, subst);
        TypeId a = ground_type_expr(store, c.b, subst);
        TypeId b = ground_type_expr(store, c.c, subst);
        auto combined = type_combine(store, a, b);
        if (!combined || !type_equal(store, t, *combined)) return false;
        break;
      }
      case ConstraintKind::Coh: {
        TypeId a = ground_type_expr(store, c.a, subst);
        TypeId b = ground_type_expr(store, c.b, subst);
        if (!coherent(store, a, b)) return false;
        break;
      }
      case ConstraintKind::UseEq:
        if (eval_use_expr(c.u, value) != eval_use_expr(c.v, value)) return false;
        break;
    }
  }
  return true;
}

namespace {

// Pins the synthesized entries to the declared types and requires every
// declared-but-unused name to be unlimited. Returns false when the pinned
// system has no solution.
bool solve_pinned(TypeStore& store, VarSupply& supply,
                  std::vector<Constraint> constraints, const SynthEnv& synth,
                  const Env& env) {
  for (const auto& [name, type] : synth) {
    auto it = env.find(name);
    if (it == env.end()) {
      throw Error(ErrorCode::UnboundName,
                  "free name '" + name + "' is not declared");
    }
    constraints.push_back(make_eq(type, te_ground(it->second)));
  }
  for (const auto& [name, declared] : env) {
    if (synth.count(name)) continue;
    TypeExprPtr extra = te_var(supply.fresh_type_var());
    constraints.push_back(make_unlimited(extra));
    constraints.push_back(make_eq(extra, te_ground(declared)));
  }
  try {
    solve(store, supply, constraints);
    return true;
  } catch (const Error& err) {
    if (err.code() == ErrorCode::Unsatisfiable ||
        err.code() == ErrorCode::NoSolution) {
      return false;
    }
    throw;
  }
}

}  // namespace

bool check_process(TypeStore& store, const Env& env, const ProcPtr& p) {
  VarSupply supply;
  GenResult gen = gen_process(supply, p);
  return solve_pinned(store, supply, std::move(gen.constraints), gen.env, env);
}

bool check_expression(TypeStore& store, const Env& env, const ExprPtr& e,
                      TypeId expected) {
  VarSupply supply;
  std::vector<Constraint> constraints;
  ExprGen gen = gen_expression(supply, e, constraints);
  constraints.push_back(make_eq(gen.type, te_ground(expected)));
  return solve_pinned(store, supply, std::move(constraints), gen.env, env);
}

}  // namespace linpi
