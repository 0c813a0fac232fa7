#pragma once

#include <map>

#include "linpi/ast.hpp"
#include "linpi/constraints.hpp"
#include "linpi/types.hpp"

namespace linpi {

// A ground substitution closes a constraint set: every type variable maps
// to a type and every use variable to a use.
struct GroundSubstitution {
  std::map<TypeVarId, TypeId> type_bindings;
  std::map<UseVarId, Use> use_bindings;
};

// Applies the substitution to a type expression, building the denoted type.
// Throws NotCovering when a variable has no binding.
TypeId ground_type_expr(TypeStore& store, const TypeExprPtr& e,
                        const GroundSubstitution& subst);

// Checks that the substitution satisfies every constraint: equalities up to
// bisimulation, combinations exist and match, coherences hold, and use
// equalities evaluate equal. Throws NotCovering on missing bindings.
bool verify_solution(TypeStore& store, const std::vector<Constraint>& constraints,
                     const GroundSubstitution& subst);

// Decides whether the process admits the given environment exactly: its
// constraints are solved with each free name pinned to its declared type.
// Names declared but not free must be unlimited. Throws UnboundName when a
// free name has no declaration.
bool check_process(TypeStore& store, const Env& env, const ProcPtr& p);

// Same discipline for a single expression against an expected type.
bool check_expression(TypeStore& store, const Env& env, const ExprPtr& e,
                      TypeId expected);

}  // namespace linpi
