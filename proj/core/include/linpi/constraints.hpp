#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "linpi/ast.hpp"
#include "linpi/types.hpp"

namespace linpi {

using TypeVarId = uint32_t;
using UseVarId = uint32_t;

// A use expression is a literal plus a multiset of use variables, each with
// multiplicity 1 or 2. Higher multiplicities collapse to 2 because
// u + u + u = u + u for every use.
struct UseExpr {
  Use lit = Use::Zero;
  std::vector<std::pair<UseVarId, int>> terms;  // sorted by variable id

  static UseExpr literal(Use u);
  static UseExpr var(UseVarId v, int mult = 1);
  static UseExpr one_plus(UseVarId v);  // 1 + v
  static UseExpr twice(UseVarId v);     // 2v

  bool is_bare_var() const;  // exactly one variable, multiplicity 1, lit 0
  bool mentions(UseVarId v) const;
};

bool operator==(const UseExpr& a, const UseExpr& b);
bool operator<(const UseExpr& a, const UseExpr& b);

UseExpr use_expr_add(const UseExpr& a, const UseExpr& b);
UseExpr use_expr_subst(const UseExpr& e, UseVarId v, const UseExpr& replacement);

// Evaluates under a total assignment provided as a callback.
template <typename F>
Use eval_use_expr(const UseExpr& e, F&& value_of) {
  Use acc = e.lit;
  for (const auto& [v, mult] : e.terms) {
    Use u = value_of(v);
    acc = use_add(acc, mult == 2 ? use_add(u, u) : u);
  }
  return acc;
}

/* symbolic types */

enum class TypeExprKind { Var, Int, Chan, Prod, Sum, Ground };

struct TypeExpr;
using TypeExprPtr = std::shared_ptr<const TypeExpr>;

struct TypeExpr {
  TypeExprKind kind;
  TypeVarId var = 0;           // Var
  UseExpr in_use, out_use;     // Chan
  TypeExprPtr child0, child1;  // Chan payload in child0; Prod/Sum children
  TypeId ground = 0;           // Ground: an already-built type
};

TypeExprPtr te_var(TypeVarId v);
TypeExprPtr te_int();
TypeExprPtr te_chan(UseExpr in_use, UseExpr out_use, TypeExprPtr payload);
TypeExprPtr te_prod(TypeExprPtr a, TypeExprPtr b);
TypeExprPtr te_sum(TypeExprPtr a, TypeExprPtr b);
TypeExprPtr te_ground(TypeId id);

/* constraints */

enum class ConstraintKind {
  Eq,     // a = b
  Comb,   // a = b + c
  Coh,    // a ~ b
  UseEq,  // u = v
};

struct Constraint {
  ConstraintKind kind;
  TypeExprPtr a, b, c;
  UseExpr u, v;
};

Constraint make_eq(TypeExprPtr a, TypeExprPtr b);
Constraint make_comb(TypeExprPtr t, TypeExprPtr a, TypeExprPtr b);
Constraint make_coh(TypeExprPtr a, TypeExprPtr b);
Constraint make_use_eq(UseExpr u, UseExpr v);
// A type is unlimited exactly when it combines with itself to itself.
Constraint make_unlimited(TypeExprPtr t);

// Mints variables and remembers their display names: type variables are
// a0, a1, ...; use variables r0, r1, ...; instantiation variables i(x,y)
// are issued injectively per ordered pair.
class VarSupply {
 public:
  TypeVarId fresh_type_var();
  UseVarId fresh_use_var();
  TypeVarId inst_var(TypeVarId first, TypeVarId second);

  bool is_inst_var(TypeVarId v) const;
  std::optional<std::pair<TypeVarId, TypeVarId>> inst_origin(TypeVarId v) const;
  const std::string& type_var_name(TypeVarId v) const;
  const std::string& use_var_name(UseVarId v) const;
  size_t type_var_count() const { return type_names_.size(); }
  size_t use_var_count() const { return use_names_.size(); }

 private:
  std::vector<std::string> type_names_;
  std::vector<std::string> use_names_;
  std::map<TypeVarId, std::pair<TypeVarId, TypeVarId>> inst_origin_;
  std::map<std::pair<TypeVarId, TypeVarId>, TypeVarId> inst_memo_;
};

/* constraint generation */

// The synthesized environment maps each free name to its type expression.
using SynthEnv = std::map<std::string, TypeExprPtr>;

struct GenOptions {
  // When set, restrictions leave the two slot uses of the bound channel
  // independent instead of equating them.
  bool unbalanced_new = false;
};

struct GenResult {
  SynthEnv env;
  std::vector<Constraint> constraints;
};

struct ExprGen {
  TypeExprPtr type;
  SynthEnv env;
};

// Combination of two synthesized environments: a name occurring on both
// sides gets a fresh variable constrained to be the combination.
SynthEnv combine_envs(VarSupply& supply, const SynthEnv& a, const SynthEnv& b,
                      std::vector<Constraint>& out);

// Merge for alternative branches: domains must agree and the entries are
// equated pairwise. Throws DomainMismatch otherwise.
SynthEnv merge_envs(const SynthEnv& a, const SynthEnv& b,
                    std::vector<Constraint>& out);

ExprGen gen_expression(VarSupply& supply, const ExprPtr& e,
                       std::vector<Constraint>& out);

// Generates the constraint set of a process. The resulting set contains
// only equality and combination constraints, and its environment domain is
// exactly the set of free names.
GenResult gen_process(VarSupply& supply, const ProcPtr& p,
                      const GenOptions& options = {});

/* rendering */

std::string render_use_expr(const VarSupply& supply, const UseExpr& e);
std::string render_type_expr(const VarSupply& supply, const TypeStore& store,
                             const TypeExprPtr& e);
std::string render_constraint(const VarSupply& supply, const TypeStore& store,
                              const Constraint& c);

}  // namespace linpi
