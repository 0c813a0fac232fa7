#include "linpi/constraints.hpp"

#include <algorithm>

#include "linpi/error.hpp"

namespace linpi {

/* use expressions */

UseExpr UseExpr::literal(Use u) {
  UseExpr e;
  e.lit = u;
  return e;
}

UseExpr UseExpr::var(UseVarId v, int mult) {
  UseExpr e;
  e.terms.emplace_back(v, mult);
  return e;
}

UseExpr UseExpr::one_plus(UseVarId v) {
  UseExpr e;
  e.lit = Use::One;
  e.terms.emplace_back(v, 1);
  return e;
}

UseExpr UseExpr::twice(UseVarId v) { return var(v, 2); }

bool UseExpr::is_bare_var() const {
  return lit == Use::Zero && terms.size() == 1 && terms[0].second == 1;
}

bool UseExpr::mentions(UseVarId v) const {
  for (const auto& [w, mult] : terms) {
    if (w == v) return true;
  }
  return false;
}

bool operator==(const UseExpr& a, const UseExpr& b) {
  return a.lit == b.lit && a.terms == b.terms;
}

bool operator<(const UseExpr& a, const UseExpr& b) {
  if (a.lit != b.lit) return a.lit < b.lit;
  return a.terms < b.terms;
}

UseExpr use_expr_add(const UseExpr& a, const UseExpr& b) {
  UseExpr out;
  out.lit = use_add(a.lit, b.lit);
  size_t i = 0, j = 0;
  while (i < a.terms.size() || j < b.terms.size()) {
    if (j == b.terms.size() ||
        (i < a.terms.size() && a.terms[i].first < b.terms[j].first)) {
      out.terms.push_back(a.terms[i++]);
    } else if (i == a.terms.size() || b.terms[j].first < a.terms[i].first) {
      out.terms.push_back(b.terms[j++]);
    } else {
      int mult = std::min(2, a.terms[i].second + b.terms[j].second);
      out.terms.emplace_back(a.terms[i].first, mult);
      ++i;
      ++j;
    }
  }
  return out;
}

UseExpr use_expr_subst(const UseExpr& e, UseVarId v, const UseExpr& replacement) {
  UseExpr rest;
  rest.lit = e.lit;
  int mult = 0;
  for (const auto& [w, m] : e.terms) {
    if (w == v) {
      mult = m;
    } else {
      rest.terms.emplace_back(w, m);
    }
  }
  for (int k = 0; k < mult; ++k) rest = use_expr_add(rest, replacement);
  return rest;
}

/* symbolic types */

TypeExprPtr te_var(TypeVarId v) {
  auto e = std::make_shared<TypeExpr>();
  e->kind = TypeExprKind::Var;
  e->var = v;
  return e;
}

TypeExprPtr te_int() {
  static const TypeExprPtr cached = [] {
    auto e = std::make_shared<TypeExpr>();
    e->kind = TypeExprKind::Int;
    return TypeExprPtr(e);
  }();
  return cached;
}

TypeExprPtr te_chan(UseExpr in_use, UseExpr out_use, TypeExprPtr payload) {
  auto e = std::make_shared<TypeExpr>();
  e->kind = TypeExprKind::Chan;
  e->in_use = std::move(in_use);
  e->out_use = std::move(out_use);
  e->child0 = std::move(payload);
  return e;
}

TypeExprPtr te_prod(TypeExprPtr a, TypeExprPtr b) {
  auto e = std::make_shared<TypeExpr>();
  e->kind = TypeExprKind::Prod;
  e->child0 = std::move(a);
  e->child1 = std::move(b);
  return e;
}

TypeExprPtr te_sum(TypeExprPtr a, TypeExprPtr b) {
  auto e = std::make_shared<TypeExpr>();
  e->kind = TypeExprKind::Sum;
  e->child0 = std::move(a);
  e->child1 = std::move(b);
  return e;
}

TypeExprPtr te_ground(TypeId id) {
  auto e = std::make_shared<TypeExpr>();
  e->kind = TypeExprKind::Ground;
  e->ground = id;
  return e;
}

/* constraints */

Constraint make_eq(TypeExprPtr a, TypeExprPtr b) {
  Constraint c;
  c.kind = ConstraintKind::Eq;
  c.a = std::move(a);
  c.b = std::move(b);
  return c;
}

Constraint make_comb(TypeExprPtr t, TypeExprPtr a, TypeExprPtr b) {
  Constraint c;
  c.kind = ConstraintKind::Comb;
  c.a = std::move(t);
  c.b = std::move(a);
  c.c = std::move(b);
  return c;
}

Constraint make_coh(TypeExprPtr a, TypeExprPtr b) {
  Constraint c;
  c.kind = ConstraintKind::Coh;
  c.a = std::move(a);
  c.b = std::move(b);
  return c;
}

Constraint make_use_eq(UseExpr u, UseExpr v) {
  Constraint c;
  c.kind = ConstraintKind::UseEq;
  c.u = std::move(u);
  c.v = std::move(v);
  return c;
}

Constraint make_unlimited(TypeExprPtr t) { return make_comb(t, t, t); }

/* variable supply */

TypeVarId VarSupply::fresh_type_var() {
  TypeVarId v = static_cast<TypeVarId>(type_names_.size());
  type_names_.push_back("a" + std::to_string(v));
  return v;
}

UseVarId VarSupply::fresh_use_var() {
  UseVarId v = static_cast<UseVarId>(use_names_.size());
  use_names_.push_back("r" + std::to_string(v));
  return v;
}

TypeVarId VarSupply::inst_var(TypeVarId first, TypeVarId second) {
  auto key = std::make_pair(first, second);
  auto it = inst_memo_.find(key);
  if (it != inst_memo_.end()) return it->second;
  TypeVarId v = static_cast<TypeVarId>(type_names_.size());
  type_names_.push_back("i(" + type_names_.at(first) + "," +
                        type_names_.at(second) + ")");
  inst_memo_.emplace(key, v);
  inst_origin_.emplace(v, key);
  return v;
}

bool VarSupply::is_inst_var(TypeVarId v) const { return inst_origin_.count(v) != 0; }

std::optional<std::pair<TypeVarId, TypeVarId>> VarSupply::inst_origin(
    TypeVarId v) const {
  auto it = inst_origin_.find(v);
  if (it == inst_origin_.end()) return std::nullopt;
  return it->second;
}

const std::string& VarSupply::type_var_name(TypeVarId v) const {
  return type_names_.at(v);
}

const std::string& VarSupply::use_var_name(UseVarId v) const {
  return use_names_.at(v);
}

/* environment operations */

SynthEnv combine_envs(VarSupply& supply, const SynthEnv& a, const SynthEnv& b,
                      std::vector<Constraint>& out) {
  SynthEnv result = a;
  for (const auto& [name, type] : b) {
    auto it = result.find(name);
    if (it == result.end()) {
      result.emplace(name, type);
    } else {
      TypeExprPtr fresh = te_var(supply.fresh_type_var());
      out.push_back(make_comb(fresh, it->second, type));
      it->second = fresh;
    }
  }
  return result;
}

SynthEnv merge_envs(const SynthEnv& a, const SynthEnv& b,
                    std::vector<Constraint>& out) {
  for (const auto& [name, type] : a) {
    if (!b.count(name)) {
      throw Error(ErrorCode::DomainMismatch,
                  "name '" + name + "' is missing from one branch");
    }
  }
  for (const auto& [name, type] : b) {
    if (!a.count(name)) {
      throw Error(ErrorCode::DomainMismatch,
                  "name '" + name + "' is missing from one branch");
    }
  }
  SynthEnv result = a;
  for (const auto& [name, type] : b) {
    out.push_back(make_eq(result.at(name), type));
  }
  return result;
}

/* expressions */

ExprGen gen_expression(VarSupply& supply, const ExprPtr& e,
                       std::vector<Constraint>& out) {
  switch (e->kind) {
    case ExprKind::IntLit:
      return ExprGen{te_int(), {}};
    case ExprKind::NameRef: {
      TypeExprPtr t = te_var(supply.fresh_type_var());
      SynthEnv env;
      env.emplace(e->name.text, t);
      return ExprGen{t, std::move(env)};
    }
    case ExprKind::Pair: {
      ExprGen a = gen_expression(supply, e->a, out);
      ExprGen b = gen_expression(supply, e->b, out);
      SynthEnv env = combine_envs(supply, a.env, b.env, out);
      return ExprGen{te_prod(a.type, b.type), std::move(env)};
    }
    case ExprKind::Fst: {
      ExprGen a = gen_expression(supply, e->a, out);
      TypeExprPtr first = te_var(supply.fresh_type_var());
      TypeExprPtr second = te_var(supply.fresh_type_var());
      out.push_back(make_eq(a.type, te_prod(first, second)));
      out.push_back(make_unlimited(second));
      return ExprGen{first, std::move(a.env)};
    }
    case ExprKind::Snd: {
      ExprGen a = gen_expression(supply, e->a, out);
      TypeExprPtr first = te_var(supply.fresh_type_var());
      TypeExprPtr second = te_var(supply.fresh_type_var());
      out.push_back(make_eq(a.type, te_prod(first, second)));
      out.push_back(make_unlimited(first));
      return ExprGen{second, std::move(a.env)};
    }
    case ExprKind::Inl: {
      ExprGen a = gen_expression(supply, e->a, out);
      TypeExprPtr other = te_var(supply.fresh_type_var());
      return ExprGen{te_sum(a.type, other), std::move(a.env)};
    }
    case ExprKind::Inr: {
      ExprGen a = gen_expression(supply, e->a, out);
      TypeExprPtr other = te_var(supply.fresh_type_var());
      return ExprGen{te_sum(other, a.type), std::move(a.env)};
    }
    case ExprKind::Add: {
      ExprGen a = gen_expression(supply, e->a, out);
      ExprGen b = gen_expression(supply, e->b, out);
      out.push_back(make_eq(a.type, te_int()));
      out.push_back(make_eq(b.type, te_int()));
      SynthEnv env = combine_envs(supply, a.env, b.env, out);
      return ExprGen{te_int(), std::move(env)};
    }
  }
  throw Error(ErrorCode::Internal, "gen_expression: unknown expression kind");
}

/* processes */

namespace {

// Looks up the type of a binder in the body environment; an unused binder
// gets a fresh unlimited variable. Removes the binder from the environment.
TypeExprPtr take_binder(VarSupply& supply, SynthEnv& env,
                        const std::string& binder,
                        std::vector<Constraint>& out) {
  auto it = env.find(binder);
  if (it != env.end()) {
    TypeExprPtr t = it->second;
    env.erase(it);
    return t;
  }
  TypeExprPtr t = te_var(supply.fresh_type_var());
  out.push_back(make_unlimited(t));
  return t;
}

// Extends each branch environment with an unlimited fresh variable for the
// names only the other branch uses, so the two domains coincide.
void pad_branches(VarSupply& supply, SynthEnv& a, SynthEnv& b,
                  std::vector<Constraint>& out) {
  for (const auto& [name, type] : a) {
    if (!b.count(name)) {
      TypeExprPtr t = te_var(supply.fresh_type_var());
      out.push_back(make_unlimited(t));
      b.emplace(name, t);
    }
  }
  for (const auto& [name, type] : b) {
    if (!a.count(name)) {
      TypeExprPtr t = te_var(supply.fresh_type_var());
      out.push_back(make_unlimited(t));
      a.emplace(name, t);
    }
  }
}

SynthEnv gen_proc(VarSupply& supply, const ProcPtr& p, const GenOptions& options,
                  std::vector<Constraint>& out) {
  switch (p->kind) {
    case ProcKind::Idle:
      return {};
    case ProcKind::Input: {
      ExprGen subject = gen_expression(supply, p->subject, out);
      SynthEnv body = gen_proc(supply, p->body, options, out);
      TypeExprPtr payload = take_binder(supply, body, p->binder, out);
      UseVarId in = supply.fresh_use_var();
      UseVarId non = supply.fresh_use_var();
      out.push_back(make_eq(subject.type,
                            te_chan(UseExpr::one_plus(in), UseExpr::twice(non),
                                    payload)));
      return combine_envs(supply, subject.env, body, out);
    }
    case ProcKind::Output: {
      ExprGen subject = gen_expression(supply, p->subject, out);
      ExprGen object = gen_expression(supply, p->object, out);
      UseVarId non = supply.fresh_use_var();
      UseVarId outv = supply.fresh_use_var();
      out.push_back(make_eq(subject.type,
                            te_chan(UseExpr::twice(non), UseExpr::one_plus(outv),
                                    object.type)));
      return combine_envs(supply, subject.env, object.env, out);
    }
    case ProcKind::Par: {
      SynthEnv left = gen_proc(supply, p->body, options, out);
      SynthEnv right = gen_proc(supply, p->body2, options, out);
      return combine_envs(supply, left, right, out);
    }
    case ProcKind::Repl: {
      SynthEnv body = gen_proc(supply, p->body, options, out);
      return combine_envs(supply, body, body, out);
    }
    case ProcKind::New: {
      SynthEnv body = gen_proc(supply, p->body, options, out);
      TypeExprPtr t = take_binder(supply, body, p->binder, out);
      TypeExprPtr payload = te_var(supply.fresh_type_var());
      UseVarId in = supply.fresh_use_var();
      UseVarId outv = options.unbalanced_new ? supply.fresh_use_var() : in;
      out.push_back(make_eq(
          t, te_chan(UseExpr::var(in), UseExpr::var(outv), payload)));
      return body;
    }
    case ProcKind::Case: {
      ExprGen scrutinee = gen_expression(supply, p->subject, out);
      SynthEnv left = gen_proc(supply, p->body, options, out);
      SynthEnv right = gen_proc(supply, p->body2, options, out);
      TypeExprPtr lt = take_binder(supply, left, p->binder, out);
      TypeExprPtr rt = take_binder(supply, right, p->binder2, out);
      out.push_back(make_eq(scrutinee.type, te_sum(lt, rt)));
      pad_branches(supply, left, right, out);
      SynthEnv merged = merge_envs(left, right, out);
      return combine_envs(supply, scrutinee.env, merged, out);
    }
    case ProcKind::Split: {
      ExprGen scrutinee = gen_expression(supply, p->subject, out);
      SynthEnv body = gen_proc(supply, p->body, options, out);
      TypeExprPtr second = take_binder(supply, body, p->binder2, out);
      TypeExprPtr first = take_binder(supply, body, p->binder, out);
      out.push_back(make_eq(scrutinee.type, te_prod(first, second)));
      return combine_envs(supply, scrutinee.env, body, out);
    }
  }
  throw Error(ErrorCode::Internal, "gen_process: unknown process kind");
}

}  // namespace

GenResult gen_process(VarSupply& supply, const ProcPtr& p,
                      const GenOptions& options) {
  GenResult result;
  result.env = gen_proc(supply, p, options, result.constraints);
  return result;
}

/* rendering */

std::string render_use_expr(const VarSupply& supply, const UseExpr& e) {
  std::string out;
  if (e.lit != Use::Zero || e.terms.empty()) out = render_use(e.lit);
  for (const auto& [v, mult] : e.terms) {
    if (!out.empty()) out += "+";
    if (mult == 2) out += "2";
    out += supply.use_var_name(v);
  }
  return out;
}

namespace {

// Levels: sum 1, product 2, atoms 3.
std::string render_te(const VarSupply& supply, const TypeStore& store,
                      const TypeExprPtr& e, int level) {
  switch (e->kind) {
    case TypeExprKind::Var:
      return supply.type_var_name(e->var);
    case TypeExprKind::Int:
      return "int";
    case TypeExprKind::Chan:
      return "[" + render_te(supply, store, e->child0, 0) + "]{" +
             render_use_expr(supply, e->in_use) + "," +
             render_use_expr(supply, e->out_use) + "}";
    case TypeExprKind::Prod: {
      std::string s = render_te(supply, store, e->child0, 2) + " * " +
                      render_te(supply, store, e->child1, 3);
      return level > 2 ? "(" + s + ")" : s;
    }
    case TypeExprKind::Sum: {
      std::string s = render_te(supply, store, e->child0, 1) + " (+) " +
                      render_te(supply, store, e->child1, 2);
      return level > 1 ? "(" + s + ")" : s;
    }
    case TypeExprKind::Ground: {
      std::string s = render_type(store, e->ground);
      return level > 1 ? "(" + s + ")" : s;
    }
  }
  throw Error(ErrorCode::Internal, "render: unknown type expression kind");
}

}  // namespace

std::string render_type_expr(const VarSupply& supply, const TypeStore& store,
                             const TypeExprPtr& e) {
  return render_te(supply, store, e, 0);
}

std::string render_constraint(const VarSupply& supply, const TypeStore& store,
                              const Constraint& c) {
  switch (c.kind) {
    case ConstraintKind::Eq:
      return render_type_expr(supply, store, c.a) + " = " +
             render_type_expr(supply, store, c.b);
    case ConstraintKind::Comb:
      return render_type_expr(supply, store, c.a) + " = " +
             render_type_expr(supply, store, c.b) + " + " +
             render_type_expr(supply, store, c.c);
    case ConstraintKind::Coh:
      return render_type_expr(supply, store, c.a) + " ~ " +
             render_type_expr(supply, store, c.b);
    case ConstraintKind::UseEq:
      return render_use_expr(supply, c.u) + " = " + render_use_expr(supply, c.v);
  }
  throw Error(ErrorCode::Internal, "render: unknown constraint kind");
}

}  // namespace linpi
