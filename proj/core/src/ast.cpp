#include "linpi/ast.hpp"

#include <algorithm>

namespace linpi {

bool operator==(const Name& a, const Name& b) {
  return a.kind == b.kind && a.text == b.text;
}

bool operator!=(const Name& a, const Name& b) { return !(a == b); }

/* constructors */

ExprPtr make_int(long long value) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::IntLit;
  e->value = value;
  return e;
}

ExprPtr make_name(Name name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::NameRef;
  e->name = std::move(name);
  return e;
}

ExprPtr make_name(NameKind kind, std::string text) {
  return make_name(Name{kind, std::move(text)});
}

static ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

static ExprPtr make_unary(ExprKind kind, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->a = std::move(a);
  return e;
}

ExprPtr make_pair(ExprPtr first, ExprPtr second) {
  return make_binary(ExprKind::Pair, std::move(first), std::move(second));
}
ExprPtr make_fst(ExprPtr e) { return make_unary(ExprKind::Fst, std::move(e)); }
ExprPtr make_snd(ExprPtr e) { return make_unary(ExprKind::Snd, std::move(e)); }
ExprPtr make_inl(ExprPtr e) { return make_unary(ExprKind::Inl, std::move(e)); }
ExprPtr make_inr(ExprPtr e) { return make_unary(ExprKind::Inr, std::move(e)); }
ExprPtr make_add(ExprPtr lhs, ExprPtr rhs) {
  return make_binary(ExprKind::Add, std::move(lhs), std::move(rhs));
}

ProcPtr make_idle() {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Idle;
  return p;
}

ProcPtr make_input(ExprPtr subject, std::string binder, ProcPtr body) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Input;
  p->subject = std::move(subject);
  p->binder = std::move(binder);
  p->body = std::move(body);
  return p;
}

ProcPtr make_output(ExprPtr subject, ExprPtr object) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Output;
  p->subject = std::move(subject);
  p->object = std::move(object);
  return p;
}

ProcPtr make_par(ProcPtr left, ProcPtr right) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Par;
  p->body = std::move(left);
  p->body2 = std::move(right);
  return p;
}

ProcPtr make_repl(ProcPtr body) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Repl;
  p->body = std::move(body);
  return p;
}

ProcPtr make_new(std::string binder, ProcPtr body) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::New;
  p->binder = std::move(binder);
  p->body = std::move(body);
  return p;
}

ProcPtr make_case(ExprPtr scrutinee, std::string left_binder, ProcPtr left_body,
                  std::string right_binder, ProcPtr right_body) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Case;
  p->subject = std::move(scrutinee);
  p->binder = std::move(left_binder);
  p->binder2 = std::move(right_binder);
  p->body = std::move(left_body);
  p->body2 = std::move(right_body);
  return p;
}

ProcPtr make_split(ExprPtr scrutinee, std::string first_binder,
                   std::string second_binder, ProcPtr body) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Split;
  p->subject = std::move(scrutinee);
  p->binder = std::move(first_binder);
  p->binder2 = std::move(second_binder);
  p->body = std::move(body);
  return p;
}

/* values and free names */

bool is_value(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::IntLit:
      return true;
    case ExprKind::NameRef:
      return e->name.kind == NameKind::Channel;
    case ExprKind::Pair:
      return is_value(e->a) && is_value(e->b);
    case ExprKind::Inl:
    case ExprKind::Inr:
      return is_value(e->a);
    default:
      return false;
  }
}

static void collect_free(const ExprPtr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case ExprKind::IntLit:
      return;
    case ExprKind::NameRef:
      out.insert(e->name.text);
      return;
    case ExprKind::Pair:
    case ExprKind::Add:
      collect_free(e->a, out);
      collect_free(e->b, out);
      return;
    default:
      collect_free(e->a, out);
      return;
  }
}

static void collect_free(const ProcPtr& p, std::set<std::string>& out) {
  switch (p->kind) {
    case ProcKind::Idle:
      return;
    case ProcKind::Input: {
      collect_free(p->subject, out);
      std::set<std::string> body;
      collect_free(p->body, body);
      body.erase(p->binder);
      out.insert(body.begin(), body.end());
      return;
    }
    case ProcKind::Output:
      collect_free(p->subject, out);
      collect_free(p->object, out);
      return;
    case ProcKind::Par:
      collect_free(p->body, out);
      collect_free(p->body2, out);
      return;
    case ProcKind::Repl:
      collect_free(p->body, out);
      return;
    case ProcKind::New: {
      std::set<std::string> body;
      collect_free(p->body, body);
      body.erase(p->binder);
      out.insert(body.begin(), body.end());
      return;
    }
    case ProcKind::Case: {
      collect_free(p->subject, out);
      std::set<std::string> left, right;
      collect_free(p->body, left);
      left.erase(p->binder);
      collect_free(p->body2, right);
      right.erase(p->binder2);
      out.insert(left.begin(), left.end());
      out.insert(right.begin(), right.end());
      return;
    }
    case ProcKind::Split: {
      collect_free(p->subject, out);
      std::set<std::string> body;
      collect_free(p->body, body);
      body.erase(p->binder);
      body.erase(p->binder2);
      out.insert(body.begin(), body.end());
      return;
    }
  }
}

std::set<std::string> free_names(const ExprPtr& e) {
  std::set<std::string> out;
  collect_free(e, out);
  return out;
}

std::set<std::string> free_names(const ProcPtr& p) {
  std::set<std::string> out;
  collect_free(p, out);
  return out;
}

/* substitution */

ExprPtr substitute(const ExprPtr& e, const std::string& var, const ExprPtr& value) {
  if (!is_value(value)) {
    throw Error(ErrorCode::NotAValue,
                "substitute: replacement is not a value: " + render_expression(value));
  }
  switch (e->kind) {
    case ExprKind::IntLit:
      return e;
    case ExprKind::NameRef:
      if (e->name.kind == NameKind::Variable && e->name.text == var) return value;
      return e;
    case ExprKind::Pair:
      return make_pair(substitute(e->a, var, value), substitute(e->b, var, value));
    case ExprKind::Add:
      return make_add(substitute(e->a, var, value), substitute(e->b, var, value));
    case ExprKind::Fst:
      return make_fst(substitute(e->a, var, value));
    case ExprKind::Snd:
      return make_snd(substitute(e->a, var, value));
    case ExprKind::Inl:
      return make_inl(substitute(e->a, var, value));
    case ExprKind::Inr:
      return make_inr(substitute(e->a, var, value));
  }
  throw Error(ErrorCode::Internal, "substitute: unknown expression kind");
}

// Renames every free occurrence of a variable binder; used to step out of
// the way of an incoming value.
static ProcPtr rename_var(const ProcPtr& p, const std::string& from,
                          const std::string& to) {
  return substitute(p, from, make_name(NameKind::Variable, to));
}

// The renaming above momentarily produces variable occurrences, which is
// fine: binders always rebind variables.
static std::string fresh_binder(const std::string& base,
                                const std::set<std::string>& avoid) {
  std::string candidate = base + "'";
  while (avoid.count(candidate)) candidate += "'";
  return candidate;
}

ProcPtr substitute(const ProcPtr& p, const std::string& var, const ExprPtr& value) {
  if (!is_value(value)) {
    throw Error(ErrorCode::NotAValue,
                "substitute: replacement is not a value: " + render_expression(value));
  }
  auto sub_e = [&](const ExprPtr& e) { return substitute(e, var, value); };
  auto sub_p = [&](const ProcPtr& q) { return substitute(q, var, value); };

  // Renames one binder out of the way of the incoming value. The avoid set
  // covers the body's names, the value's names, the substituted variable,
  // and any sibling binder.
  auto refresh = [&](std::string& binder, ProcPtr& body,
                     const std::set<std::string>& extra_avoid) {
    if (!free_names(value).count(binder)) return;
    std::set<std::string> avoid = free_names(body);
    auto fv = free_names(value);
    avoid.insert(fv.begin(), fv.end());
    avoid.insert(var);
    avoid.insert(extra_avoid.begin(), extra_avoid.end());
    std::string renamed = fresh_binder(binder, avoid);
    body = rename_var(body, binder, renamed);
    binder = renamed;
  };

  switch (p->kind) {
    case ProcKind::Idle:
      return p;
    case ProcKind::Output:
      return make_output(sub_e(p->subject), sub_e(p->object));
    case ProcKind::Par:
      return make_par(sub_p(p->body), sub_p(p->body2));
    case ProcKind::Repl:
      return make_repl(sub_p(p->body));
    case ProcKind::Input: {
      ExprPtr subject = sub_e(p->subject);
      if (p->binder == var) return make_input(subject, p->binder, p->body);
      std::string binder = p->binder;
      ProcPtr body = p->body;
      refresh(binder, body, {});
      return make_input(subject, binder, sub_p(body));
    }
    case ProcKind::New: {
      if (p->binder == var) return p;
      std::string binder = p->binder;
      ProcPtr body = p->body;
      refresh(binder, body, {});
      return make_new(binder, sub_p(body));
    }
    case ProcKind::Case: {
      ExprPtr scrutinee = sub_e(p->subject);
      auto branch = [&](const std::string& b, const ProcPtr& body)
          -> std::pair<std::string, ProcPtr> {
        if (b == var) return {b, body};
        std::string binder = b;
        ProcPtr inner = body;
        refresh(binder, inner, {});
        return {binder, sub_p(inner)};
      };
      auto [lb, lbody] = branch(p->binder, p->body);
      auto [rb, rbody] = branch(p->binder2, p->body2);
      return make_case(scrutinee, lb, lbody, rb, rbody);
    }
    case ProcKind::Split: {
      ExprPtr scrutinee = sub_e(p->subject);
      if (p->binder == var || p->binder2 == var) {
        return make_split(scrutinee, p->binder, p->binder2, p->body);
      }
      std::string b1 = p->binder, b2 = p->binder2;
      ProcPtr body = p->body;
      refresh(b1, body, {b2});
      refresh(b2, body, {b1});
      return make_split(scrutinee, b1, b2, sub_p(body));
    }
  }
  throw Error(ErrorCode::Internal, "substitute: unknown process kind");
}

/* alpha equivalence */

namespace {

// Bound names are compared positionally; free names by kind and text.
struct BinderStack {
  std::vector<std::pair<std::string, std::string>> pairs;

  void push(const std::string& a, const std::string& b) { pairs.emplace_back(a, b); }
  void pop() { pairs.pop_back(); }

  // Returns: 0 both free, 1 matching bound pair, -1 mismatch.
  int lookup(const std::string& a, const std::string& b) const {
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      bool hit_a = it->first == a;
      bool hit_b = it->second == b;
      if (hit_a || hit_b) return hit_a && hit_b ? 1 : -1;
    }
    return 0;
  }
};

bool alpha_expr(const ExprPtr& a, const ExprPtr& b, const BinderStack& env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::IntLit:
      return a->value == b->value;
    case ExprKind::NameRef: {
      if (a->name.kind != b->name.kind) return false;
      if (a->name.kind == NameKind::Channel) {
        // Channel constants never sit under a variable binder, but a New
        // binder can capture them during execution; compare positionally.
        int r = env.lookup(a->name.text, b->name.text);
        return r == 1 || (r == 0 && a->name.text == b->name.text);
      }
      int r = env.lookup(a->name.text, b->name.text);
      return r == 1 || (r == 0 && a->name.text == b->name.text);
    }
    case ExprKind::Pair:
    case ExprKind::Add:
      return alpha_expr(a->a, b->a, env) && alpha_expr(a->b, b->b, env);
    default:
      return alpha_expr(a->a, b->a, env);
  }
}

bool alpha_proc(const ProcPtr& a, const ProcPtr& b, BinderStack& env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ProcKind::Idle:
      return true;
    case ProcKind::Output:
      return alpha_expr(a->subject, b->subject, env) &&
             alpha_expr(a->object, b->object, env);
    case ProcKind::Par:
      return alpha_proc(a->body, b->body, env) && alpha_proc(a->body2, b->body2, env);
    case ProcKind::Repl:
      return alpha_proc(a->body, b->body, env);
    case ProcKind::Input: {
      if (!alpha_expr(a->subject, b->subject, env)) return false;
      env.push(a->binder, b->binder);
      bool ok = alpha_proc(a->body, b->body, env);
      env.pop();
      return ok;
    }
    case ProcKind::New: {
      env.push(a->binder, b->binder);
      bool ok = alpha_proc(a->body, b->body, env);
      env.pop();
      return ok;
    }
    case ProcKind::Case: {
      if (!alpha_expr(a->subject, b->subject, env)) return false;
      env.push(a->binder, b->binder);
      bool left = alpha_proc(a->body, b->body, env);
      env.pop();
      if (!left) return false;
      env.push(a->binder2, b->binder2);
      bool right = alpha_proc(a->body2, b->body2, env);
      env.pop();
      return right;
    }
    case ProcKind::Split: {
      if (!alpha_expr(a->subject, b->subject, env)) return false;
      env.push(a->binder, b->binder);
      env.push(a->binder2, b->binder2);
      bool ok = alpha_proc(a->body, b->body, env);
      env.pop();
      env.pop();
      return ok;
    }
  }
  return false;
}

}  // namespace

bool alpha_equal(const ExprPtr& a, const ExprPtr& b) {
  BinderStack env;
  return alpha_expr(a, b, env);
}

bool alpha_equal(const ProcPtr& a, const ProcPtr& b) {
  BinderStack env;
  return alpha_proc(a, b, env);
}

/* rendering */

namespace {

// Expression precedence: additive 1, unary 2, primary 3. A child rendered
// at a level below its context gets parentheses.
void render_expr(const ExprPtr& e, int level, std::string& out) {
  switch (e->kind) {
    case ExprKind::IntLit:
      out += std::to_string(e->value);
      return;
    case ExprKind::NameRef:
      out += e->name.text;
      return;
    case ExprKind::Pair:
      out += "(";
      render_expr(e->a, 1, out);
      out += ",";
      render_expr(e->b, 1, out);
      out += ")";
      return;
    case ExprKind::Add: {
      bool parens = level > 1;
      if (parens) out += "(";
      render_expr(e->a, 1, out);
      out += "+";
      render_expr(e->b, 2, out);
      if (parens) out += ")";
      return;
    }
    case ExprKind::Fst:
    case ExprKind::Snd:
    case ExprKind::Inl:
    case ExprKind::Inr: {
      bool parens = level > 2;
      if (parens) out += "(";
      switch (e->kind) {
        case ExprKind::Fst: out += "fst "; break;
        case ExprKind::Snd: out += "snd "; break;
        case ExprKind::Inl: out += "inl "; break;
        default: out += "inr "; break;
      }
      render_expr(e->a, 2, out);
      if (parens) out += ")";
      return;
    }
  }
}

// Process precedence: parallel composition 0, prefixes 1.
void render_proc(const ProcPtr& p, int level, std::string& out) {
  switch (p->kind) {
    case ProcKind::Idle:
      out += "idle";
      return;
    case ProcKind::Par: {
      bool parens = level > 0;
      if (parens) out += "(";
      render_proc(p->body, 0, out);
      out += " | ";
      render_proc(p->body2, 1, out);  // right-nested pars keep their shape
      if (parens) out += ")";
      return;
    }
    case ProcKind::Output:
      render_expr(p->subject, 2, out);
      out += "!";
      render_expr(p->object, 2, out);
      return;
    case ProcKind::Input:
      render_expr(p->subject, 2, out);
      out += "?(" + p->binder + ").";
      render_proc(p->body, 1, out);
      return;
    case ProcKind::Repl:
      out += "*";
      render_proc(p->body, 1, out);
      return;
    case ProcKind::New:
      out += "new " + p->binder + " in ";
      render_proc(p->body, 1, out);
      return;
    case ProcKind::Case:
      out += "case ";
      render_expr(p->subject, 1, out);
      out += " of { inl(" + p->binder + ") => ";
      render_proc(p->body, 0, out);
      out += "; inr(" + p->binder2 + ") => ";
      render_proc(p->body2, 0, out);
      out += " }";
      return;
    case ProcKind::Split:
      out += "let (" + p->binder + "," + p->binder2 + ") = ";
      render_expr(p->subject, 1, out);
      out += " in ";
      render_proc(p->body, 1, out);
      return;
  }
}

}  // namespace

std::string render_expression(const ExprPtr& e) {
  std::string out;
  render_expr(e, 1, out);
  return out;
}

std::string render_process(const ProcPtr& p) {
  std::string out;
  render_proc(p, 0, out);
  return out;
}

}  // namespace linpi
