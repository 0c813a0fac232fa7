#include "linpi/semantics.hpp"

#include <random>

namespace linpi {

bool operator==(const Label& a, const Label& b) {
  return a.tau == b.tau && (a.tau || a.channel == b.channel);
}

std::string render_label(const Label& l) { return l.tau ? "tau" : l.channel; }

/* evaluation */

ExprPtr eval(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::IntLit:
      return e;
    case ExprKind::NameRef:
      if (e->name.kind == NameKind::Channel) return e;
      throw Error(ErrorCode::StuckExpression,
                  "unbound variable '" + e->name.text + "'");
    case ExprKind::Pair:
      return make_pair(eval(e->a), eval(e->b));
    case ExprKind::Fst: {
      ExprPtr v = eval(e->a);
      if (v->kind != ExprKind::Pair) {
        throw Error(ErrorCode::StuckExpression,
                    "fst of a non-pair: " + render_expression(v));
      }
      return v->a;
    }
    case ExprKind::Snd: {
      ExprPtr v = eval(e->a);
      if (v->kind != ExprKind::Pair) {
        throw Error(ErrorCode::StuckExpression,
                    "snd of a non-pair: " + render_expression(v));
      }
      return v->b;
    }
    case ExprKind::Inl:
      return make_inl(eval(e->a));
    case ExprKind::Inr:
      return make_inr(eval(e->a));
    case ExprKind::Add: {
      ExprPtr l = eval(e->a);
      ExprPtr r = eval(e->b);
      if (l->kind != ExprKind::IntLit || r->kind != ExprKind::IntLit) {
        throw Error(ErrorCode::StuckExpression,
                    "addition of non-integers: " + render_expression(e));
      }
      return make_int(l->value + r->value);
    }
  }
  throw Error(ErrorCode::Internal, "eval: unknown expression kind");
}

/* promotion of free names */

namespace {

ExprPtr promote_expr(const ExprPtr& e, const std::set<std::string>& bound) {
  switch (e->kind) {
    case ExprKind::IntLit:
      return e;
    case ExprKind::NameRef:
      if (e->name.kind == NameKind::Variable && !bound.count(e->name.text)) {
        return make_name(NameKind::Channel, e->name.text);
      }
      return e;
    case ExprKind::Pair:
      return make_pair(promote_expr(e->a, bound), promote_expr(e->b, bound));
    case ExprKind::Add:
      return make_add(promote_expr(e->a, bound), promote_expr(e->b, bound));
    case ExprKind::Fst:
      return make_fst(promote_expr(e->a, bound));
    case ExprKind::Snd:
      return make_snd(promote_expr(e->a, bound));
    case ExprKind::Inl:
      return make_inl(promote_expr(e->a, bound));
    case ExprKind::Inr:
      return make_inr(promote_expr(e->a, bound));
  }
  throw Error(ErrorCode::Internal, "promote: unknown expression kind");
}

ProcPtr promote_proc(const ProcPtr& p, std::set<std::string>& bound) {
  switch (p->kind) {
    case ProcKind::Idle:
      return p;
    case ProcKind::Output:
      return make_output(promote_expr(p->subject, bound),
                         promote_expr(p->object, bound));
    case ProcKind::Par:
      return make_par(promote_proc(p->body, bound), promote_proc(p->body2, bound));
    case ProcKind::Repl:
      return make_repl(promote_proc(p->body, bound));
    case ProcKind::Input: {
      ExprPtr subject = promote_expr(p->subject, bound);
      bool added = bound.insert(p->binder).second;
      ProcPtr body = promote_proc(p->body, bound);
      if (added) bound.erase(p->binder);
      return make_input(subject, p->binder, body);
    }
    case ProcKind::New: {
      bool added = bound.insert(p->binder).second;
      ProcPtr body = promote_proc(p->body, bound);
      if (added) bound.erase(p->binder);
      return make_new(p->binder, body);
    }
    case ProcKind::Case: {
      ExprPtr scrutinee = promote_expr(p->subject, bound);
      bool added_l = bound.insert(p->binder).second;
      ProcPtr left = promote_proc(p->body, bound);
      if (added_l) bound.erase(p->binder);
      bool added_r = bound.insert(p->binder2).second;
      ProcPtr right = promote_proc(p->body2, bound);
      if (added_r) bound.erase(p->binder2);
      return make_case(scrutinee, p->binder, left, p->binder2, right);
    }
    case ProcKind::Split: {
      ExprPtr scrutinee = promote_expr(p->subject, bound);
      bool a1 = bound.insert(p->binder).second;
      bool a2 = bound.insert(p->binder2).second;
      ProcPtr body = promote_proc(p->body, bound);
      if (a2) bound.erase(p->binder2);
      if (a1) bound.erase(p->binder);
      return make_split(scrutinee, p->binder, p->binder2, body);
    }
  }
  throw Error(ErrorCode::Internal, "promote: unknown process kind");
}

}  // namespace

ProcPtr promote_free_names(const ProcPtr& p) {
  std::set<std::string> bound;
  return promote_proc(p, bound);
}

/* structural normalization for step */

namespace {

struct Component {
  ProcPtr proc;
  int copy = -1;  // expansion copy this component belongs to, -1 if permanent
};

struct Binder {
  std::string name;
  int copy = -1;
};

struct Normalized {
  std::vector<Binder> binders;  // extruded restrictions, outermost first
  std::vector<Component> comps;
  std::vector<int> copy_parent;  // enclosing copy of each expansion copy
};

std::string fresh_channel(const std::string& base, std::set<std::string>& used) {
  if (!used.count(base)) {
    used.insert(base);
    return base;
  }
  for (int i = 1;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (!used.count(candidate)) {
      used.insert(candidate);
      return candidate;
    }
  }
}

// Renames every free occurrence of channel `from` to channel `to`. Only
// called for restriction binders, which occur as channel names after
// promotion.
ExprPtr rename_channel_expr(const ExprPtr& e, const std::string& from,
                            const std::string& to) {
  switch (e->kind) {
    case ExprKind::IntLit:
      return e;
    case ExprKind::NameRef:
      if (e->name.kind == NameKind::Channel && e->name.text == from) {
        return make_name(NameKind::Channel, to);
      }
      return e;
    case ExprKind::Pair:
      return make_pair(rename_channel_expr(e->a, from, to),
                       rename_channel_expr(e->b, from, to));
    case ExprKind::Add:
      return make_add(rename_channel_expr(e->a, from, to),
                      rename_channel_expr(e->b, from, to));
    case ExprKind::Fst:
      return make_fst(rename_channel_expr(e->a, from, to));
    case ExprKind::Snd:
      return make_snd(rename_channel_expr(e->a, from, to));
    case ExprKind::Inl:
      return make_inl(rename_channel_expr(e->a, from, to));
    case ExprKind::Inr:
      return make_inr(rename_channel_expr(e->a, from, to));
  }
  throw Error(ErrorCode::Internal, "rename: unknown expression kind");
}

ProcPtr rename_channel(const ProcPtr& p, const std::string& from,
                       const std::string& to) {
  auto re = [&](const ExprPtr& e) { return rename_channel_expr(e, from, to); };
  switch (p->kind) {
    case ProcKind::Idle:
      return p;
    case ProcKind::Output:
      return make_output(re(p->subject), re(p->object));
    case ProcKind::Par:
      return make_par(rename_channel(p->body, from, to),
                      rename_channel(p->body2, from, to));
    case ProcKind::Repl:
      return make_repl(rename_channel(p->body, from, to));
    case ProcKind::Input:
      return make_input(re(p->subject), p->binder,
                        rename_channel(p->body, from, to));
    case ProcKind::New:
      // A deeper restriction reusing the text binds variable occurrences,
      // which stay unpromoted; only channel occurrences are renamed.
      return make_new(p->binder, rename_channel(p->body, from, to));
    case ProcKind::Case:
      return make_case(re(p->subject), p->binder,
                       rename_channel(p->body, from, to), p->binder2,
                       rename_channel(p->body2, from, to));
    case ProcKind::Split:
      return make_split(re(p->subject), p->binder, p->binder2,
                        rename_channel(p->body, from, to));
  }
  throw Error(ErrorCode::Internal, "rename: unknown process kind");
}

// Promotes the occurrences of one restriction binder to channel names.
ProcPtr promote_binder(const ProcPtr& body, const std::string& binder) {
  ExprPtr channel = make_name(NameKind::Channel, binder);
  // Substitution is capture avoiding and skips shadowing binders.
  return substitute(body, binder, channel);
}

void normalize(const ProcPtr& p, Normalized& out, std::set<std::string>& used,
               int fuel_repl, int copy) {
  switch (p->kind) {
    case ProcKind::Idle:
      return;  // unit of parallel composition
    case ProcKind::Par:
      normalize(p->body, out, used, fuel_repl, copy);
      normalize(p->body2, out, used, fuel_repl, copy);
      return;
    case ProcKind::New: {
      std::string name = fresh_channel(p->binder, used);
      ProcPtr body = promote_binder(p->body, p->binder);
      if (name != p->binder) body = rename_channel(body, p->binder, name);
      out.binders.push_back(Binder{name, copy});
      normalize(body, out, used, fuel_repl, copy);
      return;
    }
    case ProcKind::Repl: {
      out.comps.push_back(Component{p, copy});
      for (int i = 0; i < fuel_repl; ++i) {
        int id = static_cast<int>(out.copy_parent.size());
        out.copy_parent.push_back(copy);
        normalize(p->body, out, used, fuel_repl, id);
      }
      return;
    }
    default:
      out.comps.push_back(Component{p, copy});
      return;
  }
}

// Copies transitively required once any of `involved` takes part in a step.
std::set<int> copy_closure(const Normalized& norm, const std::set<size_t>& involved) {
  std::set<int> closure;
  for (size_t i : involved) {
    int c = norm.comps[i].copy;
    while (c >= 0 && closure.insert(c).second) c = norm.copy_parent[c];
  }
  return closure;
}

ProcPtr rebuild(const Normalized& norm, const std::vector<ProcPtr>& comps,
                const std::set<int>& kept_copies) {
  std::vector<ProcPtr> alive;
  for (const ProcPtr& c : comps) {
    if (c && c->kind != ProcKind::Idle) alive.push_back(c);
  }
  ProcPtr body;
  if (alive.empty()) {
    body = make_idle();
  } else {
    body = alive.front();
    for (size_t i = 1; i < alive.size(); ++i) body = make_par(body, alive[i]);
  }
  for (auto it = norm.binders.rbegin(); it != norm.binders.rend(); ++it) {
    if (it->copy >= 0 && !kept_copies.count(it->copy)) continue;
    body = make_new(it->name, body);
  }
  return body;
}

std::optional<ExprPtr> try_eval(const ExprPtr& e) {
  try {
    return eval(e);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::StuckExpression) return std::nullopt;
    throw;
  }
}

std::optional<std::string> subject_channel(const ExprPtr& e) {
  auto v = try_eval(e);
  if (!v || (*v)->kind != ExprKind::NameRef) return std::nullopt;
  return (*v)->name.text;
}

}  // namespace

std::vector<Redex> step(const ProcPtr& p, int fuel_repl) {
  ProcPtr promoted = promote_free_names(p);
  Normalized norm;
  std::set<std::string> used = free_names(promoted);
  normalize(promoted, norm, used, fuel_repl, -1);
  std::set<std::string> restricted;
  for (const Binder& b : norm.binders) restricted.insert(b.name);

  const auto& comps = norm.comps;
  std::vector<Redex> out;

  // Expansion copies that take no part in the step are dropped along with
  // their restrictions; their replication stays and can expand again later.
  auto emit = [&](Label label, std::vector<ProcPtr> next,
                  const std::set<size_t>& involved) {
    std::set<int> kept = copy_closure(norm, involved);
    for (size_t i = 0; i < next.size(); ++i) {
      int c = comps[i].copy;
      if (c >= 0 && !kept.count(c)) next[i] = nullptr;
    }
    ProcPtr result = rebuild(norm, next, kept);
    for (const Redex& r : out) {
      if (r.label == label && alpha_equal(r.residual, result)) return;
    }
    out.push_back(Redex{std::move(label), std::move(result)});
  };

  auto base_next = [&]() {
    std::vector<ProcPtr> next(comps.size());
    for (size_t i = 0; i < comps.size(); ++i) next[i] = comps[i].proc;
    return next;
  };

  auto label_for = [&](const std::string& channel) {
    return restricted.count(channel) ? Label::make_tau() : Label::comm(channel);
  };

  for (size_t i = 0; i < comps.size(); ++i) {
    const ProcPtr& pi = comps[i].proc;
    // Internal choices and projections reduce on their own.
    if (pi->kind == ProcKind::Case) {
      auto v = try_eval(pi->subject);
      if (v && ((*v)->kind == ExprKind::Inl || (*v)->kind == ExprKind::Inr)) {
        bool left = (*v)->kind == ExprKind::Inl;
        ProcPtr residual = left ? substitute(pi->body, pi->binder, (*v)->a)
                                : substitute(pi->body2, pi->binder2, (*v)->a);
        auto next = base_next();
        next[i] = residual;
        emit(Label::make_tau(), next, {i});
      }
    } else if (pi->kind == ProcKind::Split) {
      auto v = try_eval(pi->subject);
      if (v && (*v)->kind == ExprKind::Pair) {
        ProcPtr residual = substitute(pi->body, pi->binder, (*v)->a);
        residual = substitute(residual, pi->binder2, (*v)->b);
        auto next = base_next();
        next[i] = residual;
        emit(Label::make_tau(), next, {i});
      }
    }
    // Communications with any later component.
    for (size_t j = i + 1; j < comps.size(); ++j) {
      const ProcPtr& pj = comps[j].proc;
      const ProcPtr* sender = nullptr;
      const ProcPtr* receiver = nullptr;
      size_t si = 0, ri = 0;
      if (pi->kind == ProcKind::Output && pj->kind == ProcKind::Input) {
        sender = &pi; receiver = &pj; si = i; ri = j;
      } else if (pi->kind == ProcKind::Input && pj->kind == ProcKind::Output) {
        sender = &pj; receiver = &pi; si = j; ri = i;
      } else {
        continue;
      }
      auto out_ch = subject_channel((*sender)->subject);
      auto in_ch = subject_channel((*receiver)->subject);
      if (!out_ch || !in_ch || *out_ch != *in_ch) continue;
      auto payload = try_eval((*sender)->object);
      if (!payload) continue;
      ProcPtr residual = substitute((*receiver)->body, (*receiver)->binder, *payload);
      auto next = base_next();
      next[si] = nullptr;  // the output is consumed
      next[ri] = residual;
      emit(label_for(*out_ch), next, {i, j});
    }
  }
  return out;
}

RunResult run(const ProcPtr& p, int max_steps, uint64_t seed) {
  std::mt19937_64 gen(seed);
  ProcPtr current = promote_free_names(p);
  RunResult result;
  for (int i = 0; i < max_steps; ++i) {
    std::vector<Redex> succs = step(current);
    if (succs.empty()) break;
    size_t idx = static_cast<size_t>(gen() % succs.size());
    result.trace.push_back(succs[idx]);
    current = succs[idx].residual;
  }
  result.final_state = current;
  return result;
}

Env env_reduce(TypeStore& store, const Env& env, const Label& label) {
  if (label.tau) return env;
  return env_reduce(store, env, label.channel);
}

}  // namespace linpi
