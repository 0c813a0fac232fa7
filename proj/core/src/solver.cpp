#include "linpi/solver.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <functional>
#include <ostream>
#include <tuple>

#include "linpi/error.hpp"

namespace linpi {

namespace {

/* term arena */

struct TermKey {
  int tag;  // 0 var, 1 int, 2 chan, 3 prod, 4 sum, 5 ground
  TypeVarId var = 0;
  UseExpr u, v;
  TermId a = 0, b = 0;
  TypeId ground = 0;

  bool operator<(const TermKey& o) const {
    if (tag != o.tag) return tag < o.tag;
    if (var != o.var) return var < o.var;
    if (!(u == o.u)) return u < o.u;
    if (!(v == o.v)) return v < o.v;
    if (a != o.a) return a < o.a;
    if (b != o.b) return b < o.b;
    return ground < o.ground;
  }
};

struct TermData {
  TypeExprKind kind;
  TypeVarId var = 0;
  UseExpr in_use, out_use;
  TermId child0 = 0, child1 = 0;
  TypeId ground = 0;
  TypeExprPtr expr;  // the expression this term was interned from
};

struct Op {
  enum Kind { EqUnion, CohUnion, EqDecomp, CohDecomp } kind;
  TermId a, b;
};

bool is_proper(TypeExprKind k) {
  return k == TypeExprKind::Int || k == TypeExprKind::Chan ||
         k == TypeExprKind::Prod || k == TypeExprKind::Sum;
}

const char* constructor_name(TypeExprKind k) {
  switch (k) {
    case TypeExprKind::Int: return "int";
    case TypeExprKind::Chan: return "channel";
    case TypeExprKind::Prod: return "product";
    case TypeExprKind::Sum: return "sum";
    default: return "?";
  }
}

int tag_rank(TypeExprKind k) {
  switch (k) {
    case TypeExprKind::Int: return 0;
    case TypeExprKind::Chan: return 1;
    case TypeExprKind::Prod: return 2;
    case TypeExprKind::Sum: return 3;
    default: return 4;
  }
}

}  // namespace

struct SolveContext::Impl {
  TypeStore& store;
  VarSupply& supply;

  std::vector<TermData> terms;
  std::map<TermKey, TermId> intern_map;
  std::map<TypeVarId, TermId> var_term;

  std::vector<TermId> eq_parent, coh_parent;
  std::map<TermId, TermId> eq_wit, coh_wit;   // per root
  std::map<TermId, TypeId> ground_of;         // per eq root

  std::deque<Op> ops;
  std::set<std::pair<TermId, TermId>> eq_decomposed, coh_decomposed;

  std::vector<std::array<TermId, 3>> triples;
  std::set<std::array<TermId, 3>> triple_memo;  // decomposed, by eq roots

  std::vector<UseEquation> use_eqs;
  std::set<std::pair<UseExpr, UseExpr>> use_eq_seen;

  std::vector<Constraint> completion_adds;

  Impl(TypeStore& s, VarSupply& vs) : store(s), supply(vs) {}

  TermId find_eq(TermId t) {
    while (eq_parent[t] != t) {
      eq_parent[t] = eq_parent[eq_parent[t]];
      t = eq_parent[t];
    }
    return t;
  }

  TermId find_coh(TermId t) {
    while (coh_parent[t] != t) {
      coh_parent[t] = coh_parent[coh_parent[t]];
      t = coh_parent[t];
    }
    return t;
  }

  TermId find_eq_const(TermId t) const {
    while (eq_parent[t] != t) t = eq_parent[t];
    return t;
  }

  TermId find_coh_const(TermId t) const {
    while (coh_parent[t] != t) t = coh_parent[t];
    return t;
  }

  // Structural order picking the canonical representative: variables come
  // first ordered by index, then the concrete constructors ordered by tag
  // and recursively by their type children with uses ignored, and opaque
  // ground references come last. Ties break by interning order.
  int term_cmp(TermId x, TermId y) const {
    if (x == y) return 0;
    auto category = [&](TermId t) {
      TypeExprKind k = terms[t].kind;
      if (k == TypeExprKind::Var) return 0;
      if (k == TypeExprKind::Ground) return 2;
      return 1;
    };
    int cx = category(x), cy = category(y);
    if (cx != cy) return cx < cy ? -1 : 1;
    const TermData& dx = terms[x];
    const TermData& dy = terms[y];
    if (cx == 0) return dx.var < dy.var ? -1 : 1;
    if (cx == 2) return x < y ? -1 : 1;
    int rx = tag_rank(dx.kind), ry = tag_rank(dy.kind);
    if (rx != ry) return rx < ry ? -1 : 1;
    switch (dx.kind) {
      case TypeExprKind::Int:
        break;
      case TypeExprKind::Chan: {
        int c = term_cmp(dx.child0, dy.child0);
        if (c != 0) return c;
        break;
      }
      case TypeExprKind::Prod:
      case TypeExprKind::Sum: {
        int c = term_cmp(dx.child0, dy.child0);
        if (c != 0) return c;
        c = term_cmp(dx.child1, dy.child1);
        if (c != 0) return c;
        break;
      }
      default:
        break;
    }
    return x < y ? -1 : 1;
  }

  std::string render(TermId t) const {
    return render_type_expr(supply, store, terms[t].expr);
  }

  [[noreturn]] void clash(TermId a, TermId b) {
    throw Error(ErrorCode::Unsatisfiable,
                "type clash: " + render(a) + " ~ " + render(b) + " (" +
                    constructor_name(terms[a].kind) + " vs " +
                    constructor_name(terms[b].kind) + ")");
  }

  void record_use_eq(const UseExpr& u, const UseExpr& v) {
    if (u == v) return;
    auto key = u < v ? std::make_pair(u, v) : std::make_pair(v, u);
    if (use_eq_seen.insert(key).second) use_eqs.push_back(UseEquation{u, v});
  }

  TermId add_term(const TermKey& key, TermData data) {
    TermId id = static_cast<TermId>(terms.size());
    terms.push_back(std::move(data));
    intern_map.emplace(key, id);
    eq_parent.push_back(id);
    coh_parent.push_back(id);
    if (is_proper(terms[id].kind)) {
      eq_wit.emplace(id, id);
      coh_wit.emplace(id, id);
    }
    return id;
  }

  TermId intern(const TypeExprPtr& e) {
    switch (e->kind) {
      case TypeExprKind::Var: {
        TermKey key{};
        key.tag = 0;
        key.var = e->var;
        auto it = intern_map.find(key);
        if (it != intern_map.end()) return it->second;
        TermData d;
        d.kind = TypeExprKind::Var;
        d.var = e->var;
        d.expr = e;
        TermId id = add_term(key, std::move(d));
        var_term.emplace(e->var, id);
        return id;
      }
      case TypeExprKind::Int: {
        TermKey key{};
        key.tag = 1;
        auto it = intern_map.find(key);
        if (it != intern_map.end()) return it->second;
        TermData d;
        d.kind = TypeExprKind::Int;
        d.expr = e;
        return add_term(key, std::move(d));
      }
      case TypeExprKind::Chan: {
        TermId payload = intern(e->child0);
        TermKey key{};
        key.tag = 2;
        key.u = e->in_use;
        key.v = e->out_use;
        key.a = payload;
        auto it = intern_map.find(key);
        if (it != intern_map.end()) return it->second;
        TermData d;
        d.kind = TypeExprKind::Chan;
        d.in_use = e->in_use;
        d.out_use = e->out_use;
        d.child0 = payload;
        d.expr = e;
        return add_term(key, std::move(d));
      }
      case TypeExprKind::Prod:
      case TypeExprKind::Sum: {
        TermId a = intern(e->child0);
        TermId b = intern(e->child1);
        TermKey key{};
        key.tag = e->kind == TypeExprKind::Prod ? 3 : 4;
        key.a = a;
        key.b = b;
        auto it = intern_map.find(key);
        if (it != intern_map.end()) return it->second;
        TermData d;
        d.kind = e->kind;
        d.child0 = a;
        d.child1 = b;
        d.expr = e;
        return add_term(key, std::move(d));
      }
      case TypeExprKind::Ground: {
        TermKey key{};
        key.tag = 5;
        key.ground = e->ground;
        auto it = intern_map.find(key);
        if (it != intern_map.end()) return it->second;
        TermData d;
        d.kind = TypeExprKind::Ground;
        d.ground = e->ground;
        d.expr = e;
        TermId id = add_term(key, std::move(d));
        ground_of.emplace(id, e->ground);
        // A ground reference is transparent: it is equated with the one-step
        // unfolding of its node, which is a concrete term again.
        TermId expansion = expand_ground(e->ground);
        ops.push_back(Op{Op::EqUnion, id, expansion});
        return id;
      }
    }
    throw Error(ErrorCode::Internal, "intern: unknown type expression kind");
  }

  TermId expand_ground(TypeId g) {
    const TypeNode& node = store.node(g);
    switch (node.tag) {
      case TypeTag::Int:
        return intern(te_int());
      case TypeTag::Chan:
        return intern(te_chan(UseExpr::literal(node.in_use),
                              UseExpr::literal(node.out_use),
                              te_ground(node.a)));
      case TypeTag::Prod:
        return intern(te_prod(te_ground(node.a), te_ground(node.b)));
      case TypeTag::Sum:
        return intern(te_sum(te_ground(node.a), te_ground(node.b)));
    }
    throw Error(ErrorCode::Internal, "expand: unknown type node tag");
  }

  void merge_ground(TermId root, TermId old_a, TermId old_b) {
    auto ita = ground_of.find(old_a);
    auto itb = ground_of.find(old_b);
    std::optional<TypeId> g;
    if (ita != ground_of.end()) g = ita->second;
    if (!g && itb != ground_of.end()) g = itb->second;
    if (ita != ground_of.end()) ground_of.erase(ita);
    itb = ground_of.find(old_b);
    if (itb != ground_of.end()) ground_of.erase(itb);
    if (g) ground_of.emplace(root, *g);
  }

  void process(const Op& op) {
    switch (op.kind) {
      case Op::EqUnion: {
        TermId ra = find_eq(op.a), rb = find_eq(op.b);
        if (ra == rb) return;
        auto wa = eq_wit.find(ra), wb = eq_wit.find(rb);
        std::optional<TermId> va, vb;
        if (wa != eq_wit.end()) va = wa->second;
        if (wb != eq_wit.end()) vb = wb->second;
        TermId root = std::min(ra, rb), child = std::max(ra, rb);
        eq_parent[child] = root;
        eq_wit.erase(ra);
        eq_wit.erase(rb);
        if (va && vb) {
          auto pair = std::minmax(*va, *vb);
          if (eq_decomposed.insert(pair).second) {
            ops.push_back(Op{Op::EqDecomp, pair.first, pair.second});
          }
          eq_wit.emplace(root, term_cmp(*va, *vb) < 0 ? *va : *vb);
        } else if (va) {
          eq_wit.emplace(root, *va);
        } else if (vb) {
          eq_wit.emplace(root, *vb);
        }
        merge_ground(root, ra, rb);
        ops.push_back(Op{Op::CohUnion, op.a, op.b});
        return;
      }
      case Op::CohUnion: {
        TermId ra = find_coh(op.a), rb = find_coh(op.b);
        if (ra == rb) return;
        auto wa = coh_wit.find(ra), wb = coh_wit.find(rb);
        std::optional<TermId> va, vb;
        if (wa != coh_wit.end()) va = wa->second;
        if (wb != coh_wit.end()) vb = wb->second;
        TermId root = std::min(ra, rb), child = std::max(ra, rb);
        coh_parent[child] = root;
        coh_wit.erase(ra);
        coh_wit.erase(rb);
        if (va && vb) {
          auto pair = std::minmax(*va, *vb);
          if (coh_decomposed.insert(pair).second) {
            ops.push_back(Op{Op::CohDecomp, pair.first, pair.second});
          }
          coh_wit.emplace(root, term_cmp(*va, *vb) < 0 ? *va : *vb);
        } else if (va) {
          coh_wit.emplace(root, *va);
        } else if (vb) {
          coh_wit.emplace(root, *vb);
        }
        return;
      }
      case Op::EqDecomp: {
        const TermData& a = terms[op.a];
        const TermData& b = terms[op.b];
        if (a.kind != b.kind) clash(op.a, op.b);
        switch (a.kind) {
          case TypeExprKind::Int:
            return;
          case TypeExprKind::Chan:
            ops.push_back(Op{Op::EqUnion, a.child0, b.child0});
            record_use_eq(a.in_use, b.in_use);
            record_use_eq(a.out_use, b.out_use);
            return;
          case TypeExprKind::Prod:
          case TypeExprKind::Sum:
            ops.push_back(Op{Op::EqUnion, a.child0, b.child0});
            ops.push_back(Op{Op::EqUnion, a.child1, b.child1});
            return;
          default:
            throw Error(ErrorCode::Internal, "decompose: improper term");
        }
      }
      case Op::CohDecomp: {
        const TermData& a = terms[op.a];
        const TermData& b = terms[op.b];
        if (a.kind != b.kind) clash(op.a, op.b);
        switch (a.kind) {
          case TypeExprKind::Int:
            return;
          case TypeExprKind::Chan:
            // Related channels carry the same payload type; only their
            // uses may differ.
            ops.push_back(Op{Op::EqUnion, a.child0, b.child0});
            return;
          case TypeExprKind::Prod:
          case TypeExprKind::Sum:
            ops.push_back(Op{Op::CohUnion, a.child0, b.child0});
            ops.push_back(Op{Op::CohUnion, a.child1, b.child1});
            return;
          default:
            throw Error(ErrorCode::Internal, "decompose: improper term");
        }
      }
    }
  }

  void drain() {
    while (!ops.empty()) {
      Op op = ops.front();
      ops.pop_front();
      process(op);
    }
  }

  // Breaks combination triples over products and sums into component
  // triples once every element has a concrete definition.
  bool scan_triples() {
    bool progress = false;
    for (size_t i = 0; i < triples.size(); ++i) {
      std::array<TermId, 3> t = triples[i];
      std::array<TermId, 3> key{find_eq(t[0]), find_eq(t[1]), find_eq(t[2])};
      if (triple_memo.count(key)) continue;
      auto cw = coh_wit.find(find_coh(t[0]));
      if (cw == coh_wit.end()) continue;
      TypeExprKind shape = terms[cw->second].kind;
      if (shape != TypeExprKind::Prod && shape != TypeExprKind::Sum) continue;
      auto w0 = eq_wit.find(key[0]);
      auto w1 = eq_wit.find(key[1]);
      auto w2 = eq_wit.find(key[2]);
      if (w0 == eq_wit.end() || w1 == eq_wit.end() || w2 == eq_wit.end()) {
        continue;  // completion will provide the missing definitions
      }
      triple_memo.insert(key);
      const TermData& d0 = terms[w0->second];
      const TermData& d1 = terms[w1->second];
      const TermData& d2 = terms[w2->second];
      add_triple(d0.child0, d1.child0, d2.child0);
      add_triple(d0.child1, d1.child1, d2.child1);
      progress = true;
    }
    return progress;
  }

  void add_triple(TermId t, TermId a, TermId b) {
    ops.push_back(Op{Op::CohUnion, t, a});
    ops.push_back(Op{Op::CohUnion, t, b});
    triples.push_back({t, a, b});
  }

  void settle() {
    do {
      drain();
    } while (scan_triples());
  }
};

SolveContext::SolveContext(TypeStore& store, VarSupply& supply)
    : impl_(std::make_unique<Impl>(store, supply)) {}

SolveContext::~SolveContext() = default;

TypeStore& SolveContext::store() { return impl_->store; }
VarSupply& SolveContext::supply() { return impl_->supply; }

TermId SolveContext::intern(const TypeExprPtr& e) { return impl_->intern(e); }

std::optional<TermId> SolveContext::term_of_var(TypeVarId v) const {
  auto it = impl_->var_term.find(v);
  if (it == impl_->var_term.end()) return std::nullopt;
  return it->second;
}

TypeExprPtr SolveContext::expr_of_term(TermId t) const {
  return impl_->terms.at(t).expr;
}

std::string SolveContext::render_term(TermId t) const { return impl_->render(t); }

TermId SolveContext::eq_root(TermId t) const { return impl_->find_eq_const(t); }
TermId SolveContext::coh_root(TermId t) const { return impl_->find_coh_const(t); }

std::optional<TermId> SolveContext::eq_witness(TermId t) const {
  auto it = impl_->eq_wit.find(impl_->find_eq_const(t));
  if (it == impl_->eq_wit.end()) return std::nullopt;
  return it->second;
}

std::optional<TermId> SolveContext::coh_witness(TermId t) const {
  auto it = impl_->coh_wit.find(impl_->find_coh_const(t));
  if (it == impl_->coh_wit.end()) return std::nullopt;
  return it->second;
}

void SolveContext::add_constraint(const Constraint& c) {
  switch (c.kind) {
    case ConstraintKind::Eq: {
      TermId a = impl_->intern(c.a);
      TermId b = impl_->intern(c.b);
      impl_->ops.push_back(Op{Op::EqUnion, a, b});
      return;
    }
    case ConstraintKind::Coh: {
      TermId a = impl_->intern(c.a);
      TermId b = impl_->intern(c.b);
      impl_->ops.push_back(Op{Op::CohUnion, a, b});
      return;
    }
    case ConstraintKind::Comb: {
      TermId t = impl_->intern(c.a);
      TermId a = impl_->intern(c.b);
      TermId b = impl_->intern(c.c);
      impl_->add_triple(t, a, b);
      return;
    }
    case ConstraintKind::UseEq:
      impl_->record_use_eq(c.u, c.v);
      return;
  }
  throw Error(ErrorCode::Internal, "add_constraint: unknown constraint kind");
}

void SolveContext::settle() { impl_->settle(); }

std::vector<TypeVarId> SolveContext::all_vars() const {
  std::vector<TypeVarId> out;
  out.reserve(impl_->var_term.size());
  for (const auto& [v, t] : impl_->var_term) out.push_back(v);
  return out;
}

const std::vector<UseEquation>& SolveContext::recorded_use_equations() const {
  return impl_->use_eqs;
}

const std::vector<Constraint>& SolveContext::completion_additions() const {
  return impl_->completion_adds;
}

void SolveContext::dump_classes(std::ostream& os) const {
  std::map<TermId, std::vector<TypeVarId>> eq_groups, coh_groups;
  for (const auto& [v, t] : impl_->var_term) {
    eq_groups[impl_->find_eq_const(t)].push_back(v);
    coh_groups[impl_->find_coh_const(t)].push_back(v);
  }
  auto print = [&](const char* title,
                   const std::map<TermId, std::vector<TypeVarId>>& groups,
                   const std::map<TermId, TermId>& wits, const char* rel) {
    os << title << "\n";
    for (const auto& [root, vars] : groups) {
      os << "  {";
      for (size_t i = 0; i < vars.size(); ++i) {
        if (i) os << ", ";
        os << impl_->supply.type_var_name(vars[i]);
      }
      os << "}";
      auto w = wits.find(root);
      if (w != wits.end()) {
        os << " " << rel << " " << impl_->render(w->second);
      }
      os << "\n";
    }
  };
  print("equality classes:", eq_groups, impl_->eq_wit, "=");
  print("coherence classes:", coh_groups, impl_->coh_wit, "~");
  os << "combination triples:\n";
  for (const auto& t : impl_->triples) {
    os << "  " << impl_->render(t[0]) << " = " << impl_->render(t[1]) << " + "
       << impl_->render(t[2]) << "\n";
  }
}

/* pipeline phases */

void close(SolveContext& ctx, const std::vector<Constraint>& constraints) {
  for (const Constraint& c : constraints) ctx.add_constraint(c);
  ctx.settle();
}

VarClassification classify_variables(const SolveContext& ctx) {
  VarClassification out;
  for (TypeVarId v : ctx.all_vars()) {
    TermId t = *ctx.term_of_var(v);
    if (ctx.eq_witness(t)) {
      out.eq_defined.push_back(v);
    } else if (ctx.coh_witness(t)) {
      out.coh_defined_only.push_back(v);
    } else {
      out.undefined.push_back(v);
    }
  }
  return out;
}

void default_undefined_to_int(SolveContext& ctx) {
  auto& impl = ctx.impl();
  std::vector<TermId> targets;
  for (const auto& [v, t] : impl.var_term) {
    if (!ctx.coh_witness(t)) targets.push_back(t);
  }
  if (targets.empty()) return;
  TermId int_term = impl.intern(te_int());
  for (TermId t : targets) {
    impl.ops.push_back(Op{Op::EqUnion, t, int_term});
  }
  impl.settle();
}

namespace {

// Fresh-use instantiation of a canonical representative: type variables map
// to instantiation variables of the completed variable, channels get fresh
// uses with their payload kept verbatim, and ground references are unfolded
// with fresh uses as well.
struct Instantiator {
  SolveContext::Impl& impl;
  std::deque<std::pair<TypeVarId, TypeVarId>>& work;
  TypeVarId outer;

  TypeVarId mint(TypeVarId inner) {
    size_t before = impl.supply.type_var_count();
    TypeVarId v = impl.supply.inst_var(outer, inner);
    if (impl.supply.type_var_count() != before) work.emplace_back(outer, inner);
    return v;
  }

  TypeExprPtr run(TermId t) {
    const TermData& d = impl.terms[t];
    switch (d.kind) {
      case TypeExprKind::Var:
        return te_var(mint(d.var));
      case TypeExprKind::Int:
        return te_int();
      case TypeExprKind::Chan:
        return te_chan(UseExpr::var(impl.supply.fresh_use_var()),
                       UseExpr::var(impl.supply.fresh_use_var()),
                       impl.terms[d.child0].expr);
      case TypeExprKind::Prod:
        return te_prod(run(d.child0), run(d.child1));
      case TypeExprKind::Sum:
        return te_sum(run(d.child0), run(d.child1));
      case TypeExprKind::Ground: {
        std::set<TypeId> spine;
        return run_ground(d.ground, spine);
      }
    }
    throw Error(ErrorCode::Internal, "instantiate: unknown term kind");
  }

  TypeExprPtr run_ground(TypeId g, std::set<TypeId>& spine) {
    if (!spine.insert(g).second) {
      throw Error(ErrorCode::UnsupportedGround,
                  "type has a product or sum cycle with no intervening "
                  "channel: " +
                      render_type(impl.store, g));
    }
    const TypeNode& node = impl.store.node(g);
    TypeExprPtr out;
    switch (node.tag) {
      case TypeTag::Int:
        out = te_int();
        break;
      case TypeTag::Chan:
        out = te_chan(UseExpr::var(impl.supply.fresh_use_var()),
                      UseExpr::var(impl.supply.fresh_use_var()),
                      te_ground(node.a));
        break;
      case TypeTag::Prod:
        out = te_prod(run_ground(node.a, spine), run_ground(node.b, spine));
        break;
      case TypeTag::Sum:
        out = te_sum(run_ground(node.a, spine), run_ground(node.b, spine));
        break;
    }
    spine.erase(g);
    return out;
  }
};

}  // namespace

void complete(SolveContext& ctx) {
  auto& impl = ctx.impl();

  // Freeze one defining representative per variable before anything new is
  // added, so later additions cannot change the instantiation sources.
  std::map<TypeVarId, TermId> frozen;
  std::vector<TypeVarId> targets;
  for (const auto& [v, t] : impl.var_term) {
    auto ew = ctx.eq_witness(t);
    auto cw = ctx.coh_witness(t);
    if (ew) {
      frozen.emplace(v, *ew);
    } else if (cw) {
      frozen.emplace(v, *cw);
      targets.push_back(v);
    } else {
      throw Error(ErrorCode::Internal,
                  "completion ran before defaulting: variable " +
                      impl.supply.type_var_name(v) + " has no shape");
    }
  }

  std::deque<std::pair<TypeVarId, TypeVarId>> work;
  auto push_addition = [&](const Constraint& c) {
    ctx.add_constraint(c);
    impl.completion_adds.push_back(c);
  };

  for (TypeVarId v : targets) {
    Instantiator inst{impl, work, v};
    TypeVarId self = inst.mint(v);
    push_addition(make_eq(te_var(v), te_var(self)));
  }
  while (!work.empty()) {
    auto [outer, inner] = work.front();
    work.pop_front();
    Instantiator inst{impl, work, outer};
    TypeExprPtr rhs = inst.run(frozen.at(inner));
    push_addition(make_eq(te_var(impl.supply.inst_var(outer, inner)), rhs));
  }
  impl.settle();
}

std::vector<UseEquation> extract_use_constraints(SolveContext& ctx) {
  auto& impl = ctx.impl();
  std::vector<UseEquation> out = impl.use_eqs;
  std::set<std::pair<UseExpr, UseExpr>> seen = impl.use_eq_seen;
  auto add = [&](const UseExpr& u, const UseExpr& v) {
    if (u == v) return;
    auto key = u < v ? std::make_pair(u, v) : std::make_pair(v, u);
    if (seen.insert(key).second) out.push_back(UseEquation{u, v});
  };
  std::set<std::array<TermId, 3>> visited;
  for (const auto& t : impl.triples) {
    std::array<TermId, 3> key{impl.find_eq(t[0]), impl.find_eq(t[1]),
                              impl.find_eq(t[2])};
    if (!visited.insert(key).second) continue;
    auto w0 = impl.eq_wit.find(key[0]);
    auto w1 = impl.eq_wit.find(key[1]);
    auto w2 = impl.eq_wit.find(key[2]);
    if (w0 == impl.eq_wit.end() || w1 == impl.eq_wit.end() ||
        w2 == impl.eq_wit.end()) {
      throw Error(ErrorCode::Internal,
                  "use extraction before every class was defined");
    }
    const TermData& d0 = impl.terms[w0->second];
    if (d0.kind != TypeExprKind::Chan) continue;  // products were broken up
    const TermData& d1 = impl.terms[w1->second];
    const TermData& d2 = impl.terms[w2->second];
    add(d0.in_use, use_expr_add(d1.in_use, d2.in_use));
    add(d0.out_use, use_expr_add(d1.out_use, d2.out_use));
  }
  return out;
}

/* use systems */

std::vector<UsePartition> partition_uses(const std::vector<UseEquation>& eqs) {
  std::map<UseVarId, UseVarId> parent;
  std::function<UseVarId(UseVarId)> find = [&](UseVarId v) {
    auto it = parent.find(v);
    if (it == parent.end() || it->second == v) return v;
    UseVarId r = find(it->second);
    parent[v] = r;
    return r;
  };
  auto unite = [&](UseVarId a, UseVarId b) {
    UseVarId ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  };

  std::vector<std::vector<UseVarId>> eq_vars(eqs.size());
  std::vector<UseEquation> literal_only;
  for (size_t i = 0; i < eqs.size(); ++i) {
    std::vector<UseVarId>& vars = eq_vars[i];
    for (const auto& [v, m] : eqs[i].lhs.terms) vars.push_back(v);
    for (const auto& [v, m] : eqs[i].rhs.terms) vars.push_back(v);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    if (vars.empty()) {
      literal_only.push_back(eqs[i]);
      continue;
    }
    parent.emplace(vars[0], vars[0]);
    for (size_t k = 1; k < vars.size(); ++k) {
      parent.emplace(vars[k], vars[k]);
      unite(vars[0], vars[k]);
    }
  }

  std::map<UseVarId, size_t> index;  // partition root -> output slot
  std::vector<UsePartition> out;
  if (!literal_only.empty()) {
    UsePartition p;
    p.equations = std::move(literal_only);
    out.push_back(std::move(p));
  }
  std::set<UseVarId> vars_seen;
  for (size_t i = 0; i < eqs.size(); ++i) {
    if (eq_vars[i].empty()) continue;
    UseVarId root = find(eq_vars[i][0]);
    auto it = index.find(root);
    if (it == index.end()) {
      it = index.emplace(root, out.size()).first;
      out.emplace_back();
    }
    UsePartition& p = out[it->second];
    p.equations.push_back(eqs[i]);
    for (UseVarId v : eq_vars[i]) {
      if (vars_seen.insert(v).second) p.vars.push_back(v);
    }
  }
  for (UsePartition& p : out) std::sort(p.vars.begin(), p.vars.end());
  return out;
}

EliminationResult eliminate_determined(const UsePartition& partition) {
  EliminationResult result;
  std::vector<UseEquation> eqs = partition.equations;
  std::vector<bool> alive(eqs.size(), true);

  bool progress = true;
  while (progress) {
    progress = false;
    for (size_t i = 0; i < eqs.size(); ++i) {
      if (!alive[i]) continue;
      if (eqs[i].lhs == eqs[i].rhs) {
        alive[i] = false;
        continue;
      }
      std::optional<UseVarId> var;
      UseExpr replacement;
      if (eqs[i].lhs.is_bare_var() &&
          !eqs[i].rhs.mentions(eqs[i].lhs.terms[0].first)) {
        var = eqs[i].lhs.terms[0].first;
        replacement = eqs[i].rhs;
      } else if (eqs[i].rhs.is_bare_var() &&
                 !eqs[i].lhs.mentions(eqs[i].rhs.terms[0].first)) {
        var = eqs[i].rhs.terms[0].first;
        replacement = eqs[i].lhs;
      }
      if (!var) continue;
      alive[i] = false;
      result.steps.push_back(EliminationStep{*var, replacement});
      for (size_t k = 0; k < eqs.size(); ++k) {
        if (!alive[k]) continue;
        eqs[k].lhs = use_expr_subst(eqs[k].lhs, *var, replacement);
        eqs[k].rhs = use_expr_subst(eqs[k].rhs, *var, replacement);
      }
      progress = true;
      break;
    }
  }

  std::set<UseVarId> vars;
  for (size_t i = 0; i < eqs.size(); ++i) {
    if (!alive[i]) continue;
    result.residual.push_back(eqs[i]);
    for (const auto& [v, m] : eqs[i].lhs.terms) vars.insert(v);
    for (const auto& [v, m] : eqs[i].rhs.terms) vars.insert(v);
  }
  result.residual_vars.assign(vars.begin(), vars.end());
  return result;
}

namespace {

const Use kUseByRank[3] = {Use::Zero, Use::One, Use::Omega};

struct RankSearch {
  const std::vector<UseVarId>& vars;
  const std::vector<UseEquation>& eqs;
  std::map<UseVarId, size_t> position;
  std::vector<std::vector<size_t>> bucket;  // by last variable position
  std::vector<size_t> varless;
  std::vector<Use> values;

  RankSearch(const std::vector<UseVarId>& vs, const std::vector<UseEquation>& es)
      : vars(vs), eqs(es), bucket(vs.size()), values(vs.size(), Use::Zero) {
    for (size_t i = 0; i < vars.size(); ++i) position[vars[i]] = i;
    for (size_t i = 0; i < eqs.size(); ++i) {
      size_t last = 0;
      bool any = false;
      auto scan = [&](const UseExpr& e) {
        for (const auto& [v, m] : e.terms) {
          any = true;
          last = std::max(last, position.at(v));
        }
      };
      scan(eqs[i].lhs);
      scan(eqs[i].rhs);
      if (any) {
        bucket[last].push_back(i);
      } else {
        varless.push_back(i);
      }
    }
  }

  bool holds(size_t eq) const {
    auto value = [&](UseVarId v) { return values[position.at(v)]; };
    return eval_use_expr(eqs[eq].lhs, value) ==
           eval_use_expr(eqs[eq].rhs, value);
  }

  bool varless_hold() const {
    for (size_t i : varless) {
      if (!holds(i)) return false;
    }
    return true;
  }

  bool dfs(size_t i, int remaining) {
    if (i == vars.size()) return remaining == 0;
    for (int r = 0; r < 3; ++r) {
      if (r > remaining) break;
      if (remaining - r > 2 * static_cast<int>(vars.size() - i - 1)) continue;
      values[i] = kUseByRank[r];
      bool ok = true;
      for (size_t eq : bucket[i]) {
        if (!holds(eq)) {
          ok = false;
          break;
        }
      }
      if (ok && dfs(i + 1, remaining - r)) return true;
    }
    return false;
  }

  bool all_omega() {
    std::fill(values.begin(), values.end(), Use::Omega);
    if (!varless_hold()) return false;
    for (size_t i = 0; i < bucket.size(); ++i) {
      for (size_t eq : bucket[i]) {
        if (!holds(eq)) return false;
      }
    }
    return true;
  }
};

}  // namespace

PartitionSolution solve_uses(const UsePartition& partition,
                             const SolveOptions& options) {
  EliminationResult elim = eliminate_determined(partition);
  PartitionSolution out;
  out.residual_vars = elim.residual_vars;
  out.residual_equations = elim.residual;

  RankSearch search(elim.residual_vars, elim.residual);
  if (!search.varless_hold()) {
    throw Error(ErrorCode::NoSolution,
                "conflicting literal uses in the constraint system");
  }

  int n = static_cast<int>(elim.residual_vars.size());
  if (n > 0) {
    bool found = false;
    if (options.force_omega_uses) {
      found = search.all_omega();
      if (found) {
        out.residual_rank = 2 * n;
        out.used_omega_fallback = true;
      }
    } else if (n > options.residual_limit) {
      if (!options.omega_fallback) {
        throw Error(ErrorCode::SearchSpace,
                    "residual use system has " + std::to_string(n) +
                        " variables, above the search limit of " +
                        std::to_string(options.residual_limit));
      }
      found = search.all_omega();
      if (found) {
        out.residual_rank = 2 * n;
        out.used_omega_fallback = true;
      }
    } else {
      for (int rank = 0; rank <= 2 * n && !found; ++rank) {
        if (search.dfs(0, rank)) {
          found = true;
          out.residual_rank = rank;
        }
      }
    }
    if (!found) {
      throw Error(ErrorCode::NoSolution,
                  "no use assignment satisfies the constraints (" +
                      std::to_string(n) + " residual variables)");
    }
    for (int i = 0; i < n; ++i) {
      out.assignment[elim.residual_vars[i]] = search.values[i];
    }
  }

  // Partition variables that survive in no residual equation are genuinely
  // unconstrained; give them the least use (or omega when everything is
  // being forced to omega) before back-substitution.
  Use unconstrained =
      (options.force_omega_uses || out.used_omega_fallback) ? Use::Omega
                                                            : Use::Zero;
  std::set<UseVarId> eliminated;
  for (const EliminationStep& s : elim.steps) eliminated.insert(s.var);
  for (UseVarId v : partition.vars) {
    if (!eliminated.count(v)) out.assignment.emplace(v, unconstrained);
  }

  for (auto it = elim.steps.rbegin(); it != elim.steps.rend(); ++it) {
    Use value = eval_use_expr(
        it->replacement, [&](UseVarId v) { return out.assignment.at(v); });
    out.assignment[it->var] = value;
  }
  return out;
}

/* synthesis */

GroundSubstitution synthesize(SolveContext& ctx,
                              const std::map<UseVarId, Use>& uses) {
  auto& impl = ctx.impl();
  GroundSubstitution subst;
  for (UseVarId v = 0; v < impl.supply.use_var_count(); ++v) {
    auto it = uses.find(v);
    subst.use_bindings[v] = it == uses.end() ? Use::Zero : it->second;
  }
  auto value = [&](UseVarId v) { return subst.use_bindings.at(v); };

  std::map<TermId, TypeId> built;  // keyed by equality root
  std::function<TypeId(TermId)> build = [&](TermId root) -> TypeId {
    auto hit = built.find(root);
    if (hit != built.end()) return hit->second;
    auto g = impl.ground_of.find(root);
    if (g != impl.ground_of.end()) {
      built.emplace(root, g->second);
      return g->second;
    }
    auto w = impl.eq_wit.find(root);
    if (w == impl.eq_wit.end()) {
      throw Error(ErrorCode::Internal, "synthesis: class without definition");
    }
    const TermData& d = impl.terms[w->second];
    switch (d.kind) {
      case TypeExprKind::Int: {
        TypeId id = impl.store.intern_int();
        built.emplace(root, id);
        return id;
      }
      case TypeExprKind::Chan: {
        TypeId ph = impl.store.allocate();
        built.emplace(root, ph);
        TypeId payload = build(impl.find_eq(d.child0));
        impl.store.fill_chan(ph, eval_use_expr(d.in_use, value),
                             eval_use_expr(d.out_use, value), payload);
        return ph;
      }
      case TypeExprKind::Prod:
      case TypeExprKind::Sum: {
        TypeId ph = impl.store.allocate();
        built.emplace(root, ph);
        TypeId a = build(impl.find_eq(d.child0));
        TypeId b = build(impl.find_eq(d.child1));
        if (d.kind == TypeExprKind::Prod) {
          impl.store.fill_prod(ph, a, b);
        } else {
          impl.store.fill_sum(ph, a, b);
        }
        return ph;
      }
      default:
        throw Error(ErrorCode::Internal, "synthesis: improper definition");
    }
  };

  for (const auto& [v, t] : impl.var_term) {
    subst.type_bindings[v] = build(impl.find_eq(t));
  }
  return subst;
}

/* the full pipeline */

SolveResult solve(TypeStore& store, VarSupply& supply,
                  const std::vector<Constraint>& constraints,
                  const SolveOptions& options) {
  SolveResult result;
  result.context = std::make_shared<SolveContext>(store, supply);
  SolveContext& ctx = *result.context;

  close(ctx, constraints);
  default_undefined_to_int(ctx);
  complete(ctx);
  if (options.dump_level >= 1 && options.dump_stream) {
    ctx.dump_classes(*options.dump_stream);
  }

  result.completion_additions = ctx.completion_additions();
  result.use_equations = extract_use_constraints(ctx);
  result.partitions = partition_uses(result.use_equations);

  std::map<UseVarId, Use> merged;
  for (const UsePartition& p : result.partitions) {
    PartitionSolution s = solve_uses(p, options);
    merged.insert(s.assignment.begin(), s.assignment.end());
    result.partition_solutions.push_back(std::move(s));
  }
  if (options.dump_level >= 2 && options.dump_stream) {
    std::ostream& os = *options.dump_stream;
    os << "use equations:\n";
    for (const UseEquation& e : result.use_equations) {
      os << "  " << render_use_expr(supply, e.lhs) << " = "
         << render_use_expr(supply, e.rhs) << "\n";
    }
    for (size_t i = 0; i < result.partitions.size(); ++i) {
      os << "partition " << i << ": {";
      const UsePartition& p = result.partitions[i];
      for (size_t k = 0; k < p.vars.size(); ++k) {
        if (k) os << ", ";
        os << supply.use_var_name(p.vars[k]);
      }
      os << "} rank " << result.partition_solutions[i].residual_rank << "\n";
      for (const auto& [v, u] : result.partition_solutions[i].assignment) {
        os << "  " << supply.use_var_name(v) << " = " << render_use(u) << "\n";
      }
    }
  }

  result.subst = synthesize(ctx, merged);
  if (!verify_solution(store, constraints, result.subst)) {
    throw Error(ErrorCode::Internal,
                "reconstruction produced a substitution that fails its own "
                "constraints");
  }
  return result;
}

}  // namespace linpi
