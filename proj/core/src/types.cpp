#include "linpi/types.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace linpi {

Use use_add(Use a, Use b) {
  if (a == Use::Zero) return b;
  if (b == Use::Zero) return a;
  return Use::Omega;
}

std::string render_use(Use u) {
  switch (u) {
    case Use::Zero: return "0";
    case Use::One: return "1";
    case Use::Omega: return "w";
  }
  return "?";
}

/* term constructors for equation systems */

static TypeTermPtr tt_node(TypeTermKind kind) {
  auto t = std::make_shared<TypeTerm>();
  t->kind = kind;
  return t;
}

TypeTermPtr tt_int() { return tt_node(TypeTermKind::Int); }

TypeTermPtr tt_chan(Use in_use, Use out_use, TypeTermPtr payload) {
  auto t = tt_node(TypeTermKind::Chan);
  auto m = std::const_pointer_cast<TypeTerm>(t);
  m->in_use = in_use;
  m->out_use = out_use;
  m->a = std::move(payload);
  return t;
}

TypeTermPtr tt_prod(TypeTermPtr a, TypeTermPtr b) {
  auto t = tt_node(TypeTermKind::Prod);
  auto m = std::const_pointer_cast<TypeTerm>(t);
  m->a = std::move(a);
  m->b = std::move(b);
  return t;
}

TypeTermPtr tt_sum(TypeTermPtr a, TypeTermPtr b) {
  auto t = tt_node(TypeTermKind::Sum);
  auto m = std::const_pointer_cast<TypeTerm>(t);
  m->a = std::move(a);
  m->b = std::move(b);
  return t;
}

TypeTermPtr tt_ref(std::string name) {
  auto t = tt_node(TypeTermKind::Ref);
  std::const_pointer_cast<TypeTerm>(t)->ref = std::move(name);
  return t;
}

TypeTermPtr tt_ground(TypeId id) {
  auto t = tt_node(TypeTermKind::Ground);
  std::const_pointer_cast<TypeTerm>(t)->ground = id;
  return t;
}

/* store */

TypeId TypeStore::intern_int() {
  auto key = std::make_tuple(TypeTag::Int, Use::Zero, Use::Zero, TypeId{0}, TypeId{0});
  auto it = intern_.find(key);
  if (it != intern_.end()) return it->second;
  TypeId id = static_cast<TypeId>(nodes_.size());
  nodes_.push_back(TypeNode{TypeTag::Int, Use::Zero, Use::Zero, 0, 0});
  intern_[key] = id;
  return id;
}

TypeId TypeStore::intern_chan(Use in_use, Use out_use, TypeId payload) {
  auto key = std::make_tuple(TypeTag::Chan, in_use, out_use, payload, TypeId{0});
  auto it = intern_.find(key);
  if (it != intern_.end()) return it->second;
  TypeId id = static_cast<TypeId>(nodes_.size());
  nodes_.push_back(TypeNode{TypeTag::Chan, in_use, out_use, payload, 0});
  intern_[key] = id;
  return id;
}

TypeId TypeStore::intern_prod(TypeId a, TypeId b) {
  auto key = std::make_tuple(TypeTag::Prod, Use::Zero, Use::Zero, a, b);
  auto it = intern_.find(key);
  if (it != intern_.end()) return it->second;
  TypeId id = static_cast<TypeId>(nodes_.size());
  nodes_.push_back(TypeNode{TypeTag::Prod, Use::Zero, Use::Zero, a, b});
  intern_[key] = id;
  return id;
}

TypeId TypeStore::intern_sum(TypeId a, TypeId b) {
  auto key = std::make_tuple(TypeTag::Sum, Use::Zero, Use::Zero, a, b);
  auto it = intern_.find(key);
  if (it != intern_.end()) return it->second;
  TypeId id = static_cast<TypeId>(nodes_.size());
  nodes_.push_back(TypeNode{TypeTag::Sum, Use::Zero, Use::Zero, a, b});
  intern_[key] = id;
  return id;
}

TypeId TypeStore::allocate() {
  TypeId id = static_cast<TypeId>(nodes_.size());
  nodes_.push_back(TypeNode{});
  return id;
}

void TypeStore::fill_int(TypeId id) { nodes_[id] = TypeNode{TypeTag::Int, Use::Zero, Use::Zero, 0, 0}; }

void TypeStore::fill_chan(TypeId id, Use in_use, Use out_use, TypeId payload) {
  nodes_[id] = TypeNode{TypeTag::Chan, in_use, out_use, payload, 0};
}

void TypeStore::fill_prod(TypeId id, TypeId a, TypeId b) {
  nodes_[id] = TypeNode{TypeTag::Prod, Use::Zero, Use::Zero, a, b};
}

void TypeStore::fill_sum(TypeId id, TypeId a, TypeId b) {
  nodes_[id] = TypeNode{TypeTag::Sum, Use::Zero, Use::Zero, a, b};
}

const TypeNode& TypeStore::node(TypeId id) const {
  if (id >= nodes_.size()) {
    throw Error(ErrorCode::Internal, "type id out of range");
  }
  return nodes_[id];
}

/* make_type */

namespace {

void check_refs_bound(const TypeTermPtr& term,
                      const std::map<std::string, TypeId>& bound) {
  switch (term->kind) {
    case TypeTermKind::Ref:
      if (!bound.count(term->ref)) {
        throw Error(ErrorCode::IllFormedSystem,
                    "equation system references unbound name '" + term->ref + "'");
      }
      return;
    case TypeTermKind::Chan:
      check_refs_bound(term->a, bound);
      return;
    case TypeTermKind::Prod:
    case TypeTermKind::Sum:
      check_refs_bound(term->a, bound);
      check_refs_bound(term->b, bound);
      return;
    default:
      return;
  }
}

TypeId build_term(TypeStore& store, const TypeTermPtr& term,
                  const std::map<std::string, TypeId>& bound) {
  switch (term->kind) {
    case TypeTermKind::Int:
      return store.intern_int();
    case TypeTermKind::Chan:
      return store.intern_chan(term->in_use, term->out_use,
                               build_term(store, term->a, bound));
    case TypeTermKind::Prod:
      return store.intern_prod(build_term(store, term->a, bound),
                               build_term(store, term->b, bound));
    case TypeTermKind::Sum:
      return store.intern_sum(build_term(store, term->a, bound),
                              build_term(store, term->b, bound));
    case TypeTermKind::Ref:
      return bound.at(term->ref);
    case TypeTermKind::Ground:
      return term->ground;
  }
  throw Error(ErrorCode::Internal, "build_term: unknown term kind");
}

}  // namespace

TypeId make_type(TypeStore& store, const std::vector<TypeEquation>& system) {
  if (system.empty()) {
    throw Error(ErrorCode::IllFormedSystem, "empty equation system");
  }
  std::map<std::string, TypeId> bound;
  for (const TypeEquation& eq : system) {
    if (eq.rhs->kind == TypeTermKind::Ref) {
      throw Error(ErrorCode::IllFormedSystem,
                  "right-hand side of '" + eq.name + "' is a bare unknown");
    }
    if (bound.count(eq.name)) {
      throw Error(ErrorCode::IllFormedSystem,
                  "duplicate equation for '" + eq.name + "'");
    }
    bound[eq.name] = store.allocate();
  }
  for (const TypeEquation& eq : system) check_refs_bound(eq.rhs, bound);

  for (const TypeEquation& eq : system) {
    TypeId id = bound[eq.name];
    const TypeTermPtr& rhs = eq.rhs;
    switch (rhs->kind) {
      case TypeTermKind::Int:
        store.fill_int(id);
        break;
      case TypeTermKind::Chan:
        store.fill_chan(id, rhs->in_use, rhs->out_use,
                        build_term(store, rhs->a, bound));
        break;
      case TypeTermKind::Prod:
        store.fill_prod(id, build_term(store, rhs->a, bound),
                        build_term(store, rhs->b, bound));
        break;
      case TypeTermKind::Sum:
        store.fill_sum(id, build_term(store, rhs->a, bound),
                       build_term(store, rhs->b, bound));
        break;
      case TypeTermKind::Ground: {
        const TypeNode g = store.node(rhs->ground);
        switch (g.tag) {
          case TypeTag::Int: store.fill_int(id); break;
          case TypeTag::Chan: store.fill_chan(id, g.in_use, g.out_use, g.a); break;
          case TypeTag::Prod: store.fill_prod(id, g.a, g.b); break;
          case TypeTag::Sum: store.fill_sum(id, g.a, g.b); break;
        }
        break;
      }
      case TypeTermKind::Ref:
        break;  // rejected above
    }
  }
  return bound[system.front().name];
}

/* bisimulation equality */

namespace {

bool equal_rec(TypeStore& store, TypeId a, TypeId b,
               std::map<std::pair<TypeId, TypeId>, bool>& memo,
               std::set<std::pair<TypeId, TypeId>>& assumed) {
  if (a == b) return true;
  auto key = std::minmax(a, b);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  if (assumed.count(key)) return true;
  assumed.insert(key);
  const TypeNode& na = store.node(a);
  const TypeNode& nb = store.node(b);
  if (na.tag != nb.tag) return false;
  switch (na.tag) {
    case TypeTag::Int:
      return true;
    case TypeTag::Chan:
      return na.in_use == nb.in_use && na.out_use == nb.out_use &&
             equal_rec(store, na.a, nb.a, memo, assumed);
    case TypeTag::Prod:
    case TypeTag::Sum:
      return equal_rec(store, na.a, nb.a, memo, assumed) &&
             equal_rec(store, na.b, nb.b, memo, assumed);
  }
  return false;
}

}  // namespace

bool type_equal(TypeStore& store, TypeId a, TypeId b) {
  if (a == b) return true;
  auto key = std::minmax(a, b);
  auto it = store.equal_memo_.find(key);
  if (it != store.equal_memo_.end()) return it->second;
  std::set<std::pair<TypeId, TypeId>> assumed;
  bool ok = equal_rec(store, a, b, store.equal_memo_, assumed);
  if (ok) {
    // Every visited pair participates in the bisimulation just found.
    for (const auto& pr : assumed) store.equal_memo_[pr] = true;
  } else {
    store.equal_memo_[key] = false;
  }
  return ok;
}

/* combination */

namespace {

bool can_combine_rec(TypeStore& store, TypeId a, TypeId b,
                     std::set<std::pair<TypeId, TypeId>>& assumed) {
  auto key = std::minmax(a, b);
  if (assumed.count(key)) return true;
  assumed.insert(key);
  const TypeNode& na = store.node(a);
  const TypeNode& nb = store.node(b);
  if (na.tag != nb.tag) return false;
  switch (na.tag) {
    case TypeTag::Int:
      return true;
    case TypeTag::Chan:
      return type_equal(store, na.a, nb.a);
    case TypeTag::Prod:
    case TypeTag::Sum:
      return can_combine_rec(store, na.a, nb.a, assumed) &&
             can_combine_rec(store, na.b, nb.b, assumed);
  }
  return false;
}

TypeId build_combine(TypeStore& store, TypeId a, TypeId b,
                     std::map<std::pair<TypeId, TypeId>, TypeId>& building) {
  auto key = std::make_pair(a, b);
  auto it = building.find(key);
  if (it != building.end()) return it->second;
  const TypeNode na = store.node(a);
  const TypeNode nb = store.node(b);
  switch (na.tag) {
    case TypeTag::Int:
      return store.intern_int();
    case TypeTag::Chan:
      return store.intern_chan(use_add(na.in_use, nb.in_use),
                               use_add(na.out_use, nb.out_use), na.a);
    case TypeTag::Prod: {
      TypeId id = store.allocate();
      building[key] = id;
      store.fill_prod(id, build_combine(store, na.a, nb.a, building),
                      build_combine(store, na.b, nb.b, building));
      return id;
    }
    case TypeTag::Sum: {
      TypeId id = store.allocate();
      building[key] = id;
      store.fill_sum(id, build_combine(store, na.a, nb.a, building),
                     build_combine(store, na.b, nb.b, building));
      return id;
    }
  }
  throw Error(ErrorCode::Internal, "build_combine: unknown tag");
}

}  // namespace

std::optional<TypeId> type_combine(TypeStore& store, TypeId a, TypeId b) {
  auto key = std::make_pair(a, b);
  auto it = store.combine_memo_.find(key);
  if (it != store.combine_memo_.end()) return it->second;
  std::set<std::pair<TypeId, TypeId>> assumed;
  std::optional<TypeId> result;
  if (can_combine_rec(store, a, b, assumed)) {
    std::map<std::pair<TypeId, TypeId>, TypeId> building;
    result = build_combine(store, a, b, building);
  }
  store.combine_memo_[key] = result;
  return result;
}

bool coherent(TypeStore& store, TypeId a, TypeId b) {
  return type_combine(store, a, b).has_value();
}

bool is_unlimited(TypeStore& store, TypeId t) {
  auto it = store.unlimited_memo_.find(t);
  if (it != store.unlimited_memo_.end()) return it->second;
  auto doubled = type_combine(store, t, t);
  bool result = doubled.has_value() && type_equal(store, *doubled, t);
  store.unlimited_memo_[t] = result;
  return result;
}

/* environments */

Env env_combine(TypeStore& store, const Env& a, const Env& b) {
  Env out = a;
  for (const auto& [name, type] : b) {
    auto it = out.find(name);
    if (it == out.end()) {
      out[name] = type;
      continue;
    }
    auto combined = type_combine(store, it->second, type);
    if (!combined) {
      throw Error(ErrorCode::UndefinedCombination,
                  "environment combination undefined at '" + name + "': " +
                      render_type(store, it->second) + " + " +
                      render_type(store, type));
    }
    it->second = *combined;
  }
  return out;
}

Env env_reduce(TypeStore& store, const Env& env, const std::string& channel) {
  auto it = env.find(channel);
  if (it == env.end()) {
    throw Error(ErrorCode::MissingChannel,
                "environment has no entry for '" + channel + "'");
  }
  const TypeNode& n = store.node(it->second);
  if (n.tag != TypeTag::Chan) {
    throw Error(ErrorCode::InsufficientUse,
                "'" + channel + "' is not a channel: " + render_type(store, it->second));
  }
  if (n.in_use == Use::Zero || n.out_use == Use::Zero) {
    throw Error(ErrorCode::InsufficientUse,
                "'" + channel + "' lacks an input or output use: " +
                    render_type(store, it->second));
  }
  auto dec = [](Use u) { return u == Use::Omega ? Use::Omega : Use::Zero; };
  Env out = env;
  out[channel] = store.intern_chan(dec(n.in_use), dec(n.out_use), n.a);
  return out;
}

/* rendering */

namespace {

struct TypeRenderer {
  const TypeStore& store;
  std::set<TypeId> rec_targets;
  std::map<TypeId, std::string> binder_names;
  std::set<TypeId> open;  // nodes whose rec body is being rendered
  int next_name = 0;

  void find_targets(TypeId id, std::set<TypeId>& on_stack, std::set<TypeId>& done) {
    if (on_stack.count(id)) {
      rec_targets.insert(id);
      return;
    }
    if (done.count(id)) return;
    on_stack.insert(id);
    const TypeNode& n = store.node(id);
    switch (n.tag) {
      case TypeTag::Int:
        break;
      case TypeTag::Chan:
        find_targets(n.a, on_stack, done);
        break;
      case TypeTag::Prod:
      case TypeTag::Sum:
        find_targets(n.a, on_stack, done);
        find_targets(n.b, on_stack, done);
        break;
    }
    on_stack.erase(id);
    done.insert(id);
  }

  std::string binder_for(TypeId id) {
    auto it = binder_names.find(id);
    if (it != binder_names.end()) return it->second;
    static const char* bases[] = {"X", "Y", "Z"};
    int idx = next_name++;
    std::string name = bases[idx % 3];
    if (idx >= 3) name += std::to_string(idx / 3);
    binder_names[id] = name;
    return name;
  }

  // Levels: rec 0, sum 1, prod 2, atoms 3. A node below the context level
  // is parenthesized.
  void render(TypeId id, int min_level, std::string& out) {
    if (rec_targets.count(id)) {
      if (open.count(id)) {
        out += binder_for(id);
        return;
      }
      std::string name = binder_for(id);
      open.insert(id);
      std::string body;
      render_node(id, 1, body);
      open.erase(id);
      bool parens = min_level > 0;
      if (parens) out += "(";
      out += "rec " + name + ". " + body;
      if (parens) out += ")";
      return;
    }
    render_node(id, min_level, out);
  }

  void render_node(TypeId id, int min_level, std::string& out) {
    const TypeNode& n = store.node(id);
    switch (n.tag) {
      case TypeTag::Int:
        out += "int";
        return;
      case TypeTag::Chan: {
        out += "[";
        render(n.a, 0, out);
        out += "]{" + render_use(n.in_use) + "," + render_use(n.out_use) + "}";
        return;
      }
      case TypeTag::Prod: {
        bool parens = min_level > 2;
        if (parens) out += "(";
        render(n.a, 2, out);
        out += " * ";
        render(n.b, 3, out);
        if (parens) out += ")";
        return;
      }
      case TypeTag::Sum: {
        bool parens = min_level > 1;
        if (parens) out += "(";
        render(n.a, 1, out);
        out += " (+) ";
        render(n.b, 2, out);
        if (parens) out += ")";
        return;
      }
    }
  }
};

}  // namespace

std::string render_type(const TypeStore& store, TypeId id) {
  TypeRenderer renderer{store, {}, {}, {}, 0};
  std::set<TypeId> on_stack, done;
  renderer.find_targets(id, on_stack, done);
  std::string out;
  renderer.render(id, 0, out);
  return out;
}

std::string render_env(const TypeStore& store, const Env& env) {
  std::ostringstream os;
  for (const auto& [name, type] : env) {
    os << name << " : " << render_type(store, type) << "\n";
  }
  return os.str();
}

}  // namespace linpi
