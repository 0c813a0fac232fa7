#pragma once

// Shared helpers for the unit suites and the acceptance runner: fixture
// loading, CLI invocation, constraint-set comparison modulo variable
// renaming, reference reconstruction wiring, and the random generators
// used by the property tests.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <linpi/ast.hpp>
#include <linpi/constraints.hpp>
#include <linpi/error.hpp>
#include <linpi/semantics.hpp>
#include <linpi/sessions.hpp>
#include <linpi/solver.hpp>
#include <linpi/typecheck.hpp>
#include <linpi/types.hpp>

#ifndef LINPI_TEST_DATA_DIR
#define LINPI_TEST_DATA_DIR "tests/data"
#endif

namespace testsup {

using namespace linpi;

/* fixtures */

inline std::string data_path(const std::string& name) {
  return std::string(LINPI_TEST_DATA_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read test fixture: " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

inline ProcPtr parse_fixture(const std::string& name) {
  return parse_process(read_file(data_path(name)));
}

/* command line runner */

struct CliResult {
  int status = -1;       // process exit status, -1 when it could not run
  std::string output;    // stdout and stderr interleaved
};

inline CliResult run_cli(const std::string& args) {
#ifndef LINPI_CLI_PATH
  throw std::runtime_error("LINPI_CLI_PATH was not configured");
#else
  CliResult r;
  std::string cmd = std::string(LINPI_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  int wait_status = pclose(pipe);
  if (wait_status >= 0 && WIFEXITED(wait_status)) {
    r.status = WEXITSTATUS(wait_status);
  }
  return r;
#endif
}

inline bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

/* constraint sets modulo variable renaming
 *
 * Two constraint sets are considered the same when some bijection over
 * type variables and use variables maps one multiset onto the other.
 * Equalities and coherences match up to swapping their two sides, and
 * combinations up to swapping the two combined operands.
 */

struct VarBijection {
  std::map<TypeVarId, TypeVarId> type_map, type_rev;
  std::map<UseVarId, UseVarId> use_map, use_rev;
};

inline bool bind_type_var(VarBijection& m, TypeVarId a, TypeVarId b) {
  auto f = m.type_map.find(a);
  if (f != m.type_map.end()) return f->second == b;
  auto r = m.type_rev.find(b);
  if (r != m.type_rev.end()) return false;
  m.type_map[a] = b;
  m.type_rev[b] = a;
  return true;
}

inline bool bind_use_var(VarBijection& m, UseVarId a, UseVarId b) {
  auto f = m.use_map.find(a);
  if (f != m.use_map.end()) return f->second == b;
  auto r = m.use_rev.find(b);
  if (r != m.use_rev.end()) return false;
  m.use_map[a] = b;
  m.use_rev[b] = a;
  return true;
}

inline std::optional<VarBijection> match_use_expr(VarBijection m,
                                                  const UseExpr& a,
                                                  const UseExpr& b) {
  if (a.lit != b.lit || a.terms.size() != b.terms.size()) return std::nullopt;
  // Small term lists: try every pairing that respects multiplicities.
  std::vector<bool> used(b.terms.size(), false);
  std::function<std::optional<VarBijection>(size_t, VarBijection)> go =
      [&](size_t i, VarBijection cur) -> std::optional<VarBijection> {
    if (i == a.terms.size()) return cur;
    for (size_t j = 0; j < b.terms.size(); ++j) {
      if (used[j] || a.terms[i].second != b.terms[j].second) continue;
      VarBijection next = cur;
      if (!bind_use_var(next, a.terms[i].first, b.terms[j].first)) continue;
      used[j] = true;
      if (auto res = go(i + 1, next)) return res;
      used[j] = false;
    }
    return std::nullopt;
  };
  return go(0, m);
}

inline std::optional<VarBijection> match_type_expr(VarBijection m,
                                                   const TypeExprPtr& a,
                                                   const TypeExprPtr& b) {
  if (a->kind != b->kind) return std::nullopt;
  switch (a->kind) {
    case TypeExprKind::Int:
      return m;
    case TypeExprKind::Var:
      if (!bind_type_var(m, a->var, b->var)) return std::nullopt;
      return m;
    case TypeExprKind::Ground:
      if (a->ground != b->ground) return std::nullopt;
      return m;
    case TypeExprKind::Chan: {
      auto m1 = match_use_expr(m, a->in_use, b->in_use);
      if (!m1) return std::nullopt;
      auto m2 = match_use_expr(*m1, a->out_use, b->out_use);
      if (!m2) return std::nullopt;
      return match_type_expr(*m2, a->child0, b->child0);
    }
    case TypeExprKind::Prod:
    case TypeExprKind::Sum: {
      auto m1 = match_type_expr(m, a->child0, b->child0);
      if (!m1) return std::nullopt;
      return match_type_expr(*m1, a->child1, b->child1);
    }
  }
  return std::nullopt;
}

inline std::optional<VarBijection> match_constraint(VarBijection m,
                                                    const Constraint& a,
                                                    const Constraint& b) {
  if (a.kind != b.kind) return std::nullopt;
  auto pair_match = [&](const TypeExprPtr& x1, const TypeExprPtr& x2,
                        const TypeExprPtr& y1, const TypeExprPtr& y2)
      -> std::optional<VarBijection> {
    if (auto m1 = match_type_expr(m, x1, y1)) {
      if (auto m2 = match_type_expr(*m1, x2, y2)) return m2;
    }
    if (auto m1 = match_type_expr(m, x1, y2)) {
      if (auto m2 = match_type_expr(*m1, x2, y1)) return m2;
    }
    return std::nullopt;
  };
  switch (a.kind) {
    case ConstraintKind::Eq:
    case ConstraintKind::Coh:
      return pair_match(a.a, a.b, b.a, b.b);
    case ConstraintKind::Comb: {
      auto m1 = match_type_expr(m, a.a, b.a);
      if (!m1) return std::nullopt;
      if (auto m2 = match_type_expr(*m1, a.b, b.b)) {
        if (auto m3 = match_type_expr(*m2, a.c, b.c)) return m3;
      }
      if (auto m2 = match_type_expr(*m1, a.b, b.c)) {
        if (auto m3 = match_type_expr(*m2, a.c, b.b)) return m3;
      }
      return std::nullopt;
    }
    case ConstraintKind::UseEq: {
      if (auto m1 = match_use_expr(m, a.u, b.u)) {
        if (auto m2 = match_use_expr(*m1, a.v, b.v)) return m2;
      }
      if (auto m1 = match_use_expr(m, a.u, b.v)) {
        if (auto m2 = match_use_expr(*m1, a.v, b.u)) return m2;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

inline std::optional<VarBijection> match_constraint_sets(
    VarBijection m, const std::vector<Constraint>& got,
    std::vector<const Constraint*> want) {
  if (want.empty()) return m;
  std::function<std::optional<VarBijection>(VarBijection, size_t,
                                            std::vector<bool>&)>
      go = [&](VarBijection cur, size_t i,
               std::vector<bool>& used) -> std::optional<VarBijection> {
    if (i == got.size()) return cur;
    for (size_t j = 0; j < want.size(); ++j) {
      if (used[j]) continue;
      if (auto next = match_constraint(cur, got[i], *want[j])) {
        used[j] = true;
        if (auto res = go(*next, i + 1, used)) return res;
        used[j] = false;
      }
    }
    return std::nullopt;
  };
  std::vector<bool> used(want.size(), false);
  return go(m, 0, used);
}

inline bool same_constraints(const std::vector<Constraint>& got,
                             const std::vector<Constraint>& want) {
  if (got.size() != want.size()) return false;
  std::vector<const Constraint*> w;
  for (const auto& c : want) w.push_back(&c);
  return match_constraint_sets(VarBijection{}, got, w).has_value();
}

/* reference reconstruction wiring (mirrors the CLI `infer` path) */

struct Inferred {
  VarSupply supply;
  GenResult gen;
  SolveResult result;
  Env env;

  Inferred(TypeStore& store, const ProcPtr& p, GenOptions gopt = {},
           SolveOptions sopt = {}) {
    gen = gen_process(supply, p, gopt);
    result = solve(store, supply, gen.constraints, sopt);
    for (const auto& [name, texpr] : gen.env) {
      env[name] = ground_type_expr(store, texpr, result.subst);
    }
  }

  Inferred(const Inferred&) = delete;
  Inferred& operator=(const Inferred&) = delete;
};

/* deterministic process generator
 *
 * Grows a random process over a small pool of names. Payloads mix
 * integers, arithmetic, pairs, injections, and channel names, so the
 * output exercises composite types, delegation, and the clash paths.
 */

class ProcGen {
 public:
  explicit ProcGen(uint64_t seed) : rng_(seed) {}

  ProcPtr process(int depth = 4) {
    names_ = {"f0", "f1", "f2", "f3"};
    next_bound_ = 0;
    return proc(depth);
  }

 private:
  std::mt19937_64 rng_;
  std::vector<std::string> names_;
  int next_bound_ = 0;

  size_t roll(size_t n) { return static_cast<size_t>(rng_() % n); }

  std::string pick_name() { return names_[roll(names_.size())]; }

  std::string fresh_bound(const char* stem) {
    return std::string(stem) + std::to_string(next_bound_++);
  }

  ExprPtr value(int depth) {
    switch (depth <= 0 ? roll(2) : roll(6)) {
      case 0:
        return make_int(static_cast<long long>(roll(10)));
      case 1:
        return make_name(NameKind::Variable, pick_name());
      case 2:
        return make_pair(value(depth - 1), value(depth - 1));
      case 3:
        return make_inl(value(depth - 1));
      case 4:
        return make_inr(value(depth - 1));
      default:
        return make_add(make_int(static_cast<long long>(roll(5))),
                        make_int(static_cast<long long>(roll(5))));
    }
  }

  ProcPtr proc(int depth) {
    if (depth <= 0) {
      if (roll(2) == 0) return make_idle();
      return make_output(make_name(NameKind::Variable, pick_name()), value(0));
    }
    switch (roll(10)) {
      case 0:
        return make_idle();
      case 1:
      case 2:
        return make_par(proc(depth - 1), proc(depth - 1));
      case 3: {
        std::string b = fresh_bound("n");
        names_.push_back(b);
        ProcPtr body = proc(depth - 1);
        names_.pop_back();
        return make_new(b, body);
      }
      case 4:
      case 5:
        return make_output(make_name(NameKind::Variable, pick_name()),
                           value(2));
      case 6: {
        std::string b = fresh_bound("x");
        names_.push_back(b);
        ProcPtr body = proc(depth - 1);
        names_.pop_back();
        return make_input(make_name(NameKind::Variable, pick_name()), b, body);
      }
      case 7:
        return make_repl(proc(depth - 2));
      case 8: {
        std::string bl = fresh_bound("l");
        std::string br = fresh_bound("r");
        ExprPtr scrut = roll(2) == 0 ? make_inl(value(1)) : make_inr(value(1));
        names_.push_back(bl);
        ProcPtr left = proc(depth - 1);
        names_.pop_back();
        names_.push_back(br);
        ProcPtr right = proc(depth - 1);
        names_.pop_back();
        return make_case(scrut, bl, left, br, right);
      }
      default: {
        std::string b1 = fresh_bound("p");
        std::string b2 = fresh_bound("q");
        ExprPtr scrut = make_pair(value(1), value(1));
        names_.push_back(b1);
        names_.push_back(b2);
        ProcPtr body = proc(depth - 1);
        names_.pop_back();
        names_.pop_back();
        return make_split(scrut, b1, b2, body);
      }
    }
  }
};

/* session generator and the encoding it inverts
 *
 * encode(end)      = [int]{0,0}
 * encode(?t.S)     = [t x encode(S)]{1,0}
 * encode(!t.S)     = [t x encode(dual S)]{0,1}
 *
 * decode is the library operation under test; encode lives here so the
 * round trip is checked against an independent construction.
 */

class SessionGen {
 public:
  SessionGen(SessionStore& sessions, TypeStore& store, uint64_t seed)
      : sessions_(sessions), store_(store), rng_(seed) {}

  SessId session(int depth = 5) {
    open_.clear();
    return gen(depth);
  }

 private:
  SessionStore& sessions_;
  TypeStore& store_;
  std::mt19937_64 rng_;
  std::vector<SessId> open_;

  size_t roll(size_t n) { return static_cast<size_t>(rng_() % n); }

  TypeId payload() {
    if (roll(3) == 0) {
      return store_.intern_prod(store_.intern_int(), store_.intern_int());
    }
    return store_.intern_int();
  }

  SessId gen(int depth) {
    if (depth <= 0) {
      if (!open_.empty() && roll(2) == 0) return open_[roll(open_.size())];
      return sessions_.intern_end();
    }
    size_t k = roll(8);
    if (k == 0) return sessions_.intern_end();
    if (k == 1 && !open_.empty()) return open_[roll(open_.size())];
    SessId id = sessions_.allocate();
    open_.push_back(id);
    TypeId t = payload();
    SessId cont = gen(depth - 1);
    open_.pop_back();
    sessions_.fill(id, k % 2 == 0 ? SessTag::In : SessTag::Out, t, cont);
    return id;
  }
};

inline TypeId encode_session(SessionStore& sessions, TypeStore& store, SessId s,
                             std::map<SessId, TypeId>& memo) {
  auto hit = memo.find(s);
  if (hit != memo.end()) return hit->second;
  TypeId slot = store.allocate();
  memo.emplace(s, slot);
  const SessNode& n = sessions.node(s);
  switch (n.tag) {
    case SessTag::End:
      store.fill_chan(slot, Use::Zero, Use::Zero, store.intern_int());
      break;
    case SessTag::In: {
      TypeId cont = encode_session(sessions, store, n.cont, memo);
      store.fill_chan(slot, Use::One, Use::Zero,
                      store.intern_prod(n.payload, cont));
      break;
    }
    case SessTag::Out: {
      SessId flipped = dual(sessions, n.cont);
      TypeId cont = encode_session(sessions, store, flipped, memo);
      store.fill_chan(slot, Use::Zero, Use::One,
                      store.intern_prod(n.payload, cont));
      break;
    }
  }
  return slot;
}

inline TypeId encode_session(SessionStore& sessions, TypeStore& store,
                             SessId s) {
  std::map<SessId, TypeId> memo;
  return encode_session(sessions, store, s, memo);
}

/* hand-built regular types used by several suites */

// rec X. int (+) ([int]{cell_in, cell_out} * X)
inline TypeId make_uniform_list(TypeStore& store, Use cell_in, Use cell_out) {
  TypeId spine = store.allocate();
  TypeId cell = store.intern_chan(cell_in, cell_out, store.intern_int());
  TypeId cons = store.allocate();
  store.fill_prod(cons, cell, spine);
  store.fill_sum(spine, store.intern_int(), cons);
  return spine;
}

// rec X. int (+) ([int]{a_in, a_out} * (int (+) ([int]{b_in, b_out} * X)))
inline TypeId make_alternating_list(TypeStore& store, Use a_in, Use a_out,
                                    Use b_in, Use b_out) {
  TypeId first = store.allocate();
  TypeId second = store.allocate();
  TypeId cell_a = store.intern_chan(a_in, a_out, store.intern_int());
  TypeId cell_b = store.intern_chan(b_in, b_out, store.intern_int());
  TypeId cons_a = store.allocate();
  TypeId cons_b = store.allocate();
  store.fill_prod(cons_a, cell_a, second);
  store.fill_sum(first, store.intern_int(), cons_a);
  store.fill_prod(cons_b, cell_b, first);
  store.fill_sum(second, store.intern_int(), cons_b);
  return first;
}

}  // namespace testsup
