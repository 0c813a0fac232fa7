#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linpi/ast.hpp"
#include "linpi/types.hpp"

namespace linpi {

// A reduction is either internal (tau) or an interaction on a visible
// channel. Interactions under a restriction appear as tau at that binder.
struct Label {
  bool tau = true;
  std::string channel;

  static Label make_tau() { return Label{true, ""}; }
  static Label comm(std::string ch) { return Label{false, std::move(ch)}; }
};

bool operator==(const Label& a, const Label& b);
std::string render_label(const Label& l);

struct Redex {
  Label label;
  ProcPtr residual;  // the process after taking this step
};

// Big-step evaluation of a closed expression. Throws StuckExpression when
// the expression is not closed or adds non-integers.
ExprPtr eval(const ExprPtr& e);

// Rewrites free variable occurrences into channel names so that a parsed
// program can execute. Bound variables are untouched.
ProcPtr promote_free_names(const ProcPtr& p);

// All one-step successors of p modulo structural rearrangement: parallel
// compositions are flattened, restrictions extruded, and each replication
// expanded fuel_repl times. Expansion copies that take no part in a step
// are not kept in its residual.
std::vector<Redex> step(const ProcPtr& p, int fuel_repl = 1);

struct RunResult {
  std::vector<Redex> trace;
  ProcPtr final_state;
};

// Executes up to max_steps reductions, choosing among the available
// successors with a deterministic generator seeded by seed.
RunResult run(const ProcPtr& p, int max_steps = 100, uint64_t seed = 0);

// Environment reduction indexed by a label: tau leaves the environment
// unchanged, a visible interaction consumes one use on each side.
Env env_reduce(TypeStore& store, const Env& env, const Label& label);

}  // namespace linpi
