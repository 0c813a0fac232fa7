#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "linpi/constraints.hpp"
#include "linpi/typecheck.hpp"
#include "linpi/types.hpp"

namespace linpi {

struct SolveOptions {
  // For a residual partition above the search limit, try the all-w
  // assignment instead of aborting.
  bool omega_fallback = false;
  // Skip the rank search entirely and accept the all-w assignment when it
  // satisfies the partition (used to validate the fallback on bulk input).
  bool force_omega_uses = false;
  // Residual variables per partition beyond which exhaustive search aborts.
  int residual_limit = 24;
  int dump_level = 0;            // 1: closure classes, 2: also use partitions
  std::ostream* dump_stream = nullptr;
};

struct UseEquation {
  UseExpr lhs, rhs;
};

struct UsePartition {
  std::vector<UseVarId> vars;  // sorted
  std::vector<UseEquation> equations;
};

struct EliminationStep {
  UseVarId var;
  UseExpr replacement;
};

struct EliminationResult {
  std::vector<UseEquation> residual;
  std::vector<EliminationStep> steps;    // applied in order; undone in reverse
  std::vector<UseVarId> residual_vars;   // sorted
};

struct PartitionSolution {
  std::map<UseVarId, Use> assignment;      // residual and eliminated variables
  std::vector<UseVarId> residual_vars;     // searched variables, sorted
  std::vector<UseEquation> residual_equations;
  int residual_rank = 0;                   // total rank of the searched part
  bool used_omega_fallback = false;
};

using TermId = uint32_t;

// Shared state of the closure phases: interned terms, the equality and
// coherence partitions with their canonical representatives, recorded
// combination triples, and the use equalities discovered along the way.
class SolveContext {
 public:
  SolveContext(TypeStore& store, VarSupply& supply);
  ~SolveContext();

  TypeStore& store();
  VarSupply& supply();

  TermId intern(const TypeExprPtr& e);
  std::optional<TermId> term_of_var(TypeVarId v) const;
  TypeExprPtr expr_of_term(TermId t) const;
  std::string render_term(TermId t) const;

  TermId eq_root(TermId t) const;
  TermId coh_root(TermId t) const;
  // Least proper member of the class, when the class has one.
  std::optional<TermId> eq_witness(TermId t) const;
  std::optional<TermId> coh_witness(TermId t) const;

  void add_constraint(const Constraint& c);
  // Runs pending unions, decompositions, and combination breakdowns to a
  // fixpoint. Throws Unsatisfiable on a constructor clash.
  void settle();

  std::vector<TypeVarId> all_vars() const;
  const std::vector<UseEquation>& recorded_use_equations() const;
  const std::vector<Constraint>& completion_additions() const;

  void dump_classes(std::ostream& os) const;

  struct Impl;
  Impl& impl() { return *impl_; }
  const Impl& impl() const { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

// Ingests the constraints and computes the congruence closure.
void close(SolveContext& ctx, const std::vector<Constraint>& constraints);

struct VarClassification {
  std::vector<TypeVarId> eq_defined;       // class has a proper member
  std::vector<TypeVarId> coh_defined_only; // only the coherence class has one
  std::vector<TypeVarId> undefined;        // no proper member anywhere
};

VarClassification classify_variables(const SolveContext& ctx);

// Equates every undefined variable's class with int. Must run before
// completion.
void default_undefined_to_int(SolveContext& ctx);

// Gives every coherence-defined variable an equality definition by
// instantiating the canonical representative of its coherence class with
// fresh use variables. Representatives are frozen up front so that the
// added equations cannot influence the instantiation source.
void complete(SolveContext& ctx);

// c-use1 equalities recorded during closure plus the slot-wise breakdown of
// every combination triple through the canonical representatives.
std::vector<UseEquation> extract_use_constraints(SolveContext& ctx);

std::vector<UsePartition> partition_uses(const std::vector<UseEquation>& eqs);

EliminationResult eliminate_determined(const UsePartition& partition);

// Eliminates determined variables, searches the residual assignments in
// nondecreasing total rank (lexicographic within a rank), and undoes the
// elimination. Throws NoSolution when every candidate fails and SearchSpace
// when the residual exceeds the limit without the fallback.
PartitionSolution solve_uses(const UsePartition& partition,
                             const SolveOptions& options = {});

// Builds ground types for every variable from the canonical representatives
// under the given use assignment.
GroundSubstitution synthesize(SolveContext& ctx,
                              const std::map<UseVarId, Use>& uses);

struct SolveResult {
  GroundSubstitution subst;
  std::vector<Constraint> completion_additions;
  std::vector<UseEquation> use_equations;
  std::vector<UsePartition> partitions;
  std::vector<PartitionSolution> partition_solutions;
  std::shared_ptr<SolveContext> context;  // valid while store/supply live
};

// The whole reconstruction pipeline: closure, defaulting, completion, use
// extraction, per-partition minimal search, synthesis. The result always
// passes verify_solution against the input constraints.
SolveResult solve(TypeStore& store, VarSupply& supply,
                  const std::vector<Constraint>& constraints,
                  const SolveOptions& options = {});

}  // namespace linpi
