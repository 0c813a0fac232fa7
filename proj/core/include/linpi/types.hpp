#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "linpi/error.hpp"

namespace linpi {

// Channel uses form the three-point structure 0 < 1 < w. Addition saturates:
// adding two nonzero uses always yields w, so 1 is genuinely linear.
enum class Use : uint8_t { Zero = 0, One = 1, Omega = 2 };

Use use_add(Use a, Use b);
std::string render_use(Use u);

using TypeId = uint32_t;

enum class TypeTag : uint8_t { Int, Chan, Prod, Sum };

// Types are nodes of a finite graph; cycles realize regular infinite trees.
// Chan stores its payload in child a; Prod/Sum use both children.
struct TypeNode {
  TypeTag tag = TypeTag::Int;
  Use in_use = Use::Zero;
  Use out_use = Use::Zero;
  TypeId a = 0;
  TypeId b = 0;
};

/* equation systems fed to make_type */

struct TypeTerm;
using TypeTermPtr = std::shared_ptr<const TypeTerm>;

enum class TypeTermKind { Int, Chan, Prod, Sum, Ref, Ground };

struct TypeTerm {
  TypeTermKind kind;
  Use in_use = Use::Zero;
  Use out_use = Use::Zero;
  TypeTermPtr a, b;  // Chan payload in a; Prod/Sum children
  std::string ref;   // Ref
  TypeId ground = 0; // Ground
};

TypeTermPtr tt_int();
TypeTermPtr tt_chan(Use in_use, Use out_use, TypeTermPtr payload);
TypeTermPtr tt_prod(TypeTermPtr a, TypeTermPtr b);
TypeTermPtr tt_sum(TypeTermPtr a, TypeTermPtr b);
TypeTermPtr tt_ref(std::string name);
TypeTermPtr tt_ground(TypeId id);

struct TypeEquation {
  std::string name;
  TypeTermPtr rhs;
};

// The store owns all type nodes plus the memo tables for the coinductive
// operations. TypeIds are only meaningful relative to their store.
class TypeStore {
 public:
  TypeId intern_int();
  TypeId intern_chan(Use in_use, Use out_use, TypeId payload);
  TypeId intern_prod(TypeId a, TypeId b);
  TypeId intern_sum(TypeId a, TypeId b);

  // Raw allocation for cyclic construction: allocate first, fill once the
  // children exist. Filled nodes are not interned.
  TypeId allocate();
  void fill_int(TypeId id);
  void fill_chan(TypeId id, Use in_use, Use out_use, TypeId payload);
  void fill_prod(TypeId id, TypeId a, TypeId b);
  void fill_sum(TypeId id, TypeId a, TypeId b);

  const TypeNode& node(TypeId id) const;
  size_t size() const { return nodes_.size(); }

  friend bool type_equal(TypeStore& store, TypeId a, TypeId b);
  friend std::optional<TypeId> type_combine(TypeStore& store, TypeId a, TypeId b);
  friend bool is_unlimited(TypeStore& store, TypeId t);

 private:
  std::vector<TypeNode> nodes_;
  std::map<std::tuple<TypeTag, Use, Use, TypeId, TypeId>, TypeId> intern_;
  std::map<std::pair<TypeId, TypeId>, bool> equal_memo_;
  std::map<std::pair<TypeId, TypeId>, std::optional<TypeId>> combine_memo_;
  std::map<TypeId, bool> unlimited_memo_;
};

// Solves a finite equation system with proper right-hand sides and returns
// the type bound to the first equation. Throws IllFormedSystem when a
// right-hand side is a bare unknown or references an unbound name.
TypeId make_type(TypeStore& store, const std::vector<TypeEquation>& system);

// Bisimulation equality on the regular trees denoted by two nodes.
bool type_equal(TypeStore& store, TypeId a, TypeId b);

// Partial combination: ints combine to int, channels over equal payloads
// combine use-wise, products and sums combine component-wise. Returns
// nullopt when the combination does not exist.
std::optional<TypeId> type_combine(TypeStore& store, TypeId a, TypeId b);

// Two types are coherent when their combination exists.
bool coherent(TypeStore& store, TypeId a, TypeId b);

// A type is unlimited when combining it with itself changes nothing.
bool is_unlimited(TypeStore& store, TypeId t);

/* type environments */

using Env = std::map<std::string, TypeId>;

// Pointwise combination; shared names must combine. Throws
// UndefinedCombination otherwise.
Env env_combine(TypeStore& store, const Env& a, const Env& b);

// Consumes one input and one output capability of the named channel.
// Throws MissingChannel/InsufficientUse when impossible. Reductions on
// internal interactions do not change the environment; callers encode
// those by not calling this.
Env env_reduce(TypeStore& store, const Env& env, const std::string& channel);

// Renders a type with explicit recursion binders: rec X. int (+) [int]{1,0} * X.
// Binder names follow first-visit order: X, Y, Z, X1, Y1, Z1, X2, ...
std::string render_type(const TypeStore& store, TypeId id);

// Parses the type grammar: int, [T]{U,U}, T*T, T(+)T, rec x. T, and type
// variables bound by rec. '*' binds tighter than '(+)'; rec extends right.
TypeId parse_type(TypeStore& store, const std::string& source);

// Environment files bind one name per line: "name : T". Blank lines and
// "--" comments are ignored.
Env parse_env(TypeStore& store, const std::string& source);
std::string render_env(const TypeStore& store, const Env& env);

}  // namespace linpi
