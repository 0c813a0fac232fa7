#pragma once

#include <memory>
#include <set>
#include <string>

#include "linpi/error.hpp"

namespace linpi {

// Names come in two kinds. The parser only ever produces variables; the
// interpreter mints channel names when it runs a restriction or promotes
// the free names of a program before execution. Substitution replaces
// variables and leaves channels alone.
enum class NameKind { Variable, Channel };

struct Name {
  NameKind kind = NameKind::Variable;
  std::string text;
};

bool operator==(const Name& a, const Name& b);
bool operator!=(const Name& a, const Name& b);

/* expressions */

enum class ExprKind { IntLit, NameRef, Pair, Fst, Snd, Inl, Inr, Add };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind;
  long long value = 0;  // IntLit
  Name name;            // NameRef
  ExprPtr a, b;         // Pair/Add use both; unary forms use a
};

ExprPtr make_int(long long value);
ExprPtr make_name(Name name);
ExprPtr make_name(NameKind kind, std::string text);
ExprPtr make_pair(ExprPtr first, ExprPtr second);
ExprPtr make_fst(ExprPtr e);
ExprPtr make_snd(ExprPtr e);
ExprPtr make_inl(ExprPtr e);
ExprPtr make_inr(ExprPtr e);
ExprPtr make_add(ExprPtr lhs, ExprPtr rhs);

/* processes */

enum class ProcKind { Idle, Input, Output, Par, Repl, New, Case, Split };

struct Proc;
using ProcPtr = std::shared_ptr<const Proc>;

struct Proc {
  ProcKind kind;
  ExprPtr subject;      // Input/Output subject, Case/Split scrutinee
  ExprPtr object;       // Output payload
  std::string binder;   // Input/New binder, Case left binder, Split first
  std::string binder2;  // Case right binder, Split second
  ProcPtr body;         // Input/Repl/New/Split body, Case left body, Par left
  ProcPtr body2;        // Case right body, Par right
};

ProcPtr make_idle();
ProcPtr make_input(ExprPtr subject, std::string binder, ProcPtr body);
ProcPtr make_output(ExprPtr subject, ExprPtr object);
ProcPtr make_par(ProcPtr left, ProcPtr right);
ProcPtr make_repl(ProcPtr body);
ProcPtr make_new(std::string binder, ProcPtr body);
ProcPtr make_case(ExprPtr scrutinee, std::string left_binder, ProcPtr left_body,
                  std::string right_binder, ProcPtr right_body);
ProcPtr make_split(ExprPtr scrutinee, std::string first_binder,
                   std::string second_binder, ProcPtr body);

/* operations */

// Values are integer literals, channel names, and pairs/injections of values.
bool is_value(const ExprPtr& e);

std::set<std::string> free_names(const ExprPtr& e);
std::set<std::string> free_names(const ProcPtr& p);

// Capture-avoiding substitution of a value for a variable. Throws NotAValue
// when the replacement is not a value.
ExprPtr substitute(const ExprPtr& e, const std::string& var, const ExprPtr& value);
ProcPtr substitute(const ProcPtr& p, const std::string& var, const ExprPtr& value);

bool alpha_equal(const ExprPtr& a, const ExprPtr& b);
bool alpha_equal(const ProcPtr& a, const ProcPtr& b);

std::string render_expression(const ExprPtr& e);
std::string render_process(const ProcPtr& p);

// Parses the process grammar (see README). Parsing the rendering of a
// process yields an alpha-equal process. Throws ParseError.
ProcPtr parse_process(const std::string& source);
ExprPtr parse_expression(const std::string& source);

}  // namespace linpi
