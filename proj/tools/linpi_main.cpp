#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "linpi/ast.hpp"
#include "linpi/constraints.hpp"
#include "linpi/semantics.hpp"
#include "linpi/sessions.hpp"
#include "linpi/solver.hpp"
#include "linpi/typecheck.hpp"
#include "linpi/types.hpp"

namespace {

// Exit codes: 0 success, 1 the input is rejected by the type discipline or
// the search gave up, 2 the invocation itself is broken (unreadable or
// unparseable input, malformed type syntax, internal faults).
int exit_for(const linpi::Error& e) {
  switch (e.code()) {
    case linpi::ErrorCode::Parse:
    case linpi::ErrorCode::Io:
    case linpi::ErrorCode::IllFormedSystem:
    case linpi::ErrorCode::Internal:
      return 2;
    default:
      return 1;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw linpi::Error(linpi::ErrorCode::Io, "cannot read " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Config {
  std::string input_path;
  std::string env_path;
  bool sessions = false;
  bool unbalanced_new = false;
  bool omega_fallback = false;
  int dump = 0;
  int max_steps = 100;
  uint64_t seed = 0;
};

int cmd_infer(const Config& cfg) {
  linpi::ProcPtr p = linpi::parse_process(read_file(cfg.input_path));

  linpi::TypeStore store;
  linpi::VarSupply supply;
  linpi::GenOptions gopt;
  gopt.unbalanced_new = cfg.unbalanced_new;
  linpi::GenResult gen = linpi::gen_process(supply, p, gopt);

  linpi::SolveOptions sopt;
  sopt.omega_fallback = cfg.omega_fallback;
  sopt.dump_level = cfg.dump;
  sopt.dump_stream = &std::cerr;
  linpi::SolveResult res = linpi::solve(store, supply, gen.constraints, sopt);

  linpi::SessionStore sessions;
  for (const auto& [name, te] : gen.env) {
    linpi::TypeId t = linpi::ground_type_expr(store, te, res.subst);
    std::cout << name << " : " << linpi::render_type(store, t) << "\n";
    if (cfg.sessions) {
      try {
        linpi::SessId s = linpi::decode(sessions, store, t);
        std::cout << name << " :: " << linpi::render_session(sessions, store, s)
                  << "\n";
      } catch (const linpi::Error& e) {
        if (e.code() != linpi::ErrorCode::NotSessionShaped) throw;
        std::cout << name << " :: (no session decoding: " << e.what() << ")\n";
      }
    }
  }
  return 0;
}

int cmd_check(const Config& cfg) {
  linpi::ProcPtr p = linpi::parse_process(read_file(cfg.input_path));
  linpi::TypeStore store;
  linpi::Env env = linpi::parse_env(store, read_file(cfg.env_path));
  bool ok = linpi::check_process(store, env, p);
  std::cout << (ok ? "ok" : "rejected") << "\n";
  return ok ? 0 : 1;
}

int cmd_constraints(const Config& cfg) {
  linpi::ProcPtr p = linpi::parse_process(read_file(cfg.input_path));

  linpi::TypeStore store;
  linpi::VarSupply supply;
  linpi::GenOptions gopt;
  gopt.unbalanced_new = cfg.unbalanced_new;
  linpi::GenResult gen = linpi::gen_process(supply, p, gopt);

  for (const auto& [name, te] : gen.env) {
    std::cout << "-- " << name << " : "
              << linpi::render_type_expr(supply, store, te) << "\n";
  }
  for (const linpi::Constraint& c : gen.constraints) {
    std::cout << linpi::render_constraint(supply, store, c) << "\n";
  }

  if (cfg.dump > 0) {
    linpi::SolveOptions sopt;
    sopt.omega_fallback = cfg.omega_fallback;
    sopt.dump_level = cfg.dump;
    sopt.dump_stream = &std::cout;
    linpi::solve(store, supply, gen.constraints, sopt);
  }
  return 0;
}

int cmd_run(const Config& cfg) {
  linpi::ProcPtr p = linpi::parse_process(read_file(cfg.input_path));
  p = linpi::promote_free_names(p);
  linpi::RunResult res = linpi::run(p, cfg.max_steps, cfg.seed);
  for (const linpi::Redex& r : res.trace) {
    std::cout << linpi::render_label(r.label) << " | "
              << linpi::render_process(r.residual) << "\n";
  }
  std::cout << "=> " << linpi::render_process(res.final_state) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear channel type reconstruction for pi-calculus processes"};
  app.require_subcommand(1);

  Config cfg;

  CLI::App* infer = app.add_subcommand(
      "infer", "reconstruct the types of the free names of a process");
  infer->add_option("file", cfg.input_path, "process file")->required();
  infer->add_flag("--sessions", cfg.sessions,
                  "also decode each inferred type as a session protocol");
  infer->add_flag("--unbalanced-new", cfg.unbalanced_new,
                  "let restricted channels have independent input/output uses");
  infer->add_flag("--omega-fallback", cfg.omega_fallback,
                  "accept the all-w assignment for oversized use searches");
  infer->add_option("--dump", cfg.dump, "diagnostics on stderr (1: classes, 2: + uses)")
      ->check(CLI::Range(0, 2));

  CLI::App* check = app.add_subcommand(
      "check", "verify a process against a declared environment");
  check->add_option("file", cfg.input_path, "process file")->required();
  check->add_option("--env", cfg.env_path, "environment file")->required();

  CLI::App* constraints = app.add_subcommand(
      "constraints", "print the generated constraint set");
  constraints->add_option("file", cfg.input_path, "process file")->required();
  constraints->add_flag("--unbalanced-new", cfg.unbalanced_new,
                        "let restricted channels have independent input/output uses");
  constraints->add_flag("--omega-fallback", cfg.omega_fallback,
                        "accept the all-w assignment for oversized use searches");
  constraints->add_option("--dump", cfg.dump,
                          "also solve and print classes (1) and use partitions (2)")
      ->check(CLI::Range(0, 2));

  CLI::App* run = app.add_subcommand("run", "execute a process");
  run->add_option("file", cfg.input_path, "process file")->required();
  run->add_option("--max-steps", cfg.max_steps, "reduction budget")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--seed", cfg.seed, "scheduler seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(infer)) return cmd_infer(cfg);
    if (app.got_subcommand(check)) return cmd_check(cfg);
    if (app.got_subcommand(constraints)) return cmd_constraints(cfg);
    if (app.got_subcommand(run)) return cmd_run(cfg);
  } catch (const linpi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  }
  return 2;
}
