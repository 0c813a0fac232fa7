#include <doctest.h>

#include <string>
#include <vector>

#include "support.hpp"

using testsup::contains;
using testsup::data_path;
using testsup::lines_of;
using testsup::run_cli;

TEST_SUITE("cli") {

TEST_CASE("infer prints one line per free name and nothing for closed processes") {
  auto closed = run_cli("infer " + data_path("ex41.pi"));
  CHECK(closed.status == 0);
  CHECK(closed.output.empty());

  auto open = run_cli("infer " + data_path("ex41_unrestricted.pi"));
  CHECK(open.status == 0);
  CHECK(open.output == "a : [int]{1,1}\n");

  auto pair = run_cli("infer " + data_path("ex43.pi"));
  CHECK(pair.status == 0);
  CHECK(pair.output == "x : [int]{1,0} * [int]{0,1}\n");
}

TEST_CASE("infer reconstructs the reference types of the successor program") {
  auto r = run_cli("infer " + data_path("eq1.pi"));
  CHECK(r.status == 0);
  std::vector<std::string> lines = lines_of(r.output);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "print : [int]{0,1}");
  CHECK(lines[1] == "succ : [int * [int]{0,1}]{w,1}");
}

TEST_CASE("infer --sessions decodes protocols and explains refusals") {
  auto incr = run_cli("infer --sessions " + data_path("sess_incr.pi"));
  CHECK(incr.status == 0);
  CHECK(contains(incr.output, "a :: ?int.!int.end"));

  auto server = run_cli("infer --sessions " + data_path("sess_server.pi"));
  CHECK(server.status == 0);
  CHECK(contains(server.output, ":: (no session decoding"));
}

TEST_CASE("check answers ok or rejected with matching exit codes") {
  auto ok = run_cli("check " + data_path("eq1.pi") + " --env " +
                    data_path("eq1_env.txt"));
  CHECK(ok.status == 0);
  CHECK(ok.output == "ok\n");

  // A dangling linear declaration makes a closed process unacceptable.
  auto rejected = run_cli("check " + data_path("ex41.pi") + " --env " +
                          data_path("a_out_env.txt"));
  CHECK(rejected.status == 1);
  CHECK(rejected.output == "rejected\n");

  // A free name with no declaration is an error, reported as such.
  auto unbound = run_cli("check " + data_path("discuss5.pi") + " --env " +
                         data_path("a_out_env.txt"));
  CHECK(unbound.status == 1);
  CHECK(contains(unbound.output, "error:"));
  CHECK(contains(unbound.output, "'b'"));
}

TEST_CASE("constructor clashes are reported with both constructors") {
  auto r = run_cli("infer " + data_path("clash/c01.pi"));
  CHECK(r.status == 1);
  CHECK(contains(r.output, "type clash"));
}

TEST_CASE("run prints the labelled trace and the final state") {
  auto r = run_cli("run " + data_path("eq1.pi"));
  CHECK(r.status == 0);
  std::vector<std::string> lines = lines_of(r.output);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].rfind("succ | ", 0) == 0);
  CHECK(lines[1].rfind("tau | ", 0) == 0);
  CHECK(lines[2].rfind("tau | ", 0) == 0);
  CHECK(lines[3].rfind("=> ", 0) == 0);
  CHECK(contains(lines[3], "print!40"));

  auto r2 = run_cli("run " + data_path("eq2.pi"));
  CHECK(r2.status == 0);
  std::vector<std::string> lines2 = lines_of(r2.output);
  REQUIRE(lines2.size() == 3);
  CHECK(contains(lines2[2], "print!40"));
}

TEST_CASE("run respects the reduction budget and the scheduler seed") {
  auto capped = run_cli("run --max-steps 1 " + data_path("eq1.pi"));
  CHECK(capped.status == 0);
  CHECK(lines_of(capped.output).size() == 2);  // one step, one final state

  auto a = run_cli("run --seed 11 " + data_path("eq1.pi"));
  auto b = run_cli("run --seed 11 " + data_path("eq1.pi"));
  CHECK(a.output == b.output);
}

TEST_CASE("constraints prints the environment heading and the generated set") {
  auto closed = run_cli("constraints " + data_path("ex41.pi"));
  CHECK(closed.status == 0);
  CHECK(lines_of(closed.output).size() == 5);

  auto open = run_cli("constraints " + data_path("ex41_unrestricted.pi"));
  CHECK(open.status == 0);
  std::vector<std::string> lines = lines_of(open.output);
  REQUIRE(lines.size() == 5);  // one heading plus four constraints
  CHECK(lines[0].rfind("-- a : ", 0) == 0);

  auto dumped = run_cli("constraints --dump 2 " + data_path("ex41.pi"));
  CHECK(dumped.status == 0);
  CHECK(lines_of(dumped.output).size() > 5);
  CHECK(contains(dumped.output, "use equations"));
}

TEST_CASE("broken invocations exit with status 2") {
  auto parse = run_cli("infer " + data_path("parse_error.pi"));
  CHECK(parse.status == 2);
  CHECK(contains(parse.output, "error:"));
  CHECK(contains(parse.output, "1:5"));

  auto missing = run_cli("infer /nonexistent/nowhere.pi");
  CHECK(missing.status == 2);
  CHECK(contains(missing.output, "cannot read"));

  CHECK(run_cli("").status == 2);
  CHECK(run_cli("frobnicate x").status == 2);
  CHECK(run_cli("check " + data_path("eq1.pi")).status == 2);  // --env required
  CHECK(run_cli("infer --dump 7 " + data_path("ex41.pi")).status == 2);
}

TEST_CASE("restriction balance is a flag on inference") {
  // The filter pipeline types both ways; the unbalanced form frees the
  // producer side of the stream cells.
  auto balanced = run_cli("infer " + data_path("filter.pi"));
  CHECK(balanced.status == 0);
  auto unbalanced = run_cli("infer --unbalanced-new " + data_path("filter.pi"));
  CHECK(unbalanced.status == 0);
  CHECK(balanced.output != unbalanced.output);
  CHECK(contains(balanced.output, "filter : "));
  CHECK(contains(unbalanced.output, "filter : "));
}

}  // TEST_SUITE
