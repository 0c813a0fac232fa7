// Microbenchmarks for the hot paths: parsing, whole-pipeline
// reconstruction, coinductive type combination, and reduction stepping.

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <string>

#include "linpi/ast.hpp"
#include "linpi/constraints.hpp"
#include "linpi/semantics.hpp"
#include "linpi/solver.hpp"
#include "linpi/typecheck.hpp"
#include "linpi/types.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

std::string fixture(const std::string& name) {
  return read_file(std::string(LINPI_BENCH_DATA_DIR) + "/" + name);
}

void BM_ParseProcess(benchmark::State& state) {
  std::string src = fixture("filter.pi");
  for (auto _ : state) {
    benchmark::DoNotOptimize(linpi::parse_process(src));
  }
}
BENCHMARK(BM_ParseProcess);

void BM_Reconstruct(benchmark::State& state) {
  std::string src = fixture("filter.pi");
  linpi::ProcPtr p = linpi::parse_process(src);
  for (auto _ : state) {
    linpi::TypeStore store;
    linpi::VarSupply supply;
    linpi::GenResult gen = linpi::gen_process(supply, p);
    linpi::SolveResult res =
        linpi::solve(store, supply, gen.constraints);
    benchmark::DoNotOptimize(res.subst.type_bindings.size());
  }
}
BENCHMARK(BM_Reconstruct);

void BM_TypeCombineRecursive(benchmark::State& state) {
  linpi::TypeStore store;
  // Two alternating decompositions of an infinite list spine; combining
  // them walks the cycle coinductively.
  auto cell = [&](linpi::Use in, linpi::Use out) {
    return linpi::tt_chan(in, out, linpi::tt_int());
  };
  linpi::TypeId odd = linpi::make_type(
      store, {{"a", linpi::tt_sum(linpi::tt_int(),
                                  linpi::tt_prod(cell(linpi::Use::One,
                                                      linpi::Use::Zero),
                                                 linpi::tt_ref("b")))},
              {"b", linpi::tt_sum(linpi::tt_int(),
                                  linpi::tt_prod(cell(linpi::Use::Zero,
                                                      linpi::Use::Zero),
                                                 linpi::tt_ref("a")))}});
  linpi::TypeId even = linpi::make_type(
      store, {{"a", linpi::tt_sum(linpi::tt_int(),
                                  linpi::tt_prod(cell(linpi::Use::Zero,
                                                      linpi::Use::Zero),
                                                 linpi::tt_ref("b")))},
              {"b", linpi::tt_sum(linpi::tt_int(),
                                  linpi::tt_prod(cell(linpi::Use::One,
                                                      linpi::Use::Zero),
                                                 linpi::tt_ref("a")))}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(linpi::type_combine(store, odd, even));
  }
}
BENCHMARK(BM_TypeCombineRecursive);

void BM_Step(benchmark::State& state) {
  std::string src = fixture("eq1.pi");
  linpi::ProcPtr p = linpi::promote_free_names(linpi::parse_process(src));
  for (auto _ : state) {
    benchmark::DoNotOptimize(linpi::step(p));
  }
}
BENCHMARK(BM_Step);

}  // namespace

BENCHMARK_MAIN();
