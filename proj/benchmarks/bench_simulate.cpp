#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "qhtt/driver.hpp"
#include "qhtt/simulator.hpp"

namespace {

qhtt::Analysis load(const std::string& name) {
  std::ifstream in(std::string(QHTT_CORPUS) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return qhtt::analyze(name, ss.str(), {});
}

void BM_Shots(benchmark::State& state, const char* file, const char* decl) {
  qhtt::Analysis a = load(file);
  int shots = int(state.range(0));
  uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(qhtt::runProgram(*a.checker, decl, seed++, shots).errors);
  state.SetItemsProcessed(int64_t(state.iterations()) * shots);
}
BENCHMARK_CAPTURE(BM_Shots, rnd, "rnd.qh", "rnd")->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(BM_Shots, testBell, "bell.qh", "testBell")->Arg(1000);

}  // namespace
