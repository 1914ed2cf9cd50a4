#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "qhtt/driver.hpp"
#include "qhtt/parser.hpp"

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(QHTT_CORPUS) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void BM_Parse(benchmark::State& state) {
  std::string src = slurp("teleport.qh");
  for (auto _ : state) benchmark::DoNotOptimize(qhtt::parseProgram(src));
  state.SetBytesProcessed(int64_t(state.iterations()) * int64_t(src.size()));
}
BENCHMARK(BM_Parse);

void BM_Analyze(benchmark::State& state, const char* file) {
  std::string src = slurp(file);
  for (auto _ : state) benchmark::DoNotOptimize(qhtt::analyze(file, src, {}).status());
}
BENCHMARK_CAPTURE(BM_Analyze, hqw, "hqw.qh");
BENCHMARK_CAPTURE(BM_Analyze, bell, "bell.qh");
BENCHMARK_CAPTURE(BM_Analyze, teleport, "teleport.qh");

}  // namespace
