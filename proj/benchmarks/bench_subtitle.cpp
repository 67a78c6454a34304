#include <string>

#include <benchmark/benchmark.h>

#include "forge/subtitle.hpp"

namespace {

std::string make_srt(int cues) {
  std::string out;
  for (int k = 0; k < cues; ++k) {
    const int t = 1000 * k;
    out += std::to_string(k + 1) + "\n" + forge::format_timestamp(forge::TimeMs(t)) + " --> " +
           forge::format_timestamp(forge::TimeMs(t + 900)) + "\n오늘 제가 얘기할 주제는요\n\n";
  }
  return out;
}

void BM_ParseSrt(benchmark::State& state) {
  const std::string text = make_srt(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forge::parse_srt(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseSrt)->Arg(10)->Arg(300)->Arg(3000);

}  // namespace
