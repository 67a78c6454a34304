#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "forge/edit_distance.hpp"
#include "forge/text_normalizer.hpp"

namespace {

std::u32string random_hangul(std::mt19937_64& rng, std::size_t n) {
  std::u32string s(n, U' ');
  for (auto& c : s) c = static_cast<char32_t>(0xAC00 + rng() % 11172);
  return s;
}

void BM_Levenshtein(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_hangul(rng, n);
  const auto b = random_hangul(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(forge::levenshtein(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Levenshtein)->RangeMultiplier(4)->Range(8, 512)->Complexity(benchmark::oNSquared);

void BM_CharErrorRate(benchmark::State& state) {
  const std::string ref = "예술가가 되자. 지금 당장! 입니다.";
  const std::string hyp = "예술가가 되자 지금 당장 입니다";
  for (auto _ : state) benchmark::DoNotOptimize(forge::char_error_rate(ref, hyp));
}
BENCHMARK(BM_CharErrorRate);

void BM_NormalizeText(benchmark::State& state) {
  const std::string raw = "(박수) 오늘 제가 얘기할 주제는요, \"예술가가 되자. 지금 당장!\" 입니다. [웃음]";
  for (auto _ : state) benchmark::DoNotOptimize(forge::normalize_text(raw));
}
BENCHMARK(BM_NormalizeText);

}  // namespace
