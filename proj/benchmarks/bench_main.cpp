#include "qnr/qnr.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

void BM_Sieve(benchmark::State& state) {
    const auto limit = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(qnr::sieve_primes(limit).count());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sieve)->Arg(1'000'000)->Arg(10'000'000)->Unit(benchmark::kMillisecond);

void BM_Jacobi(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> args(4096);
    for (auto& [a, n] : args) {
        a = rng();
        n = rng() | 1;
    }
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& [a, n] = args[i++ & 4095];
        benchmark::DoNotOptimize(qnr::jacobi(a, n));
    }
}
BENCHMARK(BM_Jacobi);

void BM_Scan(benchmark::State& state) {
    const auto table = qnr::sieve_primes(1 << 20);
    qnr::ScanConfig cfg;
    cfg.x = static_cast<std::uint64_t>(state.range(0));
    cfg.k_max = 2;
    cfg.z_list = {qnr::Rational(3, 2)};
    cfg.pattern_n = 4;
    cfg.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(qnr::scan(cfg, table).sum_m);
}
BENCHMARK(BM_Scan)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_MuK(benchmark::State& state) {
    const auto table = qnr::sieve_primes(1 << 16);
    for (auto _ : state) benchmark::DoNotOptimize(qnr::mu_k(static_cast<std::size_t>(state.range(0)), 1e-12, table));
}
BENCHMARK(BM_MuK)->Arg(1)->Arg(50);

void BM_MAverage(benchmark::State& state) {
    const auto table = qnr::sieve_primes(1 << 16);
    for (auto _ : state) benchmark::DoNotOptimize(qnr::m_average(1e-12, table));
}
BENCHMARK(BM_MAverage);

} // namespace

BENCHMARK_MAIN();
