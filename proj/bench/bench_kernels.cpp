// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "mtb/green.hpp"
#include "mtb/kernels.hpp"

using namespace mtb;

namespace {

std::vector<double> random_field(std::size_t n, double scale) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> f(n);
    for (double& x : f) x = u(rng);
    return f;
}

void BM_sum_serial(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    auto f = random_field(static_cast<std::size_t>(n) * n, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(serial::field_sum(f));
    st.SetItemsProcessed(st.iterations() * f.size());
}
void BM_sum_omp(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    auto f = random_field(static_cast<std::size_t>(n) * n, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(field_sum(f, n));
    st.SetItemsProcessed(st.iterations() * f.size());
}

void BM_dot_serial(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    auto f = random_field(static_cast<std::size_t>(n) * n, 1.0);
    auto g = random_field(static_cast<std::size_t>(n) * n, 2.0);
    for (auto _ : st) benchmark::DoNotOptimize(serial::field_dot(f, g));
    st.SetItemsProcessed(st.iterations() * f.size());
}
void BM_dot_omp(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    auto f = random_field(static_cast<std::size_t>(n) * n, 1.0);
    auto g = random_field(static_cast<std::size_t>(n) * n, 2.0);
    for (auto _ : st) benchmark::DoNotOptimize(field_dot(f, g, n));
    st.SetItemsProcessed(st.iterations() * f.size());
}

void BM_nonlinearity_serial(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    auto v = random_field(static_cast<std::size_t>(n) * n, 1.0);
    std::vector<double> g;
    std::vector<double> gp;
    for (auto _ : st) benchmark::DoNotOptimize(serial::nonlinearity(v, 8.0, g, &gp));
    st.SetItemsProcessed(st.iterations() * v.size());
}
void BM_nonlinearity_omp(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    auto v = random_field(static_cast<std::size_t>(n) * n, 1.0);
    std::vector<double> g;
    std::vector<double> gp;
    for (auto _ : st) benchmark::DoNotOptimize(nonlinearity(v, 8.0, g, &gp));
    st.SetItemsProcessed(st.iterations() * v.size());
}

// Green's function sampled at grid nodes, offset so no node hits the pole
void BM_green_nodes_serial(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    ThetaGreen green(TorusGeometry(1.0, 1.0));
    const double h = 1.0 / n;
    std::vector<double> out;
    for (auto _ : st) {
        serial::sample_nodes(n, n, h, h, [&](Vec2 x) { return green.value(x + Vec2{0.5 * h, 0.5 * h}); }, out);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * out.size());
}
void BM_green_nodes_omp(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    ThetaGreen green(TorusGeometry(1.0, 1.0));
    const double h = 1.0 / n;
    std::vector<double> out;
    for (auto _ : st) {
        sample_nodes(n, n, h, h, [&](Vec2 x) { return green.value(x + Vec2{0.5 * h, 0.5 * h}); }, out);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * out.size());
}

}  // namespace

BENCHMARK(BM_sum_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_sum_omp)->Arg(256)->Arg(1024);
BENCHMARK(BM_dot_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_dot_omp)->Arg(256)->Arg(1024);
BENCHMARK(BM_nonlinearity_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_nonlinearity_omp)->Arg(256)->Arg(1024);
BENCHMARK(BM_green_nodes_serial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_green_nodes_omp)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
