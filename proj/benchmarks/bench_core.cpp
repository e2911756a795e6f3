#include <svbarrier/fd.hpp>
#include <svbarrier/fft.hpp>
#include <svbarrier/greens.hpp>
#include <svbarrier/lmvf.hpp>
#include <svbarrier/specfun.hpp>
#include <svbarrier/transform.hpp>

#include <benchmark/benchmark.h>

#include <vector>

namespace {

svb::HestonModel table_model(double horizon) {
    svb::ModelInputs in;
    in.theta_k = 0.3;
    in.sigma_k = 0.2;
    in.r = 0.02;
    in.q = 0.01;
    in.horizon = horizon;
    return svb::build_model(in);
}

void bm_riccati_walk(benchmark::State& state) {
    const auto model = table_model(1.0);
    const svb::SqrtP sp{svb::Branch::MinusIXi, 25.0};
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    for (auto _ : state) {
        auto path = svb::riccati_path(model, sp, grid);
        benchmark::DoNotOptimize(path);
    }
}
BENCHMARK(bm_riccati_walk);

void bm_bessel_scaled(benchmark::State& state) {
    const svb::cdouble z{35.0, 12.0};
    for (auto _ : state) {
        auto v = svb::bessel_i_scaled(1.0, z);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_bessel_scaled);

void bm_kummer_scaled(benchmark::State& state) {
    const svb::cdouble x{18.0, -9.0};
    for (auto _ : state) {
        auto v = svb::kummer_m_scaled(3.5, 2.0, x);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_kummer_scaled);

void bm_green(benchmark::State& state) {
    for (auto _ : state) {
        auto v = svb::green(svb::cdouble{0.05, 0.01}, svb::cdouble{0.7, 0.0},
                            svb::cdouble{0.6, 0.1}, 1.5);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_green);

void bm_kernel_column(benchmark::State& state) {
    const auto model = table_model(0.25);
    const auto barrier = svb::PiecewiseCurve::constant(40.0);
    svb::AssemblyOptions opts;
    opts.quad.upsilon = 500.0;
    for (auto _ : state) {
        auto v = svb::i_kl_xi(model, barrier, 0.05, 0.25, 0.5, 0.1, 0.45, 4.0,
                              double(state.range(0)), opts);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_kernel_column)->Arg(5)->Arg(50)->Arg(400);

void bm_assemble_small(benchmark::State& state) {
    const auto model = table_model(0.25);
    const auto barrier = svb::PiecewiseCurve::constant(40.0);
    const auto grid = svb::make_collocation_grid(0.0, 0.25, 4, 0.5, 0.1, 2, 4.0);
    svb::AssemblyOptions opts;
    opts.quad.upsilon = 50.0;
    for (auto _ : state) {
        auto sys = svb::assemble(model, barrier, grid, opts);
        benchmark::DoNotOptimize(sys);
    }
}
BENCHMARK(bm_assemble_small)->Unit(benchmark::kMillisecond);

void bm_fd_solve(benchmark::State& state) {
    const auto model = table_model(0.25);
    const svb::BarrierContract contract{60.0, 0.25, svb::PiecewiseCurve::constant(40.0),
                                        svb::BarrierKind::DownOutPut};
    const svb::MarketState market{60.0, 0.5, 0.0};
    svb::FdGridSpec spec;
    spec.n_s = 40;
    spec.n_v = 40;
    for (auto _ : state) {
        auto sol = svb::fd_solve(model, contract, market, spec);
        benchmark::DoNotOptimize(sol);
    }
}
BENCHMARK(bm_fd_solve)->Unit(benchmark::kMillisecond);

void bm_fft_put(benchmark::State& state) {
    const svb::ConstHestonParams p{0.9, 0.1, 0.3, -0.7, 0.5, 0.02, 0.01, 60.0};
    for (auto _ : state) {
        auto v = svb::fft_vanilla_put(p, 60.0, 1.0);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_fft_put)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
