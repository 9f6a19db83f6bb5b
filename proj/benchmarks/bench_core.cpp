#include <benchmark/benchmark.h>

#include <vector>

#include "siwalk/caps.hpp"
#include "siwalk/cov_transform.hpp"
#include "siwalk/jacobi.hpp"
#include "siwalk/lyapunov.hpp"
#include "siwalk/radial_profile.hpp"
#include "siwalk/rng.hpp"
#include "siwalk/walk.hpp"

namespace {

siwalk::SymMatrix random_spd(std::size_t d, siwalk::Rng& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  siwalk::Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  return siwalk::SymMatrix::symmetrized(g * g.transpose() + 1e-3 * siwalk::Matrix::Identity(n, n));
}

void BM_JacobiEigen(benchmark::State& state) {
  siwalk::Rng rng(1);
  const auto m = random_spd(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(siwalk::jacobi_eigen(m));
}
BENCHMARK(BM_JacobiEigen)->Arg(3)->Arg(8)->Arg(16);

void BM_ConstructTransform3d(benchmark::State& state) {
  siwalk::Rng rng(2);
  const auto m1 = random_spd(3, rng);
  const auto m2 = random_spd(3, rng);
  for (auto _ : state) benchmark::DoNotOptimize(siwalk::construct_joint_transform_3d(m1, m2));
}
BENCHMARK(BM_ConstructTransform3d);

void BM_MinimizePsiDiagonal(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  siwalk::Rng rng(3);
  std::vector<siwalk::SymMatrix> family;
  for (std::size_t k = 0; k + 1 < d; ++k) {
    siwalk::Vector v(static_cast<Eigen::Index>(d));
    for (auto& x : v) x = std::exp(4.6 * (2.0 * rng.uniform() - 1.0));
    family.push_back(siwalk::SymMatrix::diagonal(v));
  }
  for (auto _ : state) benchmark::DoNotOptimize(siwalk::minimize_psi_diagonal_unchecked(family));
}
BENCHMARK(BM_MinimizePsiDiagonal)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BuildProfile(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(siwalk::build_radial_profile(3, 0.05));
}
BENCHMARK(BM_BuildProfile)->Unit(benchmark::kMillisecond);

void BM_GammaWalkDrift(benchmark::State& state) {
  const auto profile = siwalk::build_radial_profile(3, 0.25);
  siwalk::Vector x(3);
  x << 31, -17, 8;
  for (auto _ : state) benchmark::DoNotOptimize(siwalk::gamma_walk_drift(x, 1000.0, 1e-4, profile));
}
BENCHMARK(BM_GammaWalkDrift);

void BM_GammaWalkSteps(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    siwalk::run_gamma_walk(3, 1000.0, 10'000, ++seed, [](std::size_t, const siwalk::Vector&) { return true; });
  }
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_GammaWalkSteps);

void BM_CapOwner(benchmark::State& state) {
  siwalk::Rng build(4);
  siwalk::CapBuildOptions options;
  options.verification_samples = 10'000;
  const auto caps = siwalk::build_cap_system(static_cast<std::size_t>(state.range(0)), 0.6, build, options);
  siwalk::Rng rng(5);
  siwalk::Vector x(static_cast<Eigen::Index>(caps.dim));
  for (auto _ : state) {
    for (auto& v : x) v = rng.normal();
    benchmark::DoNotOptimize(caps.owner(x));
  }
}
BENCHMARK(BM_CapOwner)->Arg(3)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
