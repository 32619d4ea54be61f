// Serial reference vs OpenMP for the parallel kernels.

#include <benchmark/benchmark.h>

#include <memory>

#include "crackfreq/frequency.hpp"
#include "crackfreq/spectrum.hpp"

using namespace crackfreq;

namespace {

const CrackGeometry flat = build_geometry(CrackProfile::flat(2), 1.0);

std::shared_ptr<const SlitMesh> disk() {
  static const auto m = std::make_shared<const SlitMesh>(make_slit_disk(1.0, 9, 0.5, 128));
  return m;
}

Execution mode(const benchmark::State& s) { return s.range(0) ? Execution::parallel : Execution::serial; }

void BM_assemble(benchmark::State& state) {
  AssemblyOptions opts{true, mode(state)};
  const Potential f = Potential::radial_power(1.0, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(*disk(), flat, f, opts));
}

void BM_trace(benchmark::State& state) {
  const auto m = disk();
  const CrackHarmonic u{1, 1.0};
  const Field field = interpolate(m, [&](const Eigen::Vector2d& p, Side s) { return value(u, p, s); });
  std::vector<double> radii;
  for (int j = 11; j >= 0; --j) radii.push_back(0.8 * std::pow(0.75, j));
  TraceOptions opts;
  opts.exec = mode(state);
  opts.assembly.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(compute_trace(field, flat, Potential::constant(1.0), radii, opts));
}

void BM_surface(benchmark::State& state) {
  const SlitMesh m = make_slit_sphere(96);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_surface(m, mode(state)));
}

void BM_geometry_audit(benchmark::State& state) {
  const CrackGeometry g = build_geometry(CrackProfile::polynomial(3, {{1.0, {2}}}, 2.0), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(audit_geometry(g, 20000, 1, mode(state)));
}

}  // namespace

BENCHMARK(BM_assemble)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trace)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_surface)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_geometry_audit)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
