// OpenMP kernels against their serial references. On a single core the
// pairs should run at the same speed; the gap grows with thread count.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "qadapt/experiments.hpp"
#include "qadapt/shadows.hpp"

using namespace qadapt;

namespace {

struct Fixture {
  DenseState state;
  PovmDataset ds;
  Mat obs;
  explicit Fixture(std::size_t d, std::size_t n) : state(maximally_mixed(d)) {
    Rng rng(1);
    state = random_state(d, 2, rng);
    ds = make_povm_dataset(state, n, 2);
    obs = random_hermitian(d, 2.0, rng);
  }
};

const Fixture& fixture(std::size_t d) {
  static const Fixture f8(8, 100000), f32(32, 100000);
  return d == 8 ? f8 : f32;
}

void BM_SnapshotValues(benchmark::State& st) {
  const Fixture& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(snapshot_values(f.ds, f.obs));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.ds.size()));
}

void BM_SnapshotValuesSerial(benchmark::State& st) {
  const Fixture& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(snapshot_values_serial(f.ds, f.obs));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.ds.size()));
}

void BM_PovmSketch(benchmark::State& st) {
  const Fixture& f = fixture(static_cast<std::size_t>(st.range(0)));
  const PovmSampler sampler(f.state);
  for (auto _ : st) benchmark::DoNotOptimize(build_povm_sketch(sampler, 16, 1000, 3));
  st.SetItemsProcessed(st.iterations() * 16000);
}

void BM_PovmSketchSerial(benchmark::State& st) {
  const Fixture& f = fixture(static_cast<std::size_t>(st.range(0)));
  const PovmSampler sampler(f.state);
  for (auto _ : st) benchmark::DoNotOptimize(build_povm_sketch_serial(sampler, 16, 1000, 3));
  st.SetItemsProcessed(st.iterations() * 16000);
}

// Trial-parallel attack experiment, with the thread count as the argument.
void BM_AttackTrials(benchmark::State& st) {
  const int before = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(attack_experiment(2000, {400, 2000}, 16, 5));
  omp_set_num_threads(before);
}

}  // namespace

BENCHMARK(BM_SnapshotValues)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SnapshotValuesSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PovmSketch)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PovmSketchSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttackTrials)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
