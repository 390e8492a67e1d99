// SPDX-License-Identifier: MIT
//
// Micro-benchmarks for the FPU model, the reduced-precision check path, the
// exact oracle, and the fault-campaign engine. All inputs are pre-generated
// with fixed seeds so runs are comparable.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "rpcfpu/campaign.hpp"
#include "rpcfpu/fault.hpp"
#include "rpcfpu/float_bits.hpp"
#include "rpcfpu/op.hpp"
#include "rpcfpu/oracle.hpp"
#include "rpcfpu/rpc_check.hpp"
#include "rpcfpu/softfpu.hpp"

namespace {

using namespace rpcfpu;

constexpr std::size_t kBatch = 4096;

// Normal operand with a mid-range exponent so binary ops stay in range.
PackedFloat32 mid_normal(std::mt19937_64& rng) {
  const std::uint32_t frac = static_cast<std::uint32_t>(rng()) & 0x007FFFFFu;
  const std::uint32_t exp = 96 + static_cast<std::uint32_t>(rng() % 64);
  const std::uint32_t sign = static_cast<std::uint32_t>(rng() & 1u);
  return PackedFloat32{(sign << 31) | (exp << 23) | frac};
}

std::vector<std::pair<PackedFloat32, PackedFloat32>> operand_batch(
    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<PackedFloat32, PackedFloat32>> out;
  out.reserve(kBatch);
  for (std::size_t i = 0; i < kBatch; ++i) {
    PackedFloat32 a = mid_normal(rng);
    PackedFloat32 b = mid_normal(rng);
    out.emplace_back(a, b);
  }
  return out;
}

OpKind op_from_arg(std::int64_t arg) {
  return kAllOps[static_cast<std::size_t>(arg)];
}

void BM_FpuOp(benchmark::State& state) {
  const OpKind op = op_from_arg(state.range(0));
  const auto batch = operand_batch(0xBE9C0001);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = batch[i];
    benchmark::DoNotOptimize(fpu_op(op, a, b));
    i = (i + 1) % kBatch;
  }
  state.SetLabel(op_name(op));
}
BENCHMARK(BM_FpuOp)->DenseRange(0, 4);

void BM_CheckPath(benchmark::State& state) {
  const OpKind op = op_from_arg(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const auto batch = operand_batch(0xBE9C0002);
  std::vector<FpuResult> results;
  results.reserve(kBatch);
  for (const auto& [a, b] : batch) results.push_back(fpu_op(op, a, b));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = batch[i];
    benchmark::DoNotOptimize(check(op, a, b, results[i], k));
    i = (i + 1) % kBatch;
  }
  state.SetLabel(op_name(op) + " k=" + std::to_string(k));
}
BENCHMARK(BM_CheckPath)
    ->Args({0, 7})
    ->Args({2, 7})
    ->Args({3, 7})
    ->Args({4, 7})
    ->Args({2, 1})
    ->Args({2, 23});

void BM_FaultedCheckPath(benchmark::State& state) {
  const int k = 7;
  const auto batch = operand_batch(0xBE9C0003);
  std::vector<FpuResult> results;
  results.reserve(kBatch);
  for (const auto& [a, b] : batch)
    results.push_back(fpu_op(OpKind::Mul, a, b));
  const std::vector<FaultSpec> specs = {
      FaultSpec{parse_site("cmp.diff_out[3]", k), 1}};
  const FaultSet faults = FaultSet::compile(specs, k);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = batch[i];
    benchmark::DoNotOptimize(check(OpKind::Mul, a, b, results[i], k, faults));
    i = (i + 1) % kBatch;
  }
}
BENCHMARK(BM_FaultedCheckPath);

void BM_OracleTrace(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto batch = operand_batch(0xBE9C0004);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = batch[i];
    benchmark::DoNotOptimize(trace(OpKind::Mul, a, b, k));
    i = (i + 1) % kBatch;
  }
}
BENCHMARK(BM_OracleTrace)->Arg(7)->Arg(23)->Unit(benchmark::kMicrosecond);

void BM_CampaignRow(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.op = OpKind::Mul;
  cfg.k = 7;
  cfg.selection = SiteSelection::Named;
  cfg.named_sites = {"fpu.prod_acc[20]"};
  cfg.vectors_per_fault = static_cast<int>(state.range(0));
  cfg.stuck_values = {0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_campaign(cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CampaignRow)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Diff4Search(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        search_diff4_mul(7, static_cast<std::uint64_t>(state.range(0)), 42));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Diff4Search)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
