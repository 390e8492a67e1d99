// SPDX-License-Identifier: MIT
//
// Stuck-at fault-injection campaign engine.
//
// Runs vector batches against every selected fault site, classifies each
// experiment by comparing the faulty datapath + checker verdict against the
// golden (fault-free) run, and aggregates per-site outcome counts plus the
// magnitude statistics of undetected corruptions (UMUD percentage errors
// against the approximate maximum-percentage-error model).

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rpcfpu/fault.hpp"
#include "rpcfpu/float_bits.hpp"
#include "rpcfpu/op.hpp"
#include "rpcfpu/rpc_check.hpp"
#include "rpcfpu/softfpu.hpp"

namespace rpcfpu {

// How experiment outcomes are classified, in decision order:
//   Umuc          - the verdict is Suppressed (checking abstained; vectors
//                   are pre-filtered so the fault-free run never suppresses,
//                   hence any suppression is fault-induced).
//   Umd           - result differs from golden and the checker flagged it.
//   Umud          - result differs from golden and the checker accepted it.
//   FalsePositive - result equals golden but the checker flagged it.
//   Masked        - result equals golden and the checker accepted it.
enum class Classification { Masked, Umd, Umud, Umuc, FalsePositive };

[[nodiscard]] const char* classification_name(Classification c);

[[nodiscard]] Classification classify(const FpuResult& golden,
                                      const FpuResult& faulty,
                                      const CheckVerdict& verdict);

// |faulty - golden| / |golden| * 100, computed exactly and converted once.
// nullopt when golden is zero or either value is non-finite.
[[nodiscard]] std::optional<double> percentage_error(PackedFloat32 golden,
                                                     PackedFloat32 faulty);

// Approximate maximum percentage error admitted by an accepted check:
// 1 * 2^-k * 100 for add/sub, 3 * 2^-k * 100 for mul/div/sqrt.
[[nodiscard]] double approximate_mpe(OpKind op, int k);

enum class SiteSelection { All, Named, Sample };

struct ExperimentConfig {
  OpKind op = OpKind::Add;
  int k = 7;
  SiteSelection selection = SiteSelection::Sample;
  std::vector<std::string> named_sites;  // for Named (site_name syntax)
  int sample_count = 200;                // for Sample
  int vectors_per_fault = 1000;
  std::uint64_t input_seed = 1;
  std::uint64_t site_seed = 1;           // for Sample
  // Stuck values to exercise per site; default both polarities.
  std::vector<int> stuck_values{0, 1};
  // When true, also run one fault-free control batch (reported with site
  // name "none"); it must come out 100% Masked.
  bool include_fault_free = false;
};

struct SiteOutcome {
  std::string site;  // site_name(), or "none" for the control batch
  int stuck_value = 0;
  std::uint64_t masked = 0, umd = 0, umud = 0, umuc = 0, fp = 0;
  std::vector<double> umud_pct_errors;  // one entry per UMUD experiment
  [[nodiscard]] std::uint64_t total() const {
    return masked + umd + umud + umuc + fp;
  }
};

struct CampaignReport {
  ExperimentConfig config;
  std::vector<SiteOutcome> outcomes;
  std::uint64_t experiments = 0;
};

// Runs the campaign. Vector batches are deterministic in input_seed and are
// identical across sites (same batch re-run under each fault), so site rows
// are directly comparable. Vectors are pre-filtered to fault-free NoError
// checks. Thread count comes from RPC_FPU_THREADS (default 1); sites are
// sharded statically so results are identical for any thread count.
[[nodiscard]] CampaignReport run_campaign(const ExperimentConfig& cfg);

struct UmudStats {
  std::uint64_t count = 0;
  double q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  // Fraction of UMUD errors exceeding the approximate MPE for the
  // campaign's op and k.
  double outlier_fraction = 0.0;
};

[[nodiscard]] UmudStats umud_stats(const CampaignReport& report);

// Serialization. CSV columns:
//   site, stuck_value, masked, umd, umud, umuc, fp
[[nodiscard]] std::string report_json(const CampaignReport& report);
[[nodiscard]] std::string report_csv(const CampaignReport& report);

}  // namespace rpcfpu
