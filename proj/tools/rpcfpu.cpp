// SPDX-License-Identifier: MIT
//
// rpcfpu — command-line front end: single-shot checks, bounds-verification
// sweeps, corner-case suites, fault campaigns, and MPE tables.
//
// Exit codes: check → 0 NoError/Suppressed, 1 ErrorDetected, 2 usage;
// verify-bounds → 0 iff zero violations; campaign → 2 on unwritable output;
// everything else → 0 on success, 2 on usage errors.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpcfpu/campaign.hpp"
#include "rpcfpu/fault.hpp"
#include "rpcfpu/float_bits.hpp"
#include "rpcfpu/op.hpp"
#include "rpcfpu/oracle.hpp"
#include "rpcfpu/rpc_check.hpp"
#include "rpcfpu/softfpu.hpp"

namespace {

using nlohmann::json;
using namespace rpcfpu;

std::optional<std::uint32_t> parse_hex32(const std::string& text) {
  std::string_view s = text;
  if (s.size() >= 2 && (s.substr(0, 2) == "0x" || s.substr(0, 2) == "0X"))
    s.remove_prefix(2);
  if (s.empty() || s.size() > 8) return std::nullopt;
  std::uint32_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else return std::nullopt;
    v = (v << 4) | static_cast<std::uint32_t>(d);
  }
  return v;
}

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const int k = std::stoi(item);
    if (k < 1 || k > 23)
      throw CLI::ValidationError("--k-list", "k must be in [1, 23]");
    ks.push_back(k);
  }
  if (ks.empty()) throw CLI::ValidationError("--k-list", "empty k list");
  return ks;
}

// Draw one random operand pair for an op. Full 32-bit patterns: non-normal
// events are exercised too (they must come back Suppressed, never a crash).
std::pair<PackedFloat32, PackedFloat32> draw_pair(std::mt19937_64& rng) {
  return {PackedFloat32{static_cast<std::uint32_t>(rng())},
          PackedFloat32{static_cast<std::uint32_t>(rng())}};
}

// Atomic write: temp file in the target directory, then rename.
bool write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::error_code ec;
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << content;
    if (!out.flush()) return false;
  }
  std::filesystem::rename(tmp, path, ec);
  return !ec;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------
int run_check(OpKind op, std::uint32_t a_word, std::uint32_t b_word, int k) {
  const PackedFloat32 a{a_word}, b{b_word};
  const FpuResult r = fpu_op(op, a, b);
  const CheckVerdict v = check(op, a, b, r, k);
  std::printf("%s\n", verdict_to_json(op, k, v).c_str());

  try {
    const OracleTrace t = trace(op, a, b, k);
    json summary{{"result_word", t.c.value.word},
                 {"exponent_case", exponent_case_name(t.exponent_case)},
                 {"diff", t.diff_predicted},
                 {"check_class", check_class_name(t.check_class)},
                 {"axiom4_ok", t.axiom4_ok},
                 {"axiom5_ok", t.axiom5_ok}};
    const TermBoundReport tb = verify_term_bounds(t);
    summary["term_bounds"] =
        tb.applicable ? (tb.all_pass() ? "pass" : "FAIL") : "corner-case";
    std::printf("%s\n", summary.dump().c_str());
  } catch (const std::invalid_argument&) {
    std::printf("{\"trace\":\"not applicable (suppressed or non-normal)\"}\n");
  }

  switch (v.status) {
    case CheckStatus::ErrorDetected: return 1;
    case CheckStatus::NoError:
    case CheckStatus::Suppressed: return 0;
  }
  return 2;
}

// ---------------------------------------------------------------------------
// verify-bounds
// ---------------------------------------------------------------------------
struct SweepTotals {
  std::uint64_t violations = 0;
};

void sweep_random(OpKind op, int k, std::uint64_t n, std::uint64_t seed,
                  SweepTotals& totals) {
  std::mt19937_64 rng(seed ^ (0x100000001b3ull * (static_cast<int>(op) + 1)) ^
                      (0x9e3779b97f4a7c15ull * static_cast<unsigned>(k)));
  const DiffBounds db =
      bounds_for(op == OpKind::Add || op == OpKind::Sub ? CheckClass::SSADD
                                                        : CheckClass::MUL);
  std::map<int, std::uint64_t> histogram;
  std::uint64_t noerror = 0, suppressed = 0, flagged = 0;
  std::uint64_t traced = 0, trace_fail = 0;
  const std::uint64_t trace_target = std::min<std::uint64_t>(n, 2000);

  for (std::uint64_t i = 0; i < n; ++i) {
    const auto [a, b] = draw_pair(rng);
    const FpuResult r = fpu_op(op, a, b);
    const CheckVerdict v = check(op, a, b, r, k);
    if (v.status == CheckStatus::Suppressed) {
      ++suppressed;
      continue;
    }
    if (v.diff) ++histogram[*v.diff];
    if (v.status == CheckStatus::ErrorDetected) {
      ++flagged;  // fault-free ErrorDetected is a soundness violation
      continue;
    }
    ++noerror;
    if (traced < trace_target) {
      ++traced;
      const OracleTrace t = trace(op, a, b, k);
      const TermBoundReport tb = verify_term_bounds(t);
      const bool corner = t.exponent_case == ExponentCase::CornerCase ||
                          t.exponent_case == ExponentCase::AntiCornerCase;
      if (t.diff_predicted != *v.diff || (!corner && !tb.all_pass()))
        ++trace_fail;
    }
  }

  std::uint64_t out_of_range = flagged;
  for (const auto& [d, c] : histogram)
    if (d < db.lb || d > db.ub) out_of_range += c;

  std::printf("op=%-4s k=%-2d trials=%llu noerror=%llu suppressed=%llu "
              "flagged=%llu traced=%llu trace_fail=%llu histogram:",
              op_name(op).c_str(), k, static_cast<unsigned long long>(n),
              static_cast<unsigned long long>(noerror),
              static_cast<unsigned long long>(suppressed),
              static_cast<unsigned long long>(flagged),
              static_cast<unsigned long long>(traced),
              static_cast<unsigned long long>(trace_fail));
  for (const auto& [d, c] : histogram)
    std::printf(" %d:%llu", d, static_cast<unsigned long long>(c));
  std::printf("\n");

  totals.violations += out_of_range + trace_fail;
}

void sweep_corner_add(int k, std::uint64_t seed, int hit_target,
                      SweepTotals& totals) {
  CornerAddGenerator gen(k, seed);
  int hits = 0, deviations = 0, dry = 0;
  while (hits < hit_target && dry < 16) {
    const auto h = gen.next();
    if (!h) {
      ++dry;
      continue;
    }
    ++hits;
    if (h->tr.diff_predicted != 1) ++deviations;
  }
  std::printf("corner add k=%-2d hits=%d attempts=%llu deviations=%d%s\n", k,
              hits, static_cast<unsigned long long>(gen.attempts()),
              deviations, hits < hit_target ? " (budget exhausted)" : "");
  totals.violations += static_cast<std::uint64_t>(deviations);
}

void sweep_corner_mul(int k, std::uint64_t seed, int hit_target,
                      SweepTotals& totals) {
  CornerMulGenerator gen(k, seed);
  std::map<std::pair<int, int>, std::uint64_t> rows;
  std::map<int, std::uint64_t> diffs;
  int hits = 0, deviations = 0, dry = 0;
  while (hits < hit_target && dry < 16) {
    const auto h = gen.next();
    if (!h) {
      ++dry;
      continue;
    }
    ++hits;
    const MulCornerPattern p = mul_corner_pattern(h->tr);
    rows[{p.ab, p.cd}]++;
    diffs[h->tr.diff_predicted]++;
    if (!(p.structure_ok && p.table_ok && p.ef_ok)) ++deviations;
  }
  std::printf("corner mul k=%-2d hits=%d attempts=%llu deviations=%d rows:", k,
              hits, static_cast<unsigned long long>(gen.attempts()),
              deviations);
  for (const auto& [rc, c] : rows)
    std::printf(" (%d,%d):%llu", rc.first, rc.second,
                static_cast<unsigned long long>(c));
  std::printf(" diffs:");
  for (const auto& [d, c] : diffs)
    std::printf(" %d:%llu", d, static_cast<unsigned long long>(c));
  std::printf("%s\n", hits < hit_target ? " (budget exhausted)" : "");
  totals.violations += static_cast<std::uint64_t>(deviations);
}

std::string combo_name(int index) {
  RoundingCases rc;
  rc.step1 = 1 + (index >> 2);
  rc.step2a = 3 + ((index >> 1) & 1);
  rc.step2b = 5 + (index & 1);
  return rc.name();
}

void sweep_diff4(int k, std::uint64_t budget, std::uint64_t seed,
                 SweepTotals& totals) {
  const Diff4SearchReport rep = search_diff4_mul(k, budget, seed);
  std::printf("diff4 k=%-2d budget=%llu max_diff=%d cc1=%llu cc2=%llu "
              "corner=%llu anti=%llu out_of_range=%llu combos:",
              k, static_cast<unsigned long long>(budget), rep.max_diff,
              static_cast<unsigned long long>(rep.cc1_samples),
              static_cast<unsigned long long>(rep.cc2_samples),
              static_cast<unsigned long long>(rep.corner_samples),
              static_cast<unsigned long long>(rep.anti_corner_samples),
              static_cast<unsigned long long>(rep.out_of_range_count));
  for (int i = 0; i < 8; ++i)
    if (rep.combo_counts[i] != 0)
      std::printf(" %s:%llu", combo_name(i).c_str(),
                  static_cast<unsigned long long>(rep.combo_counts[i]));
  std::printf("\n");
  if (rep.max_diff > 3 || rep.out_of_range_count != 0) ++totals.violations;
}

// ---------------------------------------------------------------------------
// campaign
// ---------------------------------------------------------------------------
ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("op")) {
    const auto op = parse_op(j.at("op").get<std::string>());
    if (!op) throw std::invalid_argument("config: unknown op");
    cfg.op = *op;
  }
  cfg.k = j.value("k", cfg.k);
  if (j.contains("selection")) {
    const std::string s = j.at("selection").get<std::string>();
    if (s == "all") cfg.selection = SiteSelection::All;
    else if (s == "named") cfg.selection = SiteSelection::Named;
    else if (s == "sample") cfg.selection = SiteSelection::Sample;
    else throw std::invalid_argument("config: unknown selection " + s);
  }
  if (j.contains("named_sites"))
    cfg.named_sites = j.at("named_sites").get<std::vector<std::string>>();
  cfg.sample_count = j.value("sample_count", cfg.sample_count);
  cfg.vectors_per_fault = j.value("vectors_per_fault", cfg.vectors_per_fault);
  cfg.input_seed = j.value("input_seed", cfg.input_seed);
  cfg.site_seed = j.value("site_seed", cfg.site_seed);
  if (j.contains("stuck_values"))
    cfg.stuck_values = j.at("stuck_values").get<std::vector<int>>();
  cfg.include_fault_free = j.value("include_fault_free", cfg.include_fault_free);
  return cfg;
}

int run_campaign_cmd(const std::vector<ExperimentConfig>& configs,
                     const std::string& out_dir, bool want_json,
                     bool want_csv) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  for (const ExperimentConfig& cfg : configs) {
    const CampaignReport rep = run_campaign(cfg);
    const UmudStats stats = umud_stats(rep);
    std::uint64_t masked = 0, umd = 0, umud = 0, umuc = 0, fp = 0;
    for (const SiteOutcome& o : rep.outcomes) {
      masked += o.masked;
      umd += o.umd;
      umud += o.umud;
      umuc += o.umuc;
      fp += o.fp;
    }
    std::printf("op=%-4s k=%-2d experiments=%llu masked=%llu umd=%llu "
                "umud=%llu umuc=%llu fp=%llu umud_median=%.6g "
                "umud_max=%.6g outlier_fraction=%.6g\n",
                op_name(cfg.op).c_str(), cfg.k,
                static_cast<unsigned long long>(rep.experiments),
                static_cast<unsigned long long>(masked),
                static_cast<unsigned long long>(umd),
                static_cast<unsigned long long>(umud),
                static_cast<unsigned long long>(umuc),
                static_cast<unsigned long long>(fp), stats.median, stats.max,
                stats.outlier_fraction);

    const std::string stem =
        "campaign_" + op_name(cfg.op) + "_k" + std::to_string(cfg.k);
    const std::filesystem::path base = std::filesystem::path(out_dir) / stem;
    if (want_json &&
        !write_file_atomic(base.string() + ".json", report_json(rep))) {
      std::fprintf(stderr, "error: cannot write %s.json\n",
                   base.string().c_str());
      return 2;
    }
    if (want_csv &&
        !write_file_atomic(base.string() + ".csv", report_csv(rep))) {
      std::fprintf(stderr, "error: cannot write %s.csv\n",
                   base.string().c_str());
      return 2;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-precision-checked binary32 FPU model"};
  app.require_subcommand(1);

  // --- check ---------------------------------------------------------------
  auto* check_cmd = app.add_subcommand("check", "Check one operation");
  std::string check_op_s, check_a_s, check_b_s;
  int check_k = 7;
  check_cmd->add_option("--op", check_op_s, "add|sub|mul|div|sqrt")
      ->required();
  check_cmd->add_option("--a", check_a_s, "operand A, hex32")->required();
  check_cmd->add_option("--b", check_b_s, "operand B, hex32");
  check_cmd->add_option("--k", check_k, "checker fraction bits")
      ->check(CLI::Range(1, 23));

  // --- verify-bounds ---------------------------------------------------------
  auto* vb_cmd = app.add_subcommand(
      "verify-bounds", "Random and directed Diff-bound verification");
  std::string vb_op_s = "all", vb_klist_s = "7", vb_corner = "none";
  std::uint64_t vb_n = 100000, vb_seed = 1, vb_diff4 = 0;
  int vb_corner_hits = 1000;
  vb_cmd->add_option("--op", vb_op_s, "add|sub|mul|div|sqrt|all");
  vb_cmd->add_option("--k-list", vb_klist_s, "comma-separated k values");
  vb_cmd->add_option("--n", vb_n, "random trials per (op,k)");
  vb_cmd->add_option("--seed", vb_seed, "RNG seed");
  vb_cmd->add_option("--corner", vb_corner, "add|mul|none directed suite")
      ->check(CLI::IsMember({"add", "mul", "none"}));
  vb_cmd->add_option("--corner-hits", vb_corner_hits,
                     "directed hits to collect per k");
  vb_cmd->add_option("--search-diff4", vb_diff4,
                     "budget for the Diff=4 search (0 = off)");

  // --- campaign --------------------------------------------------------------
  auto* camp_cmd = app.add_subcommand("campaign", "Fault-injection campaign");
  std::string camp_config, camp_out = ".", camp_format = "json,csv";
  std::string camp_op_s = "mul", camp_selection = "sample", camp_sites_s;
  int camp_k = 7, camp_sample = 200, camp_vectors = 1000;
  std::uint64_t camp_input_seed = 1, camp_site_seed = 1;
  bool camp_control = false;
  camp_cmd->add_option("--config", camp_config, "JSON config file");
  camp_cmd->add_option("--out", camp_out, "output directory");
  camp_cmd->add_option("--format", camp_format, "json,csv subset");
  camp_cmd->add_option("--op", camp_op_s, "add|sub|mul|div|sqrt");
  camp_cmd->add_option("--k", camp_k, "checker fraction bits")
      ->check(CLI::Range(1, 23));
  camp_cmd->add_option("--selection", camp_selection, "all|named|sample");
  camp_cmd->add_option("--sites", camp_sites_s,
                       "comma-separated site names (selection=named)");
  camp_cmd->add_option("--sample-count", camp_sample, "sites to sample");
  camp_cmd->add_option("--vectors", camp_vectors, "vectors per fault");
  camp_cmd->add_option("--input-seed", camp_input_seed, "vector RNG seed");
  camp_cmd->add_option("--site-seed", camp_site_seed, "site-sampling seed");
  camp_cmd->add_flag("--control", camp_control,
                     "include a fault-free control batch");

  // --- mpe -------------------------------------------------------------------
  auto* mpe_cmd =
      app.add_subcommand("mpe", "Approximate maximum-percentage-error table");
  std::string mpe_klist_s = "1,4,7,10,16,23";
  mpe_cmd->add_option("--k-list", mpe_klist_s, "comma-separated k values");

  // --- sites -----------------------------------------------------------------
  auto* sites_cmd = app.add_subcommand("sites", "Fault-site catalog");
  std::string sites_op_s = "all";
  int sites_k = 7;
  bool sites_names = false;
  sites_cmd->add_option("--op", sites_op_s, "add|sub|mul|div|sqrt|all");
  sites_cmd->add_option("--k", sites_k, "checker fraction bits")
      ->check(CLI::Range(1, 23));
  sites_cmd->add_flag("--names", sites_names, "print every site name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check_cmd->parsed()) {
      const auto op = parse_op(check_op_s);
      if (!op) {
        std::fprintf(stderr, "error: unknown op '%s'\n", check_op_s.c_str());
        return 2;
      }
      const auto a = parse_hex32(check_a_s);
      if (!a) {
        std::fprintf(stderr, "error: malformed hex32 '%s'\n",
                     check_a_s.c_str());
        return 2;
      }
      std::optional<std::uint32_t> b;
      if (!check_b_s.empty()) {
        b = parse_hex32(check_b_s);
        if (!b) {
          std::fprintf(stderr, "error: malformed hex32 '%s'\n",
                       check_b_s.c_str());
          return 2;
        }
      }
      // sqrt takes a single operand: --a names the radicand unless --b is
      // given explicitly (the datapath reads the radicand from port b).
      const std::uint32_t aw = *a;
      const std::uint32_t bw = b ? *b : (*op == OpKind::Sqrt ? aw : 0u);
      return run_check(*op, aw, bw, check_k);
    }

    if (vb_cmd->parsed()) {
      const std::vector<int> ks = parse_k_list(vb_klist_s);
      std::vector<OpKind> ops;
      if (vb_op_s == "all") {
        ops.assign(std::begin(kAllOps), std::end(kAllOps));
      } else {
        const auto op = parse_op(vb_op_s);
        if (!op) {
          std::fprintf(stderr, "error: unknown op '%s'\n", vb_op_s.c_str());
          return 2;
        }
        ops.push_back(*op);
      }
      SweepTotals totals;
      for (const OpKind op : ops)
        for (const int k : ks) sweep_random(op, k, vb_n, vb_seed, totals);
      for (const int k : ks) {
        if (vb_corner == "add")
          sweep_corner_add(k, vb_seed, vb_corner_hits, totals);
        else if (vb_corner == "mul")
          sweep_corner_mul(k, vb_seed, vb_corner_hits, totals);
        if (vb_diff4 > 0) sweep_diff4(k, vb_diff4, vb_seed, totals);
      }
      std::printf("violations=%llu\n",
                  static_cast<unsigned long long>(totals.violations));
      return totals.violations == 0 ? 0 : 1;
    }

    if (camp_cmd->parsed()) {
      std::vector<ExperimentConfig> configs;
      if (!camp_config.empty()) {
        std::ifstream in(camp_config);
        if (!in) {
          std::fprintf(stderr, "error: cannot read config %s\n",
                       camp_config.c_str());
          return 2;
        }
        const json j = json::parse(in);
        if (j.contains("experiments"))
          for (const json& e : j.at("experiments"))
            configs.push_back(config_from_json(e));
        else
          configs.push_back(config_from_json(j));
      } else {
        ExperimentConfig cfg;
        const auto op = parse_op(camp_op_s);
        if (!op) {
          std::fprintf(stderr, "error: unknown op '%s'\n", camp_op_s.c_str());
          return 2;
        }
        cfg.op = *op;
        cfg.k = camp_k;
        if (camp_selection == "all") cfg.selection = SiteSelection::All;
        else if (camp_selection == "named") cfg.selection = SiteSelection::Named;
        else if (camp_selection == "sample") cfg.selection = SiteSelection::Sample;
        else {
          std::fprintf(stderr, "error: unknown selection '%s'\n",
                       camp_selection.c_str());
          return 2;
        }
        std::stringstream ss(camp_sites_s);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) cfg.named_sites.push_back(item);
        cfg.sample_count = camp_sample;
        cfg.vectors_per_fault = camp_vectors;
        cfg.input_seed = camp_input_seed;
        cfg.site_seed = camp_site_seed;
        cfg.include_fault_free = camp_control;
        configs.push_back(cfg);
      }
      const bool want_json = camp_format.find("json") != std::string::npos;
      const bool want_csv = camp_format.find("csv") != std::string::npos;
      if (!want_json && !want_csv) {
        std::fprintf(stderr, "error: --format must include json and/or csv\n");
        return 2;
      }
      return run_campaign_cmd(configs, camp_out, want_json, want_csv);
    }

    if (mpe_cmd->parsed()) {
      std::printf("%-4s %-12s %-12s\n", "k", "addsub_mpe%", "mulclass_mpe%");
      for (const int k : parse_k_list(mpe_klist_s))
        std::printf("%-4d %-12.6g %-12.6g\n", k,
                    approximate_mpe(OpKind::Add, k),
                    approximate_mpe(OpKind::Mul, k));
      return 0;
    }

    if (sites_cmd->parsed()) {
      std::vector<OpKind> ops;
      if (sites_op_s == "all") {
        ops.assign(std::begin(kAllOps), std::end(kAllOps));
      } else {
        const auto op = parse_op(sites_op_s);
        if (!op) {
          std::fprintf(stderr, "error: unknown op '%s'\n", sites_op_s.c_str());
          return 2;
        }
        ops.push_back(*op);
      }
      for (const OpKind op : ops) {
        const auto fpu_sites = list_fault_sites(op);
        const auto all_sites = all_fault_sites(op, sites_k);
        std::printf("op=%-4s k=%-2d fpu_sites=%zu total_sites=%zu\n",
                    op_name(op).c_str(), sites_k, fpu_sites.size(),
                    all_sites.size());
        if (sites_names)
          for (const FaultSite& s : all_sites)
            std::printf("  %s\n", site_name(s).c_str());
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
