// SPDX-License-Identifier: MIT
//
// The exact-arithmetic oracle: rounding-error axioms, per-term bound
// verification, exponent-case classification, corner-case generators and
// the multiplication pattern table, rounding-interaction cases, and the
// directed Diff search.

#include "rpcfpu/oracle.hpp"

#include <gtest/gtest.h>

#include <json.hpp>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "gen.hpp"
#include "rpcfpu/dyadic.hpp"
#include "rpcfpu/rpc_check.hpp"
#include "rpcfpu/softfpu.hpp"

namespace rpcfpu {
namespace {

PackedFloat32 w(std::uint32_t word) { return PackedFloat32{word}; }

// Draw until trace() accepts (normal, exception-free, checker in range).
OracleTrace trace_random(CheckClass cls, int k, std::mt19937_64& rng) {
  for (;;) {
    const auto [a, b] = testgen::draw_for_class(cls, rng);
    const OpKind op = testgen::op_for_class(cls);
    try {
      return trace(op, a, b, k);
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
}

TEST(OracleTrace, DirectedOnePlusOne) {
  const OracleTrace t = trace(OpKind::Add, w(0x3F800000u), w(0x3F800000u), 7);
  EXPECT_EQ(t.check_class, CheckClass::SSADD);
  EXPECT_EQ(t.exact_result, Dyadic(2));
  EXPECT_FALSE(t.exact_result_is_enclosure);
  EXPECT_TRUE(t.delta_full.is_zero());
  EXPECT_TRUE(t.delta_checker.is_zero());
  EXPECT_TRUE(t.axiom4_ok);
  EXPECT_TRUE(t.axiom5_ok);
  EXPECT_TRUE(t.m_star.is_zero());
  // Both result exponents sit one above the max input exponent.
  EXPECT_EQ(t.e_max, 0);
  EXPECT_EQ(t.exponent_case, ExponentCase::CommonCase2);
  EXPECT_EQ(t.diff_predicted, 0);
  EXPECT_EQ(t.diff_predicted, compute_diff(t.reference, t.checker_out));
}

TEST(OracleTrace, RejectsNonTraceableInputs) {
  // NaN operand.
  EXPECT_THROW((void)trace(OpKind::Add, w(0x7FC00000u), w(0x3F800000u), 7),
               std::invalid_argument);
  // Zero result.
  EXPECT_THROW((void)trace(OpKind::Sub, w(0x3F800000u), w(0x3F800000u), 7),
               std::invalid_argument);
  // Overflowing result.
  EXPECT_THROW((void)trace(OpKind::Mul, w(0x7F7FFFFFu), w(0x40000000u), 7),
               std::invalid_argument);
  // Bad k.
  EXPECT_THROW((void)trace(OpKind::Add, w(0x3F800000u), w(0x3F800000u), 0),
               std::invalid_argument);
  EXPECT_THROW((void)trace(OpKind::Add, w(0x3F800000u), w(0x3F800000u), 24),
               std::invalid_argument);
}

TEST(OracleTrace, AxiomsHoldOnRandomTraces) {
  // FPU rounding error <= 2^-24 and checker rounding error <= 2^-(k+1),
  // decided in exact arithmetic, across every class and width.
  std::mt19937_64 rng(0xA410Eu);
  const Dyadic add_zero(0);
  for (int k : {1, 7, 23}) {
    const Dyadic ell = dyadic_pow2(-k) - dyadic_pow2(-23);
    for (CheckClass cls : testgen::kAllClasses) {
      for (int t = 0; t < 800; ++t) {
        const OracleTrace tr = trace_random(cls, k, rng);
        EXPECT_TRUE(tr.axiom4_ok);
        EXPECT_TRUE(tr.axiom5_ok);
        EXPECT_TRUE(tr.delta_checker.abs() <= dyadic_pow2(-k - 1));
        // Truncated-off parts obey 0 <= M^L <= 2^-k - 2^-23.
        for (const auto& [role, ml] : tr.m_low_terms) {
          EXPECT_TRUE(ml >= add_zero) << role;
          EXPECT_TRUE(ml <= ell) << role;
        }
        // The cross term exists only for the mul-class checks.
        const bool mul_class = cls == CheckClass::MUL ||
                               cls == CheckClass::DIV ||
                               cls == CheckClass::SQRT;
        if (!mul_class) {
          EXPECT_TRUE(tr.m_star.is_zero());
        } else {
          EXPECT_TRUE(tr.m_star >= add_zero);
          // M* = MH_x*ML_y + ML_x*MH_y + ML_x*ML_y <= (4 - t)*ell; the
          // coarse cap 4*ell is enough to catch scale bugs. At k = 23 the
          // truncated parts vanish, so ell and M* are both exactly zero.
          EXPECT_TRUE(tr.m_star <= ell.ldexp(2));
        }
      }
    }
  }
}

TEST(OracleTrace, MatchesCheckLayerOnRandomInputs) {
  // diff_predicted must equal both compute_diff on the oracle's fields and
  // the decision layer's verdict for the same inputs.
  std::mt19937_64 rng(0xD1FFu);
  for (int k : {1, 4, 7, 12, 16, 23}) {
    for (CheckClass cls : testgen::kAllClasses) {
      for (int t = 0; t < 300; ++t) {
        const OracleTrace tr = trace_random(cls, k, rng);
        EXPECT_EQ(tr.diff_predicted, compute_diff(tr.reference, tr.checker_out));
        const CheckVerdict v = check(tr.op, tr.a, tr.b, tr.c, k);
        ASSERT_EQ(v.status, CheckStatus::NoError);
        EXPECT_EQ(*v.diff, tr.diff_predicted);
        EXPECT_EQ(v.check_class, tr.check_class);
      }
    }
  }
}

TEST(OracleTrace, ExponentCasesAllReachableAndAntiCornerPinsDiff) {
  std::mt19937_64 rng(0xECA5E5u);
  std::map<ExponentCase, int> seen;
  for (int t = 0; t < 20000; ++t) {
    const CheckClass cls =
        testgen::kAllClasses[rng() % (sizeof(testgen::kAllClasses) /
                                      sizeof(testgen::kAllClasses[0]))];
    const OracleTrace tr = trace_random(cls, 1, rng);  // k=1: corners common
    ++seen[tr.exponent_case];
    if (tr.exponent_case == ExponentCase::AntiCornerCase)
      EXPECT_EQ(tr.diff_predicted, -1);
    if (tr.exponent_case == ExponentCase::CornerCase)
      EXPECT_GE(tr.diff_predicted, 1);
  }
  EXPECT_GT(seen[ExponentCase::CommonCase1], 0);
  EXPECT_GT(seen[ExponentCase::CommonCase2], 0);
  EXPECT_GT(seen[ExponentCase::CornerCase], 0);
  EXPECT_GT(seen[ExponentCase::AntiCornerCase], 0);
}

TEST(OracleTrace, ExponentCaseNames) {
  EXPECT_EQ(exponent_case_name(ExponentCase::CommonCase1), "common-1");
  EXPECT_EQ(exponent_case_name(ExponentCase::CommonCase2), "common-2");
  EXPECT_EQ(exponent_case_name(ExponentCase::CornerCase), "corner");
  EXPECT_EQ(exponent_case_name(ExponentCase::AntiCornerCase), "anti-corner");
}

// ---------------------------------------------------------------------------
// Per-term bounds.
// ---------------------------------------------------------------------------

TEST(TermBounds, HoldAcrossClassesAndWidths) {
  std::mt19937_64 rng(0x7E53u);
  for (int k : {1, 7, 16, 23}) {
    for (CheckClass cls : testgen::kAllClasses) {
      int applicable = 0;
      for (int t = 0; t < 500; ++t) {
        const OracleTrace tr = trace_random(cls, k, rng);
        const TermBoundReport rep = verify_term_bounds(tr);
        if (tr.exponent_case == ExponentCase::CornerCase ||
            tr.exponent_case == ExponentCase::AntiCornerCase) {
          EXPECT_FALSE(rep.applicable);
          continue;
        }
        ++applicable;
        ASSERT_TRUE(rep.applicable);
        EXPECT_TRUE(rep.identity_ok) << trace_to_json(tr);
        for (const TermBound& tb : rep.terms) {
          EXPECT_TRUE(tb.pass) << tb.term << " " << trace_to_json(tr);
          EXPECT_TRUE(tb.value >= tb.lo);
          EXPECT_TRUE(tb.value <= tb.hi);
        }
        EXPECT_TRUE(rep.all_pass());
      }
      EXPECT_GT(applicable, 0) << "k=" << k;
    }
  }
}

TEST(TermBounds, IdentityIsExactSum) {
  const OracleTrace tr = trace(OpKind::Mul, w(0x40490FDBu), w(0x3EAAAAABu), 7);
  const TermBoundReport rep = verify_term_bounds(tr);
  ASSERT_TRUE(rep.applicable);
  const Dyadic lhs = tr.term1 + tr.term2 + tr.term3;
  const Dyadic rhs = Dyadic(tr.reference.significand()).ldexp(-tr.reference.k) -
                     Dyadic(tr.checker_out.significand()).ldexp(-tr.checker_out.k);
  EXPECT_EQ(lhs, rhs);
}

// ---------------------------------------------------------------------------
// Corner generators.
// ---------------------------------------------------------------------------

TEST(CornerAdd, HitsHaveDiffExactlyOne) {
  for (int k : {4, 7, 12}) {
    CornerAddGenerator gen(k, 0xADDCu);
    std::set<CheckClass> classes;
    int hits = 0;
    for (int i = 0; i < 240 && hits < 200; ++i) {
      const auto hit = gen.next();
      if (!hit.has_value()) continue;
      ++hits;
      EXPECT_EQ(hit->tr.exponent_case, ExponentCase::CornerCase);
      EXPECT_EQ(hit->tr.diff_predicted, 1);
      classes.insert(hit->tr.check_class);
      // Cross-check with the decision layer.
      const CheckVerdict v = check(hit->op, hit->a, hit->b, hit->tr.c, k);
      ASSERT_EQ(v.status, CheckStatus::NoError);
      EXPECT_EQ(*v.diff, 1);
    }
    ASSERT_EQ(hits, 200) << "k=" << k;
    // Both forward add classes are exercised.
    EXPECT_TRUE(classes.count(CheckClass::SSADD)) << "k=" << k;
    EXPECT_TRUE(classes.count(CheckClass::DSSUB)) << "k=" << k;
  }
}

TEST(CornerAdd, FamilyEmptyAtFullWidth) {
  // At k=23 the checker sees every fraction bit, so a reference one binade
  // above the checker output cannot leave Diff inside the bound; the
  // family is empty and the generator reports budget exhaustion.
  CornerAddGenerator gen(23, 0xADDCu);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(gen.next().has_value());
  EXPECT_GT(gen.attempts(), 0u);
  EXPECT_EQ(gen.hits(), 0u);
}

TEST(CornerMul, PatternTableAtMidWidths) {
  // All six residual rows are realizable at moderate k; each hit must obey
  // the pattern table and the Diff mapping exactly.
  const std::map<std::pair<int, int>, int> expected_diff = {
      {{1, 3}, 1}, {{2, 2}, 2}, {{2, 3}, 1},
      {{3, 1}, 3}, {{3, 2}, 2}, {{3, 3}, 2}};
  for (int k : {7, 12}) {
    CornerMulGenerator gen(k, 0x3116u);
    std::map<std::pair<int, int>, int> rows;
    int hits = 0;
    for (int i = 0; i < 120 && hits < 96; ++i) {
      const auto hit = gen.next();
      if (!hit.has_value()) continue;
      ++hits;
      const MulCornerPattern p = mul_corner_pattern(hit->tr);
      ASSERT_TRUE(p.structure_ok) << trace_to_json(hit->tr);
      ASSERT_TRUE(p.table_ok) << trace_to_json(hit->tr);
      ASSERT_TRUE(p.ef_ok);
      const auto it = expected_diff.find({p.ab, p.cd});
      ASSERT_NE(it, expected_diff.end())
          << "unexpected row (" << p.ab << "," << p.cd << ")";
      EXPECT_EQ(p.diff, it->second);
      EXPECT_EQ(hit->tr.diff_predicted, p.diff);
      EXPECT_EQ(hit->tr.exponent_case, ExponentCase::CornerCase);
      ++rows[{p.ab, p.cd}];
    }
    EXPECT_EQ(rows.size(), 6u) << "k=" << k;
    // Diff = 3 only arises from the (3,1) row; make sure it was seen.
    EXPECT_GT((rows[{3, 1}]), 0) << "k=" << k;
  }
}

TEST(CornerMul, EmptyRowsAreReportedHonestly) {
  // k=4: the (3,1) and (3,3) rows are unreachable (the residual cannot
  // reach 3 ulps there); the cursor advances through them with nullopt.
  CornerMulGenerator gen4(4, 0x3116u);
  std::set<std::pair<int, int>> rows4;
  int nullopts = 0;
  for (int i = 0; i < 12; ++i) {
    const auto hit = gen4.next();
    if (!hit) {
      ++nullopts;
      continue;
    }
    const MulCornerPattern p = mul_corner_pattern(hit->tr);
    rows4.insert({p.ab, p.cd});
  }
  EXPECT_EQ(nullopts, 4);  // two cycles x two empty rows
  EXPECT_TRUE(rows4.count({1, 3}));
  EXPECT_TRUE(rows4.count({2, 2}));
  EXPECT_TRUE(rows4.count({2, 3}));
  EXPECT_TRUE(rows4.count({3, 2}));
  EXPECT_FALSE(rows4.count({3, 1}));
  EXPECT_FALSE(rows4.count({3, 3}));

  // k=23 and k=2 have no corner-mul family at all.
  CornerMulGenerator gen23(23, 1);
  for (int i = 0; i < 6; ++i) EXPECT_FALSE(gen23.next().has_value());
  CornerMulGenerator gen2(2, 1);
  for (int i = 0; i < 6; ++i) EXPECT_FALSE(gen2.next().has_value());
}

TEST(CornerMul, PatternRejectsNonCornerTraces) {
  const OracleTrace t = trace(OpKind::Mul, w(0x3F800000u), w(0x3F800000u), 7);
  const MulCornerPattern p = mul_corner_pattern(t);
  EXPECT_FALSE(p.structure_ok);
  EXPECT_EQ(p.ab, -1);
}

// ---------------------------------------------------------------------------
// Rounding-interaction cases and the Diff search.
// ---------------------------------------------------------------------------

TEST(RoundingCases, DirectedExactProduct) {
  // 1.0 * 1.0: no low parts (I), no FPU carry (III), checker rounds down
  // (V) -- the all-exact combination.
  const OracleTrace t = trace(OpKind::Mul, w(0x3F800000u), w(0x3F800000u), 7);
  ASSERT_EQ(t.exponent_case, ExponentCase::CommonCase1);
  const RoundingCases rc = classify_rounding_cases(t);
  EXPECT_EQ(rc.step1, 1);
  EXPECT_EQ(rc.step2a, 3);
  EXPECT_EQ(rc.step2b, 5);
  EXPECT_EQ(rc.combo_index(), 0);
  EXPECT_EQ(rc.name(), "I-III-V");
}

TEST(RoundingCases, NamesAndIndexing) {
  EXPECT_EQ((RoundingCases{2, 4, 6}).name(), "II-IV-VI");
  EXPECT_EQ((RoundingCases{2, 4, 6}).combo_index(), 7);
  EXPECT_EQ((RoundingCases{1, 4, 5}).name(), "I-IV-V");
  EXPECT_EQ((RoundingCases{1, 4, 5}).combo_index(), 2);
  EXPECT_EQ((RoundingCases{2, 3, 5}).name(), "II-III-V");
  EXPECT_EQ((RoundingCases{2, 3, 5}).combo_index(), 4);
  EXPECT_EQ((RoundingCases{2, 4, 5}).name(), "II-IV-V");
  EXPECT_EQ((RoundingCases{2, 4, 5}).combo_index(), 6);
}

TEST(RoundingCases, RequiresMulCommonCase1) {
  const OracleTrace add_t =
      trace(OpKind::Add, w(0x3F800000u), w(0x3F800000u), 7);
  EXPECT_THROW((void)classify_rounding_cases(add_t), std::invalid_argument);
}

TEST(RoundingCases, ExactOccurrenceFacts) {
  // Occurrence facts frozen from the exact oracle: II-IV-V never occurs --
  // when the FPU's rounding carries into the top-k window while the low
  // parts sum to at least 2^-k, the checker product's own low part must
  // exceed half a checker ulp, which forces the checker to round up (VI).
  // II-III-V, by contrast, is a common combination.
  std::mt19937_64 rng(0xCA5E5u);
  std::uint64_t ii_iv_v = 0, ii_iii_v = 0, cc1 = 0;
  for (int t = 0; t < 30000; ++t) {
    const OracleTrace tr = trace_random(CheckClass::MUL, 7, rng);
    if (tr.exponent_case != ExponentCase::CommonCase1) continue;
    ++cc1;
    const RoundingCases rc = classify_rounding_cases(tr);
    if (rc.combo_index() == 6) ++ii_iv_v;
    if (rc.combo_index() == 4) ++ii_iii_v;
  }
  ASSERT_GT(cc1, 5000u);
  EXPECT_EQ(ii_iv_v, 0u);
  EXPECT_GT(ii_iii_v, 0u);
}

TEST(Diff4Search, BoundHoldsAndReportIsDeterministic) {
  const Diff4SearchReport r1 = search_diff4_mul(7, 200000, 0xD1FF4u);
  EXPECT_EQ(r1.k, 7);
  EXPECT_EQ(r1.budget, 200000u);
  EXPECT_LE(r1.max_diff, 3);
  EXPECT_EQ(r1.out_of_range_count, 0u);
  EXPECT_GT(r1.cc1_samples, 0u);
  EXPECT_GT(r1.cc2_samples, 0u);
  // The impossible interaction II-IV-V never shows; II-III-V does.
  EXPECT_EQ(r1.combo_counts[6], 0u);
  EXPECT_GT(r1.combo_counts[4], 0u);
  ASSERT_TRUE(r1.combo_witness[4].has_value());
  // A witness reproduces its combination under the full dyadic trace.
  const auto& wit = *r1.combo_witness[4];
  const OracleTrace tw = trace(OpKind::Mul, w(wit.a), w(wit.b), 7);
  EXPECT_EQ(classify_rounding_cases(tw).combo_index(), 4);

  // Histogram totals match the sample counts and stay within [-1, 3].
  std::uint64_t hist_total = 0;
  for (std::uint64_t h : r1.diff_hist) hist_total += h;
  EXPECT_EQ(hist_total, r1.cc1_samples + r1.cc2_samples + r1.corner_samples +
                            r1.anti_corner_samples);
  EXPECT_EQ(r1.diff_hist[5], 0u);  // Diff == 4 never observed

  const Diff4SearchReport r2 = search_diff4_mul(7, 200000, 0xD1FF4u);
  EXPECT_EQ(r2.max_diff, r1.max_diff);
  EXPECT_EQ(r2.diff_hist, r1.diff_hist);
  EXPECT_EQ(r2.combo_counts, r1.combo_counts);
  EXPECT_EQ(r2.cc1_samples, r1.cc1_samples);
}

TEST(TraceJson, ParsesAndCarriesCoreFields) {
  const OracleTrace t = trace(OpKind::Mul, w(0x40490FDBu), w(0x3EAAAAABu), 7);
  const nlohmann::json j = nlohmann::json::parse(trace_to_json(t));
  EXPECT_EQ(j.at("op"), "mul");
  EXPECT_EQ(j.at("k"), 7);
  EXPECT_TRUE(j.contains("exact_result"));
  EXPECT_TRUE(j.contains("delta_full"));
  EXPECT_TRUE(j.contains("delta_checker"));
  EXPECT_TRUE(j.contains("m_star"));
  EXPECT_TRUE(j.contains("diff_predicted"));
}

}  // namespace
}  // namespace rpcfpu
