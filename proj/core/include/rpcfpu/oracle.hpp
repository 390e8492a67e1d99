// SPDX-License-Identifier: MIT
//
// Exact-arithmetic verification oracle.
//
// Reconstructs, with exact dyadic rationals, the error-analysis quantities
// behind the checker's Diff bounds: unrounded results, rounding errors
// (delta terms), the cross-term M*, the boxed per-term bounds of the
// common-case identities, exponent-case classification, and directed
// generators for the corner cases (result exponent one above the checker's)
// plus the dedicated upper-bound search for multiplication.
//
// No binary floating point is used for any bound decision. For division and
// square root the true unrounded result is not a dyadic rational; those two
// fields (exact_result, delta_full) carry tight 96-fraction-bit enclosures,
// clearly marked, while every pass/fail decision is made through exactly
// equivalent dyadic forms (e.g. |M_B*delta_C| tested as
// |M_A*2^w - M_B*M_C| <= 2^-24 * M_B).

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rpcfpu/dyadic.hpp"
#include "rpcfpu/float_bits.hpp"
#include "rpcfpu/op.hpp"
#include "rpcfpu/rpc_check.hpp"
#include "rpcfpu/softfpu.hpp"

namespace rpcfpu {

// Exponent relationship of one checking event, where e_base is the natural
// exponent of the checking expression (max input exponent for the add
// classes, exponent sum for the mul classes):
//   CommonCase1     E_out == E_ref == e_base
//   CommonCase2     E_out == E_ref == e_base + 1
//   CornerCase      E_ref == e_base + 1, E_out == e_base (reference rounded
//                   up across the binade, checker stayed below)
//   AntiCornerCase  E_out == e_base + 1, E_ref == e_base (checker rounded
//                   up across the binade, reference stayed below; Diff is
//                   exactly -1 here)
enum class ExponentCase { CommonCase1, CommonCase2, CornerCase, AntiCornerCase };

[[nodiscard]] std::string exponent_case_name(ExponentCase c);

// One fully reconstructed checking event on normal, exception-free inputs.
struct OracleTrace {
  OpKind op = OpKind::Add;
  int k = 7;
  PackedFloat32 a, b;
  FpuResult c;  // fault-free FPU result (independently recomputed here)

  CheckClass check_class = CheckClass::SSADD;
  // Magnitude-space checking relation: |ref| = |x| + |y| for the add
  // classes, |ref| = |x| * |y| for the mul classes.
  OperandRole ref_role = OperandRole::C;

  // Exact value the FPU rounded (enclosure for div/sqrt, see header note).
  Dyadic exact_result;
  bool exact_result_is_enclosure = false;
  // FPU rounding error at result-exponent scale (enclosure for div/sqrt).
  Dyadic delta_full;
  bool delta_full_is_enclosure = false;
  bool axiom4_ok = false;  // |delta_full| <= 2^-24, decided exactly
  // Checker rounding error at checker-output-exponent scale. Always exact.
  Dyadic delta_checker;
  bool axiom5_ok = false;  // |delta_checker| <= 2^-k-1, decided exactly

  // Cross term of the mul-class identities; zero for the add classes.
  Dyadic m_star;
  // M^L of each Normal operand role involved, keyed "A"/"B"/"C".
  std::map<std::string, Dyadic> m_low_terms;

  ExponentCase exponent_case = ExponentCase::CommonCase1;
  // Base exponent of the case relations: max input exponent for the add
  // classes, E_A+E_B for mul, E_B+E_C for div, 2*E_C for sqrt.
  int e_max = 0;

  // Boxed terms of the common-case identity, with the exponent-case weight
  // factors already applied, so that term1 + term2 + term3 ==
  // (M_ref^H - M_out) exactly. The identity holds for the two common cases
  // only (it needs E_out == E_ref); the fields are still populated for the
  // corner cases for inspection.
  Dyadic term1, term2, term3;

  // Oracle-computed reduced reference and checker output, and the Diff they
  // imply. diff_predicted always equals compute_diff(reference, checker_out).
  ReducedFloat reference, checker_out;
  int diff_predicted = 0;
};

// Build a trace. Preconditions (throws std::invalid_argument otherwise):
// Normal operands, fault-free semantics, Normal exception-free result, and a
// checker that neither cancels to zero nor leaves the exponent range.
[[nodiscard]] OracleTrace trace(OpKind op, PackedFloat32 a, PackedFloat32 b,
                                int k);

// ---------------------------------------------------------------------------
// Per-term bound verification of the common-case identities.
// ---------------------------------------------------------------------------
struct TermBound {
  std::string term;  // "term1"/"term2"/"term3"
  Dyadic value;
  Dyadic lo, hi;  // stated inclusive interval for this class and case
  bool pass = false;
};

struct TermBoundReport {
  bool applicable = false;  // false for corner-case traces
  bool identity_ok = false; // term1+term2+term3 == M_ref^H - M_out, exact
  std::array<TermBound, 3> terms;
  [[nodiscard]] bool all_pass() const {
    return applicable && identity_ok && terms[0].pass && terms[1].pass &&
           terms[2].pass;
  }
};

[[nodiscard]] TermBoundReport verify_term_bounds(const OracleTrace& t);

// ---------------------------------------------------------------------------
// Directed corner-case generators (result exponent = checker exponent + 1).
// Both construct operands backward from the required output patterns and
// verify every candidate through trace() before emitting it, reporting
// attempts vs hits.
// ---------------------------------------------------------------------------
struct CornerHit {
  OpKind op = OpKind::Add;
  PackedFloat32 a, b;
  OracleTrace tr;
};

class CornerAddGenerator {
 public:
  CornerAddGenerator(int k, std::uint64_t seed);
  // Next verified corner hit (SSADD or DSSUB, alternating), or nullopt if
  // the per-call attempt budget is exhausted (the family is empty at k=23).
  [[nodiscard]] std::optional<CornerHit> next();
  [[nodiscard]] std::uint64_t attempts() const { return attempts_; }
  [[nodiscard]] std::uint64_t hits() const { return hits_; }

 private:
  int k_;
  std::mt19937_64 rng_;
  bool use_sub_ = false;
  std::uint64_t attempts_ = 0;
  std::uint64_t hits_ = 0;
};

class CornerMulGenerator {
 public:
  CornerMulGenerator(int k, std::uint64_t seed);
  // Next verified corner hit. Successive hits cycle through the six
  // realizable (ab, cd) rows of the pattern table; nullopt means the
  // per-call attempt budget ran out on the current row (the cursor still
  // advances, so a row that is empty at this k cannot stall the stream).
  // k < 3 has no corner family at all (the output pattern needs k-2
  // one-bits).
  [[nodiscard]] std::optional<CornerHit> next();
  [[nodiscard]] std::uint64_t attempts() const { return attempts_; }
  [[nodiscard]] std::uint64_t hits() const { return hits_; }

 private:
  int k_;
  std::mt19937_64 rng_;
  int row_cursor_ = 0;
  std::uint64_t attempts_ = 0;
  std::uint64_t hits_ = 0;
};

// Pattern fields of a multiplication corner hit. ab = integer part, in
// checker-ulp units, of the exact residual M_C(unrounded) - M'_C(rounded):
// the amount that must be added to the k-bit checker output to reach the
// unrounded product (this folds the checker's rounding error into the
// cross term, which is what makes the enumeration exact -- the bare cross
// term M* alone never reaches 3 ulps on the corner hyperbola). cd = low 2
// bits of the checker fraction (whose top k-2 bits must be all-ones),
// e = the result fraction left in the top-k window (0 or 1), f = the next
// result bit below that window.
// Whenever the unrounded product crosses the binade, ab+cd >= 4 holds
// exactly and Diff == 4 + e' - cd where e'f' are the low bits of
// ab+cd = 1e'f'; ef != 11b always. Hits where only the rounded result
// crosses (unrounded product just below 2) sit outside the diagram and
// report table_ok == false, though their Diff == 4 - cd still never
// exceeds 3 (cd == 0 is unreachable).
struct MulCornerPattern {
  int ab = -1;  // -1 when the residual is undefined (not a mul corner)
  int cd = 0, e = 0, f = 0;
  int diff = 0;
  bool structure_ok = false;  // f'_C top k-2 bits all ones; f_C^H <= 1
  bool table_ok = false;      // 4 <= ab+cd <= 6 and diff matches the row
  bool ef_ok = false;         // (e,f) != (1,1)
};

[[nodiscard]] MulCornerPattern mul_corner_pattern(const OracleTrace& t);

// ---------------------------------------------------------------------------
// Rounding-interaction case analysis for multiplication (common case 1).
//
// With P = M_A*M_B (unrounded full product), P' = M_A^H*M_B^H (unrounded
// checker product), both split at k fraction bits, u = (P')^L and
// v = (M*)^L:
//   step1: I  if u+v < 2^-k (no carry between low and high parts),
//          II otherwise.
//   step2a: IV if the FPU's 23-bit rounding carried into the top-k window
//           (M_C^H != P^H), III otherwise.
//   step2b: VI if the checker rounded up (M'_C = (P')^H + 2^-k), V if it
//           rounded down. Ties are classified by what the rounder actually
//           did under round-to-nearest-even.
// ---------------------------------------------------------------------------
struct RoundingCases {
  int step1 = 1;   // 1 = I,   2 = II
  int step2a = 3;  // 3 = III, 4 = IV
  int step2b = 5;  // 5 = V,   6 = VI
  [[nodiscard]] int combo_index() const {  // 0..7
    return (step1 - 1) * 4 + (step2a - 3) * 2 + (step2b - 5);
  }
  [[nodiscard]] std::string name() const;  // e.g. "II-III-V"
};

// Exact classification. Precondition: mul trace in CommonCase1 (throws
// std::invalid_argument otherwise).
[[nodiscard]] RoundingCases classify_rounding_cases(const OracleTrace& t);

// ---------------------------------------------------------------------------
// Randomized + directed search for Diff == 4 in multiplication.
// ---------------------------------------------------------------------------
struct Diff4Witness {
  std::uint32_t a = 0, b = 0;
  int diff = 0;
  int combo_index = -1;  // -1 when not a common-case-1 sample
};

struct Diff4SearchReport {
  int k = 0;
  std::uint64_t budget = 0;
  std::uint64_t cc1_samples = 0, cc2_samples = 0, corner_samples = 0,
                anti_corner_samples = 0;
  int max_diff = 0;
  Diff4Witness max_diff_witness;
  // Histogram of Diff in [-1, 4]; index = diff + 1. Values outside land in
  // out_of_range_count (none are expected).
  std::array<std::uint64_t, 6> diff_hist{};
  std::uint64_t out_of_range_count = 0;
  // Case-combination counts for common-case-1 samples, indexed by
  // RoundingCases::combo_index().
  std::array<std::uint64_t, 8> combo_counts{};
  // First witness observed per combination (if any).
  std::array<std::optional<Diff4Witness>, 8> combo_witness;
};

// Half the budget is uniform random sampling over normal significands; the
// other half is directed at the rounding-boundary regimes (checker product
// low part near 2^-k-1 and 2^-k, cross-term low part near 2^-k - 2^-24).
// The hot loop is exact integer arithmetic at scale 2^-46; a sparse subset
// of samples is re-verified against the dyadic trace path.
[[nodiscard]] Diff4SearchReport search_diff4_mul(int k, std::uint64_t budget,
                                                 std::uint64_t seed);

// JSON dump of a trace (rational fields as {mant, exp2} pairs) for
// debugging bound violations.
[[nodiscard]] std::string trace_to_json(const OracleTrace& t);

}  // namespace rpcfpu
