// SPDX-License-Identifier: MIT
//
// The reduced-precision-checking decision layer: classify the operation and
// operand sign pattern, dispatch forward or reverse checking, compute the
// integer Diff, apply per-class bounds, and handle suppression.

#pragma once

#include <optional>
#include <string>

#include "rpcfpu/checker.hpp"
#include "rpcfpu/fault.hpp"
#include "rpcfpu/float_bits.hpp"
#include "rpcfpu/op.hpp"
#include "rpcfpu/softfpu.hpp"

namespace rpcfpu {

// The seven check classes. SSADD/DSSUB and MUL use forward checking (the
// checker recomputes the operation on truncated operands); SSSUB, DSADD,
// DIV, and SQRT use reverse checking (the checker inverts the operation
// using the truncated result and compares against a truncated input).
enum class CheckClass { SSADD, DSSUB, SSSUB, DSADD, MUL, DIV, SQRT };

[[nodiscard]] std::string check_class_name(CheckClass c);

struct DiffBounds {
  int lb = -1;
  int ub = 1;
};

// Inclusive per-class bounds: [-1, 1] for the add/sub classes, [-1, 3] for
// MUL/DIV/SQRT.
[[nodiscard]] DiffBounds bounds_for(CheckClass c);

enum class CheckStatus { NoError, ErrorDetected, Suppressed };
enum class SuppressionReason {
  Exception,           // the FPU raised overflow/underflow/invalid/div-by-zero
  NonStandardOperand,  // an operand or the result is denorm/infinity/NaN
  ZeroResult,          // the FPU result is an exact zero
  CheckerRangeExit,    // the checker signalled range exit or exact zero
};

[[nodiscard]] std::string check_status_name(CheckStatus s);
[[nodiscard]] std::string suppression_reason_name(SuppressionReason r);

struct CheckVerdict {
  CheckStatus status = CheckStatus::NoError;
  std::optional<int> diff;  // absent when Suppressed
  bool sign_match = false;
  CheckClass check_class = CheckClass::SSADD;
  std::optional<SuppressionReason> suppression_reason;
};

// Which value each checker port / the comparator reference is wired to.
enum class OperandRole { A, B, C };

// The dispatch decision: which engine runs, what feeds its two ports (with
// an optional sign flip on the right port, i.e. effective subtraction), and
// which truncated value the checker output is compared against.
struct CheckPlan {
  CheckClass check_class = CheckClass::SSADD;
  enum class Engine { AddSub, Mul } engine = Engine::AddSub;
  OperandRole lhs = OperandRole::A;
  OperandRole rhs = OperandRole::B;
  bool subtract = false;          // true: engine computes lhs - rhs
  OperandRole reference = OperandRole::C;
};

// Classify (op, sign pattern) and produce the plan. Dispatch table:
//   SSADD / DSSUB        forward:  A^H +/- B^H -> C', reference C^H
//   SSSUB, S_A=S_B=S_C   reverse:  C^H + B^H -> A',   reference A^H
//   SSSUB, S_A=S_B!=S_C  reverse:  A^H - C^H -> B',   reference B^H
//   DSADD, S_A=S_C!=S_B  reverse:  C^H - B^H -> A',   reference A^H
//   DSADD, S_A!=S_C=S_B  reverse:  C^H - A^H -> B',   reference B^H
//   MUL                  forward:  A^H * B^H -> C',   reference C^H
//   DIV                  reverse:  C^H * B^H -> A',   reference A^H
//   SQRT                 reverse:  C^H * C^H -> B',   reference B^H
// Signs are read from the packed words; a, b, c must be Normal.
[[nodiscard]] CheckPlan classify_check(OpKind op, PackedFloat32 a,
                                       PackedFloat32 b, PackedFloat32 c);

// Diff = unsigned{exp_bits, fraction_k}(reference)
//      - unsigned{exp_bits, fraction_k}(checker_out),
// in signed arithmetic wide enough for 8+k+1 bits. When the exponents are
// equal this equals (M_ref^H - M_out) * 2^k.
// Throws std::invalid_argument when the operands' k widths differ.
[[nodiscard]] int compute_diff(const ReducedFloat& reference,
                               const ReducedFloat& checker_out);

// Full check of one FPU operation. Suppressed when: an operand or the result
// is non-Normal; the FPU raised Overflow/Underflow/Invalid/DivideByZero; or
// the checker signalled range exit / exact zero. Otherwise runs the plan,
// compares signs, computes Diff through the comparator nets, and applies
// bounds_for. checker_faults perturb checker and comparator nets only.
// For Sqrt the radicand is b and a is ignored.
[[nodiscard]] CheckVerdict check(OpKind op, PackedFloat32 a, PackedFloat32 b,
                                 const FpuResult& fpu_result, int k,
                                 const FaultSet& checker_faults = {});

// One-object JSON serialization:
// {"op","k","class","status","diff","sign_match","suppression_reason"}.
[[nodiscard]] std::string verdict_to_json(OpKind op, int k,
                                          const CheckVerdict& v);

}  // namespace rpcfpu
