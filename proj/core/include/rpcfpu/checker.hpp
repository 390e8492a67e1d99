// SPDX-License-Identifier: MIT
//
// Reduced-precision (9+k)-bit checker FPU: one adder/subtractor and one
// multiplier, each rounding to k fraction bits under round-to-nearest-even,
// with optional fault injection on checker nets.
//
// The checker has no divider and no square-root unit: division and square
// root are checked by reverse-multiplication at the dispatch layer.

#pragma once

#include "rpcfpu/fault.hpp"
#include "rpcfpu/float_bits.hpp"

namespace rpcfpu {

// A checker engine either produces a ReducedFloat or raises a suppression
// signal. The implicit-1 format has no zero, so total cancellation is a
// signal, not a value; likewise a result exponent outside the normal biased
// range [1, 254] signals range exit.
enum class CheckerSignal { Value, ExactZero, RangeExit };

struct CheckerOutcome {
  CheckerSignal signal = CheckerSignal::Value;
  ReducedFloat value;  // meaningful only when signal == Value

  [[nodiscard]] bool ok() const { return signal == CheckerSignal::Value; }
};

// a + b rounded to k fraction bits RNE. Throws std::invalid_argument when
// the operands' k widths differ.
[[nodiscard]] CheckerOutcome rpc_add(const ReducedFloat& a,
                                     const ReducedFloat& b,
                                     const FaultSet& faults = {});
// a - b (sign-flipped b through the same adder/subtractor).
[[nodiscard]] CheckerOutcome rpc_sub(const ReducedFloat& a,
                                     const ReducedFloat& b,
                                     const FaultSet& faults = {});
// a * b: exact (2k+2)-bit significand product, normalized (0 or 1 right
// shift), rounded RNE to k fraction bits.
[[nodiscard]] CheckerOutcome rpc_mul(const ReducedFloat& a,
                                     const ReducedFloat& b,
                                     const FaultSet& faults = {});

}  // namespace rpcfpu
