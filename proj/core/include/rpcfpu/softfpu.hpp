// SPDX-License-Identifier: MIT
//
// Bit-exact full-precision binary32 FPU (add, sub, mul, div, sqrt) under
// round-to-nearest-even, with every internal datapath value exposed as a
// named fault-injectable net (see fault.hpp).
//
// Fault-free results are bit-identical to reference IEEE-754 binary32
// arithmetic, flags included. Non-normal operands and results are handled
// IEEE-correctly; the FPU itself never suppresses anything — suppression is
// a checker-layer concern.

#pragma once

#include "rpcfpu/fault.hpp"
#include "rpcfpu/float_bits.hpp"
#include "rpcfpu/op.hpp"

namespace rpcfpu {

enum class FpuFlag : unsigned {
  Overflow = 1u << 0,
  Underflow = 1u << 1,
  Invalid = 1u << 2,
  DivideByZero = 1u << 3,
  Inexact = 1u << 4,
};

struct FpuFlags {
  unsigned bits = 0;

  [[nodiscard]] constexpr bool has(FpuFlag f) const {
    return (bits & static_cast<unsigned>(f)) != 0;
  }
  constexpr void set(FpuFlag f) { bits |= static_cast<unsigned>(f); }
  // Flags that make the checker suppress: everything except Inexact.
  [[nodiscard]] constexpr bool any_exception() const {
    return (bits & ~static_cast<unsigned>(FpuFlag::Inexact)) != 0;
  }
  friend constexpr bool operator==(FpuFlags, FpuFlags) = default;
};

[[nodiscard]] std::string flags_to_string(FpuFlags flags);

struct FpuResult {
  PackedFloat32 value;
  FpuFlags flags;
  friend constexpr bool operator==(const FpuResult&, const FpuResult&) = default;
};

// a + b. With faults, the specified nets are forced on every drive.
[[nodiscard]] FpuResult fpu_add(PackedFloat32 a, PackedFloat32 b,
                                const FaultSet& faults = {});
// a - b (b's sign is flipped at the datapath input).
[[nodiscard]] FpuResult fpu_sub(PackedFloat32 a, PackedFloat32 b,
                                const FaultSet& faults = {});
[[nodiscard]] FpuResult fpu_mul(PackedFloat32 a, PackedFloat32 b,
                                const FaultSet& faults = {});
[[nodiscard]] FpuResult fpu_div(PackedFloat32 a, PackedFloat32 b,
                                const FaultSet& faults = {});
// sqrt of the single operand b.
[[nodiscard]] FpuResult fpu_sqrt(PackedFloat32 b, const FaultSet& faults = {});

// Dispatch by OpKind; for Sqrt only b is read.
[[nodiscard]] FpuResult fpu_op(OpKind op, PackedFloat32 a, PackedFloat32 b,
                               const FaultSet& faults = {});

}  // namespace rpcfpu
