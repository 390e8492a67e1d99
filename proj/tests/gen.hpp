// SPDX-License-Identifier: MIT
//
// Deterministic operand generators shared by the unit tests and the
// acceptance gate. All randomness flows from std::mt19937_64 through
// modulo reduction only, so streams are identical on every platform.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>

#include "rpcfpu/float_bits.hpp"
#include "rpcfpu/op.hpp"
#include "rpcfpu/rpc_check.hpp"
#include "rpcfpu/softfpu.hpp"

namespace rpcfpu::testgen {

inline std::uint32_t rand_u32(std::mt19937_64& rng) {
  return static_cast<std::uint32_t>(rng());
}

// Uniform integer in [lo, hi] (inclusive).
inline int rand_range(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// A random Normal word with biased exponent in [exp_lo, exp_hi] and the
// given sign (or a random sign when sign < 0).
inline PackedFloat32 rand_normal(std::mt19937_64& rng, int exp_lo = 1,
                                 int exp_hi = 254, int sign = -1) {
  const std::uint32_t s =
      sign < 0 ? rand_u32(rng) & 1u : static_cast<std::uint32_t>(sign);
  const auto e = static_cast<std::uint32_t>(rand_range(rng, exp_lo, exp_hi));
  const std::uint32_t f = rand_u32(rng) & 0x007FFFFFu;
  return PackedFloat32{(s << 31) | (e << 23) | f};
}

inline OpKind op_for_class(CheckClass c) {
  switch (c) {
    case CheckClass::SSADD:
    case CheckClass::DSADD:
      return OpKind::Add;
    case CheckClass::SSSUB:
    case CheckClass::DSSUB:
      return OpKind::Sub;
    case CheckClass::MUL:
      return OpKind::Mul;
    case CheckClass::DIV:
      return OpKind::Div;
    case CheckClass::SQRT:
      return OpKind::Sqrt;
  }
  return OpKind::Add;
}

inline constexpr CheckClass kAllClasses[] = {
    CheckClass::SSADD, CheckClass::DSSUB, CheckClass::SSSUB, CheckClass::DSADD,
    CheckClass::MUL,   CheckClass::DIV,   CheckClass::SQRT};

// Draw an operand pair shaped to land in the requested check class with a
// Normal, exception-free result most of the time. Sign patterns fix the
// class exactly; exponents are ranged so that mul/div results usually stay
// in the normal range (callers still reject the occasional exception).
inline std::pair<PackedFloat32, PackedFloat32> draw_for_class(
    CheckClass c, std::mt19937_64& rng) {
  switch (c) {
    case CheckClass::SSADD:   // add, equal signs
    case CheckClass::SSSUB: { // sub, equal signs
      const int s = static_cast<int>(rng() & 1u);
      return {rand_normal(rng, 1, 254, s), rand_normal(rng, 1, 254, s)};
    }
    case CheckClass::DSADD:   // add, opposite signs
    case CheckClass::DSSUB: { // sub, opposite signs
      const int s = static_cast<int>(rng() & 1u);
      return {rand_normal(rng, 1, 254, s), rand_normal(rng, 1, 254, 1 - s)};
    }
    case CheckClass::MUL: {
      // Unbiased exponents e_a + e_b in [-126, 127].
      const int ea = rand_range(rng, -126, 127);
      const int lo = std::max(-126, -126 - ea);
      const int hi = std::min(127, 127 - ea);
      const int eb = rand_range(rng, lo, hi);
      return {rand_normal(rng, ea + 127, ea + 127),
              rand_normal(rng, eb + 127, eb + 127)};
    }
    case CheckClass::DIV: {
      // Unbiased exponents e_a - e_b in [-126, 127].
      const int ea = rand_range(rng, -126, 127);
      const int lo = std::max(-126, ea - 127);
      const int hi = std::min(127, ea + 126);
      const int eb = rand_range(rng, lo, hi);
      return {rand_normal(rng, ea + 127, ea + 127),
              rand_normal(rng, eb + 127, eb + 127)};
    }
    case CheckClass::SQRT: {
      const PackedFloat32 b = rand_normal(rng, 1, 254, 0);
      return {b, b};  // the a port is ignored by sqrt
    }
  }
  return {PackedFloat32{0x3F800000u}, PackedFloat32{0x3F800000u}};
}

}  // namespace rpcfpu::testgen
