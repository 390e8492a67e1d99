// SPDX-License-Identifier: MIT
//
// Bit-level decomposition, packing, truncation, and operand classification
// for binary32 values and for the reduced-precision (9+k)-bit values the
// checker operates on.

#pragma once

#include <cstdint>

#include "rpcfpu/dyadic.hpp"

namespace rpcfpu {

// ---------------------------------------------------------------------------
// PackedFloat32 — a raw binary32 word with field views.
//
// Layout: sign at bit 31, biased exponent at bits 30:23, fraction at 22:0.
// For a normal value the significand is M = 1 + fraction/2^23 in [1, 2) and
// the unbiased exponent is exp_bits() - 127.
// ---------------------------------------------------------------------------
struct PackedFloat32 {
  std::uint32_t word = 0;

  [[nodiscard]] constexpr std::uint32_t sign_bit() const { return word >> 31; }
  [[nodiscard]] constexpr std::uint32_t exp_bits() const {
    return (word >> 23) & 0xFFu;
  }
  [[nodiscard]] constexpr std::uint32_t fraction() const {
    return word & 0x007FFFFFu;
  }
  // Unbiased exponent; meaningful for Normal values only.
  [[nodiscard]] constexpr int unbiased_exp() const {
    return static_cast<int>(exp_bits()) - 127;
  }
  friend constexpr bool operator==(PackedFloat32, PackedFloat32) = default;
};

// IEEE-754 binary32 field-based operand classes. Both zero encodings
// classify as Zero.
enum class OperandClass { Normal, Zero, Denorm, Infinity, NaN };

// ---------------------------------------------------------------------------
// ReducedFloat — a (9+k)-bit reduced-precision value: 1 sign bit, 8 exponent
// bits, and a k-bit fraction (1 <= k <= 23). This is the operand/result type
// of the checker datapath.
// ---------------------------------------------------------------------------
struct ReducedFloat {
  int k = 0;
  std::uint32_t sign_bit = 0;    // 0 or 1
  std::uint32_t exp_bits = 0;    // 8-bit biased exponent
  std::uint32_t fraction_k = 0;  // k-bit fraction, < 2^k

  // Concatenated {exp_bits, fraction_k} field — the (8+k)-bit unsigned
  // integer whose differences define Diff.
  [[nodiscard]] constexpr std::uint32_t ef_field() const {
    return (exp_bits << k) | fraction_k;
  }
  // Significand with the implicit leading 1 made explicit: (k+1)-bit integer
  // in [2^k, 2^(k+1)), worth M^H * 2^k.
  [[nodiscard]] constexpr std::uint32_t significand() const {
    return (1u << k) | fraction_k;
  }
  friend constexpr bool operator==(const ReducedFloat&,
                                   const ReducedFloat&) = default;
};

// Exact dyadic views of a normal value's significand: M (full), M^H (top k
// fraction bits, truncated), M^L = M - M^H (the part truncated off).
struct MantissaParts {
  Dyadic m;
  Dyadic m_h;
  Dyadic m_l;
};

// Decompose a raw 32-bit word into fields. Total function.
[[nodiscard]] PackedFloat32 unpack(std::uint32_t word);

// Assemble a word from fields. Throws std::invalid_argument if a field is
// out of range (sign > 1, exp_bits > 255, fraction >= 2^23).
[[nodiscard]] std::uint32_t pack(std::uint32_t sign_bit, std::uint32_t exp_bits,
                                 std::uint32_t fraction);

// IEEE field-based classification.
[[nodiscard]] OperandClass classify(PackedFloat32 x);
[[nodiscard]] inline bool is_normal(PackedFloat32 x) {
  return classify(x) == OperandClass::Normal;
}

// Truncate a Normal binary32 to a (9+k)-bit ReducedFloat: sign and exponent
// copied, fraction truncated (no rounding) to its top k bits.
// Throws std::invalid_argument unless x is Normal and 1 <= k <= 23.
[[nodiscard]] ReducedFloat truncate_to_reduced(PackedFloat32 x, int k);

// Exact significand decomposition of a Normal value at truncation width k:
// M = 1 + fraction/2^23, M^H = 1 + floor(fraction/2^(23-k))/2^k, M^L = M - M^H.
// Throws std::invalid_argument unless x is Normal and 1 <= k <= 23.
[[nodiscard]] MantissaParts mantissa_parts(PackedFloat32 x, int k);

}  // namespace rpcfpu
