// SPDX-License-Identifier: MIT
//
// Bit-exact binary32 FPU under round-to-nearest-even, organized as an
// explicit datapath so every intermediate value passes through a named,
// fault-injectable net (see fault.hpp). Fault-free output is verified
// bit-identical — value and flags — against hardware SSE scalar arithmetic
// in the test suite.
//
// Working representation: W is a 27-bit significand window
// [26:3] = 24-bit significand, [2] = guard, [1] = round, [0] = sticky, so
// value = W * 2^(e-26) with e the unbiased exponent. All narrowing keeps
// sticky semantics ("jam": shifted-out bits OR into bit 0). Buses clip to
// their catalog widths after every fault drive, as hardware would.

#include "rpcfpu/softfpu.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace rpcfpu {

namespace {

constexpr std::uint32_t kQuietBit = 0x00400000u;
constexpr std::uint32_t kIndefiniteNaN = 0xFFC00000u;

// format_select lines.
constexpr std::uint64_t kSelZero = 1u << 0;
constexpr std::uint64_t kSelInf = 1u << 1;
constexpr std::uint64_t kSelNaN = 1u << 2;
constexpr std::uint64_t kSelDenorm = 1u << 3;

[[nodiscard]] constexpr std::uint64_t mask_bits(int n) {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

// Right shift preserving sticky: shifted-out bits OR into bit 0.
[[nodiscard]] constexpr std::uint64_t shift_right_jam(std::uint64_t v, int n) {
  if (n <= 0) return v;
  if (n >= 64) return v != 0 ? 1 : 0;
  return (v >> n) | ((v & mask_bits(n)) != 0 ? 1 : 0);
}

// RNE increment decision from a 27-bit window W.
[[nodiscard]] constexpr std::uint64_t rne_increment(std::uint64_t w) {
  const std::uint64_t g = (w >> 2) & 1;
  const std::uint64_t rs = w & 3;
  const std::uint64_t lsb = (w >> 3) & 1;
  return (g != 0 && (rs != 0 || lsb != 0)) ? 1 : 0;
}

// Drive the 10-bit exponent bus (biased, two's complement) and decode back
// to an unbiased exponent.
[[nodiscard]] int drive_exp_bus(const FaultSet& f, int e) {
  const std::uint64_t es = f.drive(NetId::FpuExpSum,
                                   static_cast<std::uint64_t>(e + 127) &
                                       mask_bits(10));
  int raw = static_cast<int>(es & mask_bits(10));
  if (raw >= 512) raw -= 1024;
  return raw - 127;
}

[[nodiscard]] bool is_nan_word(std::uint32_t w) {
  return ((w >> 23) & 0xFFu) == 0xFFu && (w & 0x007FFFFFu) != 0;
}
[[nodiscard]] bool is_snan_word(std::uint32_t w) {
  return is_nan_word(w) && (w & kQuietBit) == 0;
}

// Unpacked operand for the significand datapath: zeros and denormals carry
// e = -126 with a leading-zero significand.
struct Unpacked {
  std::uint32_t sign = 0;
  int e = 0;              // unbiased
  std::uint32_t sig = 0;  // 24-bit, implicit bit explicit when normal
};

[[nodiscard]] Unpacked decompose(PackedFloat32 x) {
  Unpacked u;
  u.sign = x.sign_bit();
  if (x.exp_bits() == 0) {
    u.e = -126;
    u.sig = x.fraction();
  } else {
    u.e = x.unbiased_exp();
    u.sig = (1u << 23) | x.fraction();
  }
  return u;
}

// Normalize a nonzero significand to [2^23, 2^24), adjusting the exponent
// (used by mul/div/sqrt to pre-normalize denormal operands).
void prenormalize(Unpacked& u) {
  const int lead = std::countl_zero(u.sig) - 8;  // 32-bit clz, 24-bit field
  if (lead > 0) {
    u.sig <<= lead;
    u.e -= lead;
  }
}

// ---------------------------------------------------------------------------
// Result formatter: the single exit point of every operation. Drives
// fpu.format_select and fpu.result_bits (always last). A forced NaN select
// without a propagated payload emits the indefinite QNaN.
// ---------------------------------------------------------------------------
[[nodiscard]] FpuResult emit(std::uint32_t sign, std::uint32_t exp_field,
                             std::uint32_t frac, std::uint64_t sel,
                             std::uint32_t nan_word, FpuFlags flags,
                             const FaultSet& f) {
  sel = f.drive(NetId::FpuFormatSelect, sel) & mask_bits(4);
  std::uint32_t word;
  if (sel & kSelNaN)
    word = nan_word != 0 ? nan_word : kIndefiniteNaN;
  else if (sel & kSelInf)
    word = pack(sign, 0xFFu, 0);
  else if (sel & kSelZero)
    word = pack(sign, 0, 0);
  else if (sel & kSelDenorm)
    word = pack(sign, 0, frac & 0x007FFFFFu);
  else
    // The packer's exponent bus is 8 bits wide: a fault upstream can push
    // the biased exponent out of [0, 255], and the field wraps like the
    // physical bus would (fault-free paths never reach the mask).
    word = pack(sign, exp_field & 0xFFu, frac & 0x007FFFFFu);
  word = static_cast<std::uint32_t>(f.drive(NetId::FpuResultBits, word));
  return FpuResult{PackedFloat32{word}, flags};
}

[[nodiscard]] FpuResult emit_nan(std::uint32_t nan_word, FpuFlags flags,
                                 const FaultSet& f) {
  return emit(nan_word >> 31, 0xFFu, nan_word & 0x007FFFFFu, kSelNaN, nan_word,
              flags, f);
}
[[nodiscard]] FpuResult emit_inf(std::uint32_t sign, FpuFlags flags,
                                 const FaultSet& f) {
  return emit(sign, 0xFFu, 0, kSelInf, 0, flags, f);
}
[[nodiscard]] FpuResult emit_zero(std::uint32_t sign, FpuFlags flags,
                                  const FaultSet& f) {
  return emit(sign, 0, 0, kSelZero, 0, flags, f);
}

// Positional NaN propagation (x86 rule): the first NaN source wins, quieted;
// Invalid iff any source is signaling.
[[nodiscard]] FpuResult propagate_nan(std::uint32_t wa, std::uint32_t wb,
                                      FpuFlags flags, const FaultSet& f) {
  if (is_snan_word(wa) || is_snan_word(wb)) flags.set(FpuFlag::Invalid);
  const std::uint32_t chosen = is_nan_word(wa) ? wa : wb;
  return emit_nan(chosen | kQuietBit, flags, f);
}

// ---------------------------------------------------------------------------
// Rounder/packer for a positioned window: W is 27 bits with either bit 26
// set (normal position) or e == -126 (denormal position, leading zeros).
// `tiny` is the caller's tininess-after-rounding determination.
// ---------------------------------------------------------------------------
[[nodiscard]] FpuResult round_pack_positioned(std::uint32_t sign, int e,
                                              std::uint64_t w, bool tiny,
                                              FpuFlags flags,
                                              const FaultSet& f) {
  w = f.drive(NetId::FpuGrs, w) // drive exposes only GRS; clip keeps window
          & mask_bits(27);
  const std::uint64_t inc = f.drive(NetId::FpuRoundCarry, rne_increment(w)) & 1;
  const bool inexact = (w & 7) != 0;
  std::uint64_t sig = (w >> 3) + inc;
  if (sig == (std::uint64_t{1} << 24)) {
    sig >>= 1;
    ++e;
  }
  if (inexact) flags.set(FpuFlag::Inexact);
  if (tiny && inexact) flags.set(FpuFlag::Underflow);
  if (e > 127) {
    flags.set(FpuFlag::Overflow);
    flags.set(FpuFlag::Inexact);
    return emit_inf(sign, flags, f);
  }
  if ((sig >> 23) == 0) {
    // Denormal (or rounded-to-zero) magnitude: exponent field 0.
    if (sig == 0) return emit_zero(sign, flags, f);
    return emit(sign, 0, static_cast<std::uint32_t>(sig), kSelDenorm, 0, flags,
                f);
  }
  return emit(sign, static_cast<std::uint32_t>(e + 127),
              static_cast<std::uint32_t>(sig & 0x7FFFFFu), 0, 0, flags, f);
}

// Rounder/packer for a normalized window (bit 26 set) at unbounded exponent
// e: decides tininess after rounding (as if the exponent range were
// unbounded), then shifts into denormal position when e < -126.
[[nodiscard]] FpuResult normalize_round_pack(std::uint32_t sign, int e,
                                             std::uint64_t w, FpuFlags flags,
                                             const FaultSet& f) {
  // Unbounded-exponent rounding, for the tininess decision only.
  const std::uint64_t sig_u = (w >> 3) + rne_increment(w);
  const int e_u = e + (sig_u == (std::uint64_t{1} << 24) ? 1 : 0);
  const bool tiny = e_u < -126;
  if (e < -126) {
    w = shift_right_jam(w, std::min(-126 - e, 27));
    e = -126;
  }
  return round_pack_positioned(sign, e, w, tiny, flags, f);
}

// ---------------------------------------------------------------------------
// Addition datapath (subtraction enters with b's sign pre-flipped).
// Net order: a_operand, b_operand, exp_diff, align_shift, aligned_b_sig,
// sig_sum, norm_shift, grs, round_carry, format_select, result_bits.
// ---------------------------------------------------------------------------
[[nodiscard]] FpuResult add_impl(PackedFloat32 a, PackedFloat32 b,
                                 const FaultSet& f) {
  a.word = static_cast<std::uint32_t>(f.drive(NetId::FpuAOperand, a.word));
  b.word = static_cast<std::uint32_t>(f.drive(NetId::FpuBOperand, b.word));
  FpuFlags flags;

  const OperandClass ca = classify(a), cb = classify(b);
  if (ca == OperandClass::NaN || cb == OperandClass::NaN)
    return propagate_nan(a.word, b.word, flags, f);
  if (ca == OperandClass::Infinity || cb == OperandClass::Infinity) {
    if (ca == OperandClass::Infinity && cb == OperandClass::Infinity &&
        a.sign_bit() != b.sign_bit()) {
      flags.set(FpuFlag::Invalid);
      return emit_nan(kIndefiniteNaN, flags, f);
    }
    const std::uint32_t s =
        ca == OperandClass::Infinity ? a.sign_bit() : b.sign_bit();
    return emit_inf(s, flags, f);
  }

  Unpacked ua = decompose(a), ub = decompose(b);

  const int d = ua.e - ub.e;
  const std::uint64_t dd =
      f.drive(NetId::FpuExpDiff, static_cast<std::uint64_t>(d < 0 ? -d : d)) &
      mask_bits(8);

  // Magnitude ordering (dedicated comparator, not the alignment nets).
  const bool swap = (ua.e < ub.e) || (ua.e == ub.e && ua.sig < ub.sig);
  const Unpacked& big = swap ? ub : ua;
  const Unpacked& small = swap ? ua : ub;
  const bool subtract = ua.sign != ub.sign;

  const std::uint64_t sh =
      f.drive(NetId::FpuAlignShift,
              std::min<std::uint64_t>(dd, 26)) & mask_bits(5);
  std::uint64_t aligned = shift_right_jam(std::uint64_t{small.sig} << 3,
                                          static_cast<int>(sh));
  aligned = f.drive(NetId::FpuAlignedBSig, aligned) & mask_bits(27);

  const std::uint64_t big_w = std::uint64_t{big.sig} << 3;
  std::uint64_t sum = subtract ? big_w - aligned : big_w + aligned;
  sum = f.drive(NetId::FpuSigSum, sum) & mask_bits(28);

  int e = big.e;
  std::uint32_t sign = big.sign;
  if (sum == 0) {
    // Exact cancellation (or zero operands): +0 under RNE unless both
    // addends are negative.
    const std::uint32_t s = (ua.sign == ub.sign) ? ua.sign : 0;
    return emit_zero(s, flags, f);
  }

  if (sum >> 27) {  // carry out: one jam shift right
    sum = shift_right_jam(sum, 1);
    ++e;
  }
  // Left-normalize toward bit 26, clamped at the denormal boundary.
  const int msb = 63 - std::countl_zero(sum);
  int shift_l = msb < 26 ? 26 - msb : 0;
  shift_l = std::min(shift_l, e + 126);
  const std::uint64_t ns =
      f.drive(NetId::FpuNormShift, static_cast<std::uint64_t>(shift_l)) &
      mask_bits(5);
  sum = (sum << ns) & mask_bits(27);
  e -= static_cast<int>(ns);

  // Addition/subtraction that lands in the denormal range is exact, so the
  // after-rounding tininess test never fires here.
  return round_pack_positioned(sign, e, sum, /*tiny=*/false, flags, f);
}

}  // namespace

FpuResult fpu_add(PackedFloat32 a, PackedFloat32 b, const FaultSet& faults) {
  return add_impl(a, b, faults);
}

FpuResult fpu_sub(PackedFloat32 a, PackedFloat32 b, const FaultSet& faults) {
  // add(a, -b), except that NaN payload propagation is positional and
  // ignores the operation's sign handling.
  if (!is_nan_word(b.word)) b.word ^= 0x80000000u;
  return add_impl(a, b, faults);
}

FpuResult fpu_mul(PackedFloat32 a, PackedFloat32 b, const FaultSet& faults) {
  const FaultSet& f = faults;
  a.word = static_cast<std::uint32_t>(f.drive(NetId::FpuAOperand, a.word));
  b.word = static_cast<std::uint32_t>(f.drive(NetId::FpuBOperand, b.word));
  FpuFlags flags;

  const OperandClass ca = classify(a), cb = classify(b);
  const std::uint32_t sign = a.sign_bit() ^ b.sign_bit();
  if (ca == OperandClass::NaN || cb == OperandClass::NaN)
    return propagate_nan(a.word, b.word, flags, f);
  if (ca == OperandClass::Infinity || cb == OperandClass::Infinity) {
    if (ca == OperandClass::Zero || cb == OperandClass::Zero) {
      flags.set(FpuFlag::Invalid);
      return emit_nan(kIndefiniteNaN, flags, f);
    }
    return emit_inf(sign, flags, f);
  }
  if (ca == OperandClass::Zero || cb == OperandClass::Zero)
    return emit_zero(sign, flags, f);

  Unpacked ua = decompose(a), ub = decompose(b);
  prenormalize(ua);
  prenormalize(ub);

  int e = drive_exp_bus(f, ua.e + ub.e);

  std::uint64_t prod = std::uint64_t{ua.sig} * ub.sig;  // 48 bits
  prod = f.drive(NetId::FpuProdAcc, prod) & mask_bits(48);

  const std::uint64_t ns =
      f.drive(NetId::FpuNormShift, (prod >> 47) & 1) & 1;
  // Reduce 48 -> 27 bits: shift 21 when the product reached [2, 4), else 20.
  std::uint64_t w;
  if (ns) {
    w = shift_right_jam(prod, 21);
    ++e;
  } else {
    w = shift_right_jam(prod, 20);
  }
  w &= mask_bits(27);
  return normalize_round_pack(sign, e, w, flags, f);
}

FpuResult fpu_div(PackedFloat32 a, PackedFloat32 b, const FaultSet& faults) {
  const FaultSet& f = faults;
  a.word = static_cast<std::uint32_t>(f.drive(NetId::FpuAOperand, a.word));
  b.word = static_cast<std::uint32_t>(f.drive(NetId::FpuBOperand, b.word));
  FpuFlags flags;

  const OperandClass ca = classify(a), cb = classify(b);
  const std::uint32_t sign = a.sign_bit() ^ b.sign_bit();
  if (ca == OperandClass::NaN || cb == OperandClass::NaN)
    return propagate_nan(a.word, b.word, flags, f);
  if (ca == OperandClass::Infinity) {
    if (cb == OperandClass::Infinity) {
      flags.set(FpuFlag::Invalid);
      return emit_nan(kIndefiniteNaN, flags, f);
    }
    return emit_inf(sign, flags, f);
  }
  if (cb == OperandClass::Infinity) return emit_zero(sign, flags, f);
  if (cb == OperandClass::Zero) {
    if (ca == OperandClass::Zero) {
      flags.set(FpuFlag::Invalid);
      return emit_nan(kIndefiniteNaN, flags, f);
    }
    flags.set(FpuFlag::DivideByZero);
    return emit_inf(sign, flags, f);
  }
  if (ca == OperandClass::Zero) return emit_zero(sign, flags, f);

  Unpacked ua = decompose(a), ub = decompose(b);
  prenormalize(ua);
  prenormalize(ub);

  int e = ua.e - ub.e;
  std::uint64_t num = ua.sig, den = ub.sig;
  if (num < den) {
    num <<= 1;
    --e;
  }
  e = drive_exp_bus(f, e);

  // Restoring division: 26 quotient bits (den <= num < 2*den gives a leading
  // 1), accumulator and remainder re-driven every iteration.
  std::uint64_t q = 1, r = num - den;
  q = f.drive(NetId::FpuQuotAcc, q) & mask_bits(26);
  r = f.drive(NetId::FpuRemAcc, r) & mask_bits(28);
  for (int i = 0; i < 25; ++i) {
    r <<= 1;
    q <<= 1;
    if (r >= den) {
      r -= den;
      q |= 1;
    }
    q = f.drive(NetId::FpuQuotAcc, q) & mask_bits(26);
    r = f.drive(NetId::FpuRemAcc, r) & mask_bits(28);
  }
  // W = 2q + remainder tail: quotient bits land at [26:1], sticky at [0].
  std::uint64_t w = (q << 1) | (r != 0 ? 1 : 0);

  const std::uint64_t ns =
      f.drive(NetId::FpuNormShift, (w >> 26) & 1 ? 0 : 1) & mask_bits(5);
  // A faulted accumulator can clear the leading bit; renormalize through the
  // driven shift amount, as the hardware normalizer would.
  w = (w << ns) & mask_bits(27);
  e -= static_cast<int>(ns);
  if ((w >> 26) == 0) {
    // Degenerate (fault-induced) window: fall through as denormal-positioned.
    return round_pack_positioned(sign, std::max(e, -126), w,
                                 /*tiny=*/e < -126, flags, f);
  }
  return normalize_round_pack(sign, e, w, flags, f);
}

FpuResult fpu_sqrt(PackedFloat32 b, const FaultSet& faults) {
  const FaultSet& f = faults;
  b.word = static_cast<std::uint32_t>(f.drive(NetId::FpuBOperand, b.word));
  FpuFlags flags;

  const OperandClass cb = classify(b);
  if (cb == OperandClass::NaN) return propagate_nan(b.word, b.word, flags, f);
  if (cb == OperandClass::Zero) return emit_zero(b.sign_bit(), flags, f);
  if (b.sign_bit() != 0) {
    flags.set(FpuFlag::Invalid);
    return emit_nan(kIndefiniteNaN, flags, f);
  }
  if (cb == OperandClass::Infinity) return emit_inf(0, flags, f);

  Unpacked ub = decompose(b);
  prenormalize(ub);

  const int odd = ub.e & 1;
  const int m = (ub.e - odd) / 2;  // ub.e - odd is even for either sign
  const int e = drive_exp_bus(f, m);

  // Radicand scaled so the integer root has 27 bits: N = sig * 2^(29+odd),
  // root = floor(sqrt(N)) in [2^26, 2^27).
  const std::uint64_t n = std::uint64_t{ub.sig} << (29 + odd);

  // Restoring digit-by-digit square root, two radicand bits per step. The
  // root accumulator net exposes the low 26 bits (the leading unit bit is
  // structural); the remainder stays below 2^28.
  std::uint64_t rem = 0, p = 0;
  for (int i = 26; i >= 0; --i) {
    rem = (rem << 2) | ((n >> (2 * i)) & 3);
    const std::uint64_t trial = (p << 2) | 1;
    p <<= 1;
    if (rem >= trial) {
      rem -= trial;
      p |= 1;
    }
    rem = f.drive(NetId::FpuRemAcc, rem) & mask_bits(28);
    p = (p & ~mask_bits(26)) | (f.drive(NetId::FpuRootAcc, p) & mask_bits(26));
  }
  // p = isqrt(N); the remainder jams the sticky position.
  std::uint64_t w = (p | (rem != 0 ? 1 : 0)) & mask_bits(27);
  if ((w >> 26) == 0) {
    // Only reachable through faults on the accumulators.
    return round_pack_positioned(0, std::max(e, -126), w, /*tiny=*/e < -126,
                                 flags, f);
  }
  return normalize_round_pack(0, e, w, flags, f);
}

FpuResult fpu_op(OpKind op, PackedFloat32 a, PackedFloat32 b,
                 const FaultSet& faults) {
  switch (op) {
    case OpKind::Add:
      return fpu_add(a, b, faults);
    case OpKind::Sub:
      return fpu_sub(a, b, faults);
    case OpKind::Mul:
      return fpu_mul(a, b, faults);
    case OpKind::Div:
      return fpu_div(a, b, faults);
    case OpKind::Sqrt:
      return fpu_sqrt(b, faults);
  }
  throw std::invalid_argument("fpu_op: bad OpKind");
}

std::string flags_to_string(FpuFlags flags) {
  if (flags.bits == 0) return "none";
  std::string s;
  const auto append = [&](FpuFlag fl, const char* name) {
    if (flags.has(fl)) {
      if (!s.empty()) s += "|";
      s += name;
    }
  };
  append(FpuFlag::Overflow, "overflow");
  append(FpuFlag::Underflow, "underflow");
  append(FpuFlag::Invalid, "invalid");
  append(FpuFlag::DivideByZero, "divide_by_zero");
  append(FpuFlag::Inexact, "inexact");
  return s;
}

}  // namespace rpcfpu
