// SPDX-License-Identifier: MIT
//
// Reduced-precision checker datapath: a (k+1)-bit-significand
// adder/subtractor and multiplier, rounding to k fraction bits RNE, with
// fault injection on the rpc.* nets. Exponents are the 8-bit biased binary32
// exponents; a result outside [1, 254] is a range exit, exact cancellation
// is an exact-zero signal (the implicit-1 format cannot encode zero).
//
// Working window: W = (k+1)-bit significand followed by guard/round/sticky,
// i.e. k+4 bits with the leading one at bit k+3; jam semantics as in the
// full FPU.

#include "rpcfpu/checker.hpp"

#include <bit>
#include <stdexcept>

namespace rpcfpu {

namespace {

[[nodiscard]] constexpr std::uint64_t mask_bits(int n) {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

[[nodiscard]] constexpr std::uint64_t shift_right_jam(std::uint64_t v, int n) {
  if (n <= 0) return v;
  if (n >= 64) return v != 0 ? 1 : 0;
  return (v >> n) | ((v & mask_bits(n)) != 0 ? 1 : 0);
}

[[nodiscard]] constexpr std::uint64_t rne_increment(std::uint64_t w) {
  const std::uint64_t g = (w >> 2) & 1;
  const std::uint64_t rs = w & 3;
  const std::uint64_t lsb = (w >> 3) & 1;
  return (g != 0 && (rs != 0 || lsb != 0)) ? 1 : 0;
}

// Latch a reduced operand through its net: the (9+k)-bit word is
// {sign, exp_bits, fraction_k}.
[[nodiscard]] ReducedFloat latch(const ReducedFloat& x, NetId net,
                                 const FaultSet& f) {
  const int k = x.k;
  std::uint64_t word = (std::uint64_t{x.sign_bit} << (8 + k)) | x.ef_field();
  word = f.drive(net, word) & mask_bits(9 + k);
  ReducedFloat out;
  out.k = k;
  out.sign_bit = static_cast<std::uint32_t>(word >> (8 + k)) & 1u;
  out.exp_bits = static_cast<std::uint32_t>(word >> k) & 0xFFu;
  out.fraction_k = static_cast<std::uint32_t>(word) &
                   static_cast<std::uint32_t>(mask_bits(k));
  return out;
}

// Round the k+4-bit window, check range, pack, and drive rpc.result_bits.
[[nodiscard]] CheckerOutcome round_pack(int k, std::uint32_t sign, int e,
                                        std::uint64_t w, const FaultSet& f) {
  w = f.drive(NetId::RpcGrs, w) & mask_bits(k + 4);
  const std::uint64_t inc = f.drive(NetId::RpcRoundCarry, rne_increment(w)) & 1;
  std::uint64_t sig = (w >> 3) + inc;
  if (sig == (std::uint64_t{1} << (k + 1))) {
    sig >>= 1;  // exact power-of-two bump
    ++e;
  }
  if (e < 1 || e > 254) return CheckerOutcome{CheckerSignal::RangeExit, {}};
  ReducedFloat r;
  r.k = k;
  r.sign_bit = sign;
  r.exp_bits = static_cast<std::uint32_t>(e);
  r.fraction_k =
      static_cast<std::uint32_t>(sig) & static_cast<std::uint32_t>(mask_bits(k));
  const std::uint64_t word =
      f.drive(NetId::RpcResultBits,
              (std::uint64_t{r.sign_bit} << (8 + k)) | r.ef_field()) &
      mask_bits(9 + k);
  r.sign_bit = static_cast<std::uint32_t>(word >> (8 + k)) & 1u;
  r.exp_bits = static_cast<std::uint32_t>(word >> k) & 0xFFu;
  r.fraction_k = static_cast<std::uint32_t>(word) &
                 static_cast<std::uint32_t>(mask_bits(k));
  return CheckerOutcome{CheckerSignal::Value, r};
}

[[nodiscard]] CheckerOutcome add_impl(ReducedFloat a, ReducedFloat b,
                                      const FaultSet& f) {
  if (a.k != b.k) throw std::invalid_argument("rpc_add: mismatched k");
  const int k = a.k;
  a = latch(a, NetId::RpcAOperand, f);
  b = latch(b, NetId::RpcBOperand, f);

  const int d = static_cast<int>(a.exp_bits) - static_cast<int>(b.exp_bits);
  const std::uint64_t dd =
      f.drive(NetId::RpcExpDiff, static_cast<std::uint64_t>(d < 0 ? -d : d)) &
      mask_bits(8);

  const bool swap = (a.exp_bits < b.exp_bits) ||
                    (a.exp_bits == b.exp_bits && a.significand() < b.significand());
  const ReducedFloat& big = swap ? b : a;
  const ReducedFloat& small = swap ? a : b;
  const bool subtract = a.sign_bit != b.sign_bit;

  const std::uint64_t sh =
      f.drive(NetId::RpcAlignShift,
              std::min<std::uint64_t>(dd, static_cast<std::uint64_t>(k + 4))) &
      mask_bits(5);
  std::uint64_t aligned = shift_right_jam(std::uint64_t{small.significand()} << 3,
                                          static_cast<int>(sh));
  aligned = f.drive(NetId::RpcAlignedBSig, aligned) & mask_bits(k + 4);

  const std::uint64_t big_w = std::uint64_t{big.significand()} << 3;
  std::uint64_t sum = subtract ? big_w - aligned : big_w + aligned;
  sum = f.drive(NetId::RpcSigSum, sum) & mask_bits(k + 5);

  if (sum == 0) return CheckerOutcome{CheckerSignal::ExactZero, {}};

  int e = static_cast<int>(big.exp_bits);
  if (sum >> (k + 4)) {  // carry out
    sum = shift_right_jam(sum, 1);
    ++e;
  }
  const int msb = 63 - std::countl_zero(sum);
  const int need = msb < k + 3 ? (k + 3) - msb : 0;
  const std::uint64_t ns =
      f.drive(NetId::RpcNormShift, static_cast<std::uint64_t>(need)) &
      mask_bits(5);
  sum = (sum << ns) & mask_bits(k + 4);
  e -= static_cast<int>(ns);

  return round_pack(k, big.sign_bit, e, sum, f);
}

}  // namespace

CheckerOutcome rpc_add(const ReducedFloat& a, const ReducedFloat& b,
                       const FaultSet& faults) {
  return add_impl(a, b, faults);
}

CheckerOutcome rpc_sub(const ReducedFloat& a, const ReducedFloat& b,
                       const FaultSet& faults) {
  ReducedFloat nb = b;
  nb.sign_bit ^= 1u;
  return add_impl(a, nb, faults);
}

CheckerOutcome rpc_mul(const ReducedFloat& a, const ReducedFloat& b,
                       const FaultSet& faults) {
  if (a.k != b.k) throw std::invalid_argument("rpc_mul: mismatched k");
  const FaultSet& f = faults;
  const int k = a.k;
  const ReducedFloat la = latch(a, NetId::RpcAOperand, f);
  const ReducedFloat lb = latch(b, NetId::RpcBOperand, f);

  const std::uint32_t sign = la.sign_bit ^ lb.sign_bit;
  int e = static_cast<int>(la.exp_bits) + static_cast<int>(lb.exp_bits) - 127;
  {
    const std::uint64_t es =
        f.drive(NetId::RpcExpSum,
                static_cast<std::uint64_t>(e) & mask_bits(10));
    int raw = static_cast<int>(es & mask_bits(10));
    if (raw >= 512) raw -= 1024;
    e = raw;
  }

  std::uint64_t prod = std::uint64_t{la.significand()} * lb.significand();
  prod = f.drive(NetId::RpcProdAcc, prod) & mask_bits(2 * k + 2);

  const std::uint64_t ns =
      f.drive(NetId::RpcNormShift, (prod >> (2 * k + 1)) & 1) & 1;
  // Reduce 2k+2 -> k+4 bits (jam); at k = 1 this is a left shift.
  std::uint64_t w;
  if (ns) {
    w = k >= 2 ? shift_right_jam(prod, k - 2) : prod << (2 - k);
    ++e;
  } else {
    w = k >= 3 ? shift_right_jam(prod, k - 3) : prod << (3 - k);
  }
  w &= mask_bits(k + 4);
  return round_pack(k, sign, e, w, f);
}

}  // namespace rpcfpu
