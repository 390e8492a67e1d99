// SPDX-License-Identifier: MIT
//
// The reduced-precision checker engines, validated against an independent
// re-derivation: operands are converted to exact dyadic rationals, combined
// exactly, and rounded to k fraction bits with a generic round-to-nearest-
// even routine that shares no code with the engine datapath.

#include "rpcfpu/checker.hpp"

#include <gtest/gtest.h>

#include <optional>
#include <random>
#include <stdexcept>

#include "rpcfpu/dyadic.hpp"
#include "rpcfpu/fault.hpp"
#include "rpcfpu/float_bits.hpp"

namespace rpcfpu {
namespace {

// ---------------------------------------------------------------------------
// Mini-oracle: exact signed value of a ReducedFloat, and generic RNE
// rounding of an exact dyadic to the (9+k)-bit format.
// ---------------------------------------------------------------------------

Dyadic reduced_value(const ReducedFloat& r) {
  Dyadic mag = Dyadic(r.significand()).ldexp(static_cast<int>(r.exp_bits) -
                                             127 - r.k);
  return r.sign_bit ? -mag : mag;
}

struct MiniOutcome {
  CheckerSignal signal = CheckerSignal::Value;
  ReducedFloat value;
};

MiniOutcome round_reduced_rne(const Dyadic& x, int k) {
  if (x.is_zero()) return {CheckerSignal::ExactZero, {}};
  const Dyadic mag = x.abs();

  // Find the binade: the unique e with 2^e <= mag < 2^(e+1). The inputs of
  // these tests keep |e| well inside a few thousand, so a linear walk from
  // 0 is fine and avoids any dependence on mantissa bit-length helpers.
  int e = 0;
  while (dyadic_pow2(e + 1) <= mag) ++e;
  while (dyadic_pow2(e) > mag) --e;

  // Round mag * 2^(k-e) to an integer, ties to even; it lands in
  // [2^k, 2^(k+1)] and the top endpoint bumps the exponent.
  BigInt n = mag.ldexp(-e).round_ne_scaled(k);
  if (n == (BigInt(1) << (k + 1))) {
    n >>= 1;
    ++e;
  }
  const int biased = e + 127;
  if (biased < 1 || biased > 254) return {CheckerSignal::RangeExit, {}};

  ReducedFloat out;
  out.k = k;
  out.sign_bit = x.sign() < 0 ? 1u : 0u;
  out.exp_bits = static_cast<std::uint32_t>(biased);
  out.fraction_k = static_cast<std::uint32_t>(n - (BigInt(1) << k));
  return {CheckerSignal::Value, out};
}

void expect_same(const MiniOutcome& want, const CheckerOutcome& got,
                 const char* what) {
  ASSERT_EQ(static_cast<int>(want.signal), static_cast<int>(got.signal))
      << what;
  if (want.signal == CheckerSignal::Value) {
    EXPECT_EQ(want.value, got.value) << what;
  }
}

ReducedFloat rand_reduced(std::mt19937_64& rng, int k, int exp_lo = 1,
                          int exp_hi = 254) {
  ReducedFloat r;
  r.k = k;
  r.sign_bit = static_cast<std::uint32_t>(rng() & 1u);
  r.exp_bits = static_cast<std::uint32_t>(
      exp_lo + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                          exp_hi - exp_lo + 1)));
  r.fraction_k = static_cast<std::uint32_t>(rng()) & ((1u << k) - 1u);
  return r;
}

// ---------------------------------------------------------------------------
// Randomized equivalence with the mini-oracle.
// ---------------------------------------------------------------------------

class CheckerVsOracle : public ::testing::TestWithParam<int> {};

TEST_P(CheckerVsOracle, AddSubMatchExactRounding) {
  const int k = GetParam();
  std::mt19937_64 rng(0xADD0u + static_cast<unsigned>(k));
  for (int t = 0; t < 20000; ++t) {
    // Close exponents often enough to exercise real alignment overlap.
    const ReducedFloat a = rand_reduced(rng, k);
    const bool close = (rng() & 3u) != 0;
    const int lo = close ? std::max(1, static_cast<int>(a.exp_bits) - k - 3)
                         : 1;
    const int hi = close ? std::min(254, static_cast<int>(a.exp_bits) + k + 3)
                         : 254;
    const ReducedFloat b = rand_reduced(rng, k, lo, hi);

    expect_same(round_reduced_rne(reduced_value(a) + reduced_value(b), k),
                rpc_add(a, b), "add");
    expect_same(round_reduced_rne(reduced_value(a) - reduced_value(b), k),
                rpc_sub(a, b), "sub");
  }
}

TEST_P(CheckerVsOracle, MulMatchesExactRounding) {
  const int k = GetParam();
  std::mt19937_64 rng(0x301Du + static_cast<unsigned>(k));
  for (int t = 0; t < 20000; ++t) {
    const ReducedFloat a = rand_reduced(rng, k);
    const ReducedFloat b = rand_reduced(rng, k);
    expect_same(round_reduced_rne(reduced_value(a) * reduced_value(b), k),
                rpc_mul(a, b), "mul");
  }
}

INSTANTIATE_TEST_SUITE_P(Widths, CheckerVsOracle,
                         ::testing::Values(1, 2, 7, 13, 23));

// ---------------------------------------------------------------------------
// Directed behavior.
// ---------------------------------------------------------------------------

TEST(Checker, TotalCancellationSignalsExactZero) {
  const ReducedFloat one{7, 0, 127, 0};
  const ReducedFloat minus_one{7, 1, 127, 0};
  EXPECT_EQ(rpc_add(one, minus_one).signal, CheckerSignal::ExactZero);
  EXPECT_EQ(rpc_sub(one, one).signal, CheckerSignal::ExactZero);
}

TEST(Checker, RangeExitTopAndBottom) {
  // 1.5*2^127 + 1.5*2^127 leaves the exponent range upward.
  const ReducedFloat big{7, 0, 254, 1u << 6};
  EXPECT_EQ(rpc_add(big, big).signal, CheckerSignal::RangeExit);
  // 1.0*2^-126 - 1.5*2^-126 = -0.5*2^-126: below the range downward.
  const ReducedFloat small1{7, 0, 1, 0};
  const ReducedFloat small2{7, 0, 1, 1u << 6};
  EXPECT_EQ(rpc_sub(small1, small2).signal, CheckerSignal::RangeExit);
  // Multiplication at the extremes in both directions.
  EXPECT_EQ(rpc_mul(big, big).signal, CheckerSignal::RangeExit);
  const ReducedFloat tiny{7, 0, 1, 0};
  EXPECT_EQ(rpc_mul(tiny, tiny).signal, CheckerSignal::RangeExit);
}

TEST(Checker, RoundToNearestEvenTies) {
  const int k = 7;
  // 1.0000000 + 1.0000000*2^-8: the addend is exactly half an ulp of the
  // sum; the tie keeps the even significand 1.0000000.
  const ReducedFloat one{k, 0, 127, 0};
  const ReducedFloat half_ulp{k, 0, 127 - (k + 1), 0};
  const CheckerOutcome r1 = rpc_add(one, half_ulp);
  ASSERT_TRUE(r1.ok());
  EXPECT_EQ(r1.value, (ReducedFloat{k, 0, 127, 0}));

  // 1.0000001 + half-ulp ties up to the even 1.0000010.
  const ReducedFloat odd{k, 0, 127, 1};
  const CheckerOutcome r2 = rpc_add(odd, half_ulp);
  ASSERT_TRUE(r2.ok());
  EXPECT_EQ(r2.value, (ReducedFloat{k, 0, 127, 2}));

  // Just above the tie rounds up regardless of parity: the addend
  // (1 + 2^-k) * 2^-(k+1) exceeds half an ulp by 2^-(2k+1).
  const ReducedFloat above{k, 0, 127 - (k + 1), 1};
  const CheckerOutcome r3 = rpc_add(one, above);
  ASSERT_TRUE(r3.ok());
  EXPECT_EQ(r3.value, (ReducedFloat{k, 0, 127, 1}));
}

TEST(Checker, SubIsAddWithFlippedSign) {
  std::mt19937_64 rng(0x5AB0u);
  for (int t = 0; t < 5000; ++t) {
    const int k = 1 + static_cast<int>(rng() % 23);
    const ReducedFloat a = rand_reduced(rng, k);
    ReducedFloat b = rand_reduced(rng, k);
    const CheckerOutcome s = rpc_sub(a, b);
    b.sign_bit ^= 1u;
    const CheckerOutcome ad = rpc_add(a, b);
    ASSERT_EQ(static_cast<int>(s.signal), static_cast<int>(ad.signal));
    if (s.ok()) EXPECT_EQ(s.value, ad.value);
  }
}

TEST(Checker, MismatchedWidthsThrow) {
  const ReducedFloat a{7, 0, 127, 0};
  const ReducedFloat b{8, 0, 127, 0};
  EXPECT_THROW((void)rpc_add(a, b), std::invalid_argument);
  EXPECT_THROW((void)rpc_mul(a, b), std::invalid_argument);
}

TEST(Checker, FaultsPerturbTheDatapath) {
  const int k = 7;
  const ReducedFloat one{k, 0, 127, 0};
  const ReducedFloat three{k, 0, 128, 1u << 6};  // 3.0

  // Stuck result bit: fraction bit 0 of the packed checker result forced 1.
  const FaultSet fs =
      FaultSet::compile({{FaultSite{NetId::RpcResultBits, 0}, 1}}, k);
  const CheckerOutcome faulty = rpc_add(one, three, fs);
  ASSERT_TRUE(faulty.ok());
  EXPECT_EQ(faulty.value.fraction_k & 1u, 1u);
  EXPECT_NE(faulty.value, rpc_add(one, three).value);

  // FPU-side nets are never driven by the checker.
  const FaultSet fpu_only =
      FaultSet::compile({{FaultSite{NetId::FpuSigSum, 5}, 1}}, k);
  EXPECT_EQ(rpc_add(one, three, fpu_only).value, rpc_add(one, three).value);
}

}  // namespace
}  // namespace rpcfpu
