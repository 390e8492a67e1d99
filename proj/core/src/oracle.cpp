// SPDX-License-Identifier: MIT
//
// Exact-arithmetic verification oracle. See oracle.hpp for the model.
//
// Everything that feeds a pass/fail decision is computed in exact integer or
// dyadic-rational arithmetic. The unrounded results of division and square
// root are not dyadic; the identities are restated in exactly equivalent
// dyadic forms before any comparison, and the reported exact_result /
// delta_full fields carry clearly-flagged 96-fraction-bit floor enclosures.

#include "rpcfpu/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

namespace rpcfpu {
namespace {

// ===========================================================================
// Small integer / dyadic helpers
// ===========================================================================

constexpr std::uint64_t mask64(int bits) {
  return bits <= 0 ? 0ull
                   : (bits >= 64 ? ~0ull : ((1ull << bits) - 1ull));
}

// floor(log2(x)) for a strictly positive dyadic.
int floor_log2(const Dyadic& x) {
  if (x.sign() <= 0) throw std::logic_error("floor_log2: nonpositive value");
  return static_cast<int>(boost::multiprecision::msb(x.mant())) + x.exp2();
}

// Round a positive magnitude to a normalized significand with frac_bits
// fraction bits (round-to-nearest-even): result sig in [2^f, 2^(f+1)),
// magnitude == sig * 2^(e - f) up to the rounding error.
struct RoundedNorm {
  std::uint64_t sig = 0;
  int e = 0;
};

RoundedNorm round_to_normal(const Dyadic& mag, int frac_bits) {
  RoundedNorm r;
  r.e = floor_log2(mag);
  BigInt s = mag.round_ne_scaled(frac_bits - r.e);
  if (s == (BigInt(1) << (frac_bits + 1))) {  // rounded up across the binade
    s >>= 1;
    r.e += 1;
  }
  r.sig = s.convert_to<std::uint64_t>();
  return r;
}

// Signed exact value of a Normal binary32: +/- sig24 * 2^(E-23).
Dyadic value_of(PackedFloat32 x) {
  BigInt sig = (1u << 23) | x.fraction();
  if (x.sign_bit()) sig = -sig;
  return Dyadic(sig, x.unbiased_exp() - 23);
}

// Signed exact value of a reduced-precision operand.
Dyadic value_of_reduced(const ReducedFloat& x) {
  BigInt sig = x.significand();
  if (x.sign_bit) sig = -sig;
  return Dyadic(sig, static_cast<int>(x.exp_bits) - 127 - x.k);
}

// Round-to-nearest-even of x / 2^sh in plain 64-bit integers (sh >= 1,
// x + rounding must fit 64 bits).
std::uint64_t rne_shift64(std::uint64_t x, int sh) {
  const std::uint64_t q = x >> sh;
  const std::uint64_t rem = x & mask64(sh);
  const std::uint64_t half = 1ull << (sh - 1);
  if (rem > half) return q + 1;
  if (rem < half) return q;
  return q + (q & 1ull);  // tie: to even
}

// Exact integer square root (floor) of a 64-bit value.
std::uint64_t isqrt64(std::uint64_t n) {
  if (n == 0) return 0;
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Exact integer square root (floor) of a BigInt.
BigInt isqrt_big(const BigInt& n) { return boost::multiprecision::sqrt(n); }

// floor(a / b) for b > 0 with true floor semantics for negative a.
BigInt floor_div_big(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;  // truncates toward zero
  if (a % b != 0 && a < 0) --q;
  return q;
}

// ===========================================================================
// Independent exact recomputation of the FPU result.
//
// This path shares no code with the datapath model in softfpu.cpp: it goes
// through dyadic rationals (add/sub/mul) or integer division / integer
// square root with explicit remainders (div/sqrt).
// ===========================================================================

struct ExactFpu {
  std::uint32_t sign = 0;  // result sign bit
  int e = 0;               // unbiased result exponent
  std::uint32_t sig = 0;   // 24-bit significand with explicit leading 1
  bool inexact = false;

  Dyadic exact_result;  // true unrounded value (or enclosure)
  bool exact_is_enclosure = false;
  Dyadic delta;  // M_exact - M_C at result-exponent scale (or enclosure)
  bool delta_is_enclosure = false;
  bool axiom4_ok = false;  // |delta| <= 2^-24, decided exactly
};

void require_normal_result(int e) {
  if (e < -126 || e > 127)
    throw std::invalid_argument(
        "oracle trace: result leaves the normal exponent range");
}

ExactFpu oracle_addsub_mul(OpKind op, PackedFloat32 a, PackedFloat32 b) {
  Dyadic v;
  if (op == OpKind::Add)
    v = value_of(a) + value_of(b);
  else if (op == OpKind::Sub)
    v = value_of(a) - value_of(b);
  else
    v = value_of(a) * value_of(b);

  if (v.is_zero())
    throw std::invalid_argument("oracle trace: result is an exact zero");

  ExactFpu r;
  r.sign = v.sign() < 0 ? 1u : 0u;
  const Dyadic mag = v.abs();
  RoundedNorm rn = round_to_normal(mag, 23);
  require_normal_result(rn.e);
  r.e = rn.e;
  r.sig = static_cast<std::uint32_t>(rn.sig);
  r.exact_result = v;
  r.delta = mag.ldexp(-r.e) - Dyadic(BigInt(rn.sig), -23);
  r.inexact = !r.delta.is_zero();
  r.axiom4_ok = r.delta.abs() <= dyadic_pow2(-24);
  return r;
}

ExactFpu oracle_div(PackedFloat32 a, PackedFloat32 b) {
  const std::uint64_t sa = (1u << 23) | a.fraction();
  const std::uint64_t sb = (1u << 23) | b.fraction();
  int e = a.unbiased_exp() - b.unbiased_exp();
  std::uint64_t num = sa;
  const std::uint64_t den = sb;
  if (num < den) {  // normalize the ratio into [1, 2)
    num <<= 1;
    --e;
  }
  std::uint64_t q = (num << 23) / den;
  const std::uint64_t rem = (num << 23) % den;
  std::uint64_t sig = q;
  if (2 * rem > den)
    ++sig;
  else if (2 * rem == den)
    sig += (q & 1ull);
  int shift_scale = 0;  // den scale doubles if rounding crossed the binade
  if (sig == (1ull << 24)) {
    sig = 1ull << 23;
    ++e;
    shift_scale = 1;
  }
  require_normal_result(e);

  ExactFpu r;
  r.sign = a.sign_bit() ^ b.sign_bit();
  r.e = e;
  r.sig = static_cast<std::uint32_t>(sig);
  r.inexact = rem != 0;
  const int vsign = r.sign ? -1 : 1;

  // delta = num/den' - sig*2^-23 with den' = den * 2^shift_scale, as the
  // exact rational numer / (den' * 2^23).
  const BigInt den2 = BigInt(den) << shift_scale;
  const BigInt numer = (BigInt(num) << 23) - BigInt(sig) * den2;
  r.axiom4_ok = 2 * boost::multiprecision::abs(numer) <= den2;
  if (rem == 0 && shift_scale == 0) {
    r.exact_result = Dyadic(vsign * BigInt(q), -23 + e);
    r.delta = Dyadic(BigInt(q) - BigInt(sig), -23);
  } else {
    // 96-fraction-bit floor enclosures computed on the magnitudes (the true
    // magnitudes lie within 2^-96 above), sign applied afterward. These
    // fields are for reporting; no decision reads them.
    r.exact_is_enclosure = true;
    r.delta_is_enclosure = true;
    r.exact_result =
        Dyadic(vsign * floor_div_big(BigInt(num) << 96, den2), e - 96);
    r.delta = Dyadic(floor_div_big(numer << 73, den2), -96);
  }
  return r;
}

ExactFpu oracle_sqrt(PackedFloat32 b) {
  const std::uint64_t sb = (1u << 23) | b.fraction();
  const int eb = b.unbiased_exp();
  const int odd = eb & 1;
  const int m = (eb - odd) / 2;

  // Radicand at even exponent: V = (sb * 2^odd) * 2^-23 * 2^(2m); place it
  // on the 2^-52 grid so the root lives on the 2^-26 grid with 3 guard bits.
  const std::uint64_t n = sb << (29 + odd);
  const std::uint64_t root = isqrt64(n);  // in [2^26, 2^27)
  const std::uint64_t rem = n - root * root;

  const std::uint64_t sig0 = root >> 3;
  const std::uint64_t g = (root >> 2) & 1ull;
  const std::uint64_t rs = (root & 3ull) | (rem != 0 ? 1ull : 0ull);
  std::uint64_t sig = sig0 + ((g && (rs || (sig0 & 1ull))) ? 1ull : 0ull);
  int e = m;
  if (sig == (1ull << 24)) {  // unreachable for sqrt; kept for symmetry
    sig = 1ull << 23;
    ++e;
  }
  require_normal_result(e);

  ExactFpu r;
  r.sign = 0;
  r.e = e;
  r.sig = static_cast<std::uint32_t>(sig);
  r.inexact = rem != 0 || (root & 7ull) != 0;

  // Axiom 4 via squared comparison: |sqrt(Vs) - M_C| <= eps
  //   <=> (M_C - eps)^2 <= Vs <= (M_C + eps)^2, with Vs = sb*2^(odd-23-2(e-m)).
  const Dyadic vs = Dyadic(BigInt(sb), odd - 23 - 2 * (e - m));
  const Dyadic mc = Dyadic(BigInt(sig), -23);
  const Dyadic eps = dyadic_pow2(-24);
  const Dyadic lo = mc - eps, hi = mc + eps;
  r.axiom4_ok = (lo * lo <= vs) && (vs <= hi * hi);

  if (rem == 0) {
    r.exact_result = Dyadic(BigInt(root), m - 26);
    r.delta = Dyadic(BigInt(root), -26 - (e - m)) - mc;
  } else {
    r.exact_is_enclosure = true;
    r.delta_is_enclosure = true;
    const BigInt root96 = isqrt_big(BigInt(sb) << (169 + odd));
    r.exact_result = Dyadic(root96, m - 96);
    r.delta = Dyadic(root96, -96 - (e - m)) - mc;
  }
  return r;
}

ExactFpu oracle_fpu(OpKind op, PackedFloat32 a, PackedFloat32 b) {
  switch (op) {
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Mul:
      return oracle_addsub_mul(op, a, b);
    case OpKind::Div:
      return oracle_div(a, b);
    case OpKind::Sqrt:
      return oracle_sqrt(b);
  }
  throw std::invalid_argument("oracle trace: unknown operation");
}

const char* role_name(OperandRole r) {
  switch (r) {
    case OperandRole::A: return "A";
    case OperandRole::B: return "B";
    case OperandRole::C: return "C";
  }
  return "?";
}

std::string hex32(std::uint32_t w) {
  std::ostringstream os;
  os << "0x" << std::hex << std::uppercase;
  os.width(8);
  os.fill('0');
  os << w;
  return os.str();
}

}  // namespace

// ===========================================================================
// Trace construction
// ===========================================================================

std::string exponent_case_name(ExponentCase c) {
  switch (c) {
    case ExponentCase::CommonCase1: return "common-1";
    case ExponentCase::CommonCase2: return "common-2";
    case ExponentCase::CornerCase: return "corner";
    case ExponentCase::AntiCornerCase: return "anti-corner";
  }
  return "?";
}

OracleTrace trace(OpKind op, PackedFloat32 a, PackedFloat32 b, int k) {
  if (k < 1 || k > 23)
    throw std::invalid_argument("oracle trace: k must be in [1, 23]");
  if (!is_normal(b))
    throw std::invalid_argument("oracle trace: operand b must be Normal");
  if (op == OpKind::Sqrt) {
    if (b.sign_bit())
      throw std::invalid_argument("oracle trace: sqrt of a negative value");
  } else if (!is_normal(a)) {
    throw std::invalid_argument("oracle trace: operand a must be Normal");
  }

  OracleTrace t;
  t.op = op;
  t.k = k;
  t.a = a;
  t.b = b;

  // --- Fault-free FPU result, recomputed independently. ---
  const ExactFpu fx = oracle_fpu(op, a, b);
  FpuFlags flags;
  if (fx.inexact) flags.set(FpuFlag::Inexact);
  t.c = FpuResult{PackedFloat32{pack(fx.sign, static_cast<std::uint32_t>(
                                                 fx.e + 127),
                                     fx.sig & 0x7FFFFFu)},
                  flags};
  t.exact_result = fx.exact_result;
  t.exact_result_is_enclosure = fx.exact_is_enclosure;
  t.delta_full = fx.delta;
  t.delta_full_is_enclosure = fx.delta_is_enclosure;
  t.axiom4_ok = fx.axiom4_ok;

  // --- Dispatch plan. ---
  const CheckPlan plan = classify_check(op, a, b, t.c.value);
  t.check_class = plan.check_class;
  t.ref_role = plan.reference;

  const auto word_of = [&](OperandRole r) -> PackedFloat32 {
    switch (r) {
      case OperandRole::A: return a;
      case OperandRole::B: return b;
      case OperandRole::C: return t.c.value;
    }
    throw std::logic_error("oracle trace: bad role");
  };

  const PackedFloat32 lhs_w = word_of(plan.lhs);
  const PackedFloat32 rhs_w = word_of(plan.rhs);
  const ReducedFloat lhs = truncate_to_reduced(lhs_w, k);
  const ReducedFloat rhs = truncate_to_reduced(rhs_w, k);

  // --- Exact recomputation of the checker engine. ---
  Dyadic vprime;
  if (plan.engine == CheckPlan::Engine::AddSub) {
    const Dyadic l = value_of_reduced(lhs);
    const Dyadic r = value_of_reduced(rhs);
    vprime = plan.subtract ? (l - r) : (l + r);
  } else {
    vprime = value_of_reduced(lhs) * value_of_reduced(rhs);
  }
  if (vprime.is_zero())
    throw std::invalid_argument("oracle trace: checker cancels to zero");

  const Dyadic magp = vprime.abs();
  const RoundedNorm out = round_to_normal(magp, k);
  if (out.e < -126 || out.e > 127)
    throw std::invalid_argument("oracle trace: checker leaves exponent range");

  t.checker_out = ReducedFloat{
      k, vprime.sign() < 0 ? 1u : 0u,
      static_cast<std::uint32_t>(out.e + 127),
      static_cast<std::uint32_t>(out.sig) & ((1u << k) - 1u)};
  t.delta_checker = magp.ldexp(-out.e) - Dyadic(BigInt(out.sig), -k);
  t.axiom5_ok = t.delta_checker.abs() <= dyadic_pow2(-(k + 1));

  t.reference = truncate_to_reduced(word_of(plan.reference), k);
  t.diff_predicted = compute_diff(t.reference, t.checker_out);

  // --- Exponent-case classification. ---
  const int e_lhs = lhs_w.unbiased_exp();
  const int e_rhs = rhs_w.unbiased_exp();
  const int e_base = plan.engine == CheckPlan::Engine::AddSub
                         ? std::max(e_lhs, e_rhs)
                         : e_lhs + e_rhs;
  t.e_max = e_base;
  const int e_ref = word_of(plan.reference).unbiased_exp();
  const int e_out = out.e;
  if (e_out == e_base && e_ref == e_base)
    t.exponent_case = ExponentCase::CommonCase1;
  else if (e_out == e_base + 1 && e_ref == e_base + 1)
    t.exponent_case = ExponentCase::CommonCase2;
  else if (e_out == e_base && e_ref == e_base + 1)
    t.exponent_case = ExponentCase::CornerCase;
  else if (e_out == e_base + 1 && e_ref == e_base)
    t.exponent_case = ExponentCase::AntiCornerCase;
  else
    throw std::logic_error("oracle trace: unclassifiable exponent relation");

  // --- M^L of the involved roles and the cross term M*. ---
  t.m_low_terms["B"] = mantissa_parts(b, k).m_l;
  t.m_low_terms["C"] = mantissa_parts(t.c.value, k).m_l;
  if (op != OpKind::Sqrt) t.m_low_terms["A"] = mantissa_parts(a, k).m_l;

  if (plan.engine == CheckPlan::Engine::Mul) {
    const MantissaParts pl = mantissa_parts(lhs_w, k);
    const MantissaParts pr = mantissa_parts(rhs_w, k);
    t.m_star = pl.m * pr.m - pl.m_h * pr.m_h;
  } else {
    t.m_star = Dyadic(0);
  }

  // --- Boxed identity terms (weights folded in; exact for the common
  //     cases, where E_out == E_ref). ---
  const PackedFloat32 ref_w = word_of(plan.reference);
  if (plan.engine == CheckPlan::Engine::AddSub) {
    const Dyadic ml_l = mantissa_parts(lhs_w, k).m_l;
    const Dyadic ml_r = mantissa_parts(rhs_w, k).m_l;
    t.term1 = ml_l.ldexp(e_lhs - e_ref) + ml_r.ldexp(e_rhs - e_ref);
  } else {
    t.term1 = t.m_star.ldexp(e_base - e_ref);
  }
  t.term2 = -mantissa_parts(ref_w, k).m_l;

  const Dyadic delta_prime = t.delta_checker;
  switch (t.check_class) {
    case CheckClass::SSADD:
    case CheckClass::DSSUB:
    case CheckClass::MUL:
      // Forward: reference is the rounded result itself; delta_full exact.
      t.term3 = delta_prime - t.delta_full;
      break;
    case CheckClass::SSSUB:
    case CheckClass::DSADD:
      // Reverse add: the unrounded result C + delta_C enters the sum.
      t.term3 =
          delta_prime + t.delta_full.ldexp(t.c.value.unbiased_exp() - e_ref);
      break;
    case CheckClass::DIV: {
      // M_B * delta_C == M_A * 2^(E_A - E_B - E_C) - M_B * M_C, exactly.
      const Dyadic ma = mantissa_parts(a, k).m;
      const Dyadic mb = mantissa_parts(b, k).m;
      const Dyadic mc = mantissa_parts(t.c.value, k).m;
      const Dyadic mb_delta =
          ma.ldexp(a.unbiased_exp() - b.unbiased_exp() -
                   t.c.value.unbiased_exp()) -
          mb * mc;
      t.term3 = delta_prime + mb_delta.ldexp(e_base - e_ref);
      break;
    }
    case CheckClass::SQRT: {
      // (2 M_C + delta_C) * delta_C == M_B * 2^(E_B - 2 E_C) - M_C^2.
      const Dyadic mb = mantissa_parts(b, k).m;
      const Dyadic mc = mantissa_parts(t.c.value, k).m;
      const Dyadic prod =
          mb.ldexp(b.unbiased_exp() - 2 * t.c.value.unbiased_exp()) - mc * mc;
      t.term3 = delta_prime + prod.ldexp(e_base - e_ref);
      break;
    }
  }

  return t;
}

// ===========================================================================
// Per-term bound verification
// ===========================================================================

TermBoundReport verify_term_bounds(const OracleTrace& t) {
  TermBoundReport rep;
  rep.terms[0].term = "term1";
  rep.terms[1].term = "term2";
  rep.terms[2].term = "term3";
  rep.terms[0].value = t.term1;
  rep.terms[1].value = t.term2;
  rep.terms[2].value = t.term3;

  const bool common = t.exponent_case == ExponentCase::CommonCase1 ||
                      t.exponent_case == ExponentCase::CommonCase2;
  rep.applicable = common;
  if (!common) return rep;

  const Dyadic m_ref_h = Dyadic(BigInt(t.reference.significand()), -t.k);
  const Dyadic m_out = Dyadic(BigInt(t.checker_out.significand()), -t.k);
  rep.identity_ok = (t.term1 + t.term2 + t.term3) == (m_ref_h - m_out);

  const int k = t.k;
  const bool cc1 = t.exponent_case == ExponentCase::CommonCase1;
  // l = 2^-k - 2^-23, the largest possible M^L.
  const Dyadic ell = Dyadic(BigInt((1u << (23 - k)) - 1u), -23);
  const Dyadic half_ulp = dyadic_pow2(-(k + 1));  // 2^-(k+1)

  Dyadic t1_hi;
  Dyadic t3_mag;
  switch (t.check_class) {
    case CheckClass::MUL:
      t1_hi = cc1 ? ell.ldexp(2) : ell.ldexp(1);
      t3_mag = half_ulp + dyadic_pow2(-24);
      break;
    case CheckClass::DIV:
      t1_hi = cc1 ? ell.ldexp(2) : ell.ldexp(1);
      t3_mag = cc1 ? half_ulp + dyadic_pow2(-23)
                   : dyadic_pow2(-k) + dyadic_pow2(-24);
      break;
    case CheckClass::SQRT:
      t1_hi = cc1 ? ell.ldexp(2) : ell.ldexp(1);
      t3_mag = cc1 ? half_ulp + dyadic_pow2(-22)
                   : half_ulp + dyadic_pow2(-23);
      break;
    case CheckClass::SSADD:
    case CheckClass::DSSUB:
      // 1.5 * l in common case 1 (distinct input exponents), l in case 2.
      t1_hi = cc1 ? Dyadic(3 * ell.mant(), ell.exp2() - 1) : ell;
      t3_mag = half_ulp + dyadic_pow2(-24);
      break;
    case CheckClass::SSSUB:
    case CheckClass::DSADD:
      t1_hi = cc1 ? Dyadic(3 * ell.mant(), ell.exp2() - 1) : ell;
      t3_mag = cc1 ? half_ulp + dyadic_pow2(-24)
                   : half_ulp + dyadic_pow2(-25);
      break;
  }

  rep.terms[0].lo = Dyadic(0);
  rep.terms[0].hi = t1_hi;
  rep.terms[1].lo = -ell;
  rep.terms[1].hi = Dyadic(0);
  rep.terms[2].lo = -t3_mag;
  rep.terms[2].hi = t3_mag;
  for (auto& tb : rep.terms)
    tb.pass = (tb.lo <= tb.value) && (tb.value <= tb.hi);
  return rep;
}

// ===========================================================================
// Corner-case generator: addition / double-sign subtraction
//
// Construction: exponents E_A and E_B = E_A - 1, truncated significand
// fractions i and j = 2^(k-1)-1-i chosen so the checker sum is exactly
// 2 - 2^-k (all-ones fraction, no rounding), and low fraction parts p, q
// chosen so the full sum reaches [2 - 2^-24, 2 + 2^-k-1), which the FPU
// rounds into the next binade with a zero top-k fraction. Diff == 1 exactly.
// The family is empty at k == 23 (no low bits exist to push the sum up).
// ===========================================================================

CornerAddGenerator::CornerAddGenerator(int k, std::uint64_t seed)
    : k_(k), rng_(seed) {
  if (k < 1 || k > 23)
    throw std::invalid_argument("corner generator: k must be in [1, 23]");
}

std::optional<CornerHit> CornerAddGenerator::next() {
  constexpr int kAttemptBudget = 256;
  const int low_w = 23 - k_;
  for (int tries = 0; tries < kAttemptBudget; ++tries) {
    ++attempts_;
    const std::uint32_t i =
        k_ == 1 ? 0u
                : static_cast<std::uint32_t>(rng_() % (1ull << (k_ - 1)));
    const std::uint32_t j = (1u << k_) - 2u - 2u * i;
    const std::uint64_t pq_span = 1ull << low_w;
    const std::uint32_t p = static_cast<std::uint32_t>(rng_() & (pq_span - 1));
    // Need 2p + q >= 2^(24-k) - 1 so the full sum reaches 2 - 2^-24.
    const std::int64_t qmin_s =
        static_cast<std::int64_t>(2 * pq_span - 1) - 2 * static_cast<std::int64_t>(p);
    const std::uint64_t qmin = qmin_s < 0 ? 0ull : static_cast<std::uint64_t>(qmin_s);
    if (qmin >= pq_span) continue;  // always true at k == 23: empty family
    const std::uint32_t q =
        static_cast<std::uint32_t>(qmin + (rng_() % (pq_span - qmin)));

    const std::uint32_t fa = (i << low_w) | p;
    const std::uint32_t fb = (j << low_w) | q;
    const int ea = -60 + static_cast<int>(rng_() % 121);
    const std::uint32_t s = static_cast<std::uint32_t>(rng_() & 1u);

    const bool sub = use_sub_;
    use_sub_ = !use_sub_;
    const OpKind op = sub ? OpKind::Sub : OpKind::Add;
    const PackedFloat32 a{pack(s, static_cast<std::uint32_t>(ea + 127), fa)};
    const PackedFloat32 b{
        pack(sub ? (s ^ 1u) : s, static_cast<std::uint32_t>(ea - 1 + 127), fb)};

    const OracleTrace tr = trace(op, a, b, k_);
    if (tr.exponent_case == ExponentCase::CornerCase && tr.diff_predicted == 1) {
      ++hits_;
      return CornerHit{op, a, b, tr};
    }
  }
  return std::nullopt;
}

// ===========================================================================
// Corner-case generator: multiplication
//
// Works backward from a target checker output T = 2 - (4-cd)*2^-k (top k-2
// fraction bits all ones) and a target residual M_C - T = (ab + mu)*2^-k.
// The truncated significands are placed so the checker product lands in the
// round-down window [T, T + 2^-k-1); the low fraction parts are then solved
// so the cross term M* makes up the difference between the residual target
// and the checker's discarded bits u. Rows with ab == 3 push u toward the
// round-up threshold and the low parts toward all-ones, because there the
// cross term must sit near its supremum (just under 3 ulps). Every candidate
// is verified exactly before being emitted. Requires k >= 3.
// ===========================================================================

CornerMulGenerator::CornerMulGenerator(int k, std::uint64_t seed)
    : k_(k), rng_(seed) {
  if (k < 1 || k > 23)
    throw std::invalid_argument("corner generator: k must be in [1, 23]");
}

std::optional<CornerHit> CornerMulGenerator::next() {
  constexpr int kAttemptBudget = 4096;
  if (k_ < 3) return std::nullopt;  // output pattern needs k-2 >= 1 one-bits
  const int k = k_;
  const int low_w = 23 - k;

  static constexpr int kRows[6][2] = {{1, 3}, {2, 2}, {2, 3},
                                      {3, 1}, {3, 2}, {3, 3}};
  const int ab = kRows[row_cursor_][0];
  const int cd = kRows[row_cursor_][1];
  const int sum = ab + cd;             // 4..6
  const int table_e = (sum - 4) >> 1;  // predicted result-fraction value

  for (int tries = 0; tries < kAttemptBudget; ++tries) {
    ++attempts_;

    // Truncated significands: place the checker product at the first
    // multiple of sa_h at or above T*2^k, and require it to fall in the
    // round-down window [T*2^k, T*2^k + 2^(k-1)) so the checker output is
    // exactly T. Rows with ab == 3 additionally need the discarded part u
    // in [5/16, 1/2) ulp: the residual u + M* must reach 3 ulps while the
    // cross term M* alone cannot exceed 3 ulps minus half the window.
    const std::uint64_t sa_h = (1ull << k) | (rng_() & mask64(k));
    const std::uint64_t t_int =
        (1ull << (k + 1)) - static_cast<std::uint64_t>(4 - cd);
    const std::uint64_t tk = t_int << k;
    const std::uint64_t sb_h = (tk + sa_h - 1) / sa_h;
    if (sb_h < (1ull << k) || sb_h >= (1ull << (k + 1))) continue;
    const std::uint64_t prod_h = sa_h * sb_h;
    if (prod_h >> (2 * k + 1)) continue;  // checker must stay in [1, 2)
    const std::uint64_t u_raw = prod_h - tk;   // discarded checker bits
    if (u_raw >= (1ull << (k - 1))) continue;  // checker must round down
    if (ab == 3 && (u_raw << 4) < (5ull << k)) continue;

    // Residual target: M_C - T = (ab + mu)*2^-k at scale 2^-46, with mu
    // mid-band (low-band for ab == 3, where the cross term is nearly
    // maximal). The cross term must then supply the target minus u.
    const std::uint64_t u46 = u_raw << (46 - 2 * k);
    const std::uint64_t mu46 =
        ab == 3 ? (1ull << (42 - k)) + (rng_() & mask64(42 - k))
                : (1ull << (44 - k)) + (rng_() & mask64(44 - k));
    const std::uint64_t md46 =
        (static_cast<std::uint64_t>(ab) << (46 - k)) + mu46;
    if (md46 <= u46) continue;
    const std::uint64_t star46 = md46 - u46;

    // Low fraction parts: draw fa (forced into the top quarter when the
    // row needs a near-maximal cross term), then solve fb by rounded
    // division so fa*sb_h*2^(23-k) + fb*siga lands on the target.
    std::uint64_t fa_low = rng_() & mask64(low_w);
    if (ab == 3 && low_w >= 2) fa_low |= 3ull << (low_w - 2);
    const std::uint64_t siga = (sa_h << low_w) | fa_low;
    const std::uint64_t base46 = (sb_h * fa_low) << low_w;
    if (base46 > star46) continue;
    const std::uint64_t fb_low = (star46 - base46 + siga / 2) / siga;
    if (fb_low >= (1ull << low_w)) continue;
    const std::uint64_t sigb = (sb_h << low_w) | fb_low;

    // Exact integer verification of the full-precision side. The unrounded
    // product itself must cross the binade: candidates where only the
    // rounded result crosses sit outside the pattern diagram.
    const std::uint64_t prod = siga * sigb;
    if (prod < (1ull << 47)) continue;
    const std::uint64_t sigc = rne_shift64(prod, 24);
    if (sigc >> 24) continue;  // cannot re-cross, kept as a guard
    const std::uint64_t resid46 = prod - (t_int << (46 - k));
    if ((resid46 >> (46 - k)) != static_cast<std::uint64_t>(ab)) continue;
    const std::uint32_t f_ch =
        (static_cast<std::uint32_t>(sigc) & 0x7FFFFFu) >> low_w;
    if (f_ch != static_cast<std::uint32_t>(table_e)) continue;
    const int f_act =
        low_w >= 1 ? static_cast<int>((sigc >> (low_w - 1)) & 1ull) : 0;
    if (table_e == 1 && f_act == 1) continue;  // ef == 11 excluded

    // Safe exponents and random signs; E_C = e_base + 1 stays in range.
    const int ea = -30 + static_cast<int>(rng_() % 61);
    const int eb = -30 + static_cast<int>(rng_() % 61);
    const PackedFloat32 a{pack(static_cast<std::uint32_t>(rng_() & 1u),
                               static_cast<std::uint32_t>(ea + 127),
                               static_cast<std::uint32_t>(siga) & 0x7FFFFFu)};
    const PackedFloat32 b{pack(static_cast<std::uint32_t>(rng_() & 1u),
                               static_cast<std::uint32_t>(eb + 127),
                               static_cast<std::uint32_t>(sigb) & 0x7FFFFFu)};

    const OracleTrace tr = trace(OpKind::Mul, a, b, k);
    if (tr.exponent_case != ExponentCase::CornerCase) continue;
    const MulCornerPattern mp = mul_corner_pattern(tr);
    if (!(mp.structure_ok && mp.table_ok && mp.ef_ok && mp.ab == ab &&
          mp.cd == cd && mp.diff == 4 + table_e - cd))
      continue;
    ++hits_;
    row_cursor_ = (row_cursor_ + 1) % 6;
    return CornerHit{OpKind::Mul, a, b, tr};
  }
  row_cursor_ = (row_cursor_ + 1) % 6;  // an empty row must not stall the stream
  return std::nullopt;
}

MulCornerPattern mul_corner_pattern(const OracleTrace& t) {
  MulCornerPattern p;
  const int k = t.k;
  const std::uint32_t fprime = t.checker_out.fraction_k;
  p.cd = static_cast<int>(fprime & 3u);
  p.e = static_cast<int>(t.reference.fraction_k & 1u);
  p.f = k < 23 ? static_cast<int>((t.c.value.fraction() >> (23 - k - 1)) & 1u)
               : 0;
  p.diff = t.diff_predicted;

  // ab = integer part, in checker-ulp units, of the exact residual between
  // the unrounded product and the rounded checker output. Both sides are
  // exact integers at scale 2^-46 (the checker output exponent equals
  // E_A + E_B on a mul corner trace). Stays -1 when undefined.
  if (t.op == OpKind::Mul && t.exponent_case == ExponentCase::CornerCase) {
    const std::uint64_t prod = ((1ull << 23) | t.a.fraction()) *
                               ((1ull << 23) | t.b.fraction());
    const std::uint64_t out46 =
        static_cast<std::uint64_t>((1u << k) | fprime) << (46 - k);
    if (prod > out46)
      p.ab = static_cast<int>((prod - out46) >> (46 - k));
  }

  p.structure_ok = k >= 3 && t.op == OpKind::Mul &&
                   t.exponent_case == ExponentCase::CornerCase &&
                   (fprime >> 2) == ((1u << (k - 2)) - 1u) &&
                   t.reference.fraction_k <= 1;
  const int sum = p.ab + p.cd;
  p.table_ok = p.ab >= 0 && sum >= 4 && sum <= 6 &&
               p.diff == 4 + ((sum - 4) >> 1) - p.cd;
  p.ef_ok = !(p.e == 1 && p.f == 1);
  return p;
}

// ===========================================================================
// Rounding-interaction cases for multiplication, common case 1
// ===========================================================================

std::string RoundingCases::name() const {
  std::string s = step1 == 1 ? "I" : "II";
  s += step2a == 3 ? "-III" : "-IV";
  s += step2b == 5 ? "-V" : "-VI";
  return s;
}

namespace {

// Shared exact integer classification at scale 2^-46. Preconditions: the
// product does not cross the binade (common case 1); refsig/outsig are the
// truncated-result and checker-output significands at width k+1.
RoundingCases classify_cases_int(std::uint64_t siga, std::uint64_t sigb, int k,
                                 std::uint64_t refsig, std::uint64_t outsig) {
  const int low_w = 23 - k;
  const std::uint64_t prod = siga * sigb;
  const std::uint64_t pprime = (siga >> low_w) * (sigb >> low_w)
                               << (46 - 2 * k);
  const std::uint64_t u = pprime & mask64(46 - k);
  const std::uint64_t v = (prod - pprime) & mask64(46 - k);

  RoundingCases rc;
  rc.step1 = (u + v < (1ull << (46 - k))) ? 1 : 2;
  rc.step2a = (refsig != (prod >> (46 - k))) ? 4 : 3;
  rc.step2b = (outsig != (pprime >> (46 - k))) ? 6 : 5;
  return rc;
}

}  // namespace

RoundingCases classify_rounding_cases(const OracleTrace& t) {
  if (t.check_class != CheckClass::MUL ||
      t.exponent_case != ExponentCase::CommonCase1)
    throw std::invalid_argument(
        "classify_rounding_cases: requires a MUL trace in common case 1");
  const std::uint64_t siga = (1u << 23) | t.a.fraction();
  const std::uint64_t sigb = (1u << 23) | t.b.fraction();
  return classify_cases_int(siga, sigb, t.k, t.reference.significand(),
                            t.checker_out.significand());
}

// ===========================================================================
// Diff == 4 search for multiplication
// ===========================================================================

namespace {

// Inverse of an odd value modulo 2^bits (Newton iteration).
std::uint64_t modinv_pow2(std::uint64_t a, int bits) {
  std::uint64_t x = a;  // correct modulo 2^3 for odd a
  for (int i = 0; i < 5; ++i) x = x * (2 - a * x);
  return x & mask64(bits);
}

}  // namespace

Diff4SearchReport search_diff4_mul(int k, std::uint64_t budget,
                                   std::uint64_t seed) {
  if (k < 1 || k > 23)
    throw std::invalid_argument("search_diff4_mul: k must be in [1, 23]");
  Diff4SearchReport rep;
  rep.k = k;
  rep.budget = budget;
  rep.max_diff = std::numeric_limits<int>::min();

  std::mt19937_64 rng(seed);
  const int low_w = 23 - k;

  for (std::uint64_t n = 0; n < budget; ++n) {
    std::uint32_t fa, fb;
    switch (n & 3ull) {
      case 0:
      case 1:
      default:
        // Uniform over normal significands.
        fa = static_cast<std::uint32_t>(rng() & 0x7FFFFFu);
        fb = static_cast<std::uint32_t>(rng() & 0x7FFFFFu);
        break;
      case 2:
        // Saturated low parts: drives v = (M*)^L toward its maximum.
        fa = static_cast<std::uint32_t>((rng() & 0x7FFFFFu) | mask64(low_w));
        fb = static_cast<std::uint32_t>((rng() & 0x7FFFFFu) | mask64(low_w));
        break;
      case 3: {
        // Solve the checker product's low k bits to sit on a rounding
        // boundary: u ~ 2^-(k+1) (the tie) or u ~ 2^-k (the carry edge).
        const std::uint64_t sah = (1ull << k) | (rng() & mask64(k)) | 1ull;
        const std::uint64_t target =
            (n & 4ull) ? (k >= 1 ? (1ull << (k - 1)) : 0ull)
                       : ((mask64(k) - (rng() & 7ull)) & mask64(k));
        const std::uint64_t x = (modinv_pow2(sah, k) * target) & mask64(k);
        fa = static_cast<std::uint32_t>(((sah & mask64(k)) << low_w) |
                                        (rng() & mask64(low_w)));
        fb = static_cast<std::uint32_t>((x << low_w) | (rng() & mask64(low_w)));
        break;
      }
    }

    const std::uint64_t siga = 0x800000ull | fa;
    const std::uint64_t sigb = 0x800000ull | fb;
    const std::uint64_t prod = siga * sigb;

    // Full-precision rounding.
    std::uint64_t sigc;
    int bump_c;
    if (prod < (1ull << 47)) {
      const std::uint64_t q = rne_shift64(prod, 23);
      if (q == (1ull << 24)) {
        sigc = 1ull << 23;
        bump_c = 1;
      } else {
        sigc = q;
        bump_c = 0;
      }
    } else {
      sigc = rne_shift64(prod, 24);  // cannot reach 2^24 again
      bump_c = 1;
    }

    // Checker rounding.
    const std::uint64_t prodh = (siga >> low_w) * (sigb >> low_w);
    int bump_o = static_cast<int>(prodh >> (2 * k + 1));
    std::uint64_t m_out = rne_shift64(prodh, k + bump_o);
    if (m_out == (1ull << (k + 1))) {
      m_out >>= 1;
      ++bump_o;
    }

    const std::uint64_t refsig = sigc >> low_w;
    const int diff = ((bump_c - bump_o) << k) + static_cast<int>(refsig) -
                     static_cast<int>(m_out);

    if (diff >= -1 && diff <= 4)
      ++rep.diff_hist[static_cast<std::size_t>(diff + 1)];
    else
      ++rep.out_of_range_count;

    int combo = -1;
    if (bump_c == 0 && bump_o == 0) {
      ++rep.cc1_samples;
      const RoundingCases rc = classify_cases_int(siga, sigb, k, refsig, m_out);
      combo = rc.combo_index();
      ++rep.combo_counts[static_cast<std::size_t>(combo)];
      if (!rep.combo_witness[static_cast<std::size_t>(combo)]) {
        rep.combo_witness[static_cast<std::size_t>(combo)] =
            Diff4Witness{pack(0, 127, fa), pack(0, 127, fb), diff, combo};
      }
    } else if (bump_c == 1 && bump_o == 1) {
      ++rep.cc2_samples;
    } else if (bump_c == 1 && bump_o == 0) {
      ++rep.corner_samples;
    } else {
      ++rep.anti_corner_samples;
    }

    if (diff > rep.max_diff) {
      rep.max_diff = diff;
      rep.max_diff_witness = Diff4Witness{pack(0, 127, fa), pack(0, 127, fb),
                                          diff, combo};
    }

    // Sparse cross-verification against the dyadic trace path.
    if ((n & 0xFFFFull) == 0ull) {
      const PackedFloat32 wa{pack(0, 127, fa)};
      const PackedFloat32 wb{pack(0, 127, fb)};
      const OracleTrace tr = trace(OpKind::Mul, wa, wb, k);
      if (tr.diff_predicted != diff)
        throw std::logic_error("search_diff4_mul: integer/dyadic mismatch");
      if (combo >= 0) {
        const RoundingCases rc = classify_rounding_cases(tr);
        if (rc.combo_index() != combo)
          throw std::logic_error("search_diff4_mul: case-combo mismatch");
      }
    }
  }
  return rep;
}

// ===========================================================================
// JSON serialization
// ===========================================================================

namespace {

nlohmann::json dyadic_json(const Dyadic& d, bool enclosure = false) {
  const Dyadic n = d.normalize();
  nlohmann::json j;
  j["mant"] = n.mant().str();
  j["exp2"] = n.exp2();
  j["approx"] = n.to_double_approx();
  if (enclosure) j["floor_enclosure"] = true;
  return j;
}

nlohmann::json reduced_json(const ReducedFloat& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["sign"] = r.sign_bit;
  j["exp_bits"] = r.exp_bits;
  j["fraction_k"] = r.fraction_k;
  j["ef_field"] = r.ef_field();
  return j;
}

}  // namespace

std::string trace_to_json(const OracleTrace& t) {
  nlohmann::json j;
  j["op"] = op_name(t.op);
  j["k"] = t.k;
  j["a"] = hex32(t.a.word);
  j["b"] = hex32(t.b.word);
  j["c"] = hex32(t.c.value.word);
  j["flags"] = flags_to_string(t.c.flags);
  j["class"] = check_class_name(t.check_class);
  j["ref_role"] = role_name(t.ref_role);
  j["exact_result"] = dyadic_json(t.exact_result, t.exact_result_is_enclosure);
  j["delta_full"] = dyadic_json(t.delta_full, t.delta_full_is_enclosure);
  j["axiom4_ok"] = t.axiom4_ok;
  j["delta_checker"] = dyadic_json(t.delta_checker);
  j["axiom5_ok"] = t.axiom5_ok;
  j["m_star"] = dyadic_json(t.m_star);
  nlohmann::json lows = nlohmann::json::object();
  for (const auto& [role, v] : t.m_low_terms) lows[role] = dyadic_json(v);
  j["m_low_terms"] = lows;
  j["exponent_case"] = exponent_case_name(t.exponent_case);
  j["e_max"] = t.e_max;
  j["term1"] = dyadic_json(t.term1);
  j["term2"] = dyadic_json(t.term2);
  j["term3"] = dyadic_json(t.term3);
  j["reference"] = reduced_json(t.reference);
  j["checker_out"] = reduced_json(t.checker_out);
  j["diff_predicted"] = t.diff_predicted;
  return j.dump(2);
}

}  // namespace rpcfpu
