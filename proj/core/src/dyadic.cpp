// SPDX-License-Identifier: MIT

#include "rpcfpu/dyadic.hpp"

#include <cmath>
#include <sstream>

namespace rpcfpu {

namespace {

// floor(m / 2^s) with true floor semantics for negative m (the backend's
// sign-magnitude right shift truncates toward zero, which is not wanted).
BigInt floor_shift(const BigInt& m, int s) {
  if (m >= 0) return m >> s;
  const BigInt mag = -m;
  BigInt q = mag >> s;
  if ((q << s) != mag) ++q;
  return -q;
}

}  // namespace

BigInt Dyadic::floor_scaled(int frac_bits) const {
  const int shift = exp2_ + frac_bits;
  if (shift >= 0) return mant_ << shift;
  return floor_shift(mant_, -shift);
}

BigInt Dyadic::round_ne_scaled(int frac_bits) const {
  const int shift = exp2_ + frac_bits;
  if (shift >= 0) return mant_ << shift;
  const int s = -shift;
  const BigInt q = floor_shift(mant_, s);
  const BigInt rem = mant_ - (q << s);  // in [0, 2^s)
  const BigInt half = BigInt(1) << (s - 1);
  if (rem > half) return q + 1;
  if (rem < half) return q;
  // Tie: round to even quotient.
  return (q & 1) != 0 ? q + 1 : q;
}

Dyadic Dyadic::normalize() const {
  if (mant_ == 0) return Dyadic(BigInt(0), 0);
  BigInt m = mant_;
  int e = exp2_;
  while ((m & 1) == 0) {
    m >>= 1;
    ++e;
  }
  return Dyadic(std::move(m), e);
}

std::string Dyadic::to_string() const {
  const Dyadic n = normalize();
  std::ostringstream os;
  os << n.mant_ << "*2^" << n.exp2_;
  return os.str();
}

double Dyadic::to_double_approx() const {
  if (mant_ == 0) return 0.0;
  const Dyadic n = normalize();
  // Reduce to at most 64 mantissa bits, then scale. Truncation error is
  // below double precision for the magnitudes reported here; this value is
  // display-only by contract.
  BigInt m = n.mant_;
  int e = n.exp2_;
  const bool neg = m < 0;
  if (neg) m = -m;
  while (m >> 63 != 0) {
    m >>= 1;
    ++e;
  }
  const double d = std::ldexp(static_cast<double>(m.convert_to<std::uint64_t>()), e);
  return neg ? -d : d;
}

}  // namespace rpcfpu
