// SPDX-License-Identifier: MIT
//
// Exact dyadic rationals: arbitrary-precision integers scaled by a power of
// two. Every quantity in the verification oracle (significands, rounding
// errors, cross terms, bound endpoints) is a dyadic rational, so all oracle
// checks are exact — no host floating point is involved anywhere.

#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace rpcfpu {

using BigInt = boost::multiprecision::cpp_int;

// Value = mant * 2^exp2. Not kept canonical automatically; normalize()
// strips factors of two from mant when a canonical form is wanted.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long long v) : mant_(v) {}  // NOLINT: implicit by design
  Dyadic(BigInt mant, int exp2) : mant_(std::move(mant)), exp2_(exp2) {}

  // m * 2^e as a named constructor, for call-site clarity.
  [[nodiscard]] static Dyadic scaled(BigInt mant, int exp2) {
    return Dyadic(std::move(mant), exp2);
  }

  [[nodiscard]] const BigInt& mant() const { return mant_; }
  [[nodiscard]] int exp2() const { return exp2_; }
  [[nodiscard]] bool is_zero() const { return mant_ == 0; }
  [[nodiscard]] int sign() const {
    return mant_ == 0 ? 0 : (mant_ < 0 ? -1 : 1);
  }

  [[nodiscard]] Dyadic operator-() const { return Dyadic(-mant_, exp2_); }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    if (a.exp2_ == b.exp2_) return Dyadic(a.mant_ + b.mant_, a.exp2_);
    if (a.exp2_ < b.exp2_)
      return Dyadic(a.mant_ + (b.mant_ << (b.exp2_ - a.exp2_)), a.exp2_);
    return Dyadic((a.mant_ << (a.exp2_ - b.exp2_)) + b.mant_, b.exp2_);
  }
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    return Dyadic(a.mant_ * b.mant_, a.exp2_ + b.exp2_);
  }

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return (a - b).mant_ == 0;
  }
  friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }
  friend bool operator<(const Dyadic& a, const Dyadic& b) {
    return (a - b).mant_ < 0;
  }
  friend bool operator<=(const Dyadic& a, const Dyadic& b) {
    return (a - b).mant_ <= 0;
  }
  friend bool operator>(const Dyadic& a, const Dyadic& b) { return b < a; }
  friend bool operator>=(const Dyadic& a, const Dyadic& b) { return b <= a; }

  [[nodiscard]] Dyadic abs() const {
    return mant_ < 0 ? Dyadic(-mant_, exp2_) : *this;
  }

  // Multiply by 2^e.
  [[nodiscard]] Dyadic ldexp(int e) const { return Dyadic(mant_, exp2_ + e); }

  // floor(value * 2^frac_bits) as an exact integer — the workhorse for
  // truncating a dyadic to a fixed number of fraction bits.
  [[nodiscard]] BigInt floor_scaled(int frac_bits) const;

  // Round value * 2^frac_bits to the nearest integer, ties to even.
  [[nodiscard]] BigInt round_ne_scaled(int frac_bits) const;

  // Canonical form: mantissa odd or zero (zero gets exp2 = 0).
  [[nodiscard]] Dyadic normalize() const;

  // Debug/report form "mant*2^exp2" of the normalized value.
  [[nodiscard]] std::string to_string() const;

  // Nearest double, for human-readable report fields only (never used in a
  // bound decision).
  [[nodiscard]] double to_double_approx() const;

 private:
  BigInt mant_ = 0;
  int exp2_ = 0;
};

// 2^e as a Dyadic.
[[nodiscard]] inline Dyadic dyadic_pow2(int e) {
  return Dyadic(BigInt(1), e);
}

}  // namespace rpcfpu
