// SPDX-License-Identifier: MIT

#include "rpcfpu/float_bits.hpp"

#include <stdexcept>

namespace rpcfpu {

PackedFloat32 unpack(std::uint32_t word) { return PackedFloat32{word}; }

std::uint32_t pack(std::uint32_t sign_bit, std::uint32_t exp_bits,
                   std::uint32_t fraction) {
  if (sign_bit > 1u) throw std::invalid_argument("pack: sign_bit > 1");
  if (exp_bits > 0xFFu) throw std::invalid_argument("pack: exp_bits > 255");
  if (fraction > 0x007FFFFFu)
    throw std::invalid_argument("pack: fraction >= 2^23");
  return (sign_bit << 31) | (exp_bits << 23) | fraction;
}

OperandClass classify(PackedFloat32 x) {
  const std::uint32_t e = x.exp_bits();
  const std::uint32_t f = x.fraction();
  if (e == 0) return f == 0 ? OperandClass::Zero : OperandClass::Denorm;
  if (e == 0xFFu) return f == 0 ? OperandClass::Infinity : OperandClass::NaN;
  return OperandClass::Normal;
}

ReducedFloat truncate_to_reduced(PackedFloat32 x, int k) {
  if (k < 1 || k > 23)
    throw std::invalid_argument("truncate_to_reduced: k out of [1,23]");
  if (!is_normal(x))
    throw std::invalid_argument("truncate_to_reduced: operand not Normal");
  return ReducedFloat{k, x.sign_bit(), x.exp_bits(), x.fraction() >> (23 - k)};
}

MantissaParts mantissa_parts(PackedFloat32 x, int k) {
  if (k < 1 || k > 23)
    throw std::invalid_argument("mantissa_parts: k out of [1,23]");
  if (!is_normal(x))
    throw std::invalid_argument("mantissa_parts: operand not Normal");
  const std::uint32_t f = x.fraction();
  const std::uint32_t f_h = f >> (23 - k);
  MantissaParts p;
  p.m = Dyadic(BigInt((1u << 23) | f), -23);
  p.m_h = Dyadic(BigInt((1u << k) | f_h), -k);
  p.m_l = p.m - p.m_h;
  return p;
}

}  // namespace rpcfpu
