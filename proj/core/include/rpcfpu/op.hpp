// SPDX-License-Identifier: MIT
//
// The five checked operations.

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace rpcfpu {

enum class OpKind { Add, Sub, Mul, Div, Sqrt };

inline constexpr OpKind kAllOps[] = {OpKind::Add, OpKind::Sub, OpKind::Mul,
                                     OpKind::Div, OpKind::Sqrt};

[[nodiscard]] std::string op_name(OpKind op);
[[nodiscard]] std::optional<OpKind> parse_op(std::string_view name);

// Bitmask helpers used by the fault-site catalog.
[[nodiscard]] constexpr unsigned op_bit(OpKind op) {
  return 1u << static_cast<unsigned>(op);
}
[[nodiscard]] constexpr bool mask_has(unsigned mask, OpKind op) {
  return (mask & op_bit(op)) != 0;
}

}  // namespace rpcfpu
