// SPDX-License-Identifier: MIT

#include "rpcfpu/op.hpp"

#include <stdexcept>

namespace rpcfpu {

std::string op_name(OpKind op) {
  switch (op) {
    case OpKind::Add:
      return "add";
    case OpKind::Sub:
      return "sub";
    case OpKind::Mul:
      return "mul";
    case OpKind::Div:
      return "div";
    case OpKind::Sqrt:
      return "sqrt";
  }
  throw std::invalid_argument("op_name: bad OpKind");
}

std::optional<OpKind> parse_op(std::string_view name) {
  if (name == "add") return OpKind::Add;
  if (name == "sub") return OpKind::Sub;
  if (name == "mul") return OpKind::Mul;
  if (name == "div") return OpKind::Div;
  if (name == "sqrt") return OpKind::Sqrt;
  return std::nullopt;
}

}  // namespace rpcfpu
