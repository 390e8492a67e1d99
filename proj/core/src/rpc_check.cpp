// SPDX-License-Identifier: MIT

#include "rpcfpu/rpc_check.hpp"

#include <stdexcept>

#include <json.hpp>

namespace rpcfpu {

namespace {

[[nodiscard]] constexpr std::uint64_t mask_bits(int n) {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

[[nodiscard]] PackedFloat32 role_value(OperandRole r, PackedFloat32 a,
                                       PackedFloat32 b, PackedFloat32 c) {
  switch (r) {
    case OperandRole::A:
      return a;
    case OperandRole::B:
      return b;
    case OperandRole::C:
      return c;
  }
  throw std::invalid_argument("role_value: bad role");
}

}  // namespace

std::string check_class_name(CheckClass c) {
  switch (c) {
    case CheckClass::SSADD:
      return "SSADD";
    case CheckClass::DSSUB:
      return "DSSUB";
    case CheckClass::SSSUB:
      return "SSSUB";
    case CheckClass::DSADD:
      return "DSADD";
    case CheckClass::MUL:
      return "MUL";
    case CheckClass::DIV:
      return "DIV";
    case CheckClass::SQRT:
      return "SQRT";
  }
  throw std::invalid_argument("check_class_name: bad class");
}

DiffBounds bounds_for(CheckClass c) {
  switch (c) {
    case CheckClass::MUL:
    case CheckClass::DIV:
    case CheckClass::SQRT:
      return DiffBounds{-1, 3};
    default:
      return DiffBounds{-1, 1};
  }
}

std::string check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::NoError:
      return "NoError";
    case CheckStatus::ErrorDetected:
      return "ErrorDetected";
    case CheckStatus::Suppressed:
      return "Suppressed";
  }
  throw std::invalid_argument("check_status_name: bad status");
}

std::string suppression_reason_name(SuppressionReason r) {
  switch (r) {
    case SuppressionReason::Exception:
      return "Exception";
    case SuppressionReason::NonStandardOperand:
      return "NonStandardOperand";
    case SuppressionReason::ZeroResult:
      return "ZeroResult";
    case SuppressionReason::CheckerRangeExit:
      return "CheckerRangeExit";
  }
  throw std::invalid_argument("suppression_reason_name: bad reason");
}

CheckPlan classify_check(OpKind op, PackedFloat32 a, PackedFloat32 b,
                         PackedFloat32 c) {
  const std::uint32_t sa = a.sign_bit(), sb = b.sign_bit(), sc = c.sign_bit();
  CheckPlan p;
  switch (op) {
    case OpKind::Add:
      if (sa == sb) {
        p = {CheckClass::SSADD, CheckPlan::Engine::AddSub, OperandRole::A,
             OperandRole::B, false, OperandRole::C};
      } else if (sa == sc) {
        // |A| = |C| + |B|: recompute A' = C - B (signs differ through the
        // subtractor, so magnitudes add).
        p = {CheckClass::DSADD, CheckPlan::Engine::AddSub, OperandRole::C,
             OperandRole::B, true, OperandRole::A};
      } else {
        // |B| = |C| + |A|.
        p = {CheckClass::DSADD, CheckPlan::Engine::AddSub, OperandRole::C,
             OperandRole::A, true, OperandRole::B};
      }
      break;
    case OpKind::Sub:
      if (sa != sb) {
        // Magnitudes add: forward C' = A - B.
        p = {CheckClass::DSSUB, CheckPlan::Engine::AddSub, OperandRole::A,
             OperandRole::B, true, OperandRole::C};
      } else if (sc == sa) {
        // |A| = |C| + |B|: recompute A' = C + B (same signs, magnitudes add).
        p = {CheckClass::SSSUB, CheckPlan::Engine::AddSub, OperandRole::C,
             OperandRole::B, false, OperandRole::A};
      } else {
        // |B| = |A| + |C|: recompute B' = A - C (signs differ).
        p = {CheckClass::SSSUB, CheckPlan::Engine::AddSub, OperandRole::A,
             OperandRole::C, true, OperandRole::B};
      }
      break;
    case OpKind::Mul:
      p = {CheckClass::MUL, CheckPlan::Engine::Mul, OperandRole::A,
           OperandRole::B, false, OperandRole::C};
      break;
    case OpKind::Div:
      p = {CheckClass::DIV, CheckPlan::Engine::Mul, OperandRole::C,
           OperandRole::B, false, OperandRole::A};
      break;
    case OpKind::Sqrt:
      p = {CheckClass::SQRT, CheckPlan::Engine::Mul, OperandRole::C,
           OperandRole::C, false, OperandRole::B};
      break;
  }
  return p;
}

int compute_diff(const ReducedFloat& reference,
                 const ReducedFloat& checker_out) {
  if (reference.k != checker_out.k)
    throw std::invalid_argument("compute_diff: mismatched k");
  return static_cast<int>(static_cast<std::int64_t>(reference.ef_field()) -
                          static_cast<std::int64_t>(checker_out.ef_field()));
}

CheckVerdict check(OpKind op, PackedFloat32 a, PackedFloat32 b,
                   const FpuResult& fpu_result, int k,
                   const FaultSet& checker_faults) {
  const FaultSet& f = checker_faults;
  CheckVerdict v;
  const PackedFloat32 c = fpu_result.value;
  v.check_class = classify_check(op, a, b, c).check_class;

  const auto suppress = [&](SuppressionReason r) {
    v.status = CheckStatus::Suppressed;
    v.suppression_reason = r;
    return v;
  };

  // Suppression screens, in documented priority order.
  if (op == OpKind::Sqrt) {
    if (!is_normal(b)) return suppress(SuppressionReason::NonStandardOperand);
  } else if (!is_normal(a) || !is_normal(b)) {
    return suppress(SuppressionReason::NonStandardOperand);
  }
  if (fpu_result.flags.any_exception())
    return suppress(SuppressionReason::Exception);
  const OperandClass cc = classify(c);
  if (cc == OperandClass::Zero) return suppress(SuppressionReason::ZeroResult);
  if (cc != OperandClass::Normal)
    return suppress(SuppressionReason::NonStandardOperand);

  const CheckPlan plan = classify_check(op, a, b, c);
  const ReducedFloat lhs =
      truncate_to_reduced(role_value(plan.lhs, a, b, c), k);
  const ReducedFloat rhs =
      truncate_to_reduced(role_value(plan.rhs, a, b, c), k);

  CheckerOutcome outcome;
  if (plan.engine == CheckPlan::Engine::Mul)
    outcome = rpc_mul(lhs, rhs, f);
  else if (plan.subtract)
    outcome = rpc_sub(lhs, rhs, f);
  else
    outcome = rpc_add(lhs, rhs, f);

  if (!outcome.ok()) return suppress(SuppressionReason::CheckerRangeExit);

  const ReducedFloat ref =
      truncate_to_reduced(role_value(plan.reference, a, b, c), k);
  const ReducedFloat& out = outcome.value;

  // Comparator: Diff through a (k+10)-bit two's-complement window.
  const std::uint64_t rf =
      f.drive(NetId::CmpRefField, ref.ef_field()) & mask_bits(8 + k);
  const std::uint64_t of =
      f.drive(NetId::CmpOutField, out.ef_field()) & mask_bits(8 + k);
  const int w = k + 10;
  std::uint64_t raw = (static_cast<std::uint64_t>(rf) -
                       static_cast<std::uint64_t>(of)) &
                      mask_bits(w);
  raw = f.drive(NetId::CmpDiffOut, raw) & mask_bits(w);
  std::int64_t diff = static_cast<std::int64_t>(raw);
  if (raw >> (w - 1)) diff -= std::int64_t{1} << w;

  const std::uint64_t sm =
      f.drive(NetId::CmpSignCmp, ref.sign_bit == out.sign_bit ? 1 : 0) & 1;

  v.diff = static_cast<int>(diff);
  v.sign_match = sm != 0;
  const DiffBounds bounds = bounds_for(plan.check_class);
  const bool ok = v.sign_match && diff >= bounds.lb && diff <= bounds.ub;
  v.status = ok ? CheckStatus::NoError : CheckStatus::ErrorDetected;
  return v;
}

std::string verdict_to_json(OpKind op, int k, const CheckVerdict& v) {
  nlohmann::json j;
  j["op"] = op_name(op);
  j["k"] = k;
  j["class"] = check_class_name(v.check_class);
  j["status"] = check_status_name(v.status);
  j["diff"] = v.diff ? nlohmann::json(*v.diff) : nlohmann::json(nullptr);
  j["sign_match"] = v.sign_match;
  j["suppression_reason"] =
      v.suppression_reason
          ? nlohmann::json(suppression_reason_name(*v.suppression_reason))
          : nlohmann::json(nullptr);
  return j.dump();
}

}  // namespace rpcfpu
