// SPDX-License-Identifier: MIT
//
// Stuck-at fault model over named datapath nets.
//
// The FPU and the checker expose every architecturally meaningful
// intermediate value as a named, bit-addressable net. A fault is a single
// (net, bit) forced to 0 or 1 permanently: the forcing is re-applied every
// time the net is driven during an operation, so downstream logic always
// sees the faulted value.
//
// Net names are stable, documented identifiers ("fpu.sig_sum",
// "rpc.prod_acc", "cmp.diff_out", ...). Nets prefixed "fpu." belong to the
// full-precision FPU; "rpc." and "cmp." nets belong to the checker path
// (the comparator is attributed to the checker).

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rpcfpu/op.hpp"

namespace rpcfpu {

// Every injectable net, in catalog (enumeration) order.
enum class NetId : std::uint8_t {
  // --- full-precision FPU -------------------------------------------------
  FpuAOperand,     // latched operand A
  FpuBOperand,     // latched operand B (sole operand of sqrt)
  FpuExpDiff,      // |E_big - E_small| for alignment (add/sub)
  FpuAlignShift,   // clamped alignment shift amount (add/sub)
  FpuAlignedBSig,  // smaller significand after alignment, with GRS (add/sub)
  FpuSigSum,       // significand adder output (add/sub)
  FpuExpSum,       // exponent datapath output (mul/div/sqrt)
  FpuProdAcc,      // 48-bit significand product (mul)
  FpuQuotAcc,      // quotient accumulator (div)
  FpuRootAcc,      // root accumulator (sqrt)
  FpuRemAcc,       // running remainder (div/sqrt)
  FpuNormShift,    // normalization shift amount
  FpuGrs,          // guard/round/sticky presented to the rounder
  FpuRoundCarry,   // rounding increment carry
  FpuFormatSelect, // special-format select lines {zero, inf, nan, denorm}
  FpuResultBits,   // final packed binary32 word
  // --- reduced-precision checker -------------------------------------------
  RpcAOperand,     // latched left checker operand (9+k bits)
  RpcBOperand,     // latched right checker operand (9+k bits)
  RpcExpDiff,      // alignment exponent difference (add/sub engine)
  RpcAlignShift,   // clamped alignment shift amount (add/sub engine)
  RpcAlignedBSig,  // aligned smaller significand with GRS (add/sub engine)
  RpcSigSum,       // significand adder output (add/sub engine)
  RpcExpSum,       // exponent datapath output (mul engine)
  RpcProdAcc,      // (2k+2)-bit significand product (mul engine)
  RpcNormShift,    // normalization shift amount
  RpcGrs,          // guard/round/sticky presented to the rounder
  RpcRoundCarry,   // rounding increment carry
  RpcResultBits,   // packed (9+k)-bit checker result
  // --- comparator (checker path) -------------------------------------------
  CmpRefField,     // (8+k)-bit {exp, fraction} field of the reference
  CmpOutField,     // (8+k)-bit {exp, fraction} field of the checker output
  CmpDiffOut,      // two's-complement Diff window
  CmpSignCmp,      // 1-bit sign-equality line
  Count
};

inline constexpr std::size_t kNetCount = static_cast<std::size_t>(NetId::Count);

struct NetInfo {
  NetId id;
  const char* name;    // stable textual identifier
  int fixed_width;     // width(k) = fixed_width + k_coeff * k
  int k_coeff;
  unsigned op_mask;    // which operations drive this net
  bool checker_path;   // true: fault perturbs the checker, not the FPU
};

// The full catalog in NetId order.
[[nodiscard]] const std::array<NetInfo, kNetCount>& net_catalog();
[[nodiscard]] const NetInfo& net_info(NetId id);
// nullptr when no net has that name.
[[nodiscard]] const NetInfo* find_net(std::string_view name);
// Net width at checker fraction width k (FPU nets do not depend on k).
[[nodiscard]] int net_width(NetId id, int k);

// One injectable bit.
struct FaultSite {
  NetId net = NetId::FpuAOperand;
  int bit_index = 0;
  friend bool operator==(const FaultSite&, const FaultSite&) = default;
};
// "fpu.sig_sum[12]" form.
[[nodiscard]] std::string site_name(const FaultSite& site);
// Parse "net[bit]". Throws std::invalid_argument on unknown net, bad syntax,
// or bit_index >= net width at the given k.
[[nodiscard]] FaultSite parse_site(std::string_view text, int k);

// A site permanently stuck at 0 or 1.
struct FaultSpec {
  FaultSite site;
  int stuck_value = 0;  // 0 or 1
  friend bool operator==(const FaultSpec&, const FaultSpec&) = default;
};

// All sites of the nets in one operation's FPU datapath, net-catalog order,
// bit index ascending within a net.
[[nodiscard]] std::vector<FaultSite> list_fault_sites(OpKind op);
// FPU plus checker plus comparator sites for one operation at width k.
[[nodiscard]] std::vector<FaultSite> all_fault_sites(OpKind op, int k);

// ---------------------------------------------------------------------------
// FaultSet — a compiled set of stuck-at forcings, applied wherever a net is
// driven. Empty sets are free: drive() is a single branch.
// ---------------------------------------------------------------------------
class FaultSet {
 public:
  FaultSet() { and_mask_.fill(~std::uint64_t{0}); }

  // Validates each spec against the catalog at checker width k (FPU sites do
  // not depend on k). Throws std::invalid_argument on out-of-range bits or
  // stuck values.
  [[nodiscard]] static FaultSet compile(const std::vector<FaultSpec>& specs,
                                        int k);

  [[nodiscard]] bool empty() const { return !any_; }

  // Force the faulted bits of `net` in `value`. Hot path: no-op branch when
  // the set is empty.
  [[nodiscard]] std::uint64_t drive(NetId net, std::uint64_t value) const {
    if (!any_) return value;
    const auto i = static_cast<std::size_t>(net);
    return (value | or_mask_[i]) & and_mask_[i];
  }

  // True when the set contains a fault on a checker-path net.
  [[nodiscard]] bool touches_checker() const { return touches_checker_; }
  [[nodiscard]] bool touches_fpu() const { return touches_fpu_; }

 private:
  bool any_ = false;
  bool touches_checker_ = false;
  bool touches_fpu_ = false;
  std::array<std::uint64_t, kNetCount> or_mask_{};
  std::array<std::uint64_t, kNetCount> and_mask_;
};

}  // namespace rpcfpu
