// SPDX-License-Identifier: MIT

#include "rpcfpu/fault.hpp"

#include <charconv>
#include <stdexcept>

namespace rpcfpu {

namespace {

constexpr unsigned kAdd = op_bit(OpKind::Add);
constexpr unsigned kSub = op_bit(OpKind::Sub);
constexpr unsigned kMul = op_bit(OpKind::Mul);
constexpr unsigned kDiv = op_bit(OpKind::Div);
constexpr unsigned kSqrt = op_bit(OpKind::Sqrt);
constexpr unsigned kAddSub = kAdd | kSub;
constexpr unsigned kMulDivSqrt = kMul | kDiv | kSqrt;
constexpr unsigned kAll = kAdd | kSub | kMul | kDiv | kSqrt;

// Widths: fixed + k_coeff * k. FPU-side widths are k-independent.
constexpr std::array<NetInfo, kNetCount> kCatalog{{
    {NetId::FpuAOperand, "fpu.a_operand", 32, 0, kAdd | kSub | kMul | kDiv,
     false},
    {NetId::FpuBOperand, "fpu.b_operand", 32, 0, kAll, false},
    {NetId::FpuExpDiff, "fpu.exp_diff", 8, 0, kAddSub, false},
    {NetId::FpuAlignShift, "fpu.align_shift", 5, 0, kAddSub, false},
    {NetId::FpuAlignedBSig, "fpu.aligned_b_sig", 27, 0, kAddSub, false},
    {NetId::FpuSigSum, "fpu.sig_sum", 28, 0, kAddSub, false},
    {NetId::FpuExpSum, "fpu.exp_sum", 10, 0, kMulDivSqrt, false},
    {NetId::FpuProdAcc, "fpu.prod_acc", 48, 0, kMul, false},
    {NetId::FpuQuotAcc, "fpu.quot_acc", 26, 0, kDiv, false},
    {NetId::FpuRootAcc, "fpu.root_acc", 26, 0, kSqrt, false},
    {NetId::FpuRemAcc, "fpu.rem_acc", 28, 0, kDiv | kSqrt, false},
    {NetId::FpuNormShift, "fpu.norm_shift", 5, 0, kAdd | kSub | kMul | kDiv,
     false},
    {NetId::FpuGrs, "fpu.grs", 3, 0, kAll, false},
    {NetId::FpuRoundCarry, "fpu.round_carry", 1, 0, kAll, false},
    {NetId::FpuFormatSelect, "fpu.format_select", 4, 0, kAll, false},
    {NetId::FpuResultBits, "fpu.result_bits", 32, 0, kAll, false},

    {NetId::RpcAOperand, "rpc.a_operand", 9, 1, kAll, true},
    {NetId::RpcBOperand, "rpc.b_operand", 9, 1, kAll, true},
    {NetId::RpcExpDiff, "rpc.exp_diff", 8, 0, kAddSub, true},
    {NetId::RpcAlignShift, "rpc.align_shift", 5, 0, kAddSub, true},
    {NetId::RpcAlignedBSig, "rpc.aligned_b_sig", 4, 1, kAddSub, true},
    {NetId::RpcSigSum, "rpc.sig_sum", 5, 1, kAddSub, true},
    {NetId::RpcExpSum, "rpc.exp_sum", 10, 0, kMulDivSqrt, true},
    {NetId::RpcProdAcc, "rpc.prod_acc", 2, 2, kMulDivSqrt, true},
    {NetId::RpcNormShift, "rpc.norm_shift", 5, 0, kAll, true},
    {NetId::RpcGrs, "rpc.grs", 3, 0, kAll, true},
    {NetId::RpcRoundCarry, "rpc.round_carry", 1, 0, kAll, true},
    {NetId::RpcResultBits, "rpc.result_bits", 9, 1, kAll, true},

    {NetId::CmpRefField, "cmp.ref_field", 8, 1, kAll, true},
    {NetId::CmpOutField, "cmp.out_field", 8, 1, kAll, true},
    {NetId::CmpDiffOut, "cmp.diff_out", 10, 1, kAll, true},
    {NetId::CmpSignCmp, "cmp.sign_cmp", 1, 0, kAll, true},
}};

}  // namespace

const std::array<NetInfo, kNetCount>& net_catalog() { return kCatalog; }

const NetInfo& net_info(NetId id) {
  return kCatalog[static_cast<std::size_t>(id)];
}

const NetInfo* find_net(std::string_view name) {
  for (const NetInfo& n : kCatalog)
    if (name == n.name) return &n;
  return nullptr;
}

int net_width(NetId id, int k) {
  const NetInfo& n = net_info(id);
  return n.fixed_width + n.k_coeff * k;
}

std::string site_name(const FaultSite& site) {
  return std::string(net_info(site.net).name) + "[" +
         std::to_string(site.bit_index) + "]";
}

FaultSite parse_site(std::string_view text, int k) {
  const auto lb = text.find('[');
  if (lb == std::string_view::npos || text.back() != ']')
    throw std::invalid_argument("parse_site: expected net name followed by "
                                "[bit]: " + std::string(text));
  const NetInfo* net = find_net(text.substr(0, lb));
  if (net == nullptr)
    throw std::invalid_argument("parse_site: unknown net: " +
                                std::string(text.substr(0, lb)));
  const std::string_view digits = text.substr(lb + 1, text.size() - lb - 2);
  int bit = -1;
  const auto res =
      std::from_chars(digits.data(), digits.data() + digits.size(), bit);
  if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size())
    throw std::invalid_argument("parse_site: bad bit index in " +
                                std::string(text));
  if (bit < 0 || bit >= net_width(net->id, k))
    throw std::invalid_argument("parse_site: bit index out of range for " +
                                std::string(net->name));
  return FaultSite{net->id, bit};
}

std::vector<FaultSite> list_fault_sites(OpKind op) {
  std::vector<FaultSite> sites;
  for (const NetInfo& n : kCatalog) {
    if (n.checker_path || !mask_has(n.op_mask, op)) continue;
    for (int b = 0; b < n.fixed_width; ++b) sites.push_back({n.id, b});
  }
  return sites;
}

std::vector<FaultSite> all_fault_sites(OpKind op, int k) {
  std::vector<FaultSite> sites;
  for (const NetInfo& n : kCatalog) {
    if (!mask_has(n.op_mask, op)) continue;
    const int w = net_width(n.id, k);
    for (int b = 0; b < w; ++b) sites.push_back({n.id, b});
  }
  return sites;
}

FaultSet FaultSet::compile(const std::vector<FaultSpec>& specs, int k) {
  FaultSet fs;
  for (const FaultSpec& s : specs) {
    if (s.stuck_value != 0 && s.stuck_value != 1)
      throw std::invalid_argument("FaultSet: stuck value must be 0 or 1");
    const int w = net_width(s.site.net, k);
    if (s.site.bit_index < 0 || s.site.bit_index >= w)
      throw std::invalid_argument("FaultSet: bit index out of range for " +
                                  site_name(s.site));
    const auto i = static_cast<std::size_t>(s.site.net);
    const std::uint64_t bit = std::uint64_t{1} << s.site.bit_index;
    if (s.stuck_value == 1)
      fs.or_mask_[i] |= bit;
    else
      fs.and_mask_[i] &= ~bit;
    fs.any_ = true;
    if (net_info(s.site.net).checker_path)
      fs.touches_checker_ = true;
    else
      fs.touches_fpu_ = true;
  }
  return fs;
}

}  // namespace rpcfpu
