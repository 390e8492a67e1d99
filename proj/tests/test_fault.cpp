// SPDX-License-Identifier: MIT
//
// The fault-site catalog, site naming/parsing, site enumeration, and the
// compiled stuck-at forcing sets.

#include "rpcfpu/fault.hpp"

#include <gtest/gtest.h>

#include <set>
#include <stdexcept>
#include <string>

#include "rpcfpu/op.hpp"

namespace rpcfpu {
namespace {

TEST(NetCatalog, ShapeAndUniqueness) {
  EXPECT_EQ(kNetCount, 32u);
  const auto& cat = net_catalog();
  std::set<std::string> names;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    // Catalog order matches NetId order.
    EXPECT_EQ(static_cast<std::size_t>(cat[i].id), i);
    EXPECT_TRUE(names.insert(cat[i].name).second) << cat[i].name;
    // Prefix encodes the path attribution.
    const std::string name = cat[i].name;
    if (cat[i].checker_path) {
      EXPECT_TRUE(name.rfind("rpc.", 0) == 0 || name.rfind("cmp.", 0) == 0)
          << name;
    } else {
      EXPECT_TRUE(name.rfind("fpu.", 0) == 0) << name;
    }
    // FPU net widths never depend on k.
    if (!cat[i].checker_path) EXPECT_EQ(cat[i].k_coeff, 0) << name;
  }
}

TEST(NetCatalog, WidthFormula) {
  EXPECT_EQ(net_width(NetId::FpuProdAcc, 1), 48);
  EXPECT_EQ(net_width(NetId::FpuProdAcc, 23), 48);
  EXPECT_EQ(net_width(NetId::FpuResultBits, 7), 32);
  // Checker operand/result registers are 9+k bits.
  EXPECT_EQ(net_width(NetId::RpcAOperand, 7), 16);
  EXPECT_EQ(net_width(NetId::RpcResultBits, 23), 32);
  // Checker multiplier accumulator holds the (2k+2)-bit product.
  EXPECT_EQ(net_width(NetId::RpcProdAcc, 7), 16);
  EXPECT_EQ(net_width(NetId::RpcProdAcc, 1), 4);
  // Comparator fields are 8+k bits; the diff window carries 10+k.
  EXPECT_EQ(net_width(NetId::CmpRefField, 7), 15);
  EXPECT_EQ(net_width(NetId::CmpDiffOut, 7), 17);
  EXPECT_EQ(net_width(NetId::CmpSignCmp, 7), 1);
}

TEST(NetCatalog, Lookup) {
  EXPECT_EQ(find_net("fpu.sig_sum"), &net_info(NetId::FpuSigSum));
  EXPECT_EQ(find_net("cmp.diff_out"), &net_info(NetId::CmpDiffOut));
  EXPECT_EQ(find_net("no.such_net"), nullptr);
}

TEST(FaultSites, NamingRoundTrip) {
  const FaultSite s{NetId::FpuSigSum, 12};
  EXPECT_EQ(site_name(s), "fpu.sig_sum[12]");
  EXPECT_EQ(parse_site("fpu.sig_sum[12]", 7), s);

  for (OpKind op : {OpKind::Add, OpKind::Mul, OpKind::Sqrt}) {
    for (int k : {1, 7, 23}) {
      for (const FaultSite& site : all_fault_sites(op, k))
        EXPECT_EQ(parse_site(site_name(site), k), site);
    }
  }
}

TEST(FaultSites, ParseErrors) {
  EXPECT_THROW((void)parse_site("bogus.net[0]", 7), std::invalid_argument);
  EXPECT_THROW((void)parse_site("fpu.sig_sum", 7), std::invalid_argument);
  EXPECT_THROW((void)parse_site("fpu.sig_sum[", 7), std::invalid_argument);
  EXPECT_THROW((void)parse_site("fpu.sig_sum[x]", 7), std::invalid_argument);
  // Bit index at the net width is out of range.
  EXPECT_THROW((void)parse_site("fpu.sig_sum[28]", 7), std::invalid_argument);
  // Checker nets are k-dependent: rpc.result_bits has 16 bits at k=7.
  EXPECT_THROW((void)parse_site("rpc.result_bits[16]", 7),
               std::invalid_argument);
  EXPECT_EQ(parse_site("rpc.result_bits[16]", 8).bit_index, 16);
}

TEST(FaultSites, EnumerationCounts) {
  // FPU-only site counts per op, from the catalog widths.
  EXPECT_EQ(list_fault_sites(OpKind::Add).size(), 177u);
  EXPECT_EQ(list_fault_sites(OpKind::Sub).size(), 177u);
  EXPECT_EQ(list_fault_sites(OpKind::Mul).size(), 167u);
  EXPECT_EQ(list_fault_sites(OpKind::Div).size(), 173u);
  EXPECT_EQ(list_fault_sites(OpKind::Sqrt).size(), 136u);

  // Full datapath at k=7.
  EXPECT_EQ(all_fault_sites(OpKind::Add, 7).size(), 318u);
  EXPECT_EQ(all_fault_sites(OpKind::Sqrt, 7).size(), 267u);

  // Catalog-order enumeration, bit index ascending, no duplicates.
  const auto sites = all_fault_sites(OpKind::Mul, 7);
  std::set<std::pair<int, int>> seen;
  std::size_t last_net = 0;
  int last_bit = -1;
  for (const FaultSite& s : sites) {
    const auto net = static_cast<std::size_t>(s.net);
    ASSERT_TRUE(net >= last_net);
    if (net != last_net) last_bit = -1;
    ASSERT_GT(s.bit_index, last_bit);
    last_net = net;
    last_bit = s.bit_index;
    ASSERT_TRUE(seen.insert({static_cast<int>(net), s.bit_index}).second);
    ASSERT_TRUE(mask_has(net_info(s.net).op_mask, OpKind::Mul));
  }

  // Sites grow with k through the checker paths only.
  EXPECT_LT(all_fault_sites(OpKind::Mul, 1).size(),
            all_fault_sites(OpKind::Mul, 23).size());
}

TEST(FaultSet, CompileValidation) {
  EXPECT_NO_THROW((void)FaultSet::compile(
      {{FaultSite{NetId::FpuSigSum, 27}, 0}}, 7));
  // Stuck value must be 0 or 1.
  EXPECT_THROW((void)FaultSet::compile({{FaultSite{NetId::FpuSigSum, 0}, 2}}, 7),
               std::invalid_argument);
  // Bit must be inside the net at this k.
  EXPECT_THROW(
      (void)FaultSet::compile({{FaultSite{NetId::RpcSigSum, 12}, 1}}, 7),
      std::invalid_argument);
  EXPECT_NO_THROW(
      (void)FaultSet::compile({{FaultSite{NetId::RpcSigSum, 11}, 1}}, 7));
}

TEST(FaultSet, DriveForcesBits) {
  const FaultSet empty;
  EXPECT_TRUE(empty.empty());
  EXPECT_EQ(empty.drive(NetId::FpuSigSum, 0x12345u), 0x12345u);

  const FaultSet set1 = FaultSet::compile(
      {{FaultSite{NetId::FpuSigSum, 4}, 1}, {FaultSite{NetId::FpuSigSum, 0}, 0}},
      7);
  EXPECT_FALSE(set1.empty());
  // Bit 4 forced on, bit 0 forced off, other bits and nets untouched.
  EXPECT_EQ(set1.drive(NetId::FpuSigSum, 0x00u), 0x10u);
  EXPECT_EQ(set1.drive(NetId::FpuSigSum, 0x01u), 0x10u);
  EXPECT_EQ(set1.drive(NetId::FpuSigSum, 0xFFu), 0xFEu);
  EXPECT_EQ(set1.drive(NetId::FpuProdAcc, 0x01u), 0x01u);
}

TEST(FaultSet, PathAttribution) {
  const FaultSet fpu =
      FaultSet::compile({{FaultSite{NetId::FpuGrs, 0}, 1}}, 7);
  EXPECT_TRUE(fpu.touches_fpu());
  EXPECT_FALSE(fpu.touches_checker());

  const FaultSet rpc =
      FaultSet::compile({{FaultSite{NetId::RpcGrs, 0}, 1}}, 7);
  EXPECT_FALSE(rpc.touches_fpu());
  EXPECT_TRUE(rpc.touches_checker());

  const FaultSet cmp =
      FaultSet::compile({{FaultSite{NetId::CmpSignCmp, 0}, 1}}, 7);
  EXPECT_TRUE(cmp.touches_checker());

  const FaultSet both = FaultSet::compile(
      {{FaultSite{NetId::FpuGrs, 0}, 1}, {FaultSite{NetId::RpcGrs, 0}, 1}}, 7);
  EXPECT_TRUE(both.touches_fpu());
  EXPECT_TRUE(both.touches_checker());
}

}  // namespace
}  // namespace rpcfpu
