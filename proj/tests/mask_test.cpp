#include "sclab/mask.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "equivalence.hpp"
#include "sclab/builtins.hpp"

namespace sclab {
namespace {

Netlist one_gate(GateOp op) {
    NetlistBuilder b("one");
    b.add_input("a").add_input("b").add_gate("g", op, "y", {"a", "b"}).add_output("y");
    return b.build();
}

TEST(MaskedGadgets, ExhaustiveShareAlgebra) {
    for (int v = 0; v < 16; ++v) {
        const bool x0 = v & 1, x1 = v & 2, y0 = v & 4, y1 = v & 8;
        const bool x = x0 != x1, y = y0 != y1;
        const auto [a0, a1] = masked_and(x0, x1, y0, y1);
        EXPECT_EQ(a0 != a1, x && y) << v;
        const auto [o0, o1] = masked_or(x0, x1, y0, y1);
        EXPECT_EQ(o0 != o1, x || y) << v;
    }
}

TEST(MaskedGadgets, OutputSharesBalancedForIndependentOperands) {
    // For each plain (x, y), every output share is 1 in exactly half of the
    // four input splits.
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            int and0 = 0, and1 = 0, or0 = 0, or1 = 0;
            for (int m = 0; m < 4; ++m) {
                const bool mx = m & 1, my = m & 2;
                const auto a = masked_and(mx, mx != bool(x), my, my != bool(y));
                const auto o = masked_or(mx, mx != bool(x), my, my != bool(y));
                and0 += a.first;
                and1 += a.second;
                or0 += o.first;
                or1 += o.second;
            }
            EXPECT_EQ(and0, 2);
            EXPECT_EQ(and1, 2);
            EXPECT_EQ(or0, 2);
            EXPECT_EQ(or1, 2);
        }
    }
}

TEST(MaskedGadgets, UnmaskBit) {
    EXPECT_FALSE(unmask_bit(true, true));
    EXPECT_TRUE(unmask_bit(true, false));
}

TEST(MaskTransform, LinearGateNeedsNoRandomness) {
    const MaskedNetlist m = mask_netlist(one_gate(GateOp::XOR));
    EXPECT_EQ(m.netlist.count(GateOp::XOR), 2u);
    EXPECT_EQ(m.netlist.gates().size(), 2u);
    EXPECT_TRUE(m.random_ports.empty());
}

TEST(MaskTransform, AndGadgetGateCount) {
    const MaskedNetlist m = mask_netlist(one_gate(GateOp::AND));
    EXPECT_EQ(m.netlist.combinational_count(), 7u);
    EXPECT_EQ(m.netlist.count(GateOp::AND), 2u);
    EXPECT_EQ(m.netlist.count(GateOp::OR), 2u);
    EXPECT_EQ(m.netlist.count(GateOp::XOR), 2u);
    EXPECT_EQ(m.netlist.count(GateOp::NOT), 1u);
}

TEST(MaskTransform, VictimRegistersDuplicated) {
    const Netlist v = build_victim_round();
    const MaskedNetlist m = mask_netlist(v);
    EXPECT_EQ(m.netlist.register_count(), 32u);
    EXPECT_EQ(m.random_ports.size(), 16u);
    EXPECT_EQ(m.register_pairs.size(), 16u);
    EXPECT_EQ(m.netlist.register_depth(), v.register_depth());
    EXPECT_EQ(m.netlist.gates().size(), 685u);
    EXPECT_EQ(v.gates().size(), 219u);
}

TEST(MaskTransform, RejectsRegisterWithoutReset) {
    const Netlist n = parse_netlist("module t\ninput d\ndff r q d x\noutput q\nend\n");
    try {
        mask_netlist(n);
        FAIL();
    } catch (const NetlistError& e) {
        EXPECT_EQ(e.kind(), NetlistError::Kind::async_reset_required);
    }
}

TEST(MaskTransform, ResetLoadsValueIntoShareZero) {
    const Netlist n = parse_netlist("module t\ninput d\ndff r q d 1\noutput q\nend\n");
    const MaskedNetlist m = mask_netlist(n);
    EXPECT_EQ(m.netlist.find_gate("r__s0")->reset, ResetValue::one);
    EXPECT_EQ(m.netlist.find_gate("r__s1")->reset, ResetValue::zero);
}

TEST(MaskTransform, UnmaskReportsMissingShares) {
    const MaskedNetlist m = mask_netlist(one_gate(GateOp::AND));
    EXPECT_THROW(unmask(m, {{"y__s0", true}}, {"y"}), DataError);
    const auto plain = unmask(m, {{"y__s0", true}, {"y__s1", false}}, {"y"});
    EXPECT_TRUE(plain.at("y"));
}

TEST(MaskTransform, SboxEquivalence) {
    const Netlist n = build_aes_sbox();
    const MaskedNetlist m = mask_netlist(n);
    const DdlNetlist d = to_ddl(m);
    const auto o = equiv::run(n, m, &d, 1000, 1, 11);
    EXPECT_EQ(o.mismatches, 0u);
    EXPECT_EQ(o.compared, 2u * 1000 * 8);
}

TEST(MaskTransform, VictimEquivalenceWithRemasking) {
    const Netlist n = build_victim_round();
    const MaskedNetlist m = mask_netlist(n);
    const DdlNetlist d = to_ddl(m);
    const auto o = equiv::run(n, m, &d, 20, 32, 12);
    EXPECT_EQ(o.mismatches, 0u);
}

TEST(MaskTransform, GlitchyMaskedSettlesToSameValues) {
    const Netlist n = build_victim_round();
    const MaskedNetlist m = mask_netlist(n);
    EXPECT_EQ(equiv::run(n, m, nullptr, 10, 16, 13, SimMode::glitchy).mismatches, 0u);
}

TEST(MaskTransform, SerializationRoundTrip) {
    const MaskedNetlist m = mask_netlist(build_victim_round());
    const MaskedNetlist back = parse_masked(serialize_masked(m));
    EXPECT_EQ(back.netlist, m.netlist);
    EXPECT_EQ(back.share_map, m.share_map);
    EXPECT_EQ(back.random_ports, m.random_ports);
    EXPECT_EQ(back.register_pairs, m.register_pairs);
    EXPECT_THROW(parse_masked(serialize_netlist(m.netlist)), DataError);
}

TEST(Ddl, InvertersVanish) {
    const DdlNetlist d = to_ddl(mask_netlist(one_gate(GateOp::AND)));
    for (const auto& g : d.gates) EXPECT_NE(g.op, GateOp::NOT);
    EXPECT_EQ(d.gates.size(), 6u);
}

TEST(Ddl, RegistersPreservedAndUnloadedRailsHaveNoFanout) {
    const MaskedNetlist m = mask_netlist(build_victim_round());
    const DdlNetlist d = to_ddl(m);
    EXPECT_EQ(d.register_count(), m.netlist.register_count());
    EXPECT_EQ(d.unloaded_rails.size(), 16u);
    for (const auto& r : d.unloaded_rails) EXPECT_EQ(d.rail_fanout(r), 0u) << r;
}

TEST(Ddl, ExpandedNetlistIsEquivalent) {
    const Netlist n = build_aes_sbox();
    const MaskedNetlist m = mask_netlist(n);
    const DdlNetlist d = to_ddl(m);
    const Netlist e = d.expanded();
    // Inverters remain only as the free complement pins of static nets.
    EXPECT_EQ(e.count(GateOp::NOT), d.static_nets.size());
    std::mt19937_64 rng(5);
    Simulator se(e, SimConfig{}), sm(m.netlist, SimConfig{});
    for (int t = 0; t < 200; ++t) {
        std::vector<std::uint8_t> in(m.netlist.inputs().size());
        for (auto& b : in) b = rng() & 1;
        EXPECT_EQ(se.run({in}).outputs, sm.run({in}).outputs);
    }
    EXPECT_NE(serialize_ddl(d).find("#@unloaded"), std::string::npos);
}

}  // namespace
}  // namespace sclab
