#include "sclab/netlist.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sclab/builtins.hpp"
#include "sclab/sim.hpp"

namespace sclab {
namespace {

constexpr const char* kAnd = R"(module t
input a
input b
gate g1 AND y a b
output y
end
)";

NetlistError::Kind parse_error_kind(const std::string& text) {
    try {
        parse_netlist(text);
    } catch (const NetlistError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected a parse error";
    return NetlistError::Kind::syntax;
}

std::uint8_t eval_sbox(Simulator& sim, const Netlist& n, std::uint8_t x) {
    std::vector<std::uint8_t> in(n.inputs().size());
    for (int b = 0; b < 8; ++b) in[b] = (x >> b) & 1;
    const auto r = sim.run({in});
    std::uint8_t y = 0;
    for (int b = 0; b < 8; ++b) y |= static_cast<std::uint8_t>(r.outputs[0][b] << b);
    return y;
}

TEST(Netlist, ParsesMinimalModule) {
    const Netlist n = parse_netlist(kAnd);
    EXPECT_EQ(n.name(), "t");
    EXPECT_EQ(n.nets().size(), 3u);
    EXPECT_EQ(n.gates().size(), 1u);
    EXPECT_EQ(n.count(GateOp::AND), 1u);
    EXPECT_EQ(n.fanout("a"), 1u);
    EXPECT_EQ(n.driver("y")->id, "g1");
    EXPECT_EQ(n.driver("a"), nullptr);
}

TEST(Netlist, RejectsArityMismatch) {
    EXPECT_EQ(parse_error_kind("module t\ninput a\ninput b\ngate g1 AND y a\noutput y\nend\n"),
              NetlistError::Kind::arity_mismatch);
}

TEST(Netlist, RejectsCombinationalCycle) {
    EXPECT_EQ(parse_error_kind("module t\ninput a\ngate g1 AND y a z\ngate g2 OR z y a\noutput y\nend\n"),
              NetlistError::Kind::combinational_cycle);
}

TEST(Netlist, CycleThroughRegisterIsLegal) {
    EXPECT_NO_THROW(parse_netlist("module t\ninput a\ngate g1 XOR y a q\ndff r q y 0\noutput q\nend\n"));
}

TEST(Netlist, RejectsClockAndResetAsData) {
    EXPECT_EQ(parse_error_kind("module t\ninput clk\ninput a\ngate g AND y a clk\noutput y\nend\n"),
              NetlistError::Kind::clock_reset_as_data);
    EXPECT_EQ(parse_error_kind("module t\ninput rst\ninput a\ndff r q rst 0\noutput q\nend\n"),
              NetlistError::Kind::clock_reset_as_data);
}

TEST(Netlist, RejectsStructuralErrors) {
    EXPECT_EQ(parse_error_kind("module t\ninput a\ninput a\nend\n"), NetlistError::Kind::duplicate_net);
    EXPECT_EQ(parse_error_kind("module t\ninput a\ngate g AND y a b\noutput y\nend\n"),
              NetlistError::Kind::undriven_net);
    EXPECT_EQ(parse_error_kind("module t\ninput a\ngate g1 NOT y a\ngate g2 NOT y a\noutput y\nend\n"),
              NetlistError::Kind::multiple_drivers);
    EXPECT_EQ(parse_error_kind("module t\ninput a\ngate g1 NAND y a a\noutput y\nend\n"),
              NetlistError::Kind::syntax);
    EXPECT_EQ(parse_error_kind("module t\ninput a\n"), NetlistError::Kind::syntax);
}

TEST(Netlist, ErrorsCarryLocation) {
    try {
        parse_netlist("module t\ninput a\n  gate g1 FOO y a\nend\n");
        FAIL();
    } catch (const NetlistError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_GT(e.column(), 1);
        EXPECT_EQ(e.code(), ExitCode::data_error);
    }
}

TEST(Netlist, CommentsAreIgnored) {
    const Netlist n = parse_netlist("# header\nmodule t  # trailing\ninput a\ngate g NOT y a\noutput y\nend\n");
    EXPECT_EQ(n.gates().size(), 1u);
}

TEST(Netlist, CanonicalTextIsTopologicalThenLexical) {
    const Netlist n = parse_netlist(
        "module t\ninput a\ninput b\ngate z2 NOT w y\ngate a9 AND y a b\ngate b1 OR v a b\noutput w\noutput v\nend\n");
    std::vector<std::string> ids;
    for (const auto& g : n.gates()) ids.push_back(g.id);
    EXPECT_EQ(ids, (std::vector<std::string>{"a9", "b1", "z2"}));
    EXPECT_EQ(serialize_netlist(parse_netlist(kAnd)), kAnd);
}

TEST(Netlist, RegisterLine) {
    const Netlist n = parse_netlist("module t\ninput d\ndff g2 q d 0\noutput q\nend\n");
    EXPECT_NE(serialize_netlist(n).find("dff g2 q d 0\n"), std::string::npos);
    EXPECT_EQ(n.register_count(), 1u);
    EXPECT_EQ(n.register_depth(), 1u);
}

TEST(Netlist, RoundTripOnBuiltins) {
    for (const char* name : {"aes_sbox", "victim_round"}) {
        const Netlist n = builtin_netlist(name);
        const std::string text = serialize_netlist(n);
        const Netlist back = parse_netlist(text);
        EXPECT_EQ(back, n) << name;
        EXPECT_EQ(serialize_netlist(back), text) << name;
    }
}

TEST(Netlist, CommittedSboxMatchesGenerator) {
    std::ifstream in(std::string(SCLAB_DATA_DIR) + "/aes_sbox.net");
    ASSERT_TRUE(in) << "data/aes_sbox.net missing";
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(parse_netlist(ss.str()), build_aes_sbox());
}

TEST(AesSbox, MatchesFieldOracleOnAllInputs) {
    const auto table = oracle::aes_sbox();
    const Netlist n = build_aes_sbox();
    Simulator sim(n, SimConfig{});
    std::set<std::uint8_t> seen;
    for (int x = 0; x < 256; ++x) {
        const std::uint8_t y = eval_sbox(sim, n, static_cast<std::uint8_t>(x));
        EXPECT_EQ(y, table[x]) << "x=" << x;
        seen.insert(y);
    }
    EXPECT_EQ(seen.size(), 256u);
    EXPECT_EQ(table[0x00], 0x63);
    EXPECT_EQ(table[0x52], 0x00);
}

TEST(VictimRound, RegistersAndLatency) {
    const Netlist n = build_victim_round();
    EXPECT_EQ(n.register_count(), 16u);
    const auto table = oracle::aes_sbox();
    Simulator sim(n, SimConfig{});
    for (int trial : {0x00, 0x3C, 0xA5}) {
        const auto p = static_cast<std::uint8_t>(trial), k = static_cast<std::uint8_t>(trial * 7 + 1);
        std::map<std::string, bool> c;
        for (int b = 0; b < 8; ++b) {
            c["p[" + std::to_string(b) + "]"] = (p >> b) & 1;
            c["k[" + std::to_string(b) + "]"] = (k >> b) & 1;
        }
        c["clr"] = false;
        const auto r = sim.run(make_stimuli(n, {c, c, c}));
        std::uint8_t q = 0;
        for (int b = 0; b < 8; ++b) q |= static_cast<std::uint8_t>(r.outputs[2][b] << b);
        EXPECT_EQ(q, table[p ^ k]);
    }
}

TEST(VictimRound, EqualPlaintextAndKeyGives63) {
    const Netlist n = build_victim_round();
    Simulator sim(n, SimConfig{});
    std::map<std::string, bool> c;
    for (int b = 0; b < 8; ++b) c["p[" + std::to_string(b) + "]"] = c["k[" + std::to_string(b) + "]"] = (0x9D >> b) & 1;
    c["clr"] = false;
    const auto r = sim.run(make_stimuli(n, {c, c, c}));
    std::uint8_t q = 0;
    for (int b = 0; b < 8; ++b) q |= static_cast<std::uint8_t>(r.outputs[2][b] << b);
    EXPECT_EQ(q, 0x63);
}

}  // namespace
}  // namespace sclab
