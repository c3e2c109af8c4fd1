#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sclab/netlist.hpp"

namespace sclab {

struct SharePair {
    std::string s0;
    std::string s1;
    bool operator==(const SharePair&) const = default;
};

/// Two-share Boolean-masked netlist.
///
/// Input ports of the original become share ports `x__s0` / `x__s1`; each
/// register is duplicated and preceded by a remasking XOR pair fed by one
/// fresh-randomness port `rnd[i]`.
struct MaskedNetlist {
    Netlist netlist;
    std::map<std::string, SharePair> share_map;             // original net -> shares
    std::vector<std::string> random_ports;                  // one per original register
    std::map<std::string, SharePair> register_pairs;        // original DFF id -> share DFF ids
    std::vector<std::string> original_inputs;               // port order of the source netlist
    std::vector<std::string> original_outputs;
};

/// Masked AND/OR gadgets on single bits, exactly as emitted by mask_netlist.
/// Returned pair is (z_s0, z_s1).
std::pair<bool, bool> masked_and(bool x0, bool x1, bool y0, bool y1);
std::pair<bool, bool> masked_or(bool x0, bool x1, bool y0, bool y1);

/// Replaces every signal (except clock/reset) by two shares: XOR per share,
/// NOT on share 0 only, AND/OR by the non-linear gadgets, registers duplicated
/// behind a remasking XOR pair. Rejects netlists that use clock/reset as data
/// or contain registers without an asynchronous reset.
MaskedNetlist mask_netlist(const Netlist& n);

inline bool unmask_bit(bool s0, bool s1) { return s0 != s1; }

/// Recombines share values into plain values for `nets` (all original nets
/// in share_map when empty). Throws DataError when a share is missing.
std::map<std::string, bool> unmask(const MaskedNetlist& m,
                                   const std::unordered_map<std::string, bool>& share_values,
                                   const std::vector<std::string>& nets = {});

struct RailPair {
    std::string t;  // true rail
    std::string f;  // complement rail
    bool operator==(const RailPair&) const = default;
};

/// Monotone dual-rail gate of differential domino logic.
struct DualRailGate {
    std::string id;
    GateOp op = GateOp::AND;  // AND, OR or XOR
    RailPair out;
    RailPair a;
    RailPair b;
};

/// Dual-rail precharge form of a masked netlist.
///
/// Combinational share logic becomes dual-rail gates (inverters vanish as rail
/// swaps). Registers and the remasking XORs stay single-rail CMOS cells;
/// complement rails of registers and primary inputs are free inverted pins.
struct DdlNetlist {
    std::string name;
    MaskedNetlist masked;
    std::vector<DualRailGate> gates;               // topological order
    std::vector<Gate> single_rail;                 // remask XORs and DFFs, original order
    std::map<std::string, RailPair> rail_map;      // share net -> rails
    std::set<std::string> unloaded_rails;          // rails with zero fanout
    std::vector<std::string> static_nets;          // ports and register outputs (both rails free)

    [[nodiscard]] std::size_t register_count() const;
    [[nodiscard]] std::size_t rail_fanout(const std::string& rail) const;

    /// Equivalent single-rail monotone netlist (AND/OR expansion of every rail,
    /// NOT for inverted pins), for serialization and functional checks.
    [[nodiscard]] Netlist expanded() const;
};

DdlNetlist to_ddl(const MaskedNetlist& m);

/// Serialized form: the netlist grammar with `#@` header pragmas recording
/// share_map, random_ports and register pairs.
std::string serialize_masked(const MaskedNetlist& m);
MaskedNetlist parse_masked(std::string_view text);

/// Serializes the monotone expansion plus `#@rail` / `#@unloaded` pragmas.
std::string serialize_ddl(const DdlNetlist& d);

}  // namespace sclab
