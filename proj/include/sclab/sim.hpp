#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sclab/mask.hpp"
#include "sclab/netlist.hpp"

namespace sclab {

enum class SimMode { zero_delay, glitchy, ddl_two_phase };

std::string_view to_string(SimMode m);
SimMode parse_sim_mode(std::string_view s);

struct SimConfig {
    SimMode mode = SimMode::zero_delay;
    std::uint64_t delay_seed = 1;
    int delay_min = 1;  // picoticks
    int delay_max = 4;
    /// Glitchy mode: inertial delays reject pulses shorter than the gate delay;
    /// transport delays propagate every pulse.
    bool inertial = true;
    bool record_nets = false;       // per-net (per-rail) toggle counts
    bool record_registers = false;  // register state after each edge

    void validate() const;
};

/// Per-cycle activity. Cycle t covers the clock edge that opens it (register
/// flips) and the settling of the combinational logic under the inputs of t.
struct ToggleReport {
    std::vector<std::uint32_t> comb_toggles;      // combinational transitions (all rails in DDL)
    std::vector<std::uint32_t> register_hd;       // register bits flipped at the edge
    std::vector<std::uint32_t> static_toggles;    // DDL only: single-rail remasking XORs
    std::vector<std::uint32_t> unloaded_toggles;  // DDL only: transitions on unloaded rails
    std::vector<std::string> net_names;           // columns of per_net when recorded
    std::vector<std::vector<std::uint32_t>> per_net;  // [cycle][net]

    [[nodiscard]] std::size_t cycles() const { return comb_toggles.size(); }
    /// Dual-rail transitions on loaded rails (DDL).
    [[nodiscard]] std::uint32_t loaded_toggles(std::size_t cycle) const {
        return comb_toggles[cycle] - unloaded_toggles[cycle];
    }
    [[nodiscard]] std::string to_csv() const;
};

/// Input vector per cycle, ordered like the netlist's input ports.
using Stimuli = std::vector<std::vector<std::uint8_t>>;

struct SimResult {
    std::vector<std::string> output_names;
    std::vector<std::vector<std::uint8_t>> outputs;    // [cycle][output port]
    std::vector<std::string> register_names;           // register ids
    std::vector<std::vector<std::uint8_t>> registers;  // [cycle][register], when recorded
    ToggleReport report;
};

/// Builds stimuli from named assignments; throws DataError on a missing port.
Stimuli make_stimuli(const Netlist& n, const std::vector<std::map<std::string, bool>>& cycles);

/// Compiled, reusable simulator for a single-rail netlist (plain or masked).
///
/// Before cycle 0 the circuit rests in its reset state with all inputs low;
/// toggles of cycle 0 are counted against that state. Not thread-safe; use one
/// instance per worker.
class Simulator {
public:
    Simulator(const Netlist& n, SimConfig cfg);

    SimResult run(const Stimuli& stimuli);
    [[nodiscard]] const SimConfig& config() const { return cfg_; }
    [[nodiscard]] const std::vector<int>& gate_delays() const { return delay_; }

private:
    struct CGate {
        GateOp op;
        std::uint32_t out;
        std::uint32_t a;
        std::uint32_t b;
    };

    [[nodiscard]] std::uint8_t eval(const CGate& g) const;
    void settle_zero_delay(std::vector<std::uint32_t>* per_net, std::uint32_t& toggles);
    void settle_glitchy(std::vector<std::uint32_t>* per_net, std::uint32_t& toggles);

    SimConfig cfg_;
    std::vector<std::string> net_names_;
    std::vector<std::uint32_t> inputs_;
    std::vector<std::uint32_t> outputs_;
    std::vector<std::string> output_names_;
    std::vector<CGate> comb_;
    std::vector<std::uint32_t> comb_net_;  // per net: comb gate index driving it, or UINT32_MAX
    struct CReg {
        std::uint32_t q;
        std::uint32_t d;
        std::uint8_t reset;
    };
    std::vector<CReg> regs_;
    std::vector<std::string> reg_names_;
    std::vector<std::vector<std::uint32_t>> fanout_;  // net -> comb gates reading it
    std::vector<int> delay_;                          // per comb gate
    std::vector<std::uint8_t> val_;

    // glitchy scratch
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> wheel_;  // (gate, value or generation)
    std::vector<std::uint32_t> gen_;       // inertial: bumped to cancel a pending event
    std::vector<std::uint8_t> pending_;
    std::vector<std::uint32_t> changed_;
};

/// Two-phase (precharge, evaluate) simulator of a DDL netlist. Stimuli follow
/// the masked netlist's input port order.
///
/// Every dual-rail gate precharges both rails to 0 and then raises exactly one
/// rail; the rise and the following precharge fall are booked to the cycle
/// that evaluated, so each gate contributes exactly 2 transitions per cycle.
class DdlSimulator {
public:
    DdlSimulator(const DdlNetlist& d, SimConfig cfg);

    SimResult run(const Stimuli& stimuli);

private:
    struct CGate {
        GateOp op;
        std::uint32_t out;  // rail index of true rail; false rail is out + 1
        std::uint32_t at, af, bt, bf;
        bool t_unloaded;
        bool f_unloaded;
    };
    struct CReg {
        std::uint32_t q;  // rail index (true rail of a static pair)
        std::uint32_t d;  // rail index of the remask XOR output
        std::uint8_t reset;
    };
    struct CXor {
        std::uint32_t out, a, b;
    };

    SimConfig cfg_;
    std::vector<std::string> rail_names_;
    std::vector<std::uint32_t> inputs_;  // true rail of each input port
    std::vector<std::uint32_t> outputs_;
    std::vector<std::string> output_names_;
    std::vector<CGate> gates_;
    std::vector<CXor> xors_;
    std::vector<CReg> regs_;
    std::vector<std::string> reg_names_;
    std::vector<std::uint8_t> val_;
};

SimResult simulate(const Netlist& n, const Stimuli& stimuli, const SimConfig& cfg);
SimResult simulate(const MaskedNetlist& m, const Stimuli& stimuli, const SimConfig& cfg);
SimResult simulate_ddl(const DdlNetlist& d, const Stimuli& stimuli, const SimConfig& cfg);

/// Plain-text VCD of outputs (and registers when recorded), one time unit per cycle.
std::string to_vcd(const SimResult& r, const std::string& module_name);

}  // namespace sclab
