#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sclab/error.hpp"

namespace sclab {

enum class NetKind { input, output, internal, clock, reset, random };
enum class GateOp { AND, OR, XOR, NOT, DFF };

/// Asynchronous reset value of a register. `none` marks a register without an
/// asynchronous reset; such netlists parse but are rejected by the masking
/// transform and fail simulation when the register is read before its first edge.
enum class ResetValue { zero, one, none };

// Reserved global names. They may be declared as inputs but never used as data.
inline constexpr std::string_view kClockNet = "clk";
inline constexpr std::string_view kResetNet = "rst";

std::string_view to_string(GateOp op);
std::string_view to_string(NetKind kind);
std::optional<GateOp> parse_gate_op(std::string_view token);
std::size_t gate_arity(GateOp op);

struct Net {
    std::string name;
    NetKind kind = NetKind::internal;

    bool operator==(const Net&) const = default;
};

struct Gate {
    std::string id;
    GateOp op = GateOp::AND;
    std::string output;
    std::vector<std::string> inputs;
    ResetValue reset = ResetValue::zero;  // DFF only

    [[nodiscard]] bool is_register() const { return op == GateOp::DFF; }
    bool operator==(const Gate&) const = default;
};

/// Immutable gate-level netlist of single-bit nets.
///
/// Gates are stored in canonical order: combinational gates and registers in
/// topological order of the combinational graph (register outputs and inputs
/// are sources), ties broken by gate id. Construct through NetlistBuilder or
/// parse_netlist; both validate.
class Netlist {
public:
    Netlist() = default;

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const std::vector<Net>& nets() const { return nets_; }
    [[nodiscard]] const std::vector<Gate>& gates() const { return gates_; }
    [[nodiscard]] const std::vector<std::string>& inputs() const { return inputs_; }
    [[nodiscard]] const std::vector<std::string>& outputs() const { return outputs_; }

    [[nodiscard]] const Net* find_net(std::string_view name) const;
    [[nodiscard]] const Gate* find_gate(std::string_view id) const;
    /// Gate driving `net`, or nullptr for input ports.
    [[nodiscard]] const Gate* driver(std::string_view net) const;
    [[nodiscard]] std::size_t fanout(std::string_view net) const;

    [[nodiscard]] std::size_t register_count() const;
    [[nodiscard]] std::size_t combinational_count() const;
    [[nodiscard]] std::size_t count(GateOp op) const;

    /// Maximum number of registers on any input-to-output path.
    [[nodiscard]] std::size_t register_depth() const;

    bool operator==(const Netlist&) const = default;

private:
    friend class NetlistBuilder;

    std::string name_;
    std::vector<Net> nets_;  // sorted by name
    std::vector<Gate> gates_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::map<std::string, std::size_t, std::less<>> net_index_;
    std::map<std::string, std::size_t, std::less<>> gate_index_;
    std::map<std::string, std::size_t, std::less<>> driver_index_;
    std::map<std::string, std::size_t, std::less<>> fanout_;
};

/// Accumulates ports and gates, then validates and canonicalizes.
class NetlistBuilder {
public:
    explicit NetlistBuilder(std::string name) : name_(std::move(name)) {}

    NetlistBuilder& add_input(std::string net, NetKind kind = NetKind::input, int line = 0);
    NetlistBuilder& add_output(std::string net, int line = 0);
    NetlistBuilder& add_gate(std::string id, GateOp op, std::string output,
                             std::vector<std::string> inputs, int line = 0);
    NetlistBuilder& add_dff(std::string id, std::string q, std::string d, ResetValue reset,
                            int line = 0);

    /// Validates: unique names, one driver per non-input net, arity, declared
    /// inputs, no clock/reset data use, acyclic combinational logic.
    [[nodiscard]] Netlist build() const;

private:
    struct Pending {
        Gate gate;
        int line = 0;
    };

    std::string name_;
    std::vector<std::pair<std::string, NetKind>> inputs_;
    std::vector<int> input_lines_;
    std::vector<std::string> outputs_;
    std::vector<int> output_lines_;
    std::vector<Pending> gates_;
};

/// Parses the line-oriented netlist format:
///
///   module <name>
///   input <net>
///   output <net>
///   gate <id> <AND|OR|XOR|NOT> <out> <in...>
///   dff <id> <q> <d> <0|1|x>
///   end
///
/// `#` starts a comment. Errors carry line and column.
Netlist parse_netlist(std::string_view text);

/// Canonical text. parse_netlist(serialize_netlist(n)) == n.
std::string serialize_netlist(const Netlist& n);

Netlist load_netlist(const std::string& path);
void save_text(const std::string& path, const std::string& text);

}  // namespace sclab
