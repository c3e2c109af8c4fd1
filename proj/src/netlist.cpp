#include "sclab/netlist.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

namespace sclab {

std::string_view to_string(GateOp op) {
    switch (op) {
        case GateOp::AND: return "AND";
        case GateOp::OR: return "OR";
        case GateOp::XOR: return "XOR";
        case GateOp::NOT: return "NOT";
        case GateOp::DFF: return "DFF";
    }
    return "?";
}

std::string_view to_string(NetKind kind) {
    switch (kind) {
        case NetKind::input: return "input";
        case NetKind::output: return "output";
        case NetKind::internal: return "internal";
        case NetKind::clock: return "clock";
        case NetKind::reset: return "reset";
        case NetKind::random: return "random";
    }
    return "?";
}

std::optional<GateOp> parse_gate_op(std::string_view token) {
    if (token == "AND") return GateOp::AND;
    if (token == "OR") return GateOp::OR;
    if (token == "XOR") return GateOp::XOR;
    if (token == "NOT") return GateOp::NOT;
    return std::nullopt;
}

std::size_t gate_arity(GateOp op) {
    switch (op) {
        case GateOp::AND:
        case GateOp::OR:
        case GateOp::XOR: return 2;
        case GateOp::NOT:
        case GateOp::DFF: return 1;
    }
    return 0;
}

namespace {

bool is_reserved(std::string_view name) { return name == kClockNet || name == kResetNet; }

}  // namespace

const Net* Netlist::find_net(std::string_view name) const {
    auto it = net_index_.find(name);
    return it == net_index_.end() ? nullptr : &nets_[it->second];
}

const Gate* Netlist::find_gate(std::string_view id) const {
    auto it = gate_index_.find(id);
    return it == gate_index_.end() ? nullptr : &gates_[it->second];
}

const Gate* Netlist::driver(std::string_view net) const {
    auto it = driver_index_.find(net);
    return it == driver_index_.end() ? nullptr : &gates_[it->second];
}

std::size_t Netlist::fanout(std::string_view net) const {
    auto it = fanout_.find(net);
    return it == fanout_.end() ? 0 : it->second;
}

std::size_t Netlist::register_count() const { return count(GateOp::DFF); }

std::size_t Netlist::combinational_count() const { return gates_.size() - register_count(); }

std::size_t Netlist::count(GateOp op) const {
    return static_cast<std::size_t>(
        std::count_if(gates_.begin(), gates_.end(), [op](const Gate& g) { return g.op == op; }));
}

std::size_t Netlist::register_depth() const {
    // Longest register count along net -> gate -> net paths ending at an output.
    // Feedback edges through registers are ignored (visited-on-stack cut).
    std::map<std::string, std::size_t, std::less<>> memo;
    std::set<std::string, std::less<>> on_stack;
    std::function<std::size_t(const std::string&)> depth = [&](const std::string& net) -> std::size_t {
        if (auto it = memo.find(net); it != memo.end()) return it->second;
        const Gate* g = driver(net);
        if (g == nullptr) return memo[net] = 0;
        if (on_stack.count(net)) return 0;
        on_stack.insert(net);
        std::size_t best = 0;
        for (const auto& in : g->inputs) best = std::max(best, depth(in));
        on_stack.erase(net);
        std::size_t d = best + (g->is_register() ? 1 : 0);
        memo[net] = d;
        return d;
    };
    std::size_t result = 0;
    for (const auto& out : outputs_) result = std::max(result, depth(out));
    return result;
}

NetlistBuilder& NetlistBuilder::add_input(std::string net, NetKind kind, int line) {
    if (is_reserved(net)) kind = net == kClockNet ? NetKind::clock : NetKind::reset;
    inputs_.emplace_back(std::move(net), kind);
    input_lines_.push_back(line);
    return *this;
}

NetlistBuilder& NetlistBuilder::add_output(std::string net, int line) {
    outputs_.push_back(std::move(net));
    output_lines_.push_back(line);
    return *this;
}

NetlistBuilder& NetlistBuilder::add_gate(std::string id, GateOp op, std::string output,
                                         std::vector<std::string> inputs, int line) {
    Gate g;
    g.id = std::move(id);
    g.op = op;
    g.output = std::move(output);
    g.inputs = std::move(inputs);
    gates_.push_back({std::move(g), line});
    return *this;
}

NetlistBuilder& NetlistBuilder::add_dff(std::string id, std::string q, std::string d,
                                        ResetValue reset, int line) {
    Gate g;
    g.id = std::move(id);
    g.op = GateOp::DFF;
    g.output = std::move(q);
    g.inputs = {std::move(d)};
    g.reset = reset;
    gates_.push_back({std::move(g), line});
    return *this;
}

Netlist NetlistBuilder::build() const {
    using K = NetlistError::Kind;
    Netlist n;
    n.name_ = name_;

    std::map<std::string, NetKind, std::less<>> kinds;
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        const auto& [name, kind] = inputs_[i];
        if (!kinds.emplace(name, kind).second)
            throw NetlistError(K::duplicate_net, "duplicate net '" + name + "'", input_lines_[i], 1);
        n.inputs_.push_back(name);
    }

    std::map<std::string, std::size_t, std::less<>> driver;  // net -> pending gate index
    std::set<std::string, std::less<>> ids;
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        const auto& [g, line] = gates_[i];
        if (!ids.insert(g.id).second)
            throw NetlistError(K::duplicate_net, "duplicate gate id '" + g.id + "'", line, 1);
        if (g.inputs.size() != gate_arity(g.op))
            throw NetlistError(K::arity_mismatch,
                               std::string(to_string(g.op)) + " gate '" + g.id + "' expects " +
                                   std::to_string(gate_arity(g.op)) + " input(s), got " +
                                   std::to_string(g.inputs.size()),
                               line, 1);
        if (is_reserved(g.output))
            throw NetlistError(K::clock_reset_as_data,
                               "gate '" + g.id + "' drives reserved net '" + g.output + "'", line, 1);
        if (kinds.count(g.output) || driver.count(g.output))
            throw NetlistError(kinds.count(g.output) && !driver.count(g.output) ? K::duplicate_net
                                                                                : K::multiple_drivers,
                               "net '" + g.output + "' has more than one driver", line, 1);
        driver.emplace(g.output, i);
        kinds.emplace(g.output, NetKind::internal);
    }

    for (const auto& [g, line] : gates_) {
        for (const auto& in : g.inputs) {
            if (is_reserved(in))
                throw NetlistError(K::clock_reset_as_data,
                                   "gate '" + g.id + "' uses '" + in + "' as data", line, 1);
            if (!kinds.count(in))
                throw NetlistError(K::undriven_net, "net '" + in + "' is never driven", line, 1);
        }
    }

    std::set<std::string, std::less<>> seen_outputs;
    for (std::size_t i = 0; i < outputs_.size(); ++i) {
        const auto& out = outputs_[i];
        auto it = kinds.find(out);
        if (it == kinds.end())
            throw NetlistError(K::undriven_net, "output '" + out + "' is never driven", output_lines_[i], 1);
        if (is_reserved(out))
            throw NetlistError(K::clock_reset_as_data, "reserved net '" + out + "' used as output",
                               output_lines_[i], 1);
        if (!seen_outputs.insert(out).second)
            throw NetlistError(K::duplicate_net, "duplicate output '" + out + "'", output_lines_[i], 1);
        if (it->second == NetKind::internal) it->second = NetKind::output;
        n.outputs_.push_back(out);
    }

    // Canonical order: Kahn's algorithm over gates; a gate depends on the
    // combinational driver of each of its inputs. Register outputs are sources.
    const std::size_t count = gates_.size();
    std::vector<std::vector<std::size_t>> users(count);
    std::vector<std::size_t> pending(count, 0);
    for (std::size_t i = 0; i < count; ++i) {
        for (const auto& in : gates_[i].gate.inputs) {
            auto it = driver.find(in);
            if (it == driver.end()) continue;
            if (gates_[it->second].gate.is_register()) continue;
            users[it->second].push_back(i);
            ++pending[i];
        }
    }
    using Entry = std::pair<std::string_view, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
    for (std::size_t i = 0; i < count; ++i)
        if (pending[i] == 0) ready.emplace(gates_[i].gate.id, i);
    std::vector<std::size_t> order;
    order.reserve(count);
    while (!ready.empty()) {
        auto [id, i] = ready.top();
        ready.pop();
        order.push_back(i);
        for (auto u : users[i])
            if (--pending[u] == 0) ready.emplace(gates_[u].gate.id, u);
    }
    if (order.size() != count) {
        for (std::size_t i = 0; i < count; ++i) {
            if (pending[i] != 0) {
                throw NetlistError(K::combinational_cycle,
                                   "combinational cycle through gate '" + gates_[i].gate.id + "'",
                                   gates_[i].line, 1);
            }
        }
    }

    for (auto i : order) {
        n.gate_index_.emplace(gates_[i].gate.id, n.gates_.size());
        n.driver_index_.emplace(gates_[i].gate.output, n.gates_.size());
        n.gates_.push_back(gates_[i].gate);
    }
    for (const auto& g : n.gates_)
        for (const auto& in : g.inputs) ++n.fanout_[in];

    for (const auto& [name, kind] : kinds) {
        n.net_index_.emplace(name, n.nets_.size());
        n.nets_.push_back({name, kind});
    }
    return n;
}

namespace {

struct Token {
    std::string_view text;
    int column;
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size() || line[i] == '#') break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#')
            ++i;
        tokens.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return tokens;
}

bool valid_identifier(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '[' || c == ']' ||
               c == '.' || c == '$';
    });
}

}  // namespace

Netlist parse_netlist(std::string_view text) {
    using K = NetlistError::Kind;
    std::optional<NetlistBuilder> builder;
    bool ended = false;
    int line_no = 0;
    std::size_t pos = 0;

    auto expect_ident = [&](const Token& t) {
        if (!valid_identifier(t.text))
            throw NetlistError(K::syntax, "invalid identifier '" + std::string(t.text) + "'", line_no,
                               t.column);
        return std::string(t.text);
    };

    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        const auto& kw = tokens[0];
        if (ended)
            throw NetlistError(K::syntax, "content after 'end'", line_no, kw.column);

        if (kw.text == "module") {
            if (builder)
                throw NetlistError(K::syntax, "duplicate 'module' statement", line_no, kw.column);
            if (tokens.size() != 2)
                throw NetlistError(K::syntax, "expected 'module <name>'", line_no, kw.column);
            builder.emplace(expect_ident(tokens[1]));
            continue;
        }
        if (!builder)
            throw NetlistError(K::syntax, "expected 'module' before '" + std::string(kw.text) + "'",
                               line_no, kw.column);

        if (kw.text == "input" || kw.text == "output") {
            if (tokens.size() != 2)
                throw NetlistError(K::syntax, "expected '" + std::string(kw.text) + " <net>'", line_no,
                                   kw.column);
            if (kw.text == "input")
                builder->add_input(expect_ident(tokens[1]), NetKind::input, line_no);
            else
                builder->add_output(expect_ident(tokens[1]), line_no);
        } else if (kw.text == "gate") {
            if (tokens.size() < 4)
                throw NetlistError(K::syntax, "expected 'gate <id> <op> <out> <in...>'", line_no,
                                   kw.column);
            auto op = parse_gate_op(tokens[2].text);
            if (!op)
                throw NetlistError(K::syntax, "unknown gate op '" + std::string(tokens[2].text) + "'",
                                   line_no, tokens[2].column);
            std::vector<std::string> ins;
            for (std::size_t i = 4; i < tokens.size(); ++i) ins.push_back(expect_ident(tokens[i]));
            builder->add_gate(expect_ident(tokens[1]), *op, expect_ident(tokens[3]), std::move(ins),
                              line_no);
        } else if (kw.text == "dff") {
            if (tokens.size() != 5)
                throw NetlistError(K::syntax, "expected 'dff <id> <q> <d> <0|1|x>'", line_no,
                                   kw.column);
            ResetValue rv;
            if (tokens[4].text == "0")
                rv = ResetValue::zero;
            else if (tokens[4].text == "1")
                rv = ResetValue::one;
            else if (tokens[4].text == "x")
                rv = ResetValue::none;
            else
                throw NetlistError(K::syntax, "reset value must be 0, 1 or x", line_no,
                                   tokens[4].column);
            builder->add_dff(expect_ident(tokens[1]), expect_ident(tokens[2]),
                             expect_ident(tokens[3]), rv, line_no);
        } else if (kw.text == "end") {
            if (tokens.size() != 1)
                throw NetlistError(K::syntax, "unexpected tokens after 'end'", line_no,
                                   tokens[1].column);
            ended = true;
        } else {
            throw NetlistError(K::syntax, "unknown statement '" + std::string(kw.text) + "'", line_no,
                               kw.column);
        }
    }
    if (!builder) throw NetlistError(K::syntax, "missing 'module' statement", line_no, 1);
    if (!ended) throw NetlistError(K::syntax, "missing 'end' statement", line_no, 1);
    return builder->build();
}

std::string serialize_netlist(const Netlist& n) {
    std::ostringstream out;
    out << "module " << n.name() << '\n';
    for (const auto& in : n.inputs()) out << "input " << in << '\n';
    for (const auto& g : n.gates()) {
        if (g.is_register()) {
            const char* rv = g.reset == ResetValue::zero ? "0" : g.reset == ResetValue::one ? "1" : "x";
            out << "dff " << g.id << ' ' << g.output << ' ' << g.inputs[0] << ' ' << rv << '\n';
        } else {
            out << "gate " << g.id << ' ' << to_string(g.op) << ' ' << g.output;
            for (const auto& in : g.inputs) out << ' ' << in;
            out << '\n';
        }
    }
    for (const auto& o : n.outputs()) out << "output " << o << '\n';
    out << "end\n";
    return out.str();
}

Netlist load_netlist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open netlist '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_netlist(ss.str());
}

void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

}  // namespace sclab
