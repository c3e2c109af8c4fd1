#include "sclab/mask.hpp"

#include <algorithm>
#include <sstream>

namespace sclab {

std::pair<bool, bool> masked_and(bool x0, bool x1, bool y0, bool y1) {
    const bool ny1 = !y1;
    const bool z0 = (x0 && y0) != (x0 || ny1);
    const bool z1 = (x1 && y0) != (x1 || ny1);
    return {z0, z1};
}

std::pair<bool, bool> masked_or(bool x0, bool x1, bool y0, bool y1) {
    // x | y = ~(~x & ~y); complementing a value flips share 0 only.
    auto [w0, w1] = masked_and(!x0, x1, !y0, y1);
    return {!w0, w1};
}

namespace {

std::string share_name(const std::string& net, int share) {
    return net + (share == 0 ? "__s0" : "__s1");
}

bool is_reserved(std::string_view n) { return n == kClockNet || n == kResetNet; }

class Masker {
public:
    explicit Masker(const Netlist& n) : src_(n), b_(n.name() + "_masked") {}

    MaskedNetlist run() {
        MaskedNetlist m;
        for (const auto& g : src_.gates()) {
            if (g.is_register() && g.reset == ResetValue::none)
                throw NetlistError(NetlistError::Kind::async_reset_required,
                                   "register '" + g.id + "' has no asynchronous reset");
        }

        for (const auto& in : src_.inputs()) {
            if (is_reserved(in)) {
                b_.add_input(in);
                continue;
            }
            shares_[in] = {share_name(in, 0), share_name(in, 1)};
            b_.add_input(shares_[in].s0);
            b_.add_input(shares_[in].s1);
            m.original_inputs.push_back(in);
        }

        // Register shares exist before the logic that reads them.
        std::size_t reg_index = 0;
        for (const auto& g : src_.gates()) {
            if (!g.is_register()) continue;
            shares_[g.output] = {share_name(g.output, 0), share_name(g.output, 1)};
            std::string rnd = "rnd[" + std::to_string(reg_index++) + "]";
            b_.add_input(rnd, NetKind::random);
            m.random_ports.push_back(rnd);
        }

        for (const auto& g : src_.gates()) {
            if (!g.is_register()) emit_gate(g);
        }

        reg_index = 0;
        for (const auto& g : src_.gates()) {
            if (!g.is_register()) continue;
            const auto& rnd = m.random_ports[reg_index++];
            const auto& d = shares_.at(g.inputs[0]);
            const auto& q = shares_.at(g.output);
            std::string d0 = g.id + "__rd0", d1 = g.id + "__rd1";
            b_.add_gate(g.id + "__rm0", GateOp::XOR, d0, {d.s0, rnd});
            b_.add_gate(g.id + "__rm1", GateOp::XOR, d1, {d.s1, rnd});
            b_.add_dff(g.id + "__s0", q.s0, d0, g.reset);
            b_.add_dff(g.id + "__s1", q.s1, d1, ResetValue::zero);
            m.register_pairs[g.id] = {g.id + "__s0", g.id + "__s1"};
        }

        for (const auto& out : src_.outputs()) {
            const auto& s = shares_.at(out);
            b_.add_output(s.s0);
            b_.add_output(s.s1);
            m.original_outputs.push_back(out);
        }

        m.netlist = b_.build();
        for (const auto& [net, pair] : shares_) m.share_map[net] = pair;
        return m;
    }

private:
    void emit_gate(const Gate& g) {
        const auto& z = g.output;
        switch (g.op) {
            case GateOp::XOR: {
                const auto& a = shares_.at(g.inputs[0]);
                const auto& c = shares_.at(g.inputs[1]);
                SharePair out{share_name(z, 0), share_name(z, 1)};
                b_.add_gate(g.id + "__s0", GateOp::XOR, out.s0, {a.s0, c.s0});
                b_.add_gate(g.id + "__s1", GateOp::XOR, out.s1, {a.s1, c.s1});
                shares_[z] = out;
                break;
            }
            case GateOp::NOT: {
                const auto& a = shares_.at(g.inputs[0]);
                SharePair out{share_name(z, 0), a.s1};
                b_.add_gate(g.id + "__s0", GateOp::NOT, out.s0, {a.s0});
                shares_[z] = out;
                break;
            }
            case GateOp::AND: {
                shares_[z] = emit_and(g.id, z, shares_.at(g.inputs[0]), shares_.at(g.inputs[1]));
                break;
            }
            case GateOp::OR: {
                const auto& x = shares_.at(g.inputs[0]);
                const auto& y = shares_.at(g.inputs[1]);
                SharePair nx{g.id + "__nx0", x.s1}, ny{g.id + "__ny0", y.s1};
                b_.add_gate(g.id + "__invx", GateOp::NOT, nx.s0, {x.s0});
                b_.add_gate(g.id + "__invy", GateOp::NOT, ny.s0, {y.s0});
                SharePair w = emit_and(g.id, g.id + "__w", nx, ny);
                SharePair out{share_name(z, 0), w.s1};
                b_.add_gate(g.id + "__invz", GateOp::NOT, out.s0, {w.s0});
                shares_[z] = out;
                break;
            }
            case GateOp::DFF: break;
        }
    }

    // z0 = (x0 & y0) ^ (x0 | ~y1), z1 = (x1 & y0) ^ (x1 | ~y1); ~y1 shared.
    SharePair emit_and(const std::string& id, const std::string& z, const SharePair& x,
                       const SharePair& y) {
        SharePair out{share_name(z, 0), share_name(z, 1)};
        const std::string ny1 = id + "__ny1";
        b_.add_gate(id + "__not", GateOp::NOT, ny1, {y.s1});
        b_.add_gate(id + "__and0", GateOp::AND, id + "__a0", {x.s0, y.s0});
        b_.add_gate(id + "__or0", GateOp::OR, id + "__o0", {x.s0, ny1});
        b_.add_gate(id + "__xor0", GateOp::XOR, out.s0, {id + "__a0", id + "__o0"});
        b_.add_gate(id + "__and1", GateOp::AND, id + "__a1", {x.s1, y.s0});
        b_.add_gate(id + "__or1", GateOp::OR, id + "__o1", {x.s1, ny1});
        b_.add_gate(id + "__xor1", GateOp::XOR, out.s1, {id + "__a1", id + "__o1"});
        return out;
    }

    const Netlist& src_;
    NetlistBuilder b_;
    std::map<std::string, SharePair> shares_;
};

}  // namespace

MaskedNetlist mask_netlist(const Netlist& n) { return Masker(n).run(); }

std::map<std::string, bool> unmask(const MaskedNetlist& m,
                                   const std::unordered_map<std::string, bool>& share_values,
                                   const std::vector<std::string>& nets) {
    std::vector<std::string> wanted = nets;
    if (wanted.empty())
        for (const auto& [net, _] : m.share_map) wanted.push_back(net);
    std::map<std::string, bool> plain;
    for (const auto& net : wanted) {
        auto it = m.share_map.find(net);
        if (it == m.share_map.end()) throw DataError("net '" + net + "' has no shares");
        auto s0 = share_values.find(it->second.s0);
        auto s1 = share_values.find(it->second.s1);
        if (s0 == share_values.end() || s1 == share_values.end())
            throw DataError("missing share value for net '" + net + "'");
        plain[net] = unmask_bit(s0->second, s1->second);
    }
    return plain;
}

std::size_t DdlNetlist::register_count() const {
    return static_cast<std::size_t>(std::count_if(single_rail.begin(), single_rail.end(),
                                                  [](const Gate& g) { return g.is_register(); }));
}

std::size_t DdlNetlist::rail_fanout(const std::string& rail) const {
    std::size_t n = 0;
    for (const auto& g : gates)
        n += (g.a.t == rail) + (g.a.f == rail) + (g.b.t == rail) + (g.b.f == rail);
    for (const auto& g : single_rail)
        n += static_cast<std::size_t>(std::count(g.inputs.begin(), g.inputs.end(), rail));
    for (const auto& o : masked.netlist.outputs()) {
        auto it = rail_map.find(o);
        if (it != rail_map.end() && it->second.t == rail) ++n;
    }
    return n;
}

DdlNetlist to_ddl(const MaskedNetlist& m) {
    const Netlist& n = m.netlist;
    if (m.random_ports.size() != m.register_pairs.size())
        throw DataError("to_ddl: input is not a masked netlist (random port/register mismatch)");
    std::set<std::string> randoms(m.random_ports.begin(), m.random_ports.end());
    for (const auto& r : m.random_ports) {
        const Net* net = n.find_net(r);
        if (net == nullptr || net->kind != NetKind::random)
            throw DataError("to_ddl: random port '" + r + "' missing");
    }

    DdlNetlist d;
    d.name = n.name() + "_ddl";
    d.masked = m;

    // Remasking XORs: the XOR feeding a register D pin with a random port input.
    std::set<std::string> remask_ids;
    for (const auto& g : n.gates()) {
        if (!g.is_register()) continue;
        const Gate* x = n.driver(g.inputs[0]);
        if (x == nullptr || x->op != GateOp::XOR ||
            !(randoms.count(x->inputs[0]) || randoms.count(x->inputs[1])))
            throw DataError("to_ddl: register '" + g.id + "' lacks a remasking XOR");
        remask_ids.insert(x->id);
    }

    for (const auto& in : n.inputs()) {
        d.rail_map[in] = {in, in + "__f"};
        d.static_nets.push_back(in);
    }
    for (const auto& g : n.gates()) {
        if (!g.is_register()) continue;
        d.rail_map[g.output] = {g.output, g.output + "__f"};
        d.static_nets.push_back(g.output);
    }

    for (const auto& g : n.gates()) {
        if (g.is_register() || remask_ids.count(g.id)) continue;
        if (g.op == GateOp::NOT) {
            const auto& a = d.rail_map.at(g.inputs[0]);
            d.rail_map[g.output] = {a.f, a.t};
            continue;
        }
        RailPair out{g.output + "__t", g.output + "__f"};
        d.gates.push_back({g.id, g.op, out, d.rail_map.at(g.inputs[0]), d.rail_map.at(g.inputs[1])});
        d.rail_map[g.output] = out;
    }

    for (const auto& g : n.gates()) {
        if (g.is_register()) {
            d.single_rail.push_back(g);
        } else if (remask_ids.count(g.id)) {
            Gate x = g;
            for (auto& in : x.inputs) in = d.rail_map.at(in).t;
            d.single_rail.push_back(x);
            // The remasking XOR output is single-rail; it only feeds the register.
            d.rail_map.erase(g.output);
        }
    }

    std::map<std::string, std::size_t> fanout;
    for (const auto& g : d.gates)
        for (const auto* r : {&g.a.t, &g.a.f, &g.b.t, &g.b.f}) ++fanout[*r];
    for (const auto& g : d.single_rail)
        for (const auto& in : g.inputs) ++fanout[in];
    for (const auto& o : n.outputs()) ++fanout[d.rail_map.at(o).t];
    for (const auto& g : d.gates)
        for (const auto* r : {&g.out.t, &g.out.f})
            if (fanout[*r] == 0) d.unloaded_rails.insert(*r);
    return d;
}

Netlist DdlNetlist::expanded() const {
    const Netlist& n = masked.netlist;
    NetlistBuilder b(name);
    for (const auto& in : n.inputs()) {
        const Net* net = n.find_net(in);
        b.add_input(in, net ? net->kind : NetKind::input);
    }
    for (const auto& s : static_nets) b.add_gate(s + "__inv", GateOp::NOT, s + "__f", {s});
    for (const auto& g : gates) {
        switch (g.op) {
            case GateOp::AND:
                b.add_gate(g.id + "__t", GateOp::AND, g.out.t, {g.a.t, g.b.t});
                b.add_gate(g.id + "__f", GateOp::OR, g.out.f, {g.a.f, g.b.f});
                break;
            case GateOp::OR:
                b.add_gate(g.id + "__t", GateOp::OR, g.out.t, {g.a.t, g.b.t});
                b.add_gate(g.id + "__f", GateOp::AND, g.out.f, {g.a.f, g.b.f});
                break;
            case GateOp::XOR:
                b.add_gate(g.id + "__t0", GateOp::AND, g.out.t + "0", {g.a.t, g.b.f});
                b.add_gate(g.id + "__t1", GateOp::AND, g.out.t + "1", {g.a.f, g.b.t});
                b.add_gate(g.id + "__t", GateOp::OR, g.out.t, {g.out.t + "0", g.out.t + "1"});
                b.add_gate(g.id + "__f0", GateOp::AND, g.out.f + "0", {g.a.t, g.b.t});
                b.add_gate(g.id + "__f1", GateOp::AND, g.out.f + "1", {g.a.f, g.b.f});
                b.add_gate(g.id + "__f", GateOp::OR, g.out.f, {g.out.f + "0", g.out.f + "1"});
                break;
            default: break;
        }
    }
    for (const auto& g : single_rail) {
        if (g.is_register())
            b.add_dff(g.id, g.output, g.inputs[0], g.reset);
        else
            b.add_gate(g.id, g.op, g.output, g.inputs);
    }
    for (const auto& o : n.outputs()) b.add_output(rail_map.at(o).t);
    return b.build();
}

std::string serialize_masked(const MaskedNetlist& m) {
    std::ostringstream out;
    out << "#@masked " << m.netlist.name() << '\n';
    for (const auto& in : m.original_inputs) out << "#@orig_input " << in << '\n';
    for (const auto& o : m.original_outputs) out << "#@orig_output " << o << '\n';
    for (const auto& r : m.random_ports) out << "#@random " << r << '\n';
    for (const auto& [id, p] : m.register_pairs) out << "#@register " << id << ' ' << p.s0 << ' ' << p.s1 << '\n';
    for (const auto& [net, p] : m.share_map) out << "#@share " << net << ' ' << p.s0 << ' ' << p.s1 << '\n';
    out << serialize_netlist(m.netlist);
    return out.str();
}

MaskedNetlist parse_masked(std::string_view text) {
    MaskedNetlist m;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.rfind("#@", 0) != 0) continue;
        std::istringstream ls(line.substr(2));
        std::string kw;
        ls >> kw;
        if (kw == "masked") {
            header = true;
        } else if (kw == "orig_input") {
            std::string v;
            ls >> v;
            m.original_inputs.push_back(v);
        } else if (kw == "orig_output") {
            std::string v;
            ls >> v;
            m.original_outputs.push_back(v);
        } else if (kw == "random") {
            std::string v;
            ls >> v;
            m.random_ports.push_back(v);
        } else if (kw == "register") {
            std::string id, a, c;
            ls >> id >> a >> c;
            m.register_pairs[id] = {a, c};
        } else if (kw == "share") {
            std::string net, a, c;
            ls >> net >> a >> c;
            m.share_map[net] = {a, c};
        }
    }
    if (!header) throw DataError("not a masked netlist (missing #@masked header)");
    Netlist plain = parse_netlist(text);
    NetlistBuilder b(plain.name());
    std::set<std::string> randoms(m.random_ports.begin(), m.random_ports.end());
    for (const auto& i : plain.inputs()) b.add_input(i, randoms.count(i) ? NetKind::random : NetKind::input);
    for (const auto& g : plain.gates()) {
        if (g.is_register())
            b.add_dff(g.id, g.output, g.inputs[0], g.reset);
        else
            b.add_gate(g.id, g.op, g.output, g.inputs);
    }
    for (const auto& o : plain.outputs()) b.add_output(o);
    m.netlist = b.build();
    return m;
}

std::string serialize_ddl(const DdlNetlist& d) {
    std::ostringstream out;
    out << "#@ddl " << d.name << '\n';
    for (const auto& g : d.gates)
        out << "#@dualrail " << g.id << ' ' << to_string(g.op) << ' ' << g.out.t << ' ' << g.out.f << ' '
            << g.a.t << ' ' << g.a.f << ' ' << g.b.t << ' ' << g.b.f << '\n';
    for (const auto& [net, r] : d.rail_map) out << "#@rail " << net << ' ' << r.t << ' ' << r.f << '\n';
    for (const auto& r : d.unloaded_rails) out << "#@unloaded " << r << '\n';
    out << serialize_netlist(d.expanded());
    return out.str();
}

}  // namespace sclab
