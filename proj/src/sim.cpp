#include "sclab/sim.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

namespace sclab {

namespace {
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
}

std::string_view to_string(SimMode m) {
    switch (m) {
        case SimMode::zero_delay: return "zero_delay";
        case SimMode::glitchy: return "glitchy";
        case SimMode::ddl_two_phase: return "ddl_two_phase";
    }
    return "?";
}

SimMode parse_sim_mode(std::string_view s) {
    if (s == "zero_delay") return SimMode::zero_delay;
    if (s == "glitchy") return SimMode::glitchy;
    if (s == "ddl_two_phase") return SimMode::ddl_two_phase;
    throw ConfigError("unknown simulation mode '" + std::string(s) + "'");
}

void SimConfig::validate() const {
    if (mode == SimMode::glitchy && delay_min < 1)
        throw ConfigError("glitchy simulation needs delay_min >= 1");
    if (delay_max < delay_min) throw ConfigError("delay_max < delay_min");
}

std::string ToggleReport::to_csv() const {
    std::ostringstream out;
    out << "cycle,comb_toggles,register_hd";
    const bool ddl = !static_toggles.empty();
    if (ddl) out << ",static_toggles,unloaded_toggles";
    for (const auto& n : net_names) out << ',' << n;
    out << '\n';
    for (std::size_t c = 0; c < cycles(); ++c) {
        out << c << ',' << comb_toggles[c] << ',' << register_hd[c];
        if (ddl) out << ',' << static_toggles[c] << ',' << unloaded_toggles[c];
        if (c < per_net.size())
            for (auto v : per_net[c]) out << ',' << v;
        out << '\n';
    }
    return out.str();
}

Stimuli make_stimuli(const Netlist& n, const std::vector<std::map<std::string, bool>>& cycles) {
    Stimuli s;
    s.reserve(cycles.size());
    for (std::size_t c = 0; c < cycles.size(); ++c) {
        std::vector<std::uint8_t> row;
        for (const auto& in : n.inputs()) {
            auto it = cycles[c].find(in);
            if (it == cycles[c].end()) {
                if (in == kClockNet || in == kResetNet) {
                    row.push_back(0);
                    continue;
                }
                throw DataError("missing stimulus for input '" + in + "' in cycle " + std::to_string(c));
            }
            row.push_back(it->second ? 1 : 0);
        }
        s.push_back(std::move(row));
    }
    return s;
}

static void check_row(const std::vector<std::uint8_t>& row, std::size_t width, std::size_t cycle) {
    if (row.size() != width)
        throw DataError("missing stimulus in cycle " + std::to_string(cycle) + ": expected " +
                        std::to_string(width) + " input values, got " + std::to_string(row.size()));
}

Simulator::Simulator(const Netlist& n, SimConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.mode == SimMode::ddl_two_phase)
        throw ConfigError("ddl_two_phase mode needs a DDL netlist");
    std::unordered_map<std::string, std::uint32_t> idx;
    for (const auto& net : n.nets()) {
        idx.emplace(net.name, static_cast<std::uint32_t>(net_names_.size()));
        net_names_.push_back(net.name);
    }
    for (const auto& in : n.inputs()) inputs_.push_back(idx.at(in));
    for (const auto& o : n.outputs()) {
        outputs_.push_back(idx.at(o));
        output_names_.push_back(o);
    }
    comb_net_.assign(net_names_.size(), kNone);
    fanout_.resize(net_names_.size());
    for (const auto& g : n.gates()) {
        if (g.is_register()) {
            if (g.reset == ResetValue::none &&
                (n.fanout(g.output) > 0 ||
                 std::find(n.outputs().begin(), n.outputs().end(), g.output) != n.outputs().end()))
                throw DataError("register '" + g.id +
                                "' has no reset and is read before its first clock edge (X propagation)");
            regs_.push_back({idx.at(g.output), idx.at(g.inputs[0]),
                             static_cast<std::uint8_t>(g.reset == ResetValue::one)});
            reg_names_.push_back(g.id);
            continue;
        }
        CGate c{g.op, idx.at(g.output), idx.at(g.inputs[0]),
                g.inputs.size() > 1 ? idx.at(g.inputs[1]) : idx.at(g.inputs[0])};
        const auto gi = static_cast<std::uint32_t>(comb_.size());
        comb_net_[c.out] = gi;
        fanout_[c.a].push_back(gi);
        if (c.b != c.a) fanout_[c.b].push_back(gi);
        comb_.push_back(c);
    }
    std::mt19937_64 rng(cfg_.delay_seed);
    const auto span = static_cast<std::uint64_t>(cfg_.delay_max - cfg_.delay_min + 1);
    delay_.resize(comb_.size());
    for (auto& d : delay_) d = cfg_.delay_min + static_cast<int>(rng() % span);
    stamp_.assign(comb_.size(), 0);
    gen_.assign(comb_.size(), 0);
    pending_.assign(comb_.size(), 0);
    val_.assign(net_names_.size(), 0);
}

std::uint8_t Simulator::eval(const CGate& g) const {
    const std::uint8_t a = val_[g.a], b = val_[g.b];
    switch (g.op) {
        case GateOp::AND: return a & b;
        case GateOp::OR: return a | b;
        case GateOp::XOR: return a ^ b;
        case GateOp::NOT: return a ^ 1U;
        case GateOp::DFF: break;
    }
    return 0;
}

void Simulator::settle_zero_delay(std::vector<std::uint32_t>* per_net, std::uint32_t& toggles) {
    for (const auto& g : comb_) {
        const std::uint8_t v = eval(g);
        if (v != val_[g.out]) {
            val_[g.out] = v;
            ++toggles;
            if (per_net) ++(*per_net)[g.out];
        }
    }
}

// Event simulation on a time wheel. At each step all due events are applied
// first, then every gate reading a changed net is evaluated once. Transport:
// the result is always scheduled after the gate delay. Inertial: a gate holds
// at most one pending event (toward the complement of its output); a new
// evaluation equal to the current output cancels it.
void Simulator::settle_glitchy(std::vector<std::uint32_t>* per_net, std::uint32_t& toggles) {
    std::size_t t = 0;
    std::size_t horizon = 0;
    const bool inertial = cfg_.inertial;
    for (;;) {
        if (++epoch_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
        for (auto net : changed_) {
            for (auto gi : fanout_[net]) {
                if (stamp_[gi] == epoch_) continue;
                stamp_[gi] = epoch_;
                const std::uint8_t v = eval(comb_[gi]);
                if (inertial) {
                    if (v == val_[comb_[gi].out]) {
                        if (pending_[gi]) {
                            pending_[gi] = 0;
                            ++gen_[gi];
                        }
                        continue;
                    }
                    if (pending_[gi]) continue;
                    pending_[gi] = 1;
                }
                const std::size_t at = t + static_cast<std::size_t>(delay_[gi]);
                if (at >= wheel_.size()) wheel_.resize(at + 1);
                wheel_[at].emplace_back(gi, inertial ? gen_[gi] : v);
                horizon = std::max(horizon, at);
            }
        }
        changed_.clear();
        if (t >= horizon) break;
        ++t;
        for (auto [gi, x] : wheel_[t]) {
            const auto net = comb_[gi].out;
            std::uint8_t v;
            if (inertial) {
                if (x != gen_[gi] || !pending_[gi]) continue;
                pending_[gi] = 0;
                v = val_[net] ^ 1U;
            } else {
                v = static_cast<std::uint8_t>(x);
                if (val_[net] == v) continue;
            }
            val_[net] = v;
            ++toggles;
            if (per_net) ++(*per_net)[net];
            changed_.push_back(net);
        }
        wheel_[t].clear();
    }
}

SimResult Simulator::run(const Stimuli& stimuli) {
    SimResult r;
    r.output_names = output_names_;
    if (cfg_.record_registers) r.register_names = reg_names_;
    if (cfg_.record_nets) r.report.net_names = net_names_;
    const std::size_t cycles = stimuli.size();
    r.outputs.reserve(cycles);
    r.report.comb_toggles.reserve(cycles);
    r.report.register_hd.reserve(cycles);

    // Power-on rest state: registers at reset, inputs low, logic settled.
    std::fill(val_.begin(), val_.end(), 0);
    for (const auto& reg : regs_) val_[reg.q] = reg.reset;
    std::uint32_t ignored = 0;
    settle_zero_delay(nullptr, ignored);

    std::vector<std::uint8_t> next_q(regs_.size());
    for (std::size_t i = 0; i < regs_.size(); ++i) next_q[i] = val_[regs_[i].q];

    for (std::size_t c = 0; c < cycles; ++c) {
        check_row(stimuli[c], inputs_.size(), c);
        std::vector<std::uint32_t> per_net;
        if (cfg_.record_nets) per_net.assign(net_names_.size(), 0);
        auto* pn = cfg_.record_nets ? &per_net : nullptr;
        changed_.clear();

        std::uint32_t hd = 0;
        if (c > 0) {
            for (std::size_t i = 0; i < regs_.size(); ++i) {
                const auto q = regs_[i].q;
                if (val_[q] != next_q[i]) {
                    val_[q] = next_q[i];
                    ++hd;
                    if (pn) ++per_net[q];
                    changed_.push_back(q);
                }
            }
        }
        for (std::size_t i = 0; i < inputs_.size(); ++i) {
            const std::uint8_t v = stimuli[c][i] ? 1 : 0;
            const auto net = inputs_[i];
            if (val_[net] != v) {
                val_[net] = v;
                if (pn) ++per_net[net];
                changed_.push_back(net);
            }
        }

        std::uint32_t toggles = 0;
        if (cfg_.mode == SimMode::glitchy)
            settle_glitchy(pn, toggles);
        else
            settle_zero_delay(pn, toggles);

        std::vector<std::uint8_t> out(outputs_.size());
        for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = val_[outputs_[i]];
        r.outputs.push_back(std::move(out));
        if (cfg_.record_registers) {
            std::vector<std::uint8_t> st(regs_.size());
            for (std::size_t i = 0; i < regs_.size(); ++i) st[i] = val_[regs_[i].q];
            r.registers.push_back(std::move(st));
        }
        for (std::size_t i = 0; i < regs_.size(); ++i) next_q[i] = val_[regs_[i].d];
        r.report.comb_toggles.push_back(toggles);
        r.report.register_hd.push_back(hd);
        if (pn) r.report.per_net.push_back(std::move(per_net));
    }
    return r;
}

DdlSimulator::DdlSimulator(const DdlNetlist& d, SimConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.mode != SimMode::ddl_two_phase) throw ConfigError("DDL netlists need ddl_two_phase mode");
    std::unordered_map<std::string, std::uint32_t> idx;
    auto add_pair = [&](const std::string& t, const std::string& f) {
        const auto i = static_cast<std::uint32_t>(rail_names_.size());
        idx.emplace(t, i);
        idx.emplace(f, i + 1);
        rail_names_.push_back(t);
        rail_names_.push_back(f);
        return i;
    };
    for (const auto& s : d.static_nets) add_pair(s, s + "__f");
    for (const auto& g : d.gates) add_pair(g.out.t, g.out.f);
    for (const auto& g : d.single_rail) {
        if (g.is_register()) continue;
        add_pair(g.output, g.output + "__unused");
    }
    const Netlist& m = d.masked.netlist;
    for (const auto& in : m.inputs()) inputs_.push_back(idx.at(in));
    for (const auto& o : m.outputs()) {
        const auto& rail = d.rail_map.at(o).t;
        outputs_.push_back(idx.at(rail));
        output_names_.push_back(o);
    }
    for (const auto& g : d.gates) {
        gates_.push_back({g.op, idx.at(g.out.t), idx.at(g.a.t), idx.at(g.a.f), idx.at(g.b.t),
                          idx.at(g.b.f), d.unloaded_rails.count(g.out.t) > 0,
                          d.unloaded_rails.count(g.out.f) > 0});
    }
    for (const auto& g : d.single_rail) {
        if (g.is_register()) {
            if (g.reset == ResetValue::none)
                throw DataError("register '" + g.id + "' has no reset (X propagation)");
            regs_.push_back({idx.at(g.output), idx.at(g.inputs[0]),
                             static_cast<std::uint8_t>(g.reset == ResetValue::one)});
            reg_names_.push_back(g.id);
        } else {
            xors_.push_back({idx.at(g.output), idx.at(g.inputs[0]), idx.at(g.inputs[1])});
        }
    }
    val_.assign(rail_names_.size(), 0);
}

SimResult DdlSimulator::run(const Stimuli& stimuli) {
    SimResult r;
    r.output_names = output_names_;
    if (cfg_.record_registers) r.register_names = reg_names_;
    if (cfg_.record_nets) r.report.net_names = rail_names_;
    auto set_static = [&](std::uint32_t t, std::uint8_t v) {
        val_[t] = v;
        val_[t + 1] = v ^ 1U;
    };
    auto evaluate = [&](std::vector<std::uint32_t>* per_rail, std::uint32_t& unloaded) {
        for (const auto& g : gates_) {
            const std::uint8_t at = val_[g.at], af = val_[g.af], bt = val_[g.bt], bf = val_[g.bf];
            std::uint8_t t = 0, f = 0;
            switch (g.op) {
                case GateOp::AND: t = at & bt; f = af | bf; break;
                case GateOp::OR: t = at | bt; f = af & bf; break;
                case GateOp::XOR: t = (at & bf) | (af & bt); f = (at & bt) | (af & bf); break;
                default: break;
            }
            if ((t ^ f) != 1U)
                throw InvariantError("dual-rail gate evaluated to an invalid rail pair");
            val_[g.out] = t;
            val_[g.out + 1] = f;
            const bool unl = t ? g.t_unloaded : g.f_unloaded;
            if (unl) unloaded += 2;
            if (per_rail) (*per_rail)[t ? g.out : g.out + 1] += 2;
        }
    };

    // Power-on: registers at reset, inputs low, remask XOR outputs settled.
    std::fill(val_.begin(), val_.end(), 0);
    for (auto i : inputs_) set_static(i, 0);
    for (const auto& reg : regs_) set_static(reg.q, reg.reset);
    std::uint32_t ignored = 0;
    evaluate(nullptr, ignored);
    for (const auto& x : xors_) val_[x.out] = val_[x.a] ^ val_[x.b];
    std::vector<std::uint8_t> next_q(regs_.size());
    for (std::size_t i = 0; i < regs_.size(); ++i) next_q[i] = val_[regs_[i].q];

    const auto gate_toggles = static_cast<std::uint32_t>(2 * gates_.size());
    for (std::size_t c = 0; c < stimuli.size(); ++c) {
        check_row(stimuli[c], inputs_.size(), c);
        std::vector<std::uint32_t> per_rail;
        if (cfg_.record_nets) per_rail.assign(rail_names_.size(), 0);
        auto* pr = cfg_.record_nets ? &per_rail : nullptr;

        std::uint32_t hd = 0;
        if (c > 0) {
            for (std::size_t i = 0; i < regs_.size(); ++i) {
                if (val_[regs_[i].q] != next_q[i]) {
                    ++hd;
                    set_static(regs_[i].q, next_q[i]);
                }
            }
        }
        for (std::size_t i = 0; i < inputs_.size(); ++i) set_static(inputs_[i], stimuli[c][i] ? 1 : 0);

        std::uint32_t unloaded = 0;
        evaluate(pr, unloaded);
        std::uint32_t stat = 0;
        for (const auto& x : xors_) {
            const std::uint8_t v = val_[x.a] ^ val_[x.b];
            if (v != val_[x.out]) {
                val_[x.out] = v;
                ++stat;
                if (pr) ++per_rail[x.out];
            }
        }

        std::vector<std::uint8_t> out(outputs_.size());
        for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = val_[outputs_[i]];
        r.outputs.push_back(std::move(out));
        if (cfg_.record_registers) {
            std::vector<std::uint8_t> st(regs_.size());
            for (std::size_t i = 0; i < regs_.size(); ++i) st[i] = val_[regs_[i].q];
            r.registers.push_back(std::move(st));
        }
        for (std::size_t i = 0; i < regs_.size(); ++i) next_q[i] = val_[regs_[i].d];
        r.report.comb_toggles.push_back(gate_toggles);
        r.report.register_hd.push_back(hd);
        r.report.static_toggles.push_back(stat);
        r.report.unloaded_toggles.push_back(unloaded);
        if (pr) r.report.per_net.push_back(std::move(per_rail));
    }
    return r;
}

SimResult simulate(const Netlist& n, const Stimuli& stimuli, const SimConfig& cfg) {
    return Simulator(n, cfg).run(stimuli);
}

SimResult simulate(const MaskedNetlist& m, const Stimuli& stimuli, const SimConfig& cfg) {
    return Simulator(m.netlist, cfg).run(stimuli);
}

SimResult simulate_ddl(const DdlNetlist& d, const Stimuli& stimuli, const SimConfig& cfg) {
    return DdlSimulator(d, cfg).run(stimuli);
}

std::string to_vcd(const SimResult& r, const std::string& module_name) {
    std::ostringstream out;
    out << "$timescale 1ns $end\n$scope module " << module_name << " $end\n";
    std::vector<std::string> names = r.output_names;
    const bool regs = !r.registers.empty();
    if (regs) names.insert(names.end(), r.register_names.begin(), r.register_names.end());
    auto code = [](std::size_t i) {
        std::string s;
        do {
            s.push_back(static_cast<char>('!' + i % 94));
            i /= 94;
        } while (i != 0);
        return s;
    };
    for (std::size_t i = 0; i < names.size(); ++i)
        out << "$var wire 1 " << code(i) << ' ' << names[i] << " $end\n";
    out << "$upscope $end\n$enddefinitions $end\n";
    for (std::size_t c = 0; c < r.outputs.size(); ++c) {
        out << '#' << c << '\n';
        for (std::size_t i = 0; i < r.outputs[c].size(); ++i)
            out << static_cast<int>(r.outputs[c][i]) << code(i) << '\n';
        if (regs)
            for (std::size_t i = 0; i < r.registers[c].size(); ++i)
                out << static_cast<int>(r.registers[c][i]) << code(r.output_names.size() + i) << '\n';
    }
    return out.str();
}

}  // namespace sclab
