#include "sclab/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "sclab/builtins.hpp"
#include "sclab/memprot.hpp"
#include "sclab/parallel.hpp"
#include "sclab/seed.hpp"

namespace sclab {

namespace {

constexpr int kAddrBits = 10;
constexpr int kWordBits = 32;
constexpr std::uint32_t kBufferBase = 0x100;
constexpr int kOrigInputs = 17;  // p[0..7], k[0..7], clr
constexpr std::uint64_t kCalibrationBase = std::uint64_t{1} << 62;
constexpr int kCalibrationTraces = 16;

int orig_input_index(const std::string& name) {
    if (name == "clr") return 16;
    if (name.size() == 4 && name[1] == '[' && name[3] == ']' && name[2] >= '0' && name[2] <= '7') {
        if (name[0] == 'p') return name[2] - '0';
        if (name[0] == 'k') return 8 + (name[2] - '0');
    }
    return -1;
}

int output_bit_index(const std::string& name) {
    if (name.size() == 4 && name[0] == 'q' && name[1] == '[' && name[3] == ']' && name[2] >= '0' && name[2] <= '7')
        return name[2] - '0';
    return -1;
}

class BitSource {
public:
    explicit BitSource(std::uint64_t seed) : rng_(seed) {}
    std::uint8_t bit() {
        if (left_ == 0) {
            buf_ = rng_();
            left_ = 64;
        }
        const auto b = static_cast<std::uint8_t>(buf_ & 1U);
        buf_ >>= 1;
        --left_;
        return b;
    }

private:
    std::mt19937_64 rng_;
    std::uint64_t buf_ = 0;
    int left_ = 0;
};

}  // namespace

void CampaignConfig::validate() const {
    if (cm.ddl && !cm.mask) throw ConfigError("ddl requires mask (DDL applies to masked netlists)");
    if (n_traces < 1) throw ConfigError("n_traces must be >= 1");
    if (lead_cycles < 1 || tail_cycles < 0) throw ConfigError("lead_cycles >= 1 and tail_cycles >= 0 required");
    if (hold_cycles < 2) throw ConfigError("hold_cycles >= 2 required");
    if (cm.perturb_interval < 0) throw ConfigError("perturb_interval must be >= 0");
    if (glitches && delay_min < 1) throw ConfigError("delay_min must be >= 1");
    if (delay_max < delay_min) throw ConfigError("delay_max < delay_min");
    leak.validate();
}

nlohmann::ordered_json CampaignConfig::to_json() const {
    nlohmann::ordered_json j;
    j["preset"] = preset;
    j["victim"] = victim;
    j["countermeasures"] = {{"mask", cm.mask},
                            {"ddl", cm.ddl},
                            {"clock_mode", std::string(to_string(cm.clock_mode))},
                            {"perturb_interval", cm.perturb_interval},
                            {"memprot", cm.memprot},
                            {"address_expansion", cm.address_expansion}};
    j["glitches"] = glitches;
    j["delay_range"] = {delay_min, delay_max};
    j["inertial_delays"] = inertial_delays;
    j["leak"] = {{"alpha", leak.alpha},
                 {"beta", leak.beta},
                 {"gamma", leak.gamma},
                 {"epsilon", leak.epsilon},
                 {"noise_std", leak.noise_std},
                 {"samples_per_cycle", leak.samples_per_cycle},
                 {"pulse_shape", leak.pulse_shape}};
    j["n_traces"] = n_traces;
    j["seed"] = seed;
    j["key"] = key;
    j["lead_cycles"] = lead_cycles;
    j["hold_cycles"] = hold_cycles;
    j["tail_cycles"] = tail_cycles;
    return j;
}

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j) { return from_json(j, CampaignConfig{}); }

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j, CampaignConfig c) {
    try {
        if (j.contains("preset")) c = preset_config(j["preset"].get<std::string>());
        c.victim = j.value("victim", c.victim);
        if (j.contains("countermeasures")) {
            const auto& m = j["countermeasures"];
            c.cm.mask = m.value("mask", c.cm.mask);
            c.cm.ddl = m.value("ddl", c.cm.ddl);
            if (m.contains("clock_mode")) c.cm.clock_mode = parse_clock_mode(m["clock_mode"].get<std::string>());
            c.cm.perturb_interval = m.value("perturb_interval", c.cm.perturb_interval);
            c.cm.memprot = m.value("memprot", c.cm.memprot);
            c.cm.address_expansion = m.value("address_expansion", c.cm.address_expansion);
        }
        c.glitches = j.value("glitches", c.glitches);
        if (j.contains("delay_range")) {
            c.delay_min = j["delay_range"].at(0).get<int>();
            c.delay_max = j["delay_range"].at(1).get<int>();
        }
        c.inertial_delays = j.value("inertial_delays", c.inertial_delays);
        if (j.contains("leak")) {
            const auto& l = j["leak"];
            c.leak.alpha = l.value("alpha", c.leak.alpha);
            c.leak.beta = l.value("beta", c.leak.beta);
            c.leak.gamma = l.value("gamma", c.leak.gamma);
            c.leak.epsilon = l.value("epsilon", c.leak.epsilon);
            c.leak.noise_std = l.value("noise_std", c.leak.noise_std);
            c.leak.samples_per_cycle = l.value("samples_per_cycle", c.leak.samples_per_cycle);
            if (l.contains("pulse_shape")) c.leak.pulse_shape = l["pulse_shape"].get<std::vector<double>>();
        }
        c.n_traces = j.value("n_traces", c.n_traces);
        c.seed = j.value("seed", c.seed);
        c.key = j.value("key", c.key);
        c.lead_cycles = j.value("lead_cycles", c.lead_cycles);
        c.hold_cycles = j.value("hold_cycles", c.hold_cycles);
        c.tail_cycles = j.value("tail_cycles", c.tail_cycles);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid campaign config: ") + e.what());
    }
    c.validate();
    return c;
}

CampaignConfig preset_config(const std::string& name) {
    CampaignConfig c;
    c.preset = name;
    if (name == "ncm") {
        c.cm.mask = false;
        c.cm.ddl = false;
    } else if (name == "bm") {
        c.cm.mask = true;
        c.cm.ddl = false;
    } else if (name == "bm-ddl") {
        c.cm.mask = true;
        c.cm.ddl = true;
    } else {
        throw ConfigError("unknown preset '" + name + "' (ncm|bm|bm-ddl)");
    }
    return c;
}

std::vector<std::string> preset_names() { return {"ncm", "bm", "bm-ddl"}; }

struct Campaign::Impl {
    enum class Slot : std::uint8_t { plain, share0, share1, random, zero };
    struct InputSlot {
        Slot kind;
        int index;  // original input or random port
    };

    Netlist plain;
    std::unique_ptr<MaskedNetlist> masked;
    std::unique_ptr<DdlNetlist> ddl;
    const Netlist* simulated = nullptr;
    std::vector<InputSlot> layout;
    std::array<std::pair<int, int>, 8> out_index{};  // (s0 or plain, s1 or -1)
    std::size_t n_random = 0;
    std::vector<std::uint8_t> program;  // dummy plaintext per device cycle
    SimConfig sim;
};

struct Campaign::Worker {
    std::unique_ptr<Simulator> sim;
    std::unique_ptr<DdlSimulator> ddl;
    Stimuli stimuli;
};

Campaign::Campaign(CampaignConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
    cfg_.validate();
    auto& im = *impl_;
    im.plain = std::filesystem::exists(cfg_.victim) ? load_netlist(cfg_.victim) : builtin_netlist(cfg_.victim);

    std::vector<bool> seen(kOrigInputs, false);
    for (const auto& in : im.plain.inputs()) {
        const int k = orig_input_index(in);
        if (k >= 0) seen[static_cast<std::size_t>(k)] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw ConfigError("victim '" + cfg_.victim + "' must expose p[0..7], k[0..7] and clr");
    std::vector<bool> outs(8, false);
    for (const auto& o : im.plain.outputs())
        if (output_bit_index(o) >= 0) outs[static_cast<std::size_t>(output_bit_index(o))] = true;
    if (std::find(outs.begin(), outs.end(), false) != outs.end())
        throw ConfigError("victim '" + cfg_.victim + "' must expose q[0..7]");

    if (cfg_.cm.mask) {
        im.masked = std::make_unique<MaskedNetlist>(mask_netlist(im.plain));
        if (cfg_.cm.ddl) im.ddl = std::make_unique<DdlNetlist>(to_ddl(*im.masked));
        im.simulated = &im.masked->netlist;
        std::map<std::string, std::pair<Impl::Slot, int>> by_name;
        for (const auto& [net, sp] : im.masked->share_map) {
            const int k = orig_input_index(net);
            if (k < 0) continue;
            by_name[sp.s0] = {Impl::Slot::share0, k};
            by_name[sp.s1] = {Impl::Slot::share1, k};
        }
        for (std::size_t r = 0; r < im.masked->random_ports.size(); ++r)
            by_name[im.masked->random_ports[r]] = {Impl::Slot::random, static_cast<int>(r)};
        for (const auto& in : im.simulated->inputs()) {
            auto it = by_name.find(in);
            im.layout.push_back(it == by_name.end() ? Impl::InputSlot{Impl::Slot::zero, 0}
                                                    : Impl::InputSlot{it->second.first, it->second.second});
        }
        im.n_random = im.masked->random_ports.size();
        const auto& outs_m = im.simulated->outputs();
        for (int b = 0; b < 8; ++b) {
            const auto& sp = im.masked->share_map.at("q[" + std::to_string(b) + "]");
            const auto i0 = std::find(outs_m.begin(), outs_m.end(), sp.s0) - outs_m.begin();
            const auto i1 = std::find(outs_m.begin(), outs_m.end(), sp.s1) - outs_m.begin();
            im.out_index[static_cast<std::size_t>(b)] = {static_cast<int>(i0), static_cast<int>(i1)};
        }
    } else {
        im.simulated = &im.plain;
        for (const auto& in : im.plain.inputs()) {
            const int k = orig_input_index(in);
            im.layout.push_back(k < 0 ? Impl::InputSlot{Impl::Slot::zero, 0} : Impl::InputSlot{Impl::Slot::plain, k});
        }
        const auto& o = im.plain.outputs();
        for (int b = 0; b < 8; ++b) {
            const auto i = std::find(o.begin(), o.end(), "q[" + std::to_string(b) + "]") - o.begin();
            im.out_index[static_cast<std::size_t>(b)] = {static_cast<int>(i), -1};
        }
    }

    im.sim.delay_seed = derive_seed(cfg_.seed, "gate_delays");
    im.sim.delay_min = cfg_.delay_min;
    im.sim.delay_max = cfg_.delay_max;
    im.sim.inertial = cfg_.inertial_delays;
    im.sim.mode = cfg_.cm.ddl ? SimMode::ddl_two_phase : (cfg_.glitches ? SimMode::glitchy : SimMode::zero_delay);

    const int cycles = cfg_.program_cycles();
    if (cfg_.cm.clock_mode == ClockMode::off) {
        slots_ = static_cast<std::size_t>(cycles);
    } else {
        const double f = nominal_skip(cfg_.cm.clock_mode);
        slots_ = static_cast<std::size_t>(std::ceil(cycles / (1.0 - f) * 1.5));
    }
    samples_ = static_cast<std::uint32_t>(slots_ * static_cast<std::size_t>(cfg_.leak.samples_per_cycle));
    std::mt19937_64 prog(derive_seed(cfg_.seed, "program"));
    im.program.resize(slots_ + 1);
    for (auto& b : im.program) b = static_cast<std::uint8_t>(prog() & 0xFF);

    if (cfg_.cm.clock_mode != ClockMode::off) {
        // Skipped slots draw the mean passed-slot power of clock-free traces.
        Worker w;
        double sum = 0.0;
        std::size_t n = 0;
        const double pulse_mean = std::accumulate(cfg_.leak.pulse_shape.begin(), cfg_.leak.pulse_shape.end(), 0.0) /
                                  static_cast<double>(cfg_.leak.pulse_shape.size());
        for (int i = 0; i < kCalibrationTraces; ++i) {
            Detail d;
            trace(w, kCalibrationBase + static_cast<std::uint64_t>(i), nullptr, d.meta, &d);
            for (double p : cycle_power(d.report, d.bus_hw, cfg_.leak)) {
                sum += p * pulse_mean;
                ++n;
            }
        }
        baseline_ = sum / static_cast<double>(n);
    }
}

Campaign::~Campaign() = default;

std::size_t Campaign::registers() const { return impl_->simulated->register_count(); }

std::size_t Campaign::split_bits_per_cycle() const { return cfg_.cm.mask ? kOrigInputs : 0; }

void Campaign::trace(Worker& w, std::size_t index, float* out, TraceMeta& meta, Detail* detail) const {
    const auto& im = *impl_;
    const bool calibration = index >= kCalibrationBase;
    if (!w.sim && !w.ddl) {
        if (im.ddl)
            w.ddl = std::make_unique<DdlSimulator>(*im.ddl, im.sim);
        else
            w.sim = std::make_unique<Simulator>(*im.simulated, im.sim);
    }

    std::mt19937_64 data_rng(derive_seed(cfg_.seed, "trace", index));
    meta = TraceMeta{};
    meta.plaintext = static_cast<std::uint8_t>(data_rng() & 0xFF);
    meta.trace_seed = derive_seed(cfg_.seed, "noise", index);
    SessionKeys keys;
    if (cfg_.cm.memprot) {
        keys = SessionKeys::random(data_rng, kAddrBits, kWordBits, index);
        meta.session_keys = true;
    }

    std::vector<std::uint8_t> schedule;
    std::size_t cycles = static_cast<std::size_t>(cfg_.program_cycles());
    if (cfg_.cm.clock_mode != ClockMode::off && !calibration) {
        meta.clock_seed = derive_seed(cfg_.seed, "clock", index);
        std::mt19937_64 clk_rng(meta.clock_seed);
        std::uint8_t st = 0xFF;
        while (st == 0xFF) st = static_cast<std::uint8_t>(clk_rng() & 0xFF);
        ClockRandomizer cr(st, cfg_.cm.clock_mode, cfg_.cm.perturb_interval);
        schedule = cr.schedule(slots_, [&] { return (clk_rng() & 1U) != 0; });
        cycles = static_cast<std::size_t>(std::count(schedule.begin(), schedule.end(), std::uint8_t{1}));
    }

    // Program inputs per device cycle.
    const int L = cfg_.lead_cycles;
    BitSource mask_bits(derive_seed(cfg_.seed, "masks", index));
    w.stimuli.resize(cycles);
    std::array<std::uint8_t, kOrigInputs> v{};
    std::array<std::uint8_t, kOrigInputs> r{};
    std::vector<std::uint8_t> rnd(im.n_random);
    for (std::size_t c = 0; c < cycles; ++c) {
        const bool load = static_cast<int>(c) == L;
        // Held so the S-box is quiet when the output register updates.
        const bool hold = static_cast<int>(c) > L && static_cast<int>(c) < L + cfg_.hold_cycles;
        const std::uint8_t p = load || hold ? meta.plaintext : im.program[c % im.program.size()];
        for (int b = 0; b < 8; ++b) {
            v[static_cast<std::size_t>(b)] = (p >> b) & 1U;
            v[static_cast<std::size_t>(8 + b)] = (cfg_.key >> b) & 1U;
        }
        v[16] = load ? 1 : 0;
        if (cfg_.cm.mask) {
            for (auto& x : r) x = mask_bits.bit();
            for (auto& x : rnd) x = mask_bits.bit();
        }
        auto& row = w.stimuli[c];
        row.resize(im.layout.size());
        for (std::size_t i = 0; i < im.layout.size(); ++i) {
            const auto [kind, k] = im.layout[i];
            const auto ku = static_cast<std::size_t>(k);
            switch (kind) {
                case Impl::Slot::plain: row[i] = v[ku]; break;
                case Impl::Slot::share0: row[i] = r[ku]; break;
                case Impl::Slot::share1: row[i] = r[ku] ^ v[ku]; break;
                case Impl::Slot::random: row[i] = rnd[ku]; break;
                case Impl::Slot::zero: row[i] = 0; break;
            }
        }
    }
    if (cfg_.cm.mask) meta.random_bits = static_cast<std::uint32_t>(im.n_random * cycles);

    SimResult res = w.ddl ? w.ddl->run(w.stimuli) : w.sim->run(w.stimuli);

    ProtectedMemory mem(keys, kAddrBits, kWordBits, cfg_.cm.address_expansion, true);
    std::vector<std::uint32_t> bus(cycles);
    std::vector<std::uint8_t> outputs(cycles);
    for (std::size_t c = 0; c < cycles; ++c) {
        const auto& o = res.outputs[c];
        std::uint32_t s0 = 0, s1 = 0;
        for (std::size_t b = 0; b < 8; ++b) {
            const auto [i0, i1] = im.out_index[b];
            s0 |= static_cast<std::uint32_t>(o[static_cast<std::size_t>(i0)]) << b;
            if (i1 >= 0) s1 |= static_cast<std::uint32_t>(o[static_cast<std::size_t>(i1)]) << b;
        }
        const auto addr = static_cast<std::uint32_t>((kBufferBase + c) & ((1U << kAddrBits) - 1));
        if (cfg_.cm.mask)
            mem.write_shares(addr, s0, s1);
        else
            mem.write(addr, s0);
        bus[c] = static_cast<std::uint32_t>(mem.bus_log().back().hamming_weight());
        outputs[c] = static_cast<std::uint8_t>(s0 ^ s1);
    }

    if (out != nullptr) {
        const auto samples = synthesize_trace(res.report, bus, schedule, cfg_.leak, baseline_, meta.trace_seed);
        std::copy(samples.begin(), samples.end(), out);
    }
    if (detail != nullptr) {
        detail->report = std::move(res.report);
        detail->bus_hw = std::move(bus);
        detail->schedule = std::move(schedule);
        detail->outputs = std::move(outputs);
        detail->meta = meta;
    }
}

Campaign::Detail Campaign::detail(std::size_t index) const {
    Worker w;
    Detail d;
    trace(w, index, nullptr, d.meta, &d);
    return d;
}

void Campaign::generate(std::size_t begin, std::size_t count, std::vector<float>& data,
                        std::vector<TraceMeta>& meta, unsigned workers) const {
    data.resize(count * samples_);
    meta.resize(count);
    if (workers == 0) workers = cfg_.workers;
    parallel_chunks(count, workers, [&](std::size_t lo, std::size_t hi) {
        Worker w;
        for (std::size_t i = lo; i < hi; ++i) trace(w, begin + i, data.data() + i * samples_, meta[i], nullptr);
    });
}

TraceSet Campaign::run() const {
    TraceSet ts;
    ts.samples = samples_;
    ts.global_seed = cfg_.seed;
    generate(0, cfg_.n_traces, ts.data, ts.meta);
    return ts;
}

TraceSet gen_campaign(const CampaignConfig& cfg) { return Campaign(cfg).run(); }

}  // namespace sclab
