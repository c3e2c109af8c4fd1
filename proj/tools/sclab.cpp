// sclab: command-line front end for netlist transforms, trace campaigns,
// CPA attacks, randomness tests and clock images.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "json.hpp"
#include "sclab/attack.hpp"
#include "sclab/builtins.hpp"
#include "sclab/campaign.hpp"
#include "sclab/clock.hpp"
#include "sclab/dtw.hpp"
#include "sclab/error.hpp"
#include "sclab/manifest.hpp"
#include "sclab/mask.hpp"
#include "sclab/parallel.hpp"
#include "sclab/randtests.hpp"
#include "sclab/rng.hpp"
#include "sclab/seed.hpp"

namespace {

using namespace sclab;
using nlohmann::ordered_json;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
    if (!out) throw DataError("write to '" + path + "' failed");
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

Netlist load_victim(const std::string& in) {
    return std::filesystem::exists(in) ? load_netlist(in) : builtin_netlist(in);
}

// ---- transform ----

struct TransformArgs {
    std::string in;
    bool mask = false;
    bool ddl = false;
    std::string out_dir = "out";
    std::string out;
};

int cmd_transform(const TransformArgs& a) {
    if (a.ddl && !a.mask) throw ConfigError("--ddl requires --mask");
    const Netlist n = load_victim(a.in);
    std::string text, name = n.name();
    if (!a.mask) {
        text = serialize_netlist(n);
    } else {
        const MaskedNetlist m = mask_netlist(n);
        if (a.ddl) {
            text = serialize_ddl(to_ddl(m));
            name += "_ddl";
        } else {
            text = serialize_masked(m);
            name += "_masked";
        }
    }
    if (!a.out.empty()) {
        write_file(a.out, text);
        return 0;
    }
    Manifest man(a.out_dir, "transform");
    man.set_config({{"in", a.in}, {"mask", a.mask}, {"ddl", a.ddl}});
    write_file(man.path(name + ".net"), text);
    man.add_file(name + ".net");
    man.write();
    std::cout << man.path(name + ".net") << '\n';
    return 0;
}

// ---- campaign ----

struct CampaignArgs {
    std::string config;
    std::string preset;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> clock;
    std::optional<int> perturb;
    std::optional<double> epsilon;
    std::optional<double> noise;
    std::optional<std::string> victim;
    bool no_memprot = false;
    bool zero_delay = false;
    unsigned workers = 0;
    std::string out_dir = "out";
};

int cmd_campaign(const CampaignArgs& a) {
    nlohmann::json j = a.config.empty() ? nlohmann::json::object() : read_json(a.config);
    if (!a.preset.empty()) j["preset"] = a.preset;
    CampaignConfig c = CampaignConfig::from_json(j);
    // Flags override file values.
    if (a.n) c.n_traces = *a.n;
    if (a.seed) c.seed = *a.seed;
    if (a.clock) c.cm.clock_mode = parse_clock_mode(*a.clock);
    if (a.perturb) c.cm.perturb_interval = *a.perturb;
    if (a.epsilon) c.leak.epsilon = *a.epsilon;
    if (a.noise) c.leak.noise_std = *a.noise;
    if (a.victim) c.victim = *a.victim;
    if (a.no_memprot) c.cm.memprot = false;
    if (a.zero_delay) c.glitches = false;
    c.workers = a.workers;
    c.validate();

    Manifest man(a.out_dir, "campaign");
    man.set_seed(c.seed);
    man.set_config(c.to_json());
    const TraceSet ts = gen_campaign(c);
    write_traces(man.path("traces.mltr"), ts, c.to_json().dump());
    write_file(man.path("config.json"), c.to_json().dump(2) + "\n");
    for (const char* f : {"traces.mltr", "traces.mltr.json", "config.json"}) man.add_file(f);
    man.write();
    std::cout << "traces=" << ts.size() << " samples=" << ts.samples << " dir=" << a.out_dir << '\n';
    return 0;
}

// ---- attack ----

struct AttackArgs {
    std::string traces;
    std::optional<int> key;
    std::size_t dtw_radius = 0;
    std::string checkpoints = "100,16";  // first trace count, points per octave
    int window = 10;
    unsigned workers = 0;
    std::string out_dir = "out";
};

std::pair<std::size_t, int> parse_checkpoints(const std::string& s) {
    std::size_t first = 0;
    int per_octave = 0;
    char comma = 0;
    std::istringstream in(s);
    if (!(in >> first >> comma >> per_octave) || comma != ',' || first < 2 || per_octave < 1)
        throw ConfigError("--checkpoints expects FIRST,PER_OCTAVE (e.g. 100,16)");
    return {first, per_octave};
}

std::optional<std::uint8_t> sidecar_key(const std::string& traces) {
    std::ifstream in(traces + ".json");
    if (!in) return std::nullopt;
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.contains("config") && j["config"].contains("key")) return j["config"]["key"].get<std::uint8_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + traces + ".json': " + e.what());
    }
    return std::nullopt;
}

int cmd_attack(const AttackArgs& a) {
    const auto [first, per_octave] = parse_checkpoints(a.checkpoints);
    std::optional<std::uint8_t> key;
    if (a.key) {
        if (*a.key < 0 || *a.key > 255) throw ConfigError("--key must be in [0, 255]");
        key = static_cast<std::uint8_t>(*a.key);
    } else {
        key = sidecar_key(a.traces);
    }
    std::size_t n = 0;
    AttackReport r;
    if (a.dtw_radius > 0) {
        TraceSet ts = read_traces(a.traces);
        n = ts.size();
        ts = align(ts, a.dtw_radius, 0, a.workers);
        r = cpa(ts, key, log_checkpoints(first, n, per_octave));
    } else {
        n = TraceReader(a.traces).size();
        r = cpa_file(a.traces, key, log_checkpoints(first, n, per_octave));
    }
    if (a.window != r.stability_window) {
        r.stability_window = a.window;
        r.mtd = key ? traces_to_disclosure(r.checkpoints, a.window) : std::nullopt;
    }

    Manifest man(a.out_dir, "attack");
    ordered_json rep;
    rep["traces_file"] = a.traces;
    rep["traces"] = n;
    rep["samples"] = r.samples;
    rep["dtw_radius"] = a.dtw_radius;
    rep["key"] = key ? ordered_json(*key) : ordered_json(nullptr);
    rep["best_candidate"] = r.best_candidate();
    rep["final_rank"] = key ? ordered_json(r.checkpoints.back().rank) : ordered_json(nullptr);
    rep["mtd"] = r.mtd ? ordered_json(*r.mtd) : ordered_json(nullptr);
    rep["stability_window"] = r.stability_window;
    rep["degenerate_samples"] = r.degenerate_samples;
    man.set_config({{"dtw_radius", a.dtw_radius}, {"checkpoints", a.checkpoints}, {"window", a.window}});
    write_file(man.path("report.json"), rep.dump(2) + "\n");
    write_file(man.path("attack.csv"), r.to_csv());
    write_file(man.path("rank_curve.csv"), r.rank_curve_csv());
    for (const char* f : {"report.json", "attack.csv", "rank_curve.csv"}) man.add_file(f);
    man.write();
    std::cout << "mtd=" << (r.mtd ? std::to_string(*r.mtd) : "none") << " best=" << int(r.best_candidate()) << '\n';
    return 0;
}

// ---- rngtest ----

struct RngArgs {
    std::size_t streams = 100;
    std::size_t bits = 100000;
    double sample_freq = 3.4e6;
    std::uint64_t seed = 1;
    bool raw = false;
    int perturb_every = 0;
    std::size_t max_lag = 100;
    unsigned workers = 0;
    std::string out_dir = "out";
};

int cmd_rngtest(const RngArgs& a) {
    if (a.streams < 1) throw ConfigError("--streams must be >= 1");
    auto stream = [&](std::size_t s) {
        RngStreamConfig cfg;
        cfg.seed = derive_seed(a.seed, "rng_stream", s);
        cfg.sample_freq = a.sample_freq;
        cfg.perturb_every = a.perturb_every;
        return a.raw ? raw_bitstream(cfg, a.bits) : rng_bitstream(cfg, a.bits);
    };
    std::vector<std::vector<TestResult>> results(a.streams);
    std::vector<Autocorrelation> ac(a.streams);
    parallel_chunks(a.streams, a.workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            const Bits b = stream(s);
            results[s] = battery(b);
            ac[s] = autocorrelation(b, a.max_lag);
        }
    });

    Manifest man(a.out_dir, "rngtest");
    man.set_seed(a.seed);
    man.set_config({{"streams", a.streams},
                    {"bits", a.bits},
                    {"sample_freq", a.sample_freq},
                    {"raw", a.raw},
                    {"perturb_every", a.perturb_every},
                    {"max_lag", a.max_lag}});

    std::ostringstream bat;
    bat << "stream,test,subtest,p_value,pass\n";
    for (std::size_t s = 0; s < a.streams; ++s)
        for (const auto& t : results[s])
            for (std::size_t k = 0; k < t.p_values.size(); ++k)
                bat << s << ',' << t.name << ',' << k << ',' << t.p_values[k] << ','
                    << (t.p_values[k] >= kSignificance ? 1 : 0) << '\n';
    write_file(man.path("battery.csv"), bat.str());
    write_file(man.path("proportions.csv"), proportions_csv(proportions(results)));

    std::ostringstream acs;
    acs << "stream,lag,r,band\n";
    std::size_t inside = 0, total = 0;
    for (std::size_t s = 0; s < a.streams; ++s) {
        for (std::size_t k = 0; k < ac[s].r.size(); ++k) {
            acs << s << ',' << k + 1 << ',' << ac[s].r[k] << ',' << ac[s].band << '\n';
            inside += std::abs(ac[s].r[k]) <= ac[s].band;
            ++total;
        }
    }
    write_file(man.path("autocorr.csv"), acs.str());

    const Bits first = stream(0);
    write_bitstream(man.path("stream_0.bin"), first, ordered_json{{"bits", a.bits}, {"raw", a.raw}}.dump());
    ordered_json ent;
    ent["shannon_5bit"] = a.bits >= 5000 ? ordered_json(shannon_entropy_5bit(first)) : ordered_json(nullptr);
    if (a.bits >= 100000) {
        const auto m = min_entropy(first);
        ent["min_entropy_mcv"] = m.mcv;
        ent["min_entropy_markov"] = m.markov;
    }
    ent["autocorr_fraction_in_band"] = static_cast<double>(inside) / static_cast<double>(total);
    write_file(man.path("entropy.json"), ent.dump(2) + "\n");
    for (const char* f : {"battery.csv", "proportions.csv", "autocorr.csv", "stream_0.bin", "stream_0.bin.json",
                          "entropy.json"})
        man.add_file(f);
    man.write();
    std::cout << proportions_csv(proportions(results));
    return 0;
}

// ---- clockviz ----

struct ClockArgs {
    std::string mode = "off";
    int perturb = 0;
    std::size_t cycles = 255 * 64;
    std::size_t width = 510;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string name = "clock.pgm";
};

int cmd_clockviz(const ClockArgs& a) {
    std::mt19937_64 rng(derive_seed(a.seed, "clockviz"));
    std::uint8_t st = 0xFF;
    while (st == 0xFF) st = static_cast<std::uint8_t>(rng() & 0xFF);
    ClockRandomizer cr(st, parse_clock_mode(a.mode), a.perturb);
    const auto bitmap = cr.schedule(a.cycles, [&] { return (rng() & 1U) != 0; });
    Manifest man(a.out_dir, "clockviz");
    man.set_seed(a.seed);
    man.set_config({{"mode", a.mode}, {"perturb", a.perturb}, {"cycles", a.cycles}, {"width", a.width}});
    write_file(man.path(a.name), render_clock_image(bitmap, a.width));
    man.add_file(a.name);
    man.write();
    return 0;
}

int cmd_verify(const std::string& dir) {
    const auto r = verify_manifest(dir);
    for (const auto& f : r.mismatched) std::cerr << "mismatch: " << f << '\n';
    std::cout << "verified " << r.ok.size() << " file(s), " << r.mismatched.size() << " mismatch(es)\n";
    if (!r.mismatched.empty()) throw DataError("manifest verification failed");
    return 0;
}

std::string code_name(ExitCode c) {
    switch (c) {
        case ExitCode::ok: return "ok";
        case ExitCode::config_error: return "config_error";
        case ExitCode::data_error: return "data_error";
        case ExitCode::invariant_breach: return "invariant_breach";
    }
    return "error";
}

int fail(ExitCode code, const std::string& message) {
    std::cerr << nlohmann::json{{"error", code_name(code)}, {"message", message}}.dump() << '\n';
    return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Side-channel countermeasure lab"};
    app.require_subcommand(1);

    TransformArgs ta;
    auto* t = app.add_subcommand("transform", "Mask and/or dual-rail transform a netlist");
    t->add_option("--in", ta.in, "Netlist file or builtin name (aes_sbox, victim_round)")->required();
    t->add_flag("--mask", ta.mask, "Apply two-share Boolean masking");
    t->add_flag("--ddl", ta.ddl, "Convert the masked netlist to dual-rail precharge logic");
    t->add_option("--out-dir", ta.out_dir, "Output directory (with manifest)");
    t->add_option("--out", ta.out, "Write the netlist to this file only, without a manifest");

    CampaignArgs ca;
    auto* c = app.add_subcommand("campaign", "Generate a synthetic power-trace campaign");
    c->add_option("--config", ca.config, "JSON campaign configuration");
    c->add_option("--preset", ca.preset, "ncm | bm | bm-ddl");
    c->add_option("--n", ca.n, "Number of traces");
    c->add_option("--seed", ca.seed, "Global seed");
    c->add_option("--clock", ca.clock, "Clock randomization: off | and | xor | or");
    c->add_option("--perturb", ca.perturb, "Clock LFSR perturbation interval (0 = never)");
    c->add_option("--epsilon", ca.epsilon, "Dual-rail imbalance weight");
    c->add_option("--noise", ca.noise, "Gaussian noise standard deviation");
    c->add_option("--victim", ca.victim, "Victim netlist file or builtin name");
    c->add_flag("--no-memprot", ca.no_memprot, "Disable session-key memory protection");
    c->add_flag("--zero-delay", ca.zero_delay, "Glitch-free simulation");
    c->add_option("--workers", ca.workers, "Worker threads (0 = all cores)");
    c->add_option("--out-dir", ca.out_dir, "Output directory");

    AttackArgs aa;
    auto* at = app.add_subcommand("attack", "CPA on the first key byte");
    at->add_option("--traces", aa.traces, "Trace file")->required();
    at->add_option("--key", aa.key, "Correct key byte (default: from the trace sidecar)");
    at->add_option("--dtw-radius", aa.dtw_radius, "Align traces with FastDTW first (0 = off)");
    at->add_option("--checkpoints", aa.checkpoints, "FIRST,PER_OCTAVE of the checkpoint grid");
    at->add_option("--window", aa.window, "Consecutive rank-1 checkpoints required for disclosure");
    at->add_option("--workers", aa.workers, "Worker threads for alignment (0 = all cores)");
    at->add_option("--out-dir", aa.out_dir, "Output directory");

    RngArgs ra;
    auto* rt = app.add_subcommand("rngtest", "Statistical tests on generator streams");
    rt->add_option("--streams", ra.streams, "Number of independent streams");
    rt->add_option("--bits", ra.bits, "Bits per stream");
    rt->add_option("--sample-freq", ra.sample_freq, "Raw sampling frequency in Hz");
    rt->add_option("--seed", ra.seed, "Global seed");
    rt->add_flag("--raw", ra.raw, "Test raw oscillator bits instead of post-processed output");
    rt->add_option("--perturb-every", ra.perturb_every, "Steps between raw-bit perturbations (0 = never)");
    rt->add_option("--max-lag", ra.max_lag, "Largest autocorrelation lag");
    rt->add_option("--workers", ra.workers, "Worker threads (0 = all cores)");
    rt->add_option("--out-dir", ra.out_dir, "Output directory");

    ClockArgs ka;
    auto* cv = app.add_subcommand("clockviz", "Render the randomized clock as a PGM image");
    cv->add_option("--mode", ka.mode, "off | and | xor | or");
    cv->add_option("--perturb", ka.perturb, "Perturbation interval in cycles (0 = never)");
    cv->add_option("--cycles", ka.cycles, "Number of clock cycles");
    cv->add_option("--width", ka.width, "Image width in pixels (two per cycle)");
    cv->add_option("--seed", ka.seed, "Global seed");
    cv->add_option("--out-dir", ka.out_dir, "Output directory");
    cv->add_option("--name", ka.name, "Image file name");

    std::string verify_dir;
    auto* vf = app.add_subcommand("verify", "Re-hash the files listed in a manifest");
    vf->add_option("--dir", verify_dir, "Directory holding manifest.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(ExitCode::config_error, e.what());
    }

    try {
        if (*t) return cmd_transform(ta);
        if (*c) return cmd_campaign(ca);
        if (*at) return cmd_attack(aa);
        if (*rt) return cmd_rngtest(ra);
        if (*cv) return cmd_clockviz(ka);
        if (*vf) return cmd_verify(verify_dir);
    } catch (const Error& e) {
        return fail(e.code(), e.what());
    } catch (const std::exception& e) {
        return fail(ExitCode::invariant_breach, e.what());
    }
    return 0;
}
