#include "sclab/trace.hpp"

#include <cstring>
#include <filesystem>
#include <random>

#include "json.hpp"

namespace sclab {

void LeakModel::validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0 || epsilon < 0 || noise_std < 0)
        throw ConfigError("leak model weights must be >= 0");
    if (samples_per_cycle < 1) throw ConfigError("samples_per_cycle must be >= 1");
    if (pulse_shape.size() != static_cast<std::size_t>(samples_per_cycle))
        throw ConfigError("pulse_shape length must equal samples_per_cycle");
}

std::vector<double> cycle_power(const ToggleReport& r, const std::vector<std::uint32_t>& bus_hw,
                                const LeakModel& m) {
    const std::size_t n = r.cycles();
    if (!bus_hw.empty() && bus_hw.size() != n) throw DataError("bus activity length differs from cycle count");
    const bool ddl = !r.static_toggles.empty();
    std::vector<double> p(n);
    for (std::size_t c = 0; c < n; ++c) {
        double v = m.alpha * r.comb_toggles[c] + m.beta * r.register_hd[c];
        if (!bus_hw.empty()) v += m.gamma * bus_hw[c];
        if (ddl) {
            v += m.beta * r.static_toggles[c];
            v += m.epsilon * (static_cast<double>(r.loaded_toggles(c)) - r.unloaded_toggles[c]);
        }
        p[c] = v;
    }
    return p;
}

std::vector<float> synthesize_trace(const ToggleReport& report, const std::vector<std::uint32_t>& bus_hw,
                                    const std::vector<std::uint8_t>& schedule, const LeakModel& m,
                                    double baseline, std::uint64_t seed) {
    m.validate();
    const auto power = cycle_power(report, bus_hw, m);
    const std::size_t slots = schedule.empty() ? power.size() : schedule.size();
    if (!schedule.empty()) {
        std::size_t passed = 0;
        for (auto b : schedule) passed += b ? 1 : 0;
        if (passed != power.size())
            throw DataError("schedule delivers " + std::to_string(passed) + " edges but the report has " +
                            std::to_string(power.size()) + " cycles");
    }
    const auto spc = static_cast<std::size_t>(m.samples_per_cycle);
    std::vector<float> out(slots * spc);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::size_t cycle = 0;
    for (std::size_t s = 0; s < slots; ++s) {
        const bool pass = schedule.empty() || schedule[s] != 0;
        const double p = pass ? power[cycle++] : 0.0;
        for (std::size_t j = 0; j < spc; ++j) {
            double v = pass ? p * m.pulse_shape[j] : baseline;
            if (m.noise_std > 0) v += m.noise_std * noise(rng);
            out[s * spc + j] = static_cast<float>(v);
        }
    }
    return out;
}

std::vector<std::uint8_t> TraceSet::plaintexts() const {
    std::vector<std::uint8_t> p(meta.size());
    for (std::size_t i = 0; i < meta.size(); ++i) p[i] = meta[i].plaintext;
    return p;
}

void TraceSet::validate() const {
    if (data.size() != meta.size() * samples) throw InvariantError("trace matrix size does not match T x S");
}

namespace {

constexpr char kMagic[4] = {'M', 'L', 'T', 'R'};
constexpr std::size_t kHeader = 4 + 2 + 8 + 4;

template <typename T>
void put_le(std::ostream& out, T v) {
    char b[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
    out.write(b, sizeof(T));
}

template <typename T>
T get_le(const unsigned char* b) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return static_cast<T>(v);
}

void read_header(std::istream& in, const std::string& path, std::uint64_t& n, std::uint32_t& s) {
    unsigned char h[kHeader];
    in.read(reinterpret_cast<char*>(h), kHeader);
    if (in.gcount() != static_cast<std::streamsize>(kHeader)) throw DataError("'" + path + "': truncated header");
    if (std::memcmp(h, kMagic, 4) != 0) throw DataError("'" + path + "': bad magic (not a trace file)");
    const auto version = get_le<std::uint16_t>(h + 4);
    if (version != kTraceVersion)
        throw DataError("'" + path + "': unsupported trace format version " + std::to_string(version));
    n = get_le<std::uint64_t>(h + 6);
    s = get_le<std::uint32_t>(h + 14);
}

// IEEE-754 binary32 is assumed; byte order is fixed to little-endian.
void put_floats(std::ostream& out, const float* v, std::size_t n) {
    std::vector<char> buf(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t u = 0;
        std::memcpy(&u, &v[i], 4);
        for (int k = 0; k < 4; ++k) buf[i * 4 + static_cast<std::size_t>(k)] = static_cast<char>((u >> (8 * k)) & 0xFF);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void get_floats(const unsigned char* b, float* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = get_le<std::uint32_t>(b + 4 * i);
        std::memcpy(&v[i], &u, 4);
    }
}

std::vector<std::uint8_t> sidecar_plaintexts(const std::string& path, std::uint64_t n) {
    std::ifstream side(path + ".json");
    if (!side) return {};
    nlohmann::json j;
    try {
        side >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path + ".json': " + e.what());
    }
    if (!j.contains("plaintext")) return {};
    auto p = j["plaintext"].get<std::vector<std::uint8_t>>();
    if (p.size() != n) throw DataError("'" + path + ".json': plaintext count differs from trace count");
    return p;
}

}  // namespace

void write_traces(const std::string& path, const TraceSet& ts, const std::string& config_json) {
    ts.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.write(kMagic, 4);
    put_le<std::uint16_t>(out, kTraceVersion);
    put_le<std::uint64_t>(out, ts.size());
    put_le<std::uint32_t>(out, ts.samples);
    put_floats(out, ts.data.data(), ts.data.size());
    if (!out) throw DataError("write to '" + path + "' failed");

    nlohmann::ordered_json j;
    j["format"] = "MLTR";
    j["version"] = kTraceVersion;
    j["traces"] = ts.size();
    j["samples"] = ts.samples;
    j["global_seed"] = ts.global_seed;
    j["config"] = nlohmann::ordered_json::parse(config_json);
    std::vector<int> pt, keys, rbits;
    std::vector<std::uint64_t> cseed, tseed;
    for (const auto& m : ts.meta) {
        pt.push_back(m.plaintext);
        keys.push_back(m.session_keys ? 1 : 0);
        cseed.push_back(m.clock_seed);
        tseed.push_back(m.trace_seed);
        rbits.push_back(static_cast<int>(m.random_bits));
    }
    j["plaintext"] = pt;
    j["session_keys"] = keys;
    j["clock_seed"] = cseed;
    j["trace_seed"] = tseed;
    j["random_bits"] = rbits;
    std::ofstream(path + ".json") << j.dump() << '\n';
}

TraceSet read_traces(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "'");
    TraceSet ts;
    std::uint64_t n = 0;
    read_header(in, path, n, ts.samples);
    const std::size_t count = n * ts.samples;
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw DataError("'" + path + "': truncated sample data");
    ts.data.resize(count);
    get_floats(raw.data(), ts.data.data(), count);
    ts.meta.resize(n);

    std::ifstream side(path + ".json");
    if (side) {
        nlohmann::json j;
        try {
            side >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("'" + path + ".json': " + e.what());
        }
        ts.global_seed = j.value("global_seed", std::uint64_t{0});
        auto get = [&](const char* key, auto apply) {
            if (!j.contains(key)) return;
            const auto& a = j[key];
            if (a.size() != n) throw DataError("'" + path + ".json': " + key + " length mismatch");
            for (std::size_t i = 0; i < n; ++i) apply(ts.meta[i], a[i]);
        };
        get("plaintext", [](TraceMeta& m, const nlohmann::json& v) { m.plaintext = v.get<std::uint8_t>(); });
        get("session_keys", [](TraceMeta& m, const nlohmann::json& v) { m.session_keys = v.get<int>() != 0; });
        get("clock_seed", [](TraceMeta& m, const nlohmann::json& v) { m.clock_seed = v.get<std::uint64_t>(); });
        get("trace_seed", [](TraceMeta& m, const nlohmann::json& v) { m.trace_seed = v.get<std::uint64_t>(); });
        get("random_bits", [](TraceMeta& m, const nlohmann::json& v) { m.random_bits = v.get<std::uint32_t>(); });
    }
    return ts;
}

TraceReader::TraceReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot read '" + path + "'");
    read_header(in_, path, n_, s_);
    const auto expected = kHeader + n_ * s_ * 4;
    if (std::filesystem::file_size(path) < expected) throw DataError("'" + path + "': truncated sample data");
    plaintexts_ = sidecar_plaintexts(path, n_);
}

std::size_t TraceReader::next(std::size_t max_traces, std::vector<float>& out) {
    const auto rows = static_cast<std::size_t>(std::min<std::uint64_t>(max_traces, n_ - pos_));
    out.resize(rows * s_);
    if (rows == 0) return 0;
    std::vector<unsigned char> raw(rows * s_ * 4);
    in_.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in_.gcount()) != raw.size()) throw DataError("trace file truncated while streaming");
    get_floats(raw.data(), out.data(), rows * s_);
    pos_ += rows;
    return rows;
}

}  // namespace sclab
