#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sclab/sim.hpp"

namespace sclab {

/// Power model weights. Per passed cycle:
///   P = alpha * dual/single-rail logic toggles
///     + beta  * (register bit flips + single-rail remasking XOR toggles)
///     + gamma * memory bus bits
///     + epsilon * (loaded - unloaded rail transitions)
/// spread over samples_per_cycle samples by pulse_shape, plus N(0, noise_std).
struct LeakModel {
    double alpha = 1.0;
    double beta = 2.0;
    double gamma = 1.5;
    double epsilon = 0.15;
    double noise_std = 2.0;
    int samples_per_cycle = 4;
    std::vector<double> pulse_shape{1.0, 0.6, 0.3, 0.1};

    void validate() const;
};

/// Noise-free power of each cycle in `report`.
std::vector<double> cycle_power(const ToggleReport& report, const std::vector<std::uint32_t>& bus_hw,
                                const LeakModel& m);

/// Samples for one trace. `schedule` holds one entry per clock slot (1 = edge
/// delivered); its passed entries must equal report.cycles(). An empty
/// schedule means every slot passes. Skipped slots carry `baseline`.
std::vector<float> synthesize_trace(const ToggleReport& report, const std::vector<std::uint32_t>& bus_hw,
                                    const std::vector<std::uint8_t>& schedule, const LeakModel& m,
                                    double baseline, std::uint64_t seed);

struct TraceMeta {
    std::uint8_t plaintext = 0;
    bool session_keys = false;
    std::uint64_t clock_seed = 0;
    std::uint64_t trace_seed = 0;
    std::uint32_t random_bits = 0;  // remasking bits consumed (one per register pair per cycle)
};

struct TraceSet {
    std::uint32_t samples = 0;
    std::vector<float> data;  // row-major T x S
    std::vector<TraceMeta> meta;
    std::uint64_t global_seed = 0;

    [[nodiscard]] std::size_t size() const { return meta.size(); }
    [[nodiscard]] const float* row(std::size_t t) const { return data.data() + t * samples; }
    [[nodiscard]] std::vector<std::uint8_t> plaintexts() const;
    void validate() const;
};

constexpr std::uint16_t kTraceVersion = 1;

/// Binary file: "MLTR", u16 version, u64 T, u32 S, then T*S f32 little-endian.
/// Per-trace metadata lives in the JSON sidecar "<path>.json".
void write_traces(const std::string& path, const TraceSet& ts, const std::string& config_json = "{}");
TraceSet read_traces(const std::string& path);

/// Streams a trace file in chunks without loading it whole. Plaintexts come
/// from the sidecar when present.
class TraceReader {
public:
    explicit TraceReader(const std::string& path);

    [[nodiscard]] std::uint64_t size() const { return n_; }
    [[nodiscard]] std::uint32_t samples() const { return s_; }
    /// Reads up to max_traces rows; returns the number read (0 at end).
    std::size_t next(std::size_t max_traces, std::vector<float>& out);
    [[nodiscard]] const std::vector<std::uint8_t>& plaintexts() const { return plaintexts_; }

private:
    std::ifstream in_;
    std::uint64_t n_ = 0;
    std::uint32_t s_ = 0;
    std::uint64_t pos_ = 0;
    std::vector<std::uint8_t> plaintexts_;
};

}  // namespace sclab
