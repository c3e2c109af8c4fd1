#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "sclab/clock.hpp"
#include "sclab/mask.hpp"
#include "sclab/sim.hpp"
#include "sclab/trace.hpp"

namespace sclab {

struct Countermeasures {
    bool mask = false;
    bool ddl = false;
    ClockMode clock_mode = ClockMode::off;
    int perturb_interval = 32;
    bool memprot = true;
    bool address_expansion = false;

    bool operator==(const Countermeasures&) const = default;
};

/// Everything that fixes a trace campaign. The victim program per trace:
/// `lead_cycles` cycles of a fixed dummy byte sequence, then the plaintext held
/// on the input for `hold_cycles` cycles (the first also clears the output
/// register), then dummy bytes again for `tail_cycles` + 2 cycles. The output
/// register takes HW(S(p ^ k)) at leak_cycle(), when the S-box input is already
/// stable. Every cycle writes the output byte to memory.
struct CampaignConfig {
    std::string preset = "ncm";
    std::string victim = "victim_round";  // builtin name or netlist path
    Countermeasures cm;
    bool glitches = true;  // glitchy vs zero_delay simulation for single-rail variants
    int delay_min = 1;
    int delay_max = 4;
    bool inertial_delays = true;
    LeakModel leak;
    std::size_t n_traces = 1000;
    std::uint64_t seed = 1;
    std::uint8_t key = 0x2B;
    int lead_cycles = 16;
    int hold_cycles = 2;  // >= 2
    int tail_cycles = 2;
    unsigned workers = 0;  // 0 = hardware concurrency

    void validate() const;
    [[nodiscard]] nlohmann::ordered_json to_json() const;
    static CampaignConfig from_json(const nlohmann::json& j, CampaignConfig base);
    static CampaignConfig from_json(const nlohmann::json& j);
    /// Cycle (in device cycles) whose register update carries HW(S(p ^ k)).
    [[nodiscard]] int leak_cycle() const { return lead_cycles + 2; }
    [[nodiscard]] int program_cycles() const { return lead_cycles + hold_cycles + 2 + tail_cycles; }
};

/// Presets ncm, bm, bm-ddl. They differ only in countermeasure fields.
CampaignConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Reusable campaign generator; traces are a pure function of (config, index).
class Campaign {
public:
    explicit Campaign(CampaignConfig cfg);
    ~Campaign();
    Campaign(const Campaign&) = delete;
    Campaign& operator=(const Campaign&) = delete;

    [[nodiscard]] const CampaignConfig& config() const { return cfg_; }
    [[nodiscard]] std::uint32_t samples() const { return samples_; }
    [[nodiscard]] std::size_t slots() const { return slots_; }
    [[nodiscard]] double baseline() const { return baseline_; }
    [[nodiscard]] std::size_t registers() const;
    [[nodiscard]] std::size_t split_bits_per_cycle() const;

    /// Traces [begin, begin + count) into `data` (count x samples) and `meta`.
    void generate(std::size_t begin, std::size_t count, std::vector<float>& data, std::vector<TraceMeta>& meta,
                  unsigned workers = 0) const;

    /// All cfg.n_traces traces.
    [[nodiscard]] TraceSet run() const;

    /// Activity of one trace without noise, for inspection and tests.
    struct Detail {
        ToggleReport report;
        std::vector<std::uint32_t> bus_hw;
        std::vector<std::uint8_t> schedule;
        std::vector<std::uint8_t> outputs;  // unmasked output byte per cycle
        TraceMeta meta;
    };
    [[nodiscard]] Detail detail(std::size_t index) const;

private:
    struct Impl;
    struct Worker;
    void trace(Worker& w, std::size_t index, float* out, TraceMeta& meta, Detail* detail) const;

    CampaignConfig cfg_;
    std::unique_ptr<Impl> impl_;
    std::size_t slots_ = 0;
    std::uint32_t samples_ = 0;
    double baseline_ = 0.0;
};

TraceSet gen_campaign(const CampaignConfig& cfg);

}  // namespace sclab
