#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sclab/gf2.hpp"

namespace sclab {

/// Free-running ring oscillator with Gaussian period jitter, sampled by an
/// ideal clock through a two-flop synchronizer (pure two-sample delay).
class JitterOscillator {
public:
    JitterOscillator(double period_mean, double period_std, std::uint64_t seed, double initial_phase = 0.0);

    /// Advances time by sample_period and returns the synchronizer output.
    bool sample_raw_bit(double sample_period);

    [[nodiscard]] double period_mean() const { return mean_; }
    [[nodiscard]] double period_std() const { return std_; }
    [[nodiscard]] double now() const { return now_; }

private:
    double draw_period();

    double mean_;
    double std_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double now_ = 0.0;
    double period_start_ = 0.0;  // start of the current period (output high in first half)
    double period_ = 0.0;
    std::array<bool, 2> pipe_{};
};

/// 43-bit Fibonacci LFSR in XNOR form, taps 43, 42, 38, 37. Bit i holds stage
/// i + 1; the feedback enters stage 1. All-ones is the lock-up state.
class Lfsr43 {
public:
    static constexpr int kBits = 43;
    static constexpr std::uint64_t kMask = (std::uint64_t{1} << kBits) - 1;

    explicit Lfsr43(std::uint64_t state);
    void step(std::optional<bool> perturb = std::nullopt);
    [[nodiscard]] std::uint64_t state() const { return s_; }
    [[nodiscard]] bool bit(int i) const { return (s_ >> i) & 1U; }

    /// Update as an affine map in homogeneous coordinates (bit 43 is the constant 1).
    static Gf2Matrix transition_matrix();

private:
    std::uint64_t s_;
};

/// 37-cell hybrid cellular automaton: rule 90 everywhere, rule 150 at the ninth cell
/// (index 8), null boundaries. All-zeros is the fixed point.
class Casr37 {
public:
    static constexpr int kCells = 37;
    static constexpr int kRule150Cell = 8;  // the only interior choice besides 28 with order 2^37 - 1
    static constexpr std::uint64_t kMask = (std::uint64_t{1} << kCells) - 1;

    explicit Casr37(std::uint64_t state);
    void step(std::optional<bool> perturb = std::nullopt);
    [[nodiscard]] std::uint64_t state() const { return s_; }
    [[nodiscard]] bool bit(int i) const { return (s_ >> i) & 1U; }

    static Gf2Matrix transition_matrix();

private:
    std::uint64_t s_;
};

/// Generic hybrid 90/150 step for tests of small automata.
std::uint64_t ca_step(std::uint64_t s, int cells, std::uint64_t rule150_mask);

struct XorPair {
    int lfsr_bit;
    int casr_bit;
    bool operator==(const XorPair&) const = default;
};

constexpr int kRngOutputs = 243;
using RngWord = std::bitset<kRngOutputs>;

/// Unique (lfsr, casr) connection pairs, drawn once from a design-time seed.
std::vector<XorPair> make_xor_pairs(std::uint64_t design_seed, int count = kRngOutputs);

/// Combiner of the two registers: bit i = lfsr[a_i] ^ casr[b_i].
RngWord rng_output(std::uint64_t lfsr_state, std::uint64_t casr_state, const std::vector<XorPair>& pairs);

/// Post-processed generator: LFSR43 and CASR37, perturbed by raw bits, combined
/// through the XOR network into 243 output bits per step.
class RngCore {
public:
    RngCore(std::uint64_t lfsr_state, std::uint64_t casr_state, std::vector<XorPair> pairs);

    /// Fills both registers from raw bits (LFSR first, LSB first), redrawing a
    /// register whose candidate is its forbidden state.
    static RngCore power_on(const std::function<bool()>& raw, std::vector<XorPair> pairs);

    /// One system clock step. The raw bit is XORed into the LFSR feedback and
    /// into CASR cells 0 and 36 before the update.
    void step(std::optional<bool> perturb = std::nullopt);
    [[nodiscard]] RngWord output() const;

    [[nodiscard]] const Lfsr43& lfsr() const { return lfsr_; }
    [[nodiscard]] const Casr37& casr() const { return casr_; }
    [[nodiscard]] const std::vector<XorPair>& pairs() const { return pairs_; }

private:
    Lfsr43 lfsr_;
    Casr37 casr_;
    std::vector<XorPair> pairs_;
};

struct RngStreamConfig {
    std::uint64_t seed = 1;             // raw source and oscillator seed
    std::uint64_t design_seed = 0x243;  // XOR pairing table
    double period_mean = 2.8e-9;        // ring oscillator period
    double period_std = 15.7e-12;       // per-period jitter
    double sample_freq = 3.4e6;         // raw sampling clock
    int perturb_every = 0;              // steps between raw-bit perturbations (0 = never)
    int output_bit = 0;                 // which of the 243 outputs feeds the stream
};

/// Raw synchronizer output of the jitter model.
std::vector<std::uint8_t> raw_bitstream(const RngStreamConfig& cfg, std::size_t n);

/// Post-processed stream: one selected output bit per step.
std::vector<std::uint8_t> rng_bitstream(const RngStreamConfig& cfg, std::size_t n);

/// Packed little-endian bit file (bit i -> byte i/8, bit i%8) plus JSON sidecar.
void write_bitstream(const std::string& path, const std::vector<std::uint8_t>& bits,
                     const std::string& sidecar_json);
std::vector<std::uint8_t> read_bitstream(const std::string& path, std::size_t n_bits);

}  // namespace sclab
