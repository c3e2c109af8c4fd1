#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sclab {

enum class ClockMode { off, and_25, xor_50, or_75 };

std::string_view to_string(ClockMode m);
ClockMode parse_clock_mode(std::string_view s);  // off | and | xor | or
/// Nominal skip fraction of a mode (0, 0.25, 0.5, 0.75).
double nominal_skip(ClockMode m);

/// 8-bit XNOR LFSR, taps 8, 6, 5, 4; bit i holds stage i + 1 and the feedback
/// enters bit 0. State strings are written MSB first.
std::uint8_t lfsr8_next(std::uint8_t s, bool perturb = false);
std::uint8_t parse_state8(const std::string& bits);

/// Clock-edge randomizer. The skip decision reads the two LSBs of the current
/// state; the update is held whenever the next state would be all-ones.
class ClockRandomizer {
public:
    ClockRandomizer(std::uint8_t state, ClockMode mode, int perturb_interval = 0, int divider = 2);

    /// True when the next clock edge is skipped.
    [[nodiscard]] bool skip() const;
    static bool skip(std::uint8_t state, ClockMode mode);

    /// Advances one cycle. The perturb bit is used only when the cycle index
    /// hits a multiple of perturb_interval.
    void step(std::optional<bool> perturb = std::nullopt);

    /// Edge bitmap: bitmap[i] = 1 when cycle i delivers an edge. Perturb bits
    /// come from `perturb_source` when given.
    std::vector<std::uint8_t> schedule(std::size_t n_cycles,
                                       const std::function<bool()>& perturb_source = {});

    [[nodiscard]] std::uint8_t state() const { return state_; }
    [[nodiscard]] ClockMode mode() const { return mode_; }
    [[nodiscard]] int perturb_interval() const { return perturb_interval_; }
    [[nodiscard]] int divider() const { return divider_; }
    [[nodiscard]] std::uint64_t cycle() const { return cycle_; }

private:
    std::uint8_t state_;
    ClockMode mode_;
    int perturb_interval_;
    int divider_;
    std::uint64_t cycle_ = 0;
};

/// Folds the clock waveform into rows of `width` pixels, two pixels (low half,
/// high half) per cycle; skipped cycles stay low. Returns P5 PGM bytes with
/// white for 0 and black for 1.
std::string render_clock_image(const std::vector<std::uint8_t>& bitmap, std::size_t width);

/// Pixel values (0/1) of the same folding, row-major, padded with 0.
std::vector<std::uint8_t> clock_pixels(const std::vector<std::uint8_t>& bitmap, std::size_t width);

}  // namespace sclab
