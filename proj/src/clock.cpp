#include "sclab/clock.hpp"

#include "sclab/error.hpp"

namespace sclab {

std::string_view to_string(ClockMode m) {
    switch (m) {
        case ClockMode::off: return "off";
        case ClockMode::and_25: return "and";
        case ClockMode::xor_50: return "xor";
        case ClockMode::or_75: return "or";
    }
    return "?";
}

ClockMode parse_clock_mode(std::string_view s) {
    if (s == "off") return ClockMode::off;
    if (s == "and" || s == "25") return ClockMode::and_25;
    if (s == "xor" || s == "50") return ClockMode::xor_50;
    if (s == "or" || s == "75") return ClockMode::or_75;
    throw ConfigError("unknown clock mode '" + std::string(s) + "' (off|and|xor|or)");
}

double nominal_skip(ClockMode m) {
    switch (m) {
        case ClockMode::off: return 0.0;
        case ClockMode::and_25: return 0.25;
        case ClockMode::xor_50: return 0.5;
        case ClockMode::or_75: return 0.75;
    }
    return 0.0;
}

std::uint8_t lfsr8_next(std::uint8_t s, bool perturb) {
    unsigned f = ((s >> 7) ^ (s >> 5) ^ (s >> 4) ^ (s >> 3) ^ 1U) & 1U;
    f ^= perturb ? 1U : 0U;
    return static_cast<std::uint8_t>((s << 1) | f);
}

std::uint8_t parse_state8(const std::string& bits) {
    if (bits.size() != 8) throw ConfigError("LFSR8 state needs 8 bits");
    unsigned v = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw ConfigError("LFSR8 state must be binary");
        v = v << 1 | static_cast<unsigned>(c - '0');
    }
    return static_cast<std::uint8_t>(v);
}

ClockRandomizer::ClockRandomizer(std::uint8_t state, ClockMode mode, int perturb_interval, int divider)
    : state_(state), mode_(mode), perturb_interval_(perturb_interval), divider_(divider) {
    if (state == 0xFF) throw ConfigError("LFSR8 state must not be all-ones");
    if (divider < 2 || divider > 256) throw ConfigError("clock divider must be in [2, 256]");
    if (perturb_interval < 0) throw ConfigError("perturb_interval must be >= 0");
}

bool ClockRandomizer::skip(std::uint8_t s, ClockMode mode) {
    const bool b0 = s & 1U, b1 = (s >> 1) & 1U;
    switch (mode) {
        case ClockMode::off: return false;
        case ClockMode::and_25: return b0 && b1;
        case ClockMode::xor_50: return b0 != b1;
        case ClockMode::or_75: return b0 || b1;
    }
    return false;
}

bool ClockRandomizer::skip() const { return skip(state_, mode_); }

void ClockRandomizer::step(std::optional<bool> perturb) {
    ++cycle_;
    const bool due = perturb_interval_ > 0 && cycle_ % static_cast<std::uint64_t>(perturb_interval_) == 0;
    const std::uint8_t next = lfsr8_next(state_, due && perturb.value_or(false));
    if (next != 0xFF) state_ = next;
}

std::vector<std::uint8_t> ClockRandomizer::schedule(std::size_t n_cycles,
                                                    const std::function<bool()>& perturb_source) {
    std::vector<std::uint8_t> bitmap(n_cycles);
    for (std::size_t i = 0; i < n_cycles; ++i) {
        bitmap[i] = skip() ? 0 : 1;
        const bool due = perturb_interval_ > 0 &&
                         (cycle_ + 1) % static_cast<std::uint64_t>(perturb_interval_) == 0;
        std::optional<bool> p;
        if (due && perturb_source) p = perturb_source();
        step(p);
    }
    return bitmap;
}

std::vector<std::uint8_t> clock_pixels(const std::vector<std::uint8_t>& bitmap, std::size_t width) {
    if (width == 0) throw ConfigError("image width must be >= 1");
    const std::size_t n = bitmap.size() * 2;
    const std::size_t rows = (n + width - 1) / width;
    std::vector<std::uint8_t> px(rows * width, 0);
    for (std::size_t c = 0; c < bitmap.size(); ++c) px[2 * c + 1] = bitmap[c] ? 1 : 0;
    return px;
}

std::string render_clock_image(const std::vector<std::uint8_t>& bitmap, std::size_t width) {
    const auto px = clock_pixels(bitmap, width);
    const std::size_t rows = px.size() / width;
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(rows) + "\n255\n";
    out.reserve(out.size() + px.size());
    for (auto p : px) out.push_back(static_cast<char>(p ? 0 : 255));
    return out;
}

}  // namespace sclab
