#include "sclab/rng.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "sclab/error.hpp"
#include "sclab/seed.hpp"

namespace sclab {

JitterOscillator::JitterOscillator(double period_mean, double period_std, std::uint64_t seed,
                                   double initial_phase)
    : mean_(period_mean), std_(period_std), rng_(seed), now_(initial_phase) {
    if (!(period_mean > 0.0) || period_std < 0.0) throw ConfigError("invalid oscillator period");
    period_ = draw_period();
}

double JitterOscillator::draw_period() {
    if (std_ == 0.0) return mean_;
    for (;;) {
        const double p = mean_ + std_ * normal_(rng_);
        if (p > 0.0) return p;
    }
}

bool JitterOscillator::sample_raw_bit(double sample_period) {
    if (!(sample_period > 0.0)) throw ConfigError("sample period must be positive");
    now_ += sample_period;
    while (now_ >= period_start_ + period_) {
        period_start_ += period_;
        // Sum of k independent periods is Gaussian; jump whole periods while
        // staying well short of the sampling instant.
        const double rem = now_ - period_start_;
        const double periods = rem / mean_;
        const double margin = 4.0 + 10.0 * std_ * std::sqrt(periods) / mean_;
        const auto k = static_cast<std::int64_t>(periods - margin);
        if (k > 4) {
            const double kk = static_cast<double>(k);
            period_start_ += kk * mean_ + (std_ == 0.0 ? 0.0 : std_ * std::sqrt(kk) * normal_(rng_));
        }
        period_ = draw_period();
    }
    const bool level = (now_ - period_start_) >= 0.5 * period_;
    const bool out = pipe_[1];
    pipe_[1] = pipe_[0];
    pipe_[0] = level;
    return out;
}

Lfsr43::Lfsr43(std::uint64_t state) : s_(state & kMask) {
    if (s_ == kMask) throw ConfigError("LFSR43 state must not be all-ones");
}

void Lfsr43::step(std::optional<bool> perturb) {
    std::uint64_t f = ((s_ >> 42) ^ (s_ >> 41) ^ (s_ >> 37) ^ (s_ >> 36) ^ 1U) & 1U;
    if (perturb) f ^= static_cast<std::uint64_t>(*perturb);
    const std::uint64_t next = ((s_ << 1) | f) & kMask;
    if (next != kMask) s_ = next;  // lock-up state is never entered
}

Gf2Matrix Lfsr43::transition_matrix() {
    Gf2Matrix m(kBits + 1);
    for (int tap : {42, 41, 37, 36}) m.set(0, static_cast<std::size_t>(tap), true);
    m.set(0, kBits, true);
    for (int i = 1; i < kBits; ++i) m.set(static_cast<std::size_t>(i), static_cast<std::size_t>(i - 1), true);
    m.set(kBits, kBits, true);
    return m;
}

std::uint64_t ca_step(std::uint64_t s, int cells, std::uint64_t rule150_mask) {
    const std::uint64_t mask = cells >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << cells) - 1;
    return ((s << 1) ^ (s >> 1) ^ (s & rule150_mask)) & mask;
}

Casr37::Casr37(std::uint64_t state) : s_(state & kMask) {
    if (s_ == 0) throw ConfigError("CASR37 state must not be all-zeros");
}

void Casr37::step(std::optional<bool> perturb) {
    std::uint64_t s = s_;
    if (perturb && *perturb) s ^= (std::uint64_t{1} | std::uint64_t{1} << (kCells - 1));
    const std::uint64_t next = ca_step(s, kCells, std::uint64_t{1} << kRule150Cell);
    if (next != 0) s_ = next;
}

Gf2Matrix Casr37::transition_matrix() {
    Gf2Matrix m(kCells);
    for (int i = 0; i < kCells; ++i) {
        const auto r = static_cast<std::size_t>(i);
        if (i > 0) m.set(r, r - 1, true);
        if (i + 1 < kCells) m.set(r, r + 1, true);
        if (i == kRule150Cell) m.set(r, r, true);
    }
    return m;
}

std::vector<XorPair> make_xor_pairs(std::uint64_t design_seed, int count) {
    constexpr int kAll = Lfsr43::kBits * Casr37::kCells;
    if (count < 1 || count > kAll) throw ConfigError("XOR network supports 1.." + std::to_string(kAll) + " outputs");
    std::vector<XorPair> all;
    all.reserve(kAll);
    for (int a = 0; a < Lfsr43::kBits; ++a)
        for (int b = 0; b < Casr37::kCells; ++b) all.push_back({a, b});
    std::mt19937_64 rng(design_seed);
    for (std::size_t i = all.size() - 1; i > 0; --i) std::swap(all[i], all[rng() % (i + 1)]);
    all.resize(static_cast<std::size_t>(count));
    return all;
}

RngWord rng_output(std::uint64_t lfsr_state, std::uint64_t casr_state, const std::vector<XorPair>& pairs) {
    RngWord w;
    for (std::size_t i = 0; i < pairs.size() && i < w.size(); ++i)
        w[i] = (((lfsr_state >> pairs[i].lfsr_bit) ^ (casr_state >> pairs[i].casr_bit)) & 1U) != 0;
    return w;
}

RngCore::RngCore(std::uint64_t lfsr_state, std::uint64_t casr_state, std::vector<XorPair> pairs)
    : lfsr_(lfsr_state), casr_(casr_state), pairs_(std::move(pairs)) {}

RngCore RngCore::power_on(const std::function<bool()>& raw, std::vector<XorPair> pairs) {
    auto draw = [&](int bits) {
        std::uint64_t v = 0;
        for (int i = 0; i < bits; ++i) v |= static_cast<std::uint64_t>(raw()) << i;
        return v;
    };
    std::uint64_t l = 0;
    do l = draw(Lfsr43::kBits);
    while (l == Lfsr43::kMask);
    std::uint64_t c = 0;
    do c = draw(Casr37::kCells);
    while (c == 0);
    return RngCore(l, c, std::move(pairs));
}

void RngCore::step(std::optional<bool> perturb) {
    lfsr_.step(perturb);
    casr_.step(perturb);
}

RngWord RngCore::output() const { return rng_output(lfsr_.state(), casr_.state(), pairs_); }

std::vector<std::uint8_t> raw_bitstream(const RngStreamConfig& cfg, std::size_t n) {
    if (!(cfg.sample_freq > 0.0)) throw ConfigError("sample_freq must be positive");
    JitterOscillator osc(cfg.period_mean, cfg.period_std, derive_seed(cfg.seed, "oscillator"),
                         0.25 * cfg.period_mean);
    const double dt = 1.0 / cfg.sample_freq;
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = osc.sample_raw_bit(dt) ? 1 : 0;
    return bits;
}

std::vector<std::uint8_t> rng_bitstream(const RngStreamConfig& cfg, std::size_t n) {
    if (cfg.output_bit < 0 || cfg.output_bit >= kRngOutputs) throw ConfigError("output_bit out of range");
    JitterOscillator osc(cfg.period_mean, cfg.period_std, derive_seed(cfg.seed, "oscillator"),
                         0.25 * cfg.period_mean);
    const double dt = 1.0 / cfg.sample_freq;
    auto raw = [&] { return osc.sample_raw_bit(dt); };
    RngCore core = RngCore::power_on(raw, make_xor_pairs(cfg.design_seed));
    const XorPair sel = core.pairs()[static_cast<std::size_t>(cfg.output_bit)];
    std::vector<std::uint8_t> bits(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool perturb = cfg.perturb_every > 0 && i % static_cast<std::size_t>(cfg.perturb_every) == 0;
        core.step(perturb ? std::optional<bool>(raw()) : std::nullopt);
        bits[i] = core.lfsr().bit(sel.lfsr_bit) ^ core.casr().bit(sel.casr_bit);
    }
    return bits;
}

void write_bitstream(const std::string& path, const std::vector<std::uint8_t>& bits,
                     const std::string& sidecar_json) {
    std::vector<char> packed((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) packed[i / 8] = static_cast<char>(packed[i / 8] | (1 << (i % 8)));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.write(packed.data(), static_cast<std::streamsize>(packed.size()));
    std::ofstream side(path + ".json");
    side << sidecar_json << '\n';
}

std::vector<std::uint8_t> read_bitstream(const std::string& path, std::size_t n_bits) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "'");
    std::vector<char> packed((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (packed.size() * 8 < n_bits) throw DataError("bitstream '" + path + "' is truncated");
    std::vector<std::uint8_t> bits(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) bits[i] = (packed[i / 8] >> (i % 8)) & 1;
    return bits;
}

}  // namespace sclab
