#include "sclab/rng.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <set>

#include "sclab/error.hpp"
#include "sclab/gf2.hpp"
#include "sclab/randtests.hpp"

namespace sclab {
namespace {

// Bit-per-element reference registers. lfsr[k] is stage k + 1.
struct RefLfsr {
    std::array<int, 43> s{};
    void step(int perturb) {
        const int f = 1 ^ s[42] ^ s[41] ^ s[37] ^ s[36] ^ perturb;
        std::array<int, 43> n{};
        n[0] = f;
        for (int k = 1; k < 43; ++k) n[k] = s[k - 1];
        bool ones = true;
        for (int v : n) ones = ones && v;
        if (!ones) s = n;
    }
};

struct RefCasr {
    std::array<int, 37> c{};
    void step(int perturb) {
        std::array<int, 37> x = c;
        x[0] ^= perturb;
        x[36] ^= perturb;
        std::array<int, 37> n{};
        for (int i = 0; i < 37; ++i) {
            const int l = i > 0 ? x[i - 1] : 0, r = i < 36 ? x[i + 1] : 0;
            n[i] = l ^ r ^ (i == 8 ? x[i] : 0);  // ninth cell uses rule 150
        }
        bool zero = true;
        for (int v : n) zero = zero && !v;
        if (!zero) c = n;
    }
};

template <std::size_t N>
std::uint64_t pack(const std::array<int, N>& a) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < N; ++i) v |= static_cast<std::uint64_t>(a[i]) << i;
    return v;
}

TEST(Gf2, FactorizationsOfRegisterPeriods) {
    // 2^43 - 1 = 431 * 9719 * 2099863 and 2^37 - 1 = 223 * 616318177.
    EXPECT_EQ(factorize((1ULL << 43) - 1), (std::vector<std::uint64_t>{431, 9719, 2099863}));
    EXPECT_EQ(factorize((1ULL << 37) - 1), (std::vector<std::uint64_t>{223, 616318177}));
    EXPECT_EQ(431ULL * 9719 * 2099863, (1ULL << 43) - 1);
    EXPECT_EQ(223ULL * 616318177, (1ULL << 37) - 1);
    EXPECT_EQ(factorize(255), (std::vector<std::uint64_t>{3, 5, 17}));
    EXPECT_TRUE(is_prime(2099863));
    EXPECT_FALSE(is_prime(1));
}

TEST(Gf2, MatrixBasics) {
    Gf2Matrix m(3);
    m.set(0, 1, true);
    m.set(1, 2, true);
    m.set(2, 0, true);  // 3-cycle permutation
    EXPECT_TRUE(has_multiplicative_order(m, 3));
    EXPECT_FALSE(has_multiplicative_order(m, 6));
    EXPECT_EQ(m.pow(3), Gf2Matrix::identity(3));
    EXPECT_EQ(m.apply(0b001), 0b100u);
}

TEST(Lfsr43, ZeroStateShiftsInOne) {
    Lfsr43 l(0);
    l.step();
    EXPECT_EQ(l.state(), 1u);
}

TEST(Lfsr43, ZeroPerturbationIsNoPerturbation) {
    Lfsr43 a(0x123456789AULL), b(0x123456789AULL);
    for (int i = 0; i < 100; ++i) {
        a.step(false);
        b.step();
    }
    EXPECT_EQ(a.state(), b.state());
}

TEST(Lfsr43, RejectsLockUpState) { EXPECT_THROW(Lfsr43(Lfsr43::kMask), ConfigError); }

TEST(Lfsr43, MatrixMatchesStepAndHasFullOrder) {
    const Gf2Matrix m = Lfsr43::transition_matrix();
    Lfsr43 l(0x5A5A5A5A5ULL);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t x = l.state() | (1ULL << 43);
        l.step();
        EXPECT_EQ(m.apply(x), l.state() | (1ULL << 43));
    }
    EXPECT_TRUE(has_multiplicative_order(m, (1ULL << 43) - 1));
}

TEST(Casr37, RuleNinetySpreadsLoneOne) {
    EXPECT_EQ(ca_step(0b00100, 5, 0), 0b01010u);
    EXPECT_EQ(ca_step(0, 5, 0b11111), 0u);
    EXPECT_THROW(Casr37(0), ConfigError);
}

TEST(Casr37, MatrixMatchesStepAndHasFullOrder) {
    const Gf2Matrix m = Casr37::transition_matrix();
    Casr37 c(0x1F00F00F1ULL);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t x = c.state();
        c.step();
        EXPECT_EQ(m.apply(x), c.state());
    }
    EXPECT_TRUE(has_multiplicative_order(m, (1ULL << 37) - 1));
}

TEST(Combiner, ZeroLfsrSelectsCasrBits) {
    const auto pairs = make_xor_pairs(0x243);
    const std::uint64_t c = 0x0ABCDEF123ULL & Casr37::kMask;
    const RngWord w = rng_output(0, c, pairs);
    for (std::size_t i = 0; i < pairs.size(); ++i) EXPECT_EQ(w[i], ((c >> pairs[i].casr_bit) & 1) != 0);
}

TEST(Combiner, PairingTableDeterministicAndUnique) {
    const auto a = make_xor_pairs(7), b = make_xor_pairs(7);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), static_cast<std::size_t>(kRngOutputs));
    std::set<std::pair<int, int>> seen;
    for (const auto& p : a) seen.insert({p.lfsr_bit, p.casr_bit});
    EXPECT_EQ(seen.size(), a.size());
    EXPECT_NE(make_xor_pairs(8), a);
}

TEST(Combiner, IsLinear) {
    const auto pairs = make_xor_pairs(3);
    const std::uint64_t l1 = 0x1234567ULL, l2 = 0x7654321ABCULL, c1 = 0x99887766ULL, c2 = 0x1234ULL;
    EXPECT_EQ(rng_output(l1 ^ l2, c1 ^ c2, pairs), rng_output(l1, c1, pairs) ^ rng_output(l2, c2, pairs));
}

TEST(RngCore, PowerOnSkipsForbiddenStates) {
    // First 43 raw bits are all ones (forbidden), the next 43 are zeros; then
    // 37 zeros (forbidden CASR), then a single one.
    std::vector<bool> raw(43, true);
    raw.insert(raw.end(), 43, false);
    raw.insert(raw.end(), 37, false);
    raw.push_back(true);
    raw.insert(raw.end(), 36, false);
    std::size_t i = 0;
    const RngCore core = RngCore::power_on([&] { return static_cast<bool>(raw.at(i++)); }, make_xor_pairs(1));
    EXPECT_EQ(core.lfsr().state(), 0u);
    EXPECT_EQ(core.casr().state(), 1u);
}

TEST(RngCore, MatchesScalarReplay) {
    std::mt19937_64 src(77);
    std::vector<bool> raw(80 + 100);
    for (auto&& b : raw) b = src() & 1;
    std::size_t i = 0;
    auto next = [&] { return static_cast<bool>(raw[i++]); };
    RngCore core = RngCore::power_on(next, make_xor_pairs(5));
    RefLfsr l;
    RefCasr c;
    for (int k = 0; k < 43; ++k) l.s[k] = raw[k];
    for (int k = 0; k < 37; ++k) c.c[k] = raw[43 + k];
    ASSERT_EQ(core.lfsr().state(), pack(l.s));
    ASSERT_EQ(core.casr().state(), pack(c.c));
    for (int step = 0; step < 100; ++step) {
        const bool p = next();
        core.step(p);
        l.step(p);
        c.step(p);
        ASSERT_EQ(core.lfsr().state(), pack(l.s)) << step;
        ASSERT_EQ(core.casr().state(), pack(c.c)) << step;
    }
}

TEST(RngCore, PerturbationDivergesWithinOneStep) {
    RngCore a(0x1111, 0x2222, make_xor_pairs(1)), b(0x1111, 0x2222, make_xor_pairs(1));
    a.step(false);
    b.step(true);
    EXPECT_NE(a.lfsr().state(), b.lfsr().state());
    EXPECT_NE(a.casr().state(), b.casr().state());
    EXPECT_NE(a.output(), b.output());
}

TEST(RngCore, OutputStreamIsBalanced) {
    RngStreamConfig cfg;
    cfg.seed = 21;
    const auto bits = rng_bitstream(cfg, 1000000);
    EXPECT_GE(monobit(bits).p(), kSignificance);
}

TEST(Jitter, LockedOscillatorGivesConstantBits) {
    JitterOscillator o(1.0, 0.0, 1, 0.1);
    std::vector<bool> bits;
    for (int i = 0; i < 50; ++i) bits.push_back(o.sample_raw_bit(1.0));
    for (std::size_t i = 3; i < bits.size(); ++i) EXPECT_EQ(bits[i], bits[2]);
}

TEST(Jitter, HalfPeriodSamplingAlternates) {
    JitterOscillator o(1.0, 0.0, 1, 0.1);
    std::vector<bool> bits;
    for (int i = 0; i < 50; ++i) bits.push_back(o.sample_raw_bit(0.5));
    for (std::size_t i = 3; i < bits.size(); ++i) EXPECT_NE(bits[i], bits[i - 1]);
}

TEST(Jitter, SynchronizerDelaysTwoSamples) {
    JitterOscillator o(1.0, 0.0, 1, 0.1);
    EXPECT_FALSE(o.sample_raw_bit(0.5));
    EXPECT_FALSE(o.sample_raw_bit(0.5));
}

TEST(Jitter, StreamsAreSeedDeterministic) {
    RngStreamConfig cfg;
    cfg.seed = 4;
    EXPECT_EQ(raw_bitstream(cfg, 5000), raw_bitstream(cfg, 5000));
    EXPECT_EQ(rng_bitstream(cfg, 5000), rng_bitstream(cfg, 5000));
    cfg.sample_freq = 0;
    EXPECT_THROW(raw_bitstream(cfg, 10), ConfigError);
}

TEST(Bitstream, FileRoundTrip) {
    const auto path = (std::filesystem::temp_directory_path() / "sclab_bits.bin").string();
    std::vector<std::uint8_t> bits(1001);
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (i * 7 + i / 3) & 1;
    write_bitstream(path, bits, "{}");
    EXPECT_EQ(read_bitstream(path, bits.size()), bits);
    EXPECT_THROW(read_bitstream(path, 2000), DataError);
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}

}  // namespace
}  // namespace sclab
