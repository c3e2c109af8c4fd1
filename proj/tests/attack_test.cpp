#include "sclab/attack.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "oracles.hpp"

namespace sclab {
namespace {

int popcount_loop(std::uint8_t v) {
    int c = 0;
    for (; v; v >>= 1) c += v & 1;
    return c;
}

// Traces with `s` samples; sample `leak` carries HW(S(p ^ key)) * gain.
TraceSet synthetic(std::size_t n, std::size_t s, std::size_t leak, std::uint8_t key, double gain, double noise,
                   std::uint64_t seed) {
    const auto sbox = oracle::aes_sbox();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    TraceSet ts;
    ts.samples = static_cast<std::uint32_t>(s);
    ts.meta.resize(n);
    ts.data.resize(n * s);
    for (std::size_t t = 0; t < n; ++t) {
        ts.meta[t].plaintext = static_cast<std::uint8_t>(rng());
        for (std::size_t j = 0; j < s; ++j) ts.data[t * s + j] = static_cast<float>(noise * d(rng) + 10.0);
        ts.data[t * s + leak] += static_cast<float>(gain * popcount_loop(sbox[ts.meta[t].plaintext ^ key]));
    }
    return ts;
}

// Two-pass Pearson correlation of hypothesis k against sample j.
double pearson(const TraceSet& ts, std::size_t j, std::uint8_t k, std::size_t n) {
    const auto sbox = oracle::aes_sbox();
    double mx = 0, my = 0;
    for (std::size_t t = 0; t < n; ++t) {
        mx += popcount_loop(sbox[ts.meta[t].plaintext ^ k]);
        my += ts.data[t * ts.samples + j];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double x = popcount_loop(sbox[ts.meta[t].plaintext ^ k]) - mx;
        const double y = ts.data[t * ts.samples + j] - my;
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    return sxy / std::sqrt(sxx * syy);
}

TEST(Leakage, WeightsAndDistances) {
    EXPECT_EQ(hw(0x00), 0);
    EXPECT_EQ(hw(0xAF), 6);
    EXPECT_EQ(hd(0x5C, 0x5C), 0);
    EXPECT_EQ(hd(0x0F, 0xF0), 8);
    Hypothesis h{LeakageModel::hamming_distance, 0x63};
    EXPECT_EQ(h(0x00, 0x00), 0);
}

TEST(Leakage, SboxTableMatchesFieldOracle) {
    const auto t = oracle::aes_sbox();
    for (int x = 0; x < 256; ++x) EXPECT_EQ(kAesSbox[static_cast<std::size_t>(x)], t[static_cast<std::size_t>(x)]);
}

TEST(Cpa, NoiselessLeakGivesUnitCorrelation) {
    const TraceSet ts = synthetic(500, 6, 3, 0x2B, 1.0, 0.0, 1);
    CpaAccumulator acc(6);
    acc.add_block(ts.data.data(), ts.plaintexts().data(), ts.size());
    std::size_t degenerate = 0;
    const auto c = acc.correlations(&degenerate);
    EXPECT_NEAR(c[0x2B * 6 + 3], 1.0, 1e-9);
    EXPECT_EQ(degenerate, 5u);  // the other samples are constant
    EXPECT_EQ(c[0x2B * 6 + 0], 0.0);
    const auto m = acc.max_abs();
    EXPECT_EQ(key_rank(m, 0x2B), 1);
}

TEST(Cpa, MatchesTwoPassPearson) {
    const TraceSet ts = synthetic(3000, 5, 2, 0x7E, 0.5, 2.0, 2);
    CpaAccumulator acc(5);
    acc.add_block(ts.data.data(), ts.plaintexts().data(), ts.size());
    const auto c = acc.correlations();
    for (int k : {0x00, 0x7E, 0xC3}) {
        for (std::size_t j = 0; j < 5; ++j)
            EXPECT_NEAR(c[static_cast<std::size_t>(k) * 5 + j], pearson(ts, j, static_cast<std::uint8_t>(k), ts.size()),
                        1e-6);
    }
}

TEST(Cpa, MergeEqualsSinglePass) {
    const TraceSet ts = synthetic(2000, 4, 1, 0x10, 0.3, 1.0, 3);
    const auto p = ts.plaintexts();
    CpaAccumulator all(4), a(4), b(4);
    all.add_block(ts.data.data(), p.data(), 2000);
    a.add_block(ts.data.data(), p.data(), 700);
    b.add_block(ts.data.data() + 700 * 4, p.data() + 700, 1300);
    a.merge(b);
    EXPECT_EQ(a.count(), 2000u);
    const auto x = all.correlations(), y = a.correlations();
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], y[i], 1e-9);
    EXPECT_THROW(a.merge(CpaAccumulator(3)), DataError);
}

TEST(Cpa, KeyRelabelingPermutesRows) {
    TraceSet ts = synthetic(2000, 3, 0, 0x44, 1.0, 1.0, 4);
    CpaAccumulator a(3), b(3);
    a.add_block(ts.data.data(), ts.plaintexts().data(), ts.size());
    const std::uint8_t delta = 0x9A;
    auto p = ts.plaintexts();
    for (auto& x : p) x ^= delta;
    b.add_block(ts.data.data(), p.data(), ts.size());
    const auto ca = a.correlations(), cb = b.correlations();
    for (std::size_t k = 0; k < 256; ++k)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(ca[k * 3 + j], cb[(k ^ delta) * 3 + j], 1e-9);
    EXPECT_EQ(key_rank(b.max_abs(), 0x44 ^ delta), 1);
}

TEST(Cpa, PureNoiseHasNoDisclosure) {
    const TraceSet ts = synthetic(20000, 4, 0, 0x01, 0.0, 1.0, 5);
    const auto r = cpa(ts, std::uint8_t{0x01}, log_checkpoints(100, ts.size()));
    EXPECT_FALSE(r.mtd.has_value());
    for (double v : r.checkpoints.back().max_corr) EXPECT_LT(v, 5.0 / std::sqrt(20000.0));
}

TEST(Cpa, StrongLeakDisclosesEarly) {
    const TraceSet ts = synthetic(5000, 8, 5, 0xA7, 1.0, 2.0, 6);
    const auto r = cpa(ts, std::uint8_t{0xA7}, log_checkpoints(100, ts.size()), {});
    ASSERT_TRUE(r.mtd.has_value());
    EXPECT_LT(*r.mtd, 1000u);
    EXPECT_EQ(r.best_candidate(), 0xA7);
    EXPECT_NE(r.to_csv().find("candidate"), std::string::npos);
    EXPECT_NE(r.rank_curve_csv().find("rank"), std::string::npos);
}

TEST(Cpa, StreamingFileEqualsInMemory) {
    const TraceSet ts = synthetic(3000, 6, 2, 0x31, 0.4, 1.0, 7);
    const auto path = (std::filesystem::temp_directory_path() / "sclab_cpa.mltr").string();
    write_traces(path, ts);
    const auto grid = log_checkpoints(100, ts.size());
    const auto a = cpa(ts, std::uint8_t{0x31}, grid), b = cpa_file(path, std::uint8_t{0x31}, grid);
    ASSERT_EQ(a.checkpoints.size(), b.checkpoints.size());
    for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
        EXPECT_EQ(a.checkpoints[i].rank, b.checkpoints[i].rank);
        for (std::size_t k = 0; k < 256; ++k)
            EXPECT_NEAR(a.checkpoints[i].max_corr[k], b.checkpoints[i].max_corr[k], 1e-9);
    }
    EXPECT_EQ(a.mtd, b.mtd);
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}

TEST(Cpa, TooFewTraces) {
    TraceSet ts = synthetic(1, 2, 0, 0, 1.0, 1.0, 8);
    EXPECT_THROW(cpa(ts, std::nullopt, {1}), InsufficientDataError);
}

TEST(Mtd, StabilityWindow) {
    std::vector<CheckpointResult> cps;
    const int ranks[] = {1, 3, 1, 1, 1, 2, 1, 1, 1, 1};
    for (std::size_t i = 0; i < 10; ++i) cps.push_back({100 * (i + 1), {}, ranks[i]});
    EXPECT_EQ(traces_to_disclosure(cps, 4), 700u);
    EXPECT_EQ(traces_to_disclosure(cps, 3), 300u);
    EXPECT_FALSE(traces_to_disclosure(cps, 5).has_value());
}

TEST(Mtd, KeyRankCountsTiesAgainstKey) {
    std::array<double, 256> s{};
    s[7] = 0.5;
    s[9] = 0.5;
    EXPECT_EQ(key_rank(s, 7), 2);
    s[7] = 0.6;
    EXPECT_EQ(key_rank(s, 7), 1);
}

TEST(Mtd, LogarithmicGrid) {
    EXPECT_EQ(log_checkpoints(100, 1000, 1), (std::vector<std::size_t>{100, 200, 400, 800, 1000}));
    const auto g = log_checkpoints(100, 200000, 16);
    EXPECT_EQ(g.front(), 100u);
    EXPECT_EQ(g.back(), 200000u);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
    EXPECT_NEAR(static_cast<double>(g.size()), 16 * std::log2(2000.0) + 1, 2.0);
}

}  // namespace
}  // namespace sclab
