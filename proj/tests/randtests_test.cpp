#include "sclab/randtests.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "oracles.hpp"
#include "sclab/error.hpp"

namespace sclab {
namespace {

Bits from_string(const std::string& s) {
    Bits b;
    for (char c : s) b.push_back(c == '1' ? 1 : 0);
    return b;
}

// Worked examples published with the NIST SP 800-22 test descriptions.
const Bits& nist100() {
    static const Bits b = from_string(
        "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000");
    return b;
}

const Bits& nist128() {
    static const Bits b = from_string(
        "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100"
        "111001101101100010110010");
    return b;
}

double entropy(double q) { return -q * std::log2(q) - (1 - q) * std::log2(1 - q); }

Bits markov_chain(std::size_t n, double stay, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(stay);
    Bits b(n);
    b[0] = 0;
    for (std::size_t i = 1; i < n; ++i) b[i] = keep(rng) ? b[i - 1] : 1 - b[i - 1];
    return b;
}

TEST(RandTests, PublishedExamples) {
    EXPECT_NEAR(monobit(nist100()).p(), 0.109599, 1e-6);
    EXPECT_NEAR(runs(nist100()).p(), 0.500798, 1e-6);
    const auto c = cusum(nist100());
    ASSERT_EQ(c.p_values.size(), 2u);
    EXPECT_NEAR(c.p_values[0], 0.219194, 1e-6);
    EXPECT_NEAR(c.p_values[1], 0.114866, 1e-6);
    EXPECT_NEAR(approx_entropy(nist100(), 2).p(), 0.235301, 1e-6);
    EXPECT_NEAR(longest_run(nist128()).p(), 0.180609, 1e-6);
}

TEST(RandTests, MonobitExtremes) {
    const Bits zeros(1000000, 0);
    EXPECT_LT(monobit(zeros).p(), 1e-12);
    EXPECT_FALSE(monobit(zeros).pass());
    Bits alt(1000);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i & 1;
    EXPECT_EQ(monobit(alt).p(), 1.0);
}

TEST(RandTests, MonobitFormsAgree) {
    for (std::uint64_t seed = 1; seed < 20; ++seed) {
        const Bits b = oracle::bernoulli(10000 + seed * 37, 0.505, seed);
        EXPECT_NEAR(monobit(b).p(), monobit_p_normal(b), 1e-9);
    }
}

TEST(RandTests, PValuesInRangeAndDeterministic) {
    const Bits b = oracle::bernoulli(100000, 0.5, 9);
    const auto r1 = battery(b), r2 = battery(b);
    ASSERT_EQ(r1.size(), 7u);
    for (std::size_t i = 0; i < r1.size(); ++i) {
        EXPECT_EQ(r1[i].p_values, r2[i].p_values);
        for (double p : r1[i].p_values) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
    }
    EXPECT_EQ(serial(b).p_values.size(), 2u);
    EXPECT_NE(battery_csv(r1).find("approx_entropy"), std::string::npos);
}

TEST(RandTests, BiasedStreamFails) {
    const Bits b = oracle::bernoulli(100000, 0.53, 10);
    EXPECT_FALSE(monobit(b).pass());
    EXPECT_FALSE(block_frequency(b).pass());
    const Bits sticky = markov_chain(100000, 0.6, 11);
    EXPECT_FALSE(runs(sticky).pass());
    EXPECT_FALSE(serial(sticky).pass());
}

TEST(RandTests, LengthAndParameterErrors) {
    const Bits short_bits(99, 1);
    EXPECT_THROW(monobit(short_bits), InsufficientDataError);
    EXPECT_THROW(longest_run(Bits(127, 0)), InsufficientDataError);
    EXPECT_THROW(block_frequency(Bits(1000, 0), 10), ConfigError);
    EXPECT_THROW(serial(Bits(1000, 0), 1), ConfigError);
    EXPECT_THROW(autocorrelation(Bits(999, 0), 10), InsufficientDataError);
    EXPECT_THROW(shannon_entropy_5bit(Bits(4999, 0)), InsufficientDataError);
    EXPECT_THROW(min_entropy(Bits(99999, 0)), InsufficientDataError);
}

TEST(Autocorr, ConstantStreamIsDegenerate) {
    const auto a = autocorrelation(Bits(10000, 1), 10);
    EXPECT_TRUE(a.degenerate);
    for (double r : a.r) EXPECT_EQ(r, 0.0);
}

TEST(Autocorr, PeriodTwoIsAntiCorrelated) {
    Bits b(10000);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = i & 1;
    const auto a = autocorrelation(b, 4);
    EXPECT_DOUBLE_EQ(a.r[0], -1.0);
    EXPECT_DOUBLE_EQ(a.r[1], 1.0);
    EXPECT_DOUBLE_EQ(a.band, 1.96 / 100.0);
    EXPECT_EQ(a.fraction_within_band(), 0.0);
}

TEST(Autocorr, IndependentBitsStayMostlyInBand) {
    const auto a = autocorrelation(oracle::bernoulli(200000, 0.5, 12), 200);
    EXPECT_GT(a.fraction_within_band(), 0.9);
}

TEST(Entropy, ShannonLimits) {
    EXPECT_EQ(shannon_entropy_5bit(Bits(10000, 0)), 0.0);
    Bits uniform;
    for (int rep = 0; rep < 200; ++rep)
        for (int s = 0; s < 32; ++s)
            for (int k = 4; k >= 0; --k) uniform.push_back((s >> k) & 1);
    EXPECT_NEAR(shannon_entropy_5bit(uniform), 1.0, 1e-12);
}

TEST(Entropy, BernoulliStreamsMatchClosedForm) {
    for (double q : {0.5, 0.3, 0.1}) {
        const Bits b = oracle::bernoulli(1000000, q, static_cast<std::uint64_t>(q * 1000));
        EXPECT_NEAR(shannon_entropy_5bit(b), entropy(q), 1e-2) << q;
        const double hmin = -std::log2(std::max(q, 1 - q));
        const auto m = min_entropy(b);
        EXPECT_NEAR(m.mcv, hmin, 1e-2) << q;
        EXPECT_NEAR(m.markov, hmin, 1e-2) << q;
    }
}

TEST(Entropy, StickyMarkovChain) {
    const auto m = min_entropy(markov_chain(1000000, 0.9, 13));
    EXPECT_NEAR(m.markov, -std::log2(0.9), 0.01);
    EXPECT_GT(m.mcv, 0.95);  // balanced marginals hide the dependence
}

TEST(Proportions, CountsPassesPerTest) {
    std::vector<std::vector<TestResult>> per_stream;
    for (std::uint64_t s = 0; s < 5; ++s) per_stream.push_back(battery(oracle::bernoulli(20000, 0.5, 100 + s)));
    per_stream.push_back(battery(Bits(20000, 0)));
    const auto rows = proportions(per_stream);
    ASSERT_EQ(rows.size(), 7u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.total, 6u);
        EXPECT_LE(r.passed, 5u);
    }
    EXPECT_NE(proportions_csv(rows).find("monobit"), std::string::npos);
}

}  // namespace
}  // namespace sclab
