#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sclab {

using Bits = std::vector<std::uint8_t>;  // one bit (0/1) per entry

constexpr double kSignificance = 0.01;

struct TestResult {
    std::string name;
    std::vector<double> p_values;  // one per subtest
    std::size_t n = 0;
    std::size_t block = 0;  // M or m, when the test has one

    [[nodiscard]] bool pass() const;
    [[nodiscard]] double p() const { return p_values.front(); }
};

// Each test throws DataError when the input is shorter than its minimum.
TestResult monobit(const Bits& bits);
/// Normal-CDF form of the monobit statistic: 2 * (1 - Phi(|S_n| / sqrt(n))).
double monobit_p_normal(const Bits& bits);
TestResult block_frequency(const Bits& bits, std::size_t m = 128);
TestResult runs(const Bits& bits);
TestResult longest_run(const Bits& bits);
TestResult cusum(const Bits& bits);  // forward and backward subtests
TestResult serial(const Bits& bits, std::size_t m = 2);  // two p-values
TestResult approx_entropy(const Bits& bits, std::size_t m = 2);

/// All seven tests with the default block sizes.
std::vector<TestResult> battery(const Bits& bits);
std::string battery_csv(const std::vector<TestResult>& results);

struct Autocorrelation {
    std::vector<double> r;  // r[k - 1] for lag k = 1..max_lag
    double band = 0.0;      // 1.96 / sqrt(n)
    bool degenerate = false;  // zero variance; r is all zero

    [[nodiscard]] double fraction_within_band() const;
};
Autocorrelation autocorrelation(const Bits& bits, std::size_t max_lag);

/// Shannon entropy of non-overlapping 5-bit symbols, divided by 5.
double shannon_entropy_5bit(const Bits& bits);

struct MinEntropy {
    double mcv = 0.0;     // -log2 of the most common bit frequency
    double markov = 0.0;  // per bit, most likely 128-bit path of the fitted 2-state chain
};
MinEntropy min_entropy(const Bits& bits);

/// Per-test pass proportion across many streams.
struct ProportionRow {
    std::string name;
    std::size_t passed = 0;
    std::size_t total = 0;
    [[nodiscard]] double proportion() const { return total ? static_cast<double>(passed) / total : 0.0; }
};
std::vector<ProportionRow> proportions(const std::vector<std::vector<TestResult>>& per_stream);
std::string proportions_csv(const std::vector<ProportionRow>& rows);

}  // namespace sclab
