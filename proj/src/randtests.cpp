#include "sclab/randtests.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sclab/error.hpp"

namespace sclab {

namespace {

void require_length(const Bits& bits, std::size_t min, const char* test) {
    if (bits.size() < min) {
        throw InsufficientDataError(std::string(test) + ": need at least " + std::to_string(min) + " bits, got " +
                        std::to_string(bits.size()));
    }
}

double igamc(double a, double x) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(a, x);
}

double phi(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// psi^2_m over overlapping m-bit patterns with wrap-around; psi^2_0 = 0.
double psi_sq(const Bits& bits, std::size_t m) {
    if (m == 0) return 0.0;
    const std::size_t n = bits.size();
    std::vector<std::uint64_t> v(std::size_t{1} << m, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t pat = 0;
        for (std::size_t k = 0; k < m; ++k) pat = (pat << 1) | bits[(i + k) % n];
        ++v[pat];
    }
    double s = 0.0;
    for (auto c : v) s += static_cast<double>(c) * static_cast<double>(c);
    return s * static_cast<double>(v.size()) / static_cast<double>(n) - static_cast<double>(n);
}

double apen_phi(const Bits& bits, std::size_t m) {
    if (m == 0) return 0.0;
    const std::size_t n = bits.size();
    std::vector<std::uint64_t> v(std::size_t{1} << m, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t pat = 0;
        for (std::size_t k = 0; k < m; ++k) pat = (pat << 1) | bits[(i + k) % n];
        ++v[pat];
    }
    double s = 0.0;
    for (auto c : v) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        s += p * std::log(p);
    }
    return s;
}

}  // namespace

bool TestResult::pass() const {
    return std::all_of(p_values.begin(), p_values.end(), [](double p) { return p >= kSignificance; });
}

TestResult monobit(const Bits& bits) {
    require_length(bits, 100, "monobit");
    long long s = 0;
    for (auto b : bits) s += b ? 1 : -1;
    const double n = static_cast<double>(bits.size());
    const double s_obs = std::abs(static_cast<double>(s)) / std::sqrt(n);
    return {"monobit", {clamp01(std::erfc(s_obs / std::sqrt(2.0)))}, bits.size(), 0};
}

double monobit_p_normal(const Bits& bits) {
    require_length(bits, 100, "monobit");
    long long s = 0;
    for (auto b : bits) s += b ? 1 : -1;
    const double z = std::abs(static_cast<double>(s)) / std::sqrt(static_cast<double>(bits.size()));
    return clamp01(2.0 * (1.0 - phi(z)));
}

TestResult block_frequency(const Bits& bits, std::size_t m) {
    require_length(bits, 100, "block_frequency");
    if (m < 20) throw ConfigError("block_frequency: block size must be at least 20");
    const std::size_t blocks = bits.size() / m;
    if (blocks == 0) throw DataError("block_frequency: fewer bits than one block");
    double chi = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t ones = 0;
        for (std::size_t i = 0; i < m; ++i) ones += bits[b * m + i];
        const double pi = static_cast<double>(ones) / static_cast<double>(m) - 0.5;
        chi += pi * pi;
    }
    chi *= 4.0 * static_cast<double>(m);
    return {"block_frequency", {clamp01(igamc(static_cast<double>(blocks) / 2.0, chi / 2.0))}, bits.size(), m};
}

TestResult runs(const Bits& bits) {
    require_length(bits, 100, "runs");
    const double n = static_cast<double>(bits.size());
    std::size_t ones = 0;
    for (auto b : bits) ones += b;
    const double pi = static_cast<double>(ones) / n;
    TestResult r{"runs", {0.0}, bits.size(), 0};
    // Frequency prerequisite: the runs statistic is meaningless for a biased stream.
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return r;
    std::size_t v = 1;
    for (std::size_t i = 1; i < bits.size(); ++i) v += bits[i] != bits[i - 1];
    const double num = std::abs(static_cast<double>(v) - 2.0 * n * pi * (1.0 - pi));
    const double den = 2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi);
    r.p_values[0] = clamp01(std::erfc(num / den));
    return r;
}

TestResult longest_run(const Bits& bits) {
    require_length(bits, 128, "longest_run");
    const std::size_t n = bits.size();
    std::size_t m;
    int lo;
    std::vector<double> pi;
    if (n < 6272) {
        m = 8;
        lo = 1;
        pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};  // exact multiples of 1/256
    } else if (n < 750000) {
        m = 128;
        lo = 4;
        pi = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
    } else {
        m = 10000;
        lo = 10;
        pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
    }
    const int k = static_cast<int>(pi.size()) - 1;
    const std::size_t blocks = n / m;
    std::vector<double> v(pi.size(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        int run = 0, best = 0;
        for (std::size_t i = 0; i < m; ++i) {
            run = bits[b * m + i] ? run + 1 : 0;
            best = std::max(best, run);
        }
        const int cls = std::clamp(best - lo, 0, k);
        v[static_cast<std::size_t>(cls)] += 1.0;
    }
    double chi = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        const double e = static_cast<double>(blocks) * pi[i];
        chi += (v[i] - e) * (v[i] - e) / e;
    }
    return {"longest_run", {clamp01(igamc(k / 2.0, chi / 2.0))}, n, m};
}

TestResult cusum(const Bits& bits) {
    require_length(bits, 100, "cusum");
    const std::size_t n = bits.size();
    const double nd = static_cast<double>(n);
    auto p_for = [&](long long z) {
        const double zd = static_cast<double>(z);
        if (z == 0) return 1.0;
        const double sq = std::sqrt(nd);
        double s1 = 0.0, s2 = 0.0;
        for (auto k = static_cast<long long>((-nd / zd + 1.0) / 4.0); k <= static_cast<long long>((nd / zd - 1.0) / 4.0); ++k) {
            const double kd = static_cast<double>(k);
            s1 += phi((4 * kd + 1) * zd / sq) - phi((4 * kd - 1) * zd / sq);
        }
        for (auto k = static_cast<long long>((-nd / zd - 3.0) / 4.0); k <= static_cast<long long>((nd / zd - 1.0) / 4.0); ++k) {
            const double kd = static_cast<double>(k);
            s2 += phi((4 * kd + 3) * zd / sq) - phi((4 * kd + 1) * zd / sq);
        }
        return clamp01(1.0 - s1 + s2);
    };
    long long s = 0, zf = 0;
    for (auto b : bits) {
        s += b ? 1 : -1;
        zf = std::max(zf, std::llabs(s));
    }
    s = 0;
    long long zb = 0;
    for (std::size_t i = n; i-- > 0;) {
        s += bits[i] ? 1 : -1;
        zb = std::max(zb, std::llabs(s));
    }
    return {"cusum", {p_for(zf), p_for(zb)}, n, 0};
}

TestResult serial(const Bits& bits, std::size_t m) {
    require_length(bits, 100, "serial");
    if (m < 2 || m > 16) throw ConfigError("serial: m must be in [2, 16]");
    const double p0 = psi_sq(bits, m), p1 = psi_sq(bits, m - 1), p2 = psi_sq(bits, m - 2);
    const double d1 = p0 - p1, d2 = p0 - 2.0 * p1 + p2;
    return {"serial",
            {clamp01(igamc(std::ldexp(1.0, static_cast<int>(m) - 2), d1 / 2.0)),
             clamp01(igamc(std::ldexp(1.0, static_cast<int>(m) - 3), d2 / 2.0))},
            bits.size(),
            m};
}

TestResult approx_entropy(const Bits& bits, std::size_t m) {
    require_length(bits, 100, "approx_entropy");
    if (m < 1 || m > 16) throw ConfigError("approx_entropy: m must be in [1, 16]");
    const double apen = apen_phi(bits, m) - apen_phi(bits, m + 1);
    const double chi = 2.0 * static_cast<double>(bits.size()) * (std::log(2.0) - apen);
    return {"approx_entropy", {clamp01(igamc(std::ldexp(1.0, static_cast<int>(m) - 1), chi / 2.0))}, bits.size(), m};
}

std::vector<TestResult> battery(const Bits& bits) {
    return {monobit(bits), block_frequency(bits), runs(bits),         longest_run(bits),
            cusum(bits),   serial(bits),          approx_entropy(bits)};
}

std::string battery_csv(const std::vector<TestResult>& results) {
    std::ostringstream os;
    os.precision(10);
    os << "test,subtest,n,block,p_value,pass\n";
    for (const auto& r : results) {
        for (std::size_t i = 0; i < r.p_values.size(); ++i) {
            os << r.name << ',' << i << ',' << r.n << ',' << r.block << ',' << r.p_values[i] << ','
               << (r.p_values[i] >= kSignificance ? 1 : 0) << '\n';
        }
    }
    return os.str();
}

double Autocorrelation::fraction_within_band() const {
    if (r.empty()) return 0.0;
    const auto inside = std::count_if(r.begin(), r.end(), [&](double v) { return std::abs(v) <= band; });
    return static_cast<double>(inside) / static_cast<double>(r.size());
}

Autocorrelation autocorrelation(const Bits& bits, std::size_t max_lag) {
    if (max_lag == 0) throw ConfigError("autocorrelation: max_lag must be positive");
    require_length(bits, 100 * max_lag, "autocorrelation");
    const std::size_t n = bits.size();
    double mean = 0.0;
    for (auto b : bits) mean += b;
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = bits[i] - mean;
        var += x[i] * x[i];
    }
    var /= static_cast<double>(n);
    Autocorrelation a;
    a.band = 1.96 / std::sqrt(static_cast<double>(n));
    a.r.assign(max_lag, 0.0);
    if (var == 0.0) {
        a.degenerate = true;
        return a;
    }
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) s += x[i] * x[i + k];
        a.r[k - 1] = s / static_cast<double>(n - k) / var;
    }
    return a;
}

double shannon_entropy_5bit(const Bits& bits) {
    require_length(bits, 5000, "shannon_entropy_5bit");
    const std::size_t symbols = bits.size() / 5;
    std::array<std::uint64_t, 32> hist{};
    for (std::size_t s = 0; s < symbols; ++s) {
        unsigned v = 0;
        for (std::size_t k = 0; k < 5; ++k) v = (v << 1) | bits[5 * s + k];
        ++hist[v];
    }
    double h = 0.0;
    for (auto c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(symbols);
        h -= p * std::log2(p);
    }
    return h / 5.0;
}

MinEntropy min_entropy(const Bits& bits) {
    require_length(bits, 100000, "min_entropy");
    const std::size_t n = bits.size();
    std::size_t ones = 0;
    for (auto b : bits) ones += b;
    const double p1 = static_cast<double>(ones) / static_cast<double>(n);
    MinEntropy e;
    e.mcv = -std::log2(std::max(p1, 1.0 - p1));

    std::array<std::array<double, 2>, 2> trans{};
    for (std::size_t i = 0; i + 1 < n; ++i) trans[bits[i]][bits[i + 1]] += 1.0;
    std::array<std::array<double, 2>, 2> lt{};
    for (int a = 0; a < 2; ++a) {
        const double row = trans[a][0] + trans[a][1];
        for (int b = 0; b < 2; ++b) {
            const double p = row > 0 ? trans[a][b] / row : 0.0;
            lt[a][b] = p > 0 ? std::log2(p) : -HUGE_VAL;
        }
    }
    // Most likely 128-bit path, log domain.
    std::array<double, 2> best{p1 < 1.0 ? std::log2(1.0 - p1) : -HUGE_VAL, p1 > 0.0 ? std::log2(p1) : -HUGE_VAL};
    for (int step = 1; step < 128; ++step) {
        std::array<double, 2> next{};
        for (int b = 0; b < 2; ++b) next[b] = std::max(best[0] + lt[0][b], best[1] + lt[1][b]);
        best = next;
    }
    e.markov = std::min(1.0, -std::max(best[0], best[1]) / 128.0);
    return e;
}

std::vector<ProportionRow> proportions(const std::vector<std::vector<TestResult>>& per_stream) {
    std::vector<ProportionRow> rows;
    std::map<std::string, std::size_t> index;
    for (const auto& stream : per_stream) {
        for (const auto& r : stream) {
            auto [it, fresh] = index.try_emplace(r.name, rows.size());
            if (fresh) rows.push_back({r.name, 0, 0});
            auto& row = rows[it->second];
            ++row.total;
            row.passed += r.pass();
        }
    }
    return rows;
}

std::string proportions_csv(const std::vector<ProportionRow>& rows) {
    std::ostringstream os;
    os << "test,passed,total,proportion\n";
    for (const auto& r : rows) os << r.name << ',' << r.passed << ',' << r.total << ',' << r.proportion() << '\n';
    return os.str();
}

}  // namespace sclab
