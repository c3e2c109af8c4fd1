#include "sclab/dtw.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace sclab {
namespace {

// Minimum over every monotone path by plain recursion.
double brute_force(const std::vector<double>& a, const std::vector<double>& b, std::size_t i, std::size_t j) {
    const double c = std::abs(a[i] - b[j]);
    if (i == 0 && j == 0) return c;
    double best = std::numeric_limits<double>::infinity();
    if (i > 0) best = std::min(best, brute_force(a, b, i - 1, j));
    if (j > 0) best = std::min(best, brute_force(a, b, i, j - 1));
    if (i > 0 && j > 0) best = std::min(best, brute_force(a, b, i - 1, j - 1));
    return c + best;
}

std::vector<double> random_walk(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    std::vector<double> x(n);
    double v = 0;
    for (auto& e : x) e = v += d(rng);
    return x;
}

double path_cost(const std::vector<double>& a, const std::vector<double>& b, const WarpPath& p) {
    double c = 0;
    for (auto [i, j] : p) c += std::abs(a[i] - b[j]);
    return c;
}

void expect_valid_path(const WarpPath& p, std::size_t n, std::size_t m) {
    ASSERT_FALSE(p.empty());
    EXPECT_EQ(p.front(), (std::pair<std::size_t, std::size_t>{0, 0}));
    EXPECT_EQ(p.back(), (std::pair<std::size_t, std::size_t>{n - 1, m - 1}));
    for (std::size_t k = 1; k < p.size(); ++k) {
        const auto di = p[k].first - p[k - 1].first, dj = p[k].second - p[k - 1].second;
        EXPECT_TRUE((di == 1 && dj <= 1) || (di == 0 && dj == 1));
    }
}

TEST(Dtw, IdenticalSeriesFollowDiagonal) {
    const std::vector<double> a{1, 4, 2, 8, 5};
    const auto r = dtw_exact(a, a);
    EXPECT_EQ(r.cost, 0.0);
    ASSERT_EQ(r.path.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(r.path[i], (std::pair<std::size_t, std::size_t>{i, i}));
}

TEST(Dtw, SingleCell) {
    const auto r = dtw_exact({0}, {3});
    EXPECT_EQ(r.cost, 3.0);
    EXPECT_EQ(r.path, (WarpPath{{0, 0}}));
    EXPECT_THROW(dtw_exact({}, {1}), DataError);
}

TEST(Dtw, ExhaustivePathOracle) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> len(1, 6), val(-5, 5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> a(static_cast<std::size_t>(len(rng))), b(static_cast<std::size_t>(len(rng)));
        for (auto& x : a) x = val(rng);
        for (auto& x : b) x = val(rng);
        const auto r = dtw_exact(a, b);
        EXPECT_DOUBLE_EQ(r.cost, brute_force(a, b, a.size() - 1, b.size() - 1));
        expect_valid_path(r.path, a.size(), b.size());
        EXPECT_DOUBLE_EQ(path_cost(a, b, r.path), r.cost);
        EXPECT_DOUBLE_EQ(fastdtw(a, b, 1).cost, r.cost);  // short series fall back to the full window
    }
}

TEST(Dtw, SymmetricAndZeroOnSelf) {
    std::mt19937_64 rng(2);
    const auto a = random_walk(300, rng), b = random_walk(250, rng);
    EXPECT_DOUBLE_EQ(dtw_exact(a, b).cost, dtw_exact(b, a).cost);
    EXPECT_EQ(dtw_exact(a, a).cost, 0.0);
}

TEST(FastDtw, LargeRadiusIsExact) {
    std::mt19937_64 rng(3);
    const auto a = random_walk(200, rng), b = random_walk(180, rng);
    EXPECT_EQ(fastdtw(a, b, 200).cost, dtw_exact(a, b).cost);
}

TEST(FastDtw, CloseToExactAtRadius90) {
    std::mt19937_64 rng(4);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_walk(1000, rng), b = random_walk(1000, rng);
        const auto f = fastdtw(a, b, 90);
        const double e = dtw_exact(a, b).cost;
        expect_valid_path(f.path, a.size(), b.size());
        EXPECT_GE(f.cost, e - 1e-9);
        worst = std::max(worst, (f.cost - e) / e);
    }
    EXPECT_LE(worst, 0.05);
}

TEST(FastDtw, RuntimeRoughlyLinearInLength) {
    std::mt19937_64 rng(5);
    auto time_of = [&](std::size_t n) {
        const auto a = random_walk(n, rng), b = random_walk(n, rng);
        const auto t0 = std::chrono::steady_clock::now();
        for (int k = 0; k < 3; ++k) (void)fastdtw(a, b, 10);
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    time_of(4000);  // warm-up
    const double t1 = time_of(4000), t2 = time_of(8000);
    EXPECT_LT(t2 / t1, 3.2);  // quadratic growth would give 4
}

TEST(Align, SelfAlignmentIsIdentity) {
    std::mt19937_64 rng(6);
    const auto a = random_walk(400, rng);
    std::vector<float> f(a.begin(), a.end());
    const auto out = align_to(a, f.data(), f.size(), 20);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_FLOAT_EQ(out[i], f[i]);
}

TEST(Align, ShiftedTracesImprove) {
    std::mt19937_64 rng(7);
    const std::size_t n = 300;
    std::vector<double> base(n + 40);
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = std::sin(0.11 * i) * 5 + std::sin(0.037 * i) * 3;
    TraceSet ts;
    ts.samples = n;
    for (int shift : {0, 3, 9, 17, 25}) {
        for (std::size_t i = 0; i < n; ++i) ts.data.push_back(static_cast<float>(base[i + static_cast<std::size_t>(shift)]));
        ts.meta.emplace_back();
    }
    auto rms = [&](const TraceSet& t) {
        double s = 0;
        for (std::size_t r = 1; r < t.size(); ++r)
            for (std::size_t i = 0; i < n; ++i) s += std::pow(t.row(r)[i] - t.row(0)[i], 2);
        return std::sqrt(s / static_cast<double>((t.size() - 1) * n));
    };
    const TraceSet al = align(ts, 30, 0, 2);
    EXPECT_LT(rms(al), 0.5 * rms(ts));
    EXPECT_EQ(al.data, align(ts, 30, 0, 1).data);
    EXPECT_THROW(align(ts, 30, 99), DataError);
}

}  // namespace
}  // namespace sclab
