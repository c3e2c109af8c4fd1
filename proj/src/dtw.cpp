#include "sclab/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sclab/parallel.hpp"

namespace sclab {

namespace {

struct Window {
    std::vector<std::size_t> lo, hi;  // inclusive column range per row
};

DtwResult windowed_dtw(const std::vector<double>& a, const std::vector<double>& b, const Window& w) {
    const std::size_t n = a.size(), m = b.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> offset(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + (w.hi[i] - w.lo[i] + 1);
    std::vector<double> d(offset[n], kInf);
    auto at = [&](std::size_t i, std::size_t j) -> double {
        if (j < w.lo[i] || j > w.hi[i]) return kInf;
        return d[offset[i] + (j - w.lo[i])];
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = w.lo[i]; j <= w.hi[i]; ++j) {
            const double c = std::abs(a[i] - b[j]);
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = kInf;
                if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
                if (i > 0) best = std::min(best, at(i - 1, j));
                if (j > 0 && j - 1 >= w.lo[i]) best = std::min(best, d[offset[i] + (j - 1 - w.lo[i])]);
            }
            d[offset[i] + (j - w.lo[i])] = c + best;
        }
    }
    DtwResult r;
    r.cost = at(n - 1, m - 1);
    std::size_t i = n - 1, j = m - 1;
    r.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        r.path.emplace_back(i, j);
    }
    std::reverse(r.path.begin(), r.path.end());
    return r;
}

std::vector<double> halve(const std::vector<double>& x) {
    std::vector<double> out(x.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (x[2 * i] + x[2 * i + 1]);
    return out;
}

Window project(const WarpPath& low, std::size_t low_n, std::size_t n, std::size_t m, std::size_t radius) {
    std::vector<long long> jmin(low_n, std::numeric_limits<long long>::max()), jmax(low_n, -1);
    for (auto [i, j] : low) {
        jmin[i] = std::min(jmin[i], static_cast<long long>(j));
        jmax[i] = std::max(jmax[i], static_cast<long long>(j));
    }
    const auto r = static_cast<long long>(radius);
    Window w;
    w.lo.resize(n);
    w.hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto li = static_cast<long long>(std::min(i / 2, low_n - 1));
        long long lo = std::numeric_limits<long long>::max(), hi = -1;
        for (long long k = std::max(0LL, li - r); k <= std::min(static_cast<long long>(low_n) - 1, li + r); ++k) {
            lo = std::min(lo, jmin[static_cast<std::size_t>(k)] - r);
            hi = std::max(hi, jmax[static_cast<std::size_t>(k)] + r);
        }
        lo = std::max(0LL, 2 * lo);
        hi = std::min(static_cast<long long>(m) - 1, 2 * hi + 1);
        w.lo[i] = static_cast<std::size_t>(lo);
        w.hi[i] = static_cast<std::size_t>(hi);
    }
    w.lo[0] = 0;
    w.hi[n - 1] = m - 1;
    for (std::size_t i = 1; i < n; ++i) w.hi[i] = std::max(w.hi[i], w.hi[i - 1]);
    for (std::size_t i = n - 1; i > 0; --i) w.lo[i - 1] = std::min(w.lo[i - 1], w.lo[i]);
    return w;
}

}  // namespace

DtwResult dtw_exact(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw DataError("DTW needs non-empty series");
    Window w{std::vector<std::size_t>(a.size(), 0), std::vector<std::size_t>(a.size(), b.size() - 1)};
    return windowed_dtw(a, b, w);
}

DtwResult fastdtw(const std::vector<double>& a, const std::vector<double>& b, std::size_t radius) {
    if (a.empty() || b.empty()) throw DataError("DTW needs non-empty series");
    const std::size_t min_size = radius + 2;
    if (a.size() < min_size || b.size() < min_size) return dtw_exact(a, b);
    const auto a2 = halve(a), b2 = halve(b);
    const DtwResult low = fastdtw(a2, b2, radius);
    return windowed_dtw(a, b, project(low.path, a2.size(), a.size(), b.size(), radius));
}

std::vector<float> align_to(const std::vector<double>& reference, const float* trace, std::size_t length,
                            std::size_t radius) {
    std::vector<double> t(trace, trace + length);
    const DtwResult r = fastdtw(reference, t, radius);
    std::vector<double> sum(reference.size(), 0.0);
    std::vector<std::size_t> cnt(reference.size(), 0);
    for (auto [i, j] : r.path) {
        sum[i] += t[j];
        ++cnt[i];
    }
    std::vector<float> out(reference.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(sum[i] / static_cast<double>(cnt[i]));
    return out;
}

TraceSet align(const TraceSet& traces, std::size_t radius, std::size_t reference, unsigned workers) {
    if (traces.size() == 0) throw DataError("cannot align an empty trace set");
    if (reference >= traces.size()) throw DataError("reference trace index out of range");
    traces.validate();
    const std::size_t s = traces.samples;
    std::vector<double> ref(traces.row(reference), traces.row(reference) + s);
    TraceSet out;
    out.samples = traces.samples;
    out.meta = traces.meta;
    out.global_seed = traces.global_seed;
    out.data.resize(traces.data.size());
    parallel_chunks(traces.size(), workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t) {
            const auto row = align_to(ref, traces.row(t), s, radius);
            std::copy(row.begin(), row.end(), out.data.begin() + static_cast<std::ptrdiff_t>(t * s));
        }
    });
    return out;
}

}  // namespace sclab
