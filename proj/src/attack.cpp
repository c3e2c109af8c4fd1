#include "sclab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sclab {

const std::array<std::uint8_t, 256> kAesSbox = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16};

CpaAccumulator::CpaAccumulator(std::size_t samples, Hypothesis h)
    : s_(samples), h_(h), sum_by_p_(256 * samples, 0.0), sum_sq_(samples, 0.0) {
    if (samples == 0) throw DataError("CPA needs at least one sample per trace");
}

void CpaAccumulator::add(const float* trace, std::uint8_t plaintext) {
    if (shift_.empty()) shift_.assign(trace, trace + s_);
    double* row = &sum_by_p_[plaintext * s_];
    for (std::size_t j = 0; j < s_; ++j) {
        const double y = static_cast<double>(trace[j]) - shift_[j];
        row[j] += y;
        sum_sq_[j] += y * y;
    }
    ++count_[plaintext];
    ++n_;
}

void CpaAccumulator::add_block(const float* data, const std::uint8_t* plaintexts, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) add(data + i * s_, plaintexts[i]);
}

void CpaAccumulator::merge(const CpaAccumulator& o) {
    if (o.s_ != s_) throw DataError("cannot merge CPA accumulators of different widths");
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    // Re-base o onto this shift: y' = y + (o.shift - shift).
    for (std::size_t j = 0; j < s_; ++j) {
        const double d = o.shift_[j] - shift_[j];
        double o_sum = 0.0;
        for (std::size_t p = 0; p < 256; ++p) {
            const double c = static_cast<double>(o.count_[p]);
            o_sum += o.sum_by_p_[p * s_ + j];
            sum_by_p_[p * s_ + j] += o.sum_by_p_[p * s_ + j] + c * d;
        }
        sum_sq_[j] += o.sum_sq_[j] + 2.0 * d * o_sum + static_cast<double>(o.n_) * d * d;
    }
    for (std::size_t p = 0; p < 256; ++p) count_[p] += o.count_[p];
    n_ += o.n_;
}

std::vector<double> CpaAccumulator::correlations(std::size_t* degenerate) const {
    std::vector<double> corr(256 * s_, 0.0);
    if (degenerate) *degenerate = 0;
    if (n_ < 2) return corr;
    const double n = static_cast<double>(n_);
    std::vector<double> sy(s_, 0.0), vy(s_, 0.0);
    for (std::size_t p = 0; p < 256; ++p)
        for (std::size_t j = 0; j < s_; ++j) sy[j] += sum_by_p_[p * s_ + j];
    for (std::size_t j = 0; j < s_; ++j) {
        vy[j] = n * sum_sq_[j] - sy[j] * sy[j];
        if (vy[j] <= 1e-12 * n * std::max(1.0, sum_sq_[j])) {
            vy[j] = 0.0;
            if (degenerate) ++*degenerate;
        }
    }
    std::vector<double> shy(s_);
    for (std::size_t k = 0; k < 256; ++k) {
        std::fill(shy.begin(), shy.end(), 0.0);
        double sh = 0.0, shh = 0.0;
        for (std::size_t p = 0; p < 256; ++p) {
            const double h = h_(static_cast<std::uint8_t>(p), static_cast<std::uint8_t>(k));
            const double c = static_cast<double>(count_[p]);
            sh += c * h;
            shh += c * h * h;
            if (h == 0.0 || count_[p] == 0) continue;
            const double* row = &sum_by_p_[p * s_];
            for (std::size_t j = 0; j < s_; ++j) shy[j] += h * row[j];
        }
        const double vh = n * shh - sh * sh;
        if (vh <= 0.0) continue;
        for (std::size_t j = 0; j < s_; ++j) {
            if (vy[j] == 0.0) continue;
            corr[k * s_ + j] = std::clamp((n * shy[j] - sh * sy[j]) / std::sqrt(vh * vy[j]), -1.0, 1.0);
        }
    }
    return corr;
}

std::array<double, 256> CpaAccumulator::max_abs() const {
    const auto c = correlations();
    std::array<double, 256> m{};
    for (std::size_t k = 0; k < 256; ++k) {
        double best = 0.0;
        for (std::size_t j = 0; j < s_; ++j) best = std::max(best, std::abs(c[k * s_ + j]));
        m[k] = best;
    }
    return m;
}

int key_rank(const std::array<double, 256>& score, std::uint8_t key) {
    int rank = 1;
    for (std::size_t k = 0; k < 256; ++k)
        if (k != key && score[k] >= score[key]) ++rank;
    return rank;
}

std::vector<std::size_t> log_checkpoints(std::size_t first, std::size_t last, int per_octave) {
    if (first < 2) first = 2;
    std::vector<std::size_t> grid;
    if (last < first) {
        grid.push_back(last);
        return grid;
    }
    for (int i = 0;; ++i) {
        const double v = static_cast<double>(first) * std::pow(2.0, static_cast<double>(i) / per_octave);
        const auto n = static_cast<std::size_t>(std::llround(v));
        if (n >= last) break;
        if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
    grid.push_back(last);
    return grid;
}

std::optional<std::size_t> traces_to_disclosure(const std::vector<CheckpointResult>& cps, int window) {
    const auto w = static_cast<std::size_t>(std::max(1, window));
    std::size_t run = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        run = cps[i].rank == 1 ? run + 1 : 0;
        if (run == w) return cps[i + 1 - w].traces;
    }
    return std::nullopt;
}

std::uint8_t AttackReport::best_candidate() const {
    if (checkpoints.empty()) return 0;
    const auto& m = checkpoints.back().max_corr;
    return static_cast<std::uint8_t>(std::max_element(m.begin(), m.end()) - m.begin());
}

std::string AttackReport::to_csv() const {
    std::ostringstream out;
    out << "candidate,checkpoint,max_abs_corr,rank\n";
    for (const auto& cp : checkpoints) {
        std::array<double, 256> s = cp.max_corr;
        for (std::size_t k = 0; k < 256; ++k)
            out << k << ',' << cp.traces << ',' << s[k] << ',' << key_rank(s, static_cast<std::uint8_t>(k)) << '\n';
    }
    return out.str();
}

std::string AttackReport::rank_curve_csv() const {
    std::ostringstream out;
    out << "checkpoint,rank,correct_max_abs_corr,best_other_max_abs_corr\n";
    for (const auto& cp : checkpoints) {
        out << cp.traces << ',' << cp.rank;
        if (key) {
            double best_other = 0.0;
            for (std::size_t k = 0; k < 256; ++k)
                if (k != *key) best_other = std::max(best_other, cp.max_corr[k]);
            out << ',' << cp.max_corr[*key] << ',' << best_other;
        } else {
            out << ",,";
        }
        out << '\n';
    }
    return out.str();
}

CpaEngine::CpaEngine(std::size_t samples, std::vector<std::size_t> checkpoints, std::optional<std::uint8_t> key,
                     Hypothesis h, int window)
    : acc_(samples, h), grid_(std::move(checkpoints)), key_(key), window_(window) {
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());
}

void CpaEngine::checkpoint() {
    CheckpointResult r;
    r.traces = acc_.count();
    r.max_corr = acc_.max_abs();
    if (key_) r.rank = key_rank(r.max_corr, *key_);
    results_.push_back(r);
}

void CpaEngine::add_block(const float* data, const std::uint8_t* plaintexts, std::size_t n) {
    const std::size_t s = acc_.samples();
    std::size_t i = 0;
    while (i < n) {
        std::size_t take = n - i;
        if (next_ < grid_.size()) take = std::min(take, grid_[next_] - acc_.count());
        acc_.add_block(data + i * s, plaintexts + i, take);
        i += take;
        while (next_ < grid_.size() && acc_.count() == grid_[next_]) {
            checkpoint();
            ++next_;
        }
    }
}

AttackReport CpaEngine::finish(bool keep_final_corr) const {
    AttackReport rep;
    rep.checkpoints = results_;
    rep.samples = acc_.samples();
    rep.stability_window = window_;
    rep.key = key_;
    if (key_) rep.mtd = traces_to_disclosure(results_, window_);
    rep.final_corr = acc_.correlations(&rep.degenerate_samples);
    if (!keep_final_corr) rep.final_corr.clear();
    return rep;
}

AttackReport cpa(const TraceSet& ts, std::optional<std::uint8_t> correct_key, const std::vector<std::size_t>& checkpoints,
                 Hypothesis h) {
    if (ts.size() < 2) throw InsufficientDataError("CPA needs at least 2 traces");
    ts.validate();
    std::vector<std::size_t> grid;
    for (auto c : checkpoints)
        if (c >= 2 && c <= ts.size()) grid.push_back(c);
    if (grid.empty() || grid.back() != ts.size()) grid.push_back(ts.size());
    CpaEngine eng(ts.samples, grid, correct_key, h);
    const auto pts = ts.plaintexts();
    eng.add_block(ts.data.data(), pts.data(), ts.size());
    return eng.finish(true);
}

AttackReport cpa_file(const std::string& path, std::optional<std::uint8_t> correct_key,
                      std::vector<std::size_t> checkpoints, Hypothesis h) {
    TraceReader reader(path);
    if (reader.size() < 2) throw InsufficientDataError("CPA needs at least 2 traces");
    if (reader.plaintexts().size() != reader.size()) throw DataError("trace file has no plaintext sidecar");
    std::vector<std::size_t> grid;
    for (auto c : checkpoints)
        if (c >= 2 && c <= reader.size()) grid.push_back(c);
    if (grid.empty() || grid.back() != reader.size()) grid.push_back(reader.size());
    CpaEngine eng(reader.samples(), grid, correct_key, h);
    std::vector<float> chunk;
    std::size_t pos = 0;
    constexpr std::size_t kChunk = 4096;
    while (const std::size_t n = reader.next(kChunk, chunk)) {
        eng.add_block(chunk.data(), reader.plaintexts().data() + pos, n);
        pos += n;
    }
    return eng.finish(false);
}

}  // namespace sclab
