#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sclab/trace.hpp"

namespace sclab {

extern const std::array<std::uint8_t, 256> kAesSbox;

inline int hw(std::uint32_t v) { return __builtin_popcount(v); }
inline int hd(std::uint32_t a, std::uint32_t b) { return hw(a ^ b); }

enum class LeakageModel { hamming_weight, hamming_distance };

/// Hypothesis for key candidate k and plaintext byte p: HW(S(p ^ k)), or
/// HD(S(p ^ k), reference) for the distance model.
struct Hypothesis {
    LeakageModel model = LeakageModel::hamming_weight;
    std::uint8_t reference = 0;
    [[nodiscard]] int operator()(std::uint8_t p, std::uint8_t k) const {
        const std::uint8_t v = kAesSbox[static_cast<std::uint8_t>(p ^ k)];
        return model == LeakageModel::hamming_weight ? hw(v) : hd(v, reference);
    }
};

/// Streaming CPA state: per plaintext byte, trace count and per-sample sums,
/// plus per-sample sums of squares. Correlations for every candidate follow
/// exactly from these; merging is plain addition.
class CpaAccumulator {
public:
    explicit CpaAccumulator(std::size_t samples, Hypothesis h = {});

    void add(const float* trace, std::uint8_t plaintext);
    void add_block(const float* data, const std::uint8_t* plaintexts, std::size_t n);
    void merge(const CpaAccumulator& o);

    [[nodiscard]] std::size_t count() const { return n_; }
    [[nodiscard]] std::size_t samples() const { return s_; }

    /// 256 x S Pearson correlations (row-major). Zero-variance sample columns
    /// yield 0 and are counted in `degenerate`.
    [[nodiscard]] std::vector<double> correlations(std::size_t* degenerate = nullptr) const;
    /// max_j |corr(k, j)| per candidate.
    [[nodiscard]] std::array<double, 256> max_abs() const;

private:
    std::size_t s_;
    Hypothesis h_;
    std::size_t n_ = 0;
    std::vector<double> shift_;                    // first trace, subtracted for stability
    std::array<std::uint64_t, 256> count_{};
    std::vector<double> sum_by_p_;                 // 256 x S
    std::vector<double> sum_sq_;                   // S
};

/// Rank of `key` among candidates by score (1 = best; ties count against it).
int key_rank(const std::array<double, 256>& score, std::uint8_t key);

/// Logarithmic grid: first * 2^(i / per_octave), deduplicated, capped at last
/// (last always included).
std::vector<std::size_t> log_checkpoints(std::size_t first, std::size_t last, int per_octave = 16);

struct CheckpointResult {
    std::size_t traces = 0;
    std::array<double, 256> max_corr{};
    int rank = 0;  // 0 when no correct key is given
};

struct AttackReport {
    std::vector<CheckpointResult> checkpoints;
    std::optional<std::uint8_t> key;  // correct key when known
    std::optional<std::size_t> mtd;   // traces to disclosure
    std::vector<double> final_corr;  // 256 x S at the last checkpoint
    std::size_t samples = 0;
    std::size_t degenerate_samples = 0;
    int stability_window = 10;

    [[nodiscard]] std::uint8_t best_candidate() const;
    [[nodiscard]] std::string to_csv() const;         // candidate, checkpoint, max|corr|, rank
    [[nodiscard]] std::string rank_curve_csv() const;  // checkpoint, rank, correct max|corr|, best other
};

/// MTD: first checkpoint from which the correct key holds rank 1 for
/// `window` consecutive checkpoints (the window must fit in the data).
std::optional<std::size_t> traces_to_disclosure(const std::vector<CheckpointResult>& cps, int window = 10);

/// Incremental CPA driver. Feed traces in order; results are taken at the
/// checkpoint grid.
class CpaEngine {
public:
    CpaEngine(std::size_t samples, std::vector<std::size_t> checkpoints, std::optional<std::uint8_t> key,
              Hypothesis h = {}, int window = 10);

    void add_block(const float* data, const std::uint8_t* plaintexts, std::size_t n);
    [[nodiscard]] AttackReport finish(bool keep_final_corr = false) const;
    [[nodiscard]] const CpaAccumulator& accumulator() const { return acc_; }

private:
    void checkpoint();

    CpaAccumulator acc_;
    std::vector<std::size_t> grid_;
    std::size_t next_ = 0;
    std::optional<std::uint8_t> key_;
    int window_;
    std::vector<CheckpointResult> results_;
};

AttackReport cpa(const TraceSet& ts, std::optional<std::uint8_t> correct_key, const std::vector<std::size_t>& checkpoints,
                 Hypothesis h = {});

/// Streams a trace file through CPA in chunks.
AttackReport cpa_file(const std::string& path, std::optional<std::uint8_t> correct_key,
                      std::vector<std::size_t> checkpoints, Hypothesis h = {});

}  // namespace sclab
