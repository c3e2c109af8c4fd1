#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "sclab/trace.hpp"

namespace sclab {

using WarpPath = std::vector<std::pair<std::size_t, std::size_t>>;

struct DtwResult {
    double cost = 0.0;
    WarpPath path;  // from (0, 0) to (|a|-1, |b|-1)
};

/// Full dynamic program, point cost |a_i - b_j|, steps (1,0), (0,1), (1,1).
DtwResult dtw_exact(const std::vector<double>& a, const std::vector<double>& b);

/// Multiresolution approximation: halve both series, solve recursively, project
/// the path back and refine inside a window grown by `radius` cells.
DtwResult fastdtw(const std::vector<double>& a, const std::vector<double>& b, std::size_t radius);

/// Warps every trace onto traces[reference]: output sample i is the mean of the
/// trace samples the path maps to reference index i.
TraceSet align(const TraceSet& traces, std::size_t radius, std::size_t reference = 0, unsigned workers = 0);

/// Same operation on one trace.
std::vector<float> align_to(const std::vector<double>& reference, const float* trace, std::size_t length,
                            std::size_t radius);

}  // namespace sclab
